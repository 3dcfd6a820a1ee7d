#include <gtest/gtest.h>

#include <random>

#include "fluidpert/bench.hpp"
#include "fluidpert/errors.hpp"
#include "fluidpert/riccati.hpp"
#include "oracles.hpp"

using namespace fluidpert;

namespace {

FluidModel two_phase(double a, double b, double cp, double cm) {
  Matrix g(2, 2);
  g << -a, a, b, -b;
  Vector c(2);
  c << cp, cm;
  return validate_model(g, c);
}

FluidModel case_model(const std::string& id) {
  const BenchCase bc = make_case(id);
  return validate_model(bc.A, bc.c);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IO;
}

}  // namespace

TEST(SolvePsi, TwoPhaseRecurrent) {
  for (double cm : {-1.5, -2.0, -5.0}) {
    const PsiSolution s = solve_psi(two_phase(1.0, 1.0, 1.0, cm));
    EXPECT_NEAR(s.psi(0, 0), oracle::two_phase_psi(1.0, 1.0, 1.0, cm), 1e-12);
    EXPECT_NEAR(s.psi(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(s.U(0, 0), 0.0, 1e-12);
  }
}

TEST(SolvePsi, TwoPhaseTransientGivesMinimalRoot) {
  const PsiSolution s = solve_psi(two_phase(1.0, 2.0, 3.0, -1.0));
  EXPECT_NEAR(s.psi(0, 0), oracle::two_phase_psi(1.0, 2.0, 3.0, -1.0), 1e-12);
  EXPECT_LT(s.psi(0, 0), 1.0);
}

TEST(SolvePsi, CaseOneAStructure) {
  const PsiSolution s = solve_psi(case_model("1a"));
  ASSERT_EQ(s.psi.rows(), 5);
  ASSERT_EQ(s.psi.cols(), 5);
  EXPECT_LE((s.psi.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
  EXPECT_LE(s.U.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(stable_spectrum(s.K));
  EXPECT_LT(oracle::spectral_abscissa(s.K), 0.0);
}

TEST(SolvePsi, EmptySide) {
  Matrix g(2, 2);
  g << -1, 1, 1, -1;
  Vector c(2);
  c << 1, 0;
  EXPECT_EQ(code_of([&] { solve_psi(validate_model(g, c)); }), ErrorCode::EmptySide);
  c << 0, -1;
  EXPECT_EQ(code_of([&] { solve_psi(validate_model(g, c)); }), ErrorCode::EmptySide);
}

TEST(SolvePsi, NoConvergenceOnTinyBudget) {
  NewtonOptions opt;
  opt.max_newton = 1;
  EXPECT_EQ(code_of([&] { solve_psi(case_model("1a"), opt); }), ErrorCode::NoConvergence);
}

TEST(SolvePsi, MatchesInvariantSubspaceOracle) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const FluidModel m = oracle::random_model(rng, oracle::random_shape(rng));
    const PsiSolution s = solve_psi(m);
    const Matrix ref = oracle::psi_invariant_subspace(m.generator(), m.rates());
    EXPECT_LE((s.psi - ref).cwiseAbs().maxCoeff(), 1e-9) << "trial " << trial;
  }
}

TEST(SolvePsi, FuzzStructuralInvariants) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const FluidModel m = oracle::random_model(rng, oracle::random_shape(rng));
    const PsiSolution s = solve_psi(m);
    EXPECT_GE(s.psi.minCoeff(), 0.0);
    EXPECT_LE(s.psi.maxCoeff(), 1.0 + 1e-12);
    EXPECT_LE((s.psi.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
    EXPECT_LE(s.U.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_TRUE(stable_spectrum(s.K));
    EXPECT_LE(riccati_residual(fluid_coefficients(m), s.psi).cwiseAbs().rowwise().sum().maxCoeff(),
              1e-12 * std::max(1.0, fluid_coefficients(m).scale()));
  }
}

TEST(SolvePsi, ResidualHistoryAndIterateBounds) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    const FluidModel m = oracle::random_model(rng, oracle::random_shape(rng));
    double lo = 0.0;
    double hi = 0.0;
    NewtonOptions opt;
    opt.on_iterate = [&](const Matrix& x) {
      lo = std::min(lo, x.minCoeff());
      hi = std::max(hi, x.maxCoeff());
    };
    const RiccatiResult r = solve_riccati(fluid_coefficients(m), opt);
    ASSERT_LT(r.converged_at, r.residual_history.size());
    for (std::size_t k = 1; k <= r.converged_at; ++k) {
      EXPECT_LE(r.residual_history[k], r.residual_history[k - 1]);
    }
    for (std::size_t k = r.converged_at; k < r.residual_history.size(); ++k) {
      EXPECT_LE(r.residual_history[k], r.target);
    }
    EXPECT_GE(lo, -1e-12);
    EXPECT_LE(hi, 1.0 + 1e-12);
  }
}

TEST(SolvePsi, IndependentOfBudgetOnceConverged) {
  const FluidModel m = case_model("3a");
  const PsiSolution a = solve_psi(m);
  NewtonOptions opt;
  opt.max_newton = 500;
  const PsiSolution b = solve_psi(m, opt);
  EXPECT_EQ(a.psi, b.psi);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(BuildUK, TwoPhaseScalars) {
  const FluidModel m = two_phase(1.0, 1.0, 1.0, -2.0);
  Matrix psi(1, 1);
  psi << 1.0;
  const UKPair uk = build_UK(m, psi);
  EXPECT_NEAR(uk.U(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(uk.K(0, 0), -0.5, 1e-15);
}

TEST(SolvePsiAt, ZeroEpsilonIsBaseSolve) {
  const FluidModel m = case_model("1a");
  Vector d = Vector::Zero(15);
  d.head(5).setConstant(0.1);
  const PerturbationSpec spec = make_rate_perturbation(m, d);
  ASSERT_EQ(spec.regime, Regime::Unaffected);
  EXPECT_EQ(solve_psi_at(m, spec, 0.0).psi, solve_psi(m).psi);
}

TEST(SolvePsiAt, CaseOneAMigratesRows) {
  const BenchCase bc = make_case("1a");
  const FluidModel m = validate_model(bc.A, bc.c);
  const PsiSolution s = solve_psi_at(m, make_rate_perturbation(m, bc.c_tilde), 1e-2);
  ASSERT_EQ(s.psi.rows(), 10);
  ASSERT_EQ(s.psi.cols(), 5);
  EXPECT_LE((s.psi.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
  // plus rows first, then the migrated phases
  EXPECT_EQ(s.rows, (IndexList{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
}

TEST(SolvePsiAt, ZeroGeneratorDirection) {
  const FluidModel m = case_model("2a");
  const PerturbationSpec spec = make_generator_perturbation(m, Matrix::Zero(15, 15));
  const Matrix base = solve_psi(m).psi;
  for (double eps : {1e-3, 0.1, 1.0}) EXPECT_EQ(solve_psi_at(m, spec, eps).psi, base);
}

TEST(SolvePsiAt, InvalidEpsilon) {
  const FluidModel m = case_model("1a");
  Vector d = Vector::Zero(15);
  d.head(5).setConstant(-1.0);
  const PerturbationSpec spec = make_rate_perturbation(m, d);
  EXPECT_EQ(code_of([&] { solve_psi_at(m, spec, 1.0); }), ErrorCode::InvalidEpsilon);
  Matrix g = Matrix::Zero(15, 15);
  g(0, 1) = -5.0;
  g(0, 0) = 5.0;
  const PerturbationSpec gs = make_generator_perturbation(m, g);
  EXPECT_EQ(code_of([&] { solve_psi_at(m, gs, 1.0); }), ErrorCode::InvalidEpsilon);
}

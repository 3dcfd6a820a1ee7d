#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "fluidpert/bench.hpp"
#include "fluidpert/density.hpp"
#include "fluidpert/errors.hpp"
#include "oracles.hpp"

using namespace fluidpert;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IO;
}

FluidModel two_phase() {
  Matrix g(2, 2);
  g << -1, 1, 1, -1;
  Vector c(2);
  c << 1, -2;
  return validate_model(g, c);
}

StationaryLaw law_of(const FluidModel& m) { return stationary_law(m, solve_psi(m)); }

// Length past which the density is below e^-40 of its scale.
double tail_length(const StationaryLaw& law) {
  return std::max(60.0, 40.0 / std::abs(oracle::spectral_abscissa(law.K)));
}

double total_mass_by_quadrature(const StationaryLaw& law) {
  const double length = tail_length(law);
  return law.atoms().sum() +
         oracle::density_mass(law.q, law.K, law.bracket, length,
                              static_cast<int>(length / 0.005));
}

// Composite Simpson of a scalar function on [a, b] with n panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f(a + i * h);
  }
  return acc * h / 3.0;
}

FluidModel case_model(const std::string& id) {
  const BenchCase bc = make_case(id);
  return validate_model(bc.A, bc.c);
}

}  // namespace

TEST(Density, TwoPhaseClosedForm) {
  const StationaryLaw law = law_of(two_phase());
  EXPECT_NEAR(law.K(0, 0), -0.5, 1e-14);
  for (double x : {0.1, 1.0, 3.0, 10.0}) {
    const RowVector pi = density_at(law, x);
    EXPECT_NEAR(pi(0), 0.25 * std::exp(-0.5 * x), 1e-10);
    EXPECT_NEAR(pi(1), 0.125 * std::exp(-0.5 * x), 1e-10);
  }
  EXPECT_NEAR(law.atoms()(0), 0.0, 1e-15);
  EXPECT_NEAR(law.atoms()(1), 0.25, 1e-12);
}

TEST(Density, MassByQuadrature) {
  std::mt19937_64 rng(151);
  for (int trial = 0; trial < 20; ++trial) {
    const StationaryLaw law = law_of(oracle::random_model(rng, oracle::random_shape(rng)));
    EXPECT_NEAR(total_mass_by_quadrature(law), 1.0, 1e-8) << "trial " << trial;
    EXPECT_NEAR(law.atoms().sum() + law.continuous_mass(), 1.0, 1e-10);
    EXPECT_GE(law.p_minus.minCoeff(), 0.0);
    if (law.p_zero.size()) EXPECT_GE(law.p_zero.minCoeff(), 0.0);
  }
}

TEST(Density, ClosedFormMassMatchesSimpson) {
  const StationaryLaw law = law_of(case_model("1a"));
  const double simpson = oracle::density_mass(law.q, law.K, law.bracket, 50.0, 5000);
  EXPECT_NEAR(law.continuous_mass(), simpson, 1e-6);
}

TEST(Density, PositiveOnGrids) {
  const StationaryLaw law = law_of(case_model("1a"));
  for (int i = 1; i <= 100; ++i) EXPECT_GE(density_at(law, 0.1 * i).minCoeff(), 0.0);
  std::mt19937_64 rng(157);
  for (int trial = 0; trial < 10; ++trial) {
    const StationaryLaw l = law_of(oracle::random_model(rng, oracle::random_shape(rng)));
    for (int i = 0; i < 100; ++i) {
      const double x = std::pow(10.0, -2.0 + 4.0 * i / 99.0);
      EXPECT_GE(density_at(l, x).minCoeff(), -1e-12);
    }
  }
}

TEST(Density, DecayAndRate) {
  std::mt19937_64 rng(163);
  for (int trial = 0; trial < 10; ++trial) {
    const StationaryLaw law = law_of(oracle::random_model(rng, oracle::random_shape(rng)));
    EXPECT_LE(density_at(law, 200.0).cwiseAbs().maxCoeff(), 1e-12);
    const double abscissa = oracle::spectral_abscissa(law.K);
    // Least squares slope of log ||pi(x)|| over [10, 50].
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = 41;
    for (int i = 0; i < n; ++i) {
      const double x = 10.0 + i;
      const double y = std::log(density_at(law, x).cwiseAbs().maxCoeff());
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_NEAR(slope / abscissa, 1.0, 0.02) << "trial " << trial;
  }
}

TEST(Density, NotRecurrent) {
  Matrix g(2, 2);
  g << -1, 1, 1, -1;
  Vector c(2);
  c << 2, -1;
  const FluidModel m = validate_model(g, c);
  EXPECT_EQ(code_of([&] { stationary_law(m, solve_psi(m)); }), ErrorCode::NotRecurrent);
}

TEST(FirstOrder, ZeroDirection) {
  std::mt19937_64 rng(167);
  const FluidModel m = oracle::random_model(rng, {2, 2, 2});
  const PsiSolution base = solve_psi(m);
  const StationaryLaw law = stationary_law(m, base);
  const FirstOrderLaw fol =
      first_order_law(m, base, law, make_generator_perturbation(m, Matrix::Zero(6, 6)));
  for (double x : {0.5, 1.0, 5.0}) EXPECT_LE(density1_at(fol, law, x).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(fol.atoms(law).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FirstOrder, RateKindRejected) {
  const FluidModel m = two_phase();
  const PsiSolution base = solve_psi(m);
  const StationaryLaw law = stationary_law(m, base);
  Vector d(2);
  d << 1, 0;
  EXPECT_EQ(code_of([&] { first_order_law(m, base, law, make_rate_perturbation(m, d)); }),
            ErrorCode::NotGeneratorKind);
}

TEST(FirstOrder, FiniteDifference) {
  std::mt19937_64 rng(173);
  for (int trial = 0; trial < 15; ++trial) {
    const FluidModel m = oracle::random_model(rng, oracle::random_shape(rng));
    const Matrix dir = oracle::random_generator_direction(rng, m.generator());
    const PerturbationSpec spec = make_generator_perturbation(m, dir);
    const PsiSolution base = solve_psi(m);
    const StationaryLaw law = stationary_law(m, base);
    const FirstOrderLaw fol = first_order_law(m, base, law, spec);
    const auto law_at = [&](double eps) {
      const FluidModel me = validate_model(m.generator() + eps * dir, m.rates());
      return stationary_law(me, solve_psi(me));
    };
    std::vector<double> err;
    for (double eps : {1e-4, 1e-5}) {
      const StationaryLaw le = law_at(eps);
      double worst = 0.0;
      for (double x : {0.5, 1.0, 2.0}) {
        const RowVector fd = (density_at(le, x) - density_at(law, x)) / eps;
        worst = std::max(worst, (fd - density1_at(fol, law, x)).cwiseAbs().maxCoeff());
      }
      const RowVector atom_fd = (le.atoms() - law.atoms()) / eps;
      worst = std::max(worst, (atom_fd - fol.atoms(law)).cwiseAbs().maxCoeff());
      err.push_back(worst / eps);
    }
    const double ratio = err[1] / err[0];
    EXPECT_TRUE(ratio >= 0.5 && ratio <= 2.0) << "trial " << trial << " ratio " << ratio;
    const double far = std::max(200.0, tail_length(law));
    EXPECT_LE(density1_at(fol, law, far).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(FirstOrder, MassDerivativeVanishes) {
  std::mt19937_64 rng(179);
  for (int trial = 0; trial < 10; ++trial) {
    const FluidModel m = oracle::random_model(rng, oracle::random_shape(rng));
    const PerturbationSpec spec =
        make_generator_perturbation(m, oracle::random_generator_direction(rng, m.generator()));
    const PsiSolution base = solve_psi(m);
    const StationaryLaw law = stationary_law(m, base);
    const FirstOrderLaw fol = first_order_law(m, base, law, spec);
    // Simpson of sum_j pi1_j(x), fine near zero and coarse on the tail.
    const auto f = [&](double x) { return density1_at(fol, law, x).sum(); };
    const double length = tail_length(law);
    const double acc = simpson(f, 0.0, 10.0, 2000) + simpson(f, 10.0, length, 4000);
    const double mass1 = acc + fol.atoms(law).sum();
    EXPECT_NEAR(mass1, 0.0, 1e-6) << "trial " << trial;
  }
}

TEST(FirstOrder, PoissonResidual) {
  std::mt19937_64 rng(181);
  const FluidModel m = oracle::random_model(rng, {3, 3, 3});
  const PsiSolution base = solve_psi(m);
  const StationaryLaw law = stationary_law(m, base);
  EXPECT_LE((law.p * law.level_zero).cwiseAbs().maxCoeff(), 1e-10);
  const Matrix g = group_inverse(law.level_zero, law.p / law.p.sum());
  const Matrix& z = law.level_zero;
  EXPECT_LE((z * g * z - z).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((g * z * g - g).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((z * g - g * z).cwiseAbs().maxCoeff(), 1e-10);
}

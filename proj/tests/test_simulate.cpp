#include <gtest/gtest.h>

#include <cmath>

#include "fluidpert/bench.hpp"
#include "fluidpert/errors.hpp"
#include "fluidpert/simulate.hpp"

using namespace fluidpert;

namespace {

FluidModel two_phase() {
  Matrix g(2, 2);
  g << -1, 1, 1, -1;
  Vector c(2);
  c << 1, -2;
  return validate_model(g, c);
}

// One up phase, two down phases with distinct exit rates.
FluidModel three_phase() {
  Matrix g(3, 3);
  g << -2, 1, 1, 2, -3, 1, 1, 2, -3;
  Vector c(3);
  c << 1, -1, -2;
  return validate_model(g, c);
}

FluidModel case_1a() {
  const BenchCase bc = make_case("1a");
  return validate_model(bc.A, bc.c);
}

}  // namespace

TEST(EstimatePsi, TwoPhaseReturnsSurely) {
  SimConfig cfg;
  cfg.replications = 2000;
  const PsiEstimate e = estimate_psi(two_phase(), cfg);
  EXPECT_EQ(e.censored_fraction, 0.0);
  EXPECT_EQ(e.estimate(0, 0), 1.0);
  EXPECT_EQ(e.std_error(0, 0), 0.0);
}

TEST(EstimatePsi, Deterministic) {
  SimConfig cfg;
  cfg.replications = 3000;
  cfg.seed = 99;
  const PsiEstimate a = estimate_psi(three_phase(), cfg);
  const PsiEstimate b = estimate_psi(three_phase(), cfg);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
  cfg.seed = 100;
  EXPECT_NE(estimate_psi(three_phase(), cfg).estimate, a.estimate);
}

TEST(EstimatePsi, ThreadCountDoesNotMatter) {
  SimConfig cfg;
  cfg.replications = 3000;
  const PsiEstimate one = estimate_psi(three_phase(), cfg);
  cfg.threads = 4;
  const PsiEstimate four = estimate_psi(three_phase(), cfg);
  EXPECT_EQ(one.estimate, four.estimate);
  EXPECT_EQ(one.censored_fraction, four.censored_fraction);
}

TEST(EstimatePsi, RowsAccountForCensoring) {
  SimConfig cfg;
  cfg.replications = 2000;
  cfg.max_time = 2.0;
  const PsiEstimate e = estimate_psi(case_1a(), cfg);
  EXPECT_GT(e.censored_fraction, 0.0);
  for (Eigen::Index i = 0; i < e.estimate.rows(); ++i) {
    EXPECT_NEAR(e.estimate.row(i).sum() + e.censored(i), 1.0, 1.0 / cfg.replications);
  }
}

TEST(EstimatePsi, CensoringShrinksWithHorizon) {
  SimConfig cfg;
  cfg.replications = 2000;
  double previous = 1.0;
  for (double horizon : {1.0, 10.0, 100.0, 1e4}) {
    cfg.max_time = horizon;
    const double f = estimate_psi(case_1a(), cfg).censored_fraction;
    EXPECT_LE(f, previous);
    previous = f;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(EstimatePsi, StdErrorScalesAsInverseRoot) {
  SimConfig cfg;
  cfg.replications = 1000;
  const PsiEstimate small = estimate_psi(three_phase(), cfg);
  cfg.replications = 100000;
  const PsiEstimate large = estimate_psi(three_phase(), cfg);
  for (Eigen::Index j = 0; j < 2; ++j) {
    EXPECT_NEAR(small.std_error(0, j) / large.std_error(0, j), 10.0, 1.0);
  }
}

TEST(EstimatePsi, AgreesWithExactValue) {
  SimConfig cfg;
  cfg.replications = 100000;
  const FluidModel m = three_phase();
  const PsiEstimate e = estimate_psi(m, cfg);
  const Matrix psi = solve_psi(m).psi;
  for (Eigen::Index j = 0; j < 2; ++j) {
    EXPECT_LE(std::abs(e.estimate(0, j) - psi(0, j)), 4.0 * e.std_error(0, j));
  }
}

TEST(EstimateDensity, TwoPhaseDecay) {
  SimConfig cfg;
  cfg.replications = 40;
  cfg.max_time = 5e4;
  cfg.threads = 4;
  const DensityHistogram h = estimate_density(two_phase(), cfg);
  // Least squares slope of log density over bins centred in [0.5, 5].
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int b = 5; b < 50; ++b) {
    const double x = 0.5 * (h.edges(b) + h.edges(b + 1));
    const double y = std::log(h.density.row(b).sum());
    sx += x; sy += y; sxx += x * x; sxy += x * y; ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_NEAR(slope, -0.5, 0.025);
  EXPECT_NEAR(h.atoms(1), 0.25, 0.02);
}

TEST(EstimateDensity, AtomsOffUpPhasesAndMassAddsUp) {
  SimConfig cfg;
  cfg.replications = 10;
  cfg.max_time = 2000;
  const FluidModel m = case_1a();
  const DensityHistogram h = estimate_density(m, cfg);
  for (auto i : m.partition().plus) EXPECT_EQ(h.atoms(i), 0.0);
  EXPECT_NEAR(h.mass.sum() + h.overflow.sum() + h.atoms.sum(), 1.0, 1e-12);
  const DensityHistogram again = estimate_density(m, cfg);
  EXPECT_EQ(h.mass, again.mass);
  EXPECT_EQ(h.atoms, again.atoms);
}

TEST(EstimateDensity, NotRecurrent) {
  Matrix g(2, 2);
  g << -1, 1, 1, -1;
  Vector c(2);
  c << 2, -1;
  EXPECT_THROW(estimate_density(validate_model(g, c), SimConfig{}), Error);
}

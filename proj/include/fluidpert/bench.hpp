#pragma once

#include <string>
#include <vector>

#include "fluidpert/core.hpp"
#include "fluidpert/perturb.hpp"

namespace fluidpert {

/// M/M/1/N generator with N = 3m, arrival rate lambda, service rate mu.
Matrix build_mm1n(int m, double lambda, double mu);

/// N = 3m individuals each switching on at rate alpha and off at rate beta;
/// state k (0-based) moves up at (N-1-k) alpha and down at k beta.
Matrix build_alternating(int m, double alpha, double beta);

/// r- such that xi c = target_drift for c = (r+ on the first third, 0 on the
/// middle third, r- on the last third). Throws Infeasible when r- >= 0.
double calibrate_rminus(const Matrix& a, double r_plus, double target_drift);

/// Norms of R = Psi(eps) - psi_bar - eps psi1. Row norms (max absolute row
/// sum) over S+ rows, S(+) rows and all rows; column norms (max absolute
/// column sum) over S- and S(-) columns. Undefined entries are NaN.
struct ErrorNorms {
  double E_plus;
  double E_oplus;
  double E_inf;
  double E_minus;
  double E_ominus;
};

/// Throws ShapeMismatch when psi_eps does not have the expansion's layout.
ErrorNorms error_norms(const Matrix& psi_eps, const PsiExpansion& expansion,
                       double eps);

/// Drift the six benchmark cases are calibrated to.
inline constexpr double kCaseDrift = -0.2;
inline constexpr double kCaseRatePlus = 0.4;
inline constexpr int kCaseM = 5;

struct BenchCase {
  std::string id;
  Matrix A;
  Vector c;
  double r_minus = 0.0;
  /// Rate direction: nonzero on the middle third only.
  Vector c_tilde;
};

/// Ids 1a, 2a, 3a (zero-rate phases turn positive) and 1b, 2b, 3b (turn
/// negative). Throws UnknownCase.
BenchCase make_case(const std::string& id, double target_drift = kCaseDrift);

const std::vector<std::string>& case_ids();

std::vector<double> log_grid(double lo, double hi, int n);
std::vector<double> linear_grid(double lo, double hi, int n);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares fit of log y against log x.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// A reference error value for one case, epsilon and norm.
struct ReferenceCell {
  std::string case_id;
  double eps;
  std::string norm;  // "E_plus", "E_oplus" or "E_inf"
  double value;
};

const std::vector<ReferenceCell>& reference_cells();

/// Reference r- values to three significant digits, keyed by case family.
double reference_rminus(const std::string& case_id);

struct CellCheck {
  ReferenceCell cell;
  double computed = 0.0;
  double rel_error = 0.0;
  bool pass = false;
};

struct CaseResult {
  std::string case_id;
  Regime regime = Regime::Unaffected;
  double r_minus = 0.0;
  std::vector<double> eps_grid;
  std::vector<double> E_plus;
  std::vector<double> E_oplus;
  std::vector<double> E_inf;
  std::vector<double> E_minus;
  std::vector<double> E_ominus;
  LineFit fit;
  std::vector<CellCheck> cells;
  int newton_iterations = 0;
};

inline constexpr double kCellTolerance = 0.02;

/// Norms for one case at one epsilon.
ErrorNorms evaluate_case(const BenchCase& bc, double eps);

/// Sweeps eps_grid, fits the slope of E_inf and compares with the reference
/// cells (at their own epsilons) to kCellTolerance relative.
CaseResult run_case(const std::string& id,
                    const std::vector<double>& eps_grid = log_grid(1e-4, 1e-2, 20),
                    double target_drift = kCaseDrift);

}  // namespace fluidpert

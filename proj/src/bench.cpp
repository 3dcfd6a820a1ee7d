#include "fluidpert/bench.hpp"

#include <cmath>
#include <limits>

#include "fluidpert/errors.hpp"
#include "fluidpert/riccati.hpp"

namespace fluidpert {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix birth_death(int n, auto up, auto down) {
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (i + 1 < n) a(i, i + 1) = up(i);
    if (i > 0) a(i, i - 1) = down(i);
    a(i, i) = -a.row(i).sum();
  }
  return a;
}

double max_abs_row_sum(const Matrix& r) {
  return r.rows() == 0 ? kNaN : r.cwiseAbs().rowwise().sum().maxCoeff();
}

double max_abs_col_sum(const Matrix& r) {
  return r.cols() == 0 ? kNaN : r.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

Matrix build_mm1n(int m, double lambda, double mu) {
  return birth_death(3 * m, [&](int) { return lambda; }, [&](int) { return mu; });
}

Matrix build_alternating(int m, double alpha, double beta) {
  const int n = 3 * m;
  return birth_death(n, [&](int k) { return (n - 1 - k) * alpha; },
                     [&](int k) { return k * beta; });
}

double calibrate_rminus(const Matrix& a, double r_plus, double target_drift) {
  if (a.rows() % 3 != 0) {
    throw Error(ErrorCode::DimensionMismatch, "generator size must be 3m");
  }
  const Eigen::Index m = a.rows() / 3;
  // Any nonzero rates give the same xi; only A matters here.
  Vector c = Vector::Zero(a.rows());
  c.head(m).setConstant(1.0);
  c.tail(m).setConstant(-1.0);
  const RowVector xi = stationary_phase_dist(validate_model(a, c));
  const double r = (target_drift - r_plus * xi.head(m).sum()) / xi.tail(m).sum();
  if (!(r < 0.0)) {
    throw Error(ErrorCode::Infeasible,
                "target drift needs r- = " + std::to_string(r) + " >= 0");
  }
  return r;
}

ErrorNorms error_norms(const Matrix& psi_eps, const PsiExpansion& e, double eps) {
  if (psi_eps.rows() != e.psi_bar.rows() || psi_eps.cols() != e.psi_bar.cols() ||
      e.psi1.rows() != e.psi_bar.rows() || e.psi1.cols() != e.psi_bar.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "Psi(eps) and expansion differ in shape");
  }
  const Matrix r = psi_eps - e.psi_bar - eps * e.psi1;
  const Eigen::Index oplus_rows = r.rows() - e.plus_rows;
  const Eigen::Index minus_cols = r.cols() - e.ominus_cols;
  return {max_abs_row_sum(r.topRows(e.plus_rows)),
          max_abs_row_sum(r.bottomRows(oplus_rows)), max_abs_row_sum(r),
          max_abs_col_sum(r.rightCols(minus_cols)),
          max_abs_col_sum(r.leftCols(e.ominus_cols))};
}

const std::vector<std::string>& case_ids() {
  static const std::vector<std::string> ids{"1a", "2a", "3a", "1b", "2b", "3b"};
  return ids;
}

BenchCase make_case(const std::string& id, double target_drift) {
  if (id.size() != 2 || (id[1] != 'a' && id[1] != 'b') || id[0] < '1' ||
      id[0] > '3') {
    throw Error(ErrorCode::UnknownCase, "unknown case '" + id + "'");
  }
  const int m = kCaseM;
  BenchCase bc;
  bc.id = id;
  switch (id[0]) {
    case '1': bc.A = build_mm1n(m, 2.0, 1.0); break;
    case '2': bc.A = build_mm1n(m, 1.0, 2.0); break;
    default: bc.A = build_alternating(m, 1.0, 1.0); break;
  }
  bc.r_minus = calibrate_rminus(bc.A, kCaseRatePlus, target_drift);
  bc.c = Vector::Zero(3 * m);
  bc.c.head(m).setConstant(kCaseRatePlus);
  bc.c.tail(m).setConstant(bc.r_minus);

  // Case 1.b uses the down rate r- as the direction; 2.b and 3.b use -r+.
  double direction = kCaseRatePlus;
  if (id == "1b") {
    direction = bc.r_minus;
  } else if (id[1] == 'b') {
    direction = -kCaseRatePlus;
  }
  bc.c_tilde = Vector::Zero(3 * m);
  bc.c_tilde.segment(m, m).setConstant(direction);
  return bc;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out;
  if (n == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < n; ++i) out.push_back(std::pow(10.0, a + (b - a) * i / (n - 1)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> out;
  if (n == 1) return {lo};
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  out.back() = hi;
  return out;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Matrix design(n, 2);
  Vector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = std::log(x[i]);
    design(i, 1) = 1.0;
    rhs(i) = std::log(y[i]);
  }
  const Vector beta = design.colPivHouseholderQr().solve(rhs);
  const Vector resid = rhs - design * beta;
  const double ss_tot = (rhs.array() - rhs.mean()).square().sum();
  LineFit fit;
  fit.slope = beta(0);
  fit.intercept = beta(1);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
  return fit;
}

const std::vector<ReferenceCell>& reference_cells() {
  static const std::vector<ReferenceCell> cells{
      {"1a", 1e-4, "E_plus", 5.37e-7},  {"1a", 1e-4, "E_oplus", 3.39e-6},
      {"1a", 1e-2, "E_plus", 4.60e-3},  {"1a", 1e-2, "E_oplus", 2.94e-3},
      {"2a", 1e-4, "E_plus", 1.92e-12}, {"2a", 1e-4, "E_oplus", 2.00e-12},
      {"2a", 1e-2, "E_plus", 2.08e-8},  {"2a", 1e-2, "E_oplus", 2.15e-8},
      {"3a", 1e-4, "E_plus", 3.77e-8},  {"3a", 1e-4, "E_oplus", 4.80e-8},
      {"3a", 1e-2, "E_plus", 3.66e-4},  {"3a", 1e-2, "E_oplus", 4.67e-4},
      {"1b", 1e-4, "E_inf", 1.08e-7},   {"1b", 1e-2, "E_inf", 1.05e-3},
      {"2b", 1e-4, "E_inf", 5.11e-8},   {"2b", 1e-2, "E_inf", 4.91e-4},
      {"3b", 1e-4, "E_inf", 1.33e-6},   {"3b", 1e-2, "E_inf", 1.15e-2},
  };
  return cells;
}

double reference_rminus(const std::string& case_id) {
  if (case_id.empty()) throw Error(ErrorCode::UnknownCase, "empty case id");
  switch (case_id[0]) {
    case '1': return -0.207;
    case '2': return -621.0;
    case '3': return -2.63;
  }
  throw Error(ErrorCode::UnknownCase, "unknown case '" + case_id + "'");
}

namespace {

struct CaseSetup {
  FluidModel model;
  PerturbationSpec spec;
  PsiSolution base;
  PsiExpansion expansion;
};

CaseSetup setup(const BenchCase& bc) {
  CaseSetup s{validate_model(bc.A, bc.c), {}, {}, {}};
  s.spec = make_rate_perturbation(s.model, bc.c_tilde);
  s.base = solve_psi(s.model);
  s.expansion = expand(s.model, s.base, s.spec);
  return s;
}

ErrorNorms norms_at(const CaseSetup& s, double eps) {
  const PsiSolution pe = solve_psi_at(s.model, s.spec, eps);
  return error_norms(pe.psi, s.expansion, eps);
}

double pick_norm(const ErrorNorms& n, const std::string& name) {
  if (name == "E_plus") return n.E_plus;
  if (name == "E_oplus") return n.E_oplus;
  return n.E_inf;
}

}  // namespace

ErrorNorms evaluate_case(const BenchCase& bc, double eps) {
  return norms_at(setup(bc), eps);
}

CaseResult run_case(const std::string& id, const std::vector<double>& eps_grid,
                    double target_drift) {
  const BenchCase bc = make_case(id, target_drift);
  const CaseSetup s = setup(bc);
  CaseResult out;
  out.case_id = id;
  out.regime = s.spec.regime;
  out.r_minus = bc.r_minus;
  out.eps_grid = eps_grid;
  out.newton_iterations = s.base.iterations;
  for (double eps : eps_grid) {
    const ErrorNorms n = norms_at(s, eps);
    out.E_plus.push_back(n.E_plus);
    out.E_oplus.push_back(n.E_oplus);
    out.E_inf.push_back(n.E_inf);
    out.E_minus.push_back(n.E_minus);
    out.E_ominus.push_back(n.E_ominus);
  }
  if (eps_grid.size() >= 2) out.fit = fit_loglog(eps_grid, out.E_inf);

  for (const ReferenceCell& cell : reference_cells()) {
    if (cell.case_id != id) continue;
    CellCheck check;
    check.cell = cell;
    check.computed = pick_norm(norms_at(s, cell.eps), cell.norm);
    check.rel_error = std::abs(check.computed - cell.value) / std::abs(cell.value);
    check.pass = check.rel_error <= kCellTolerance;
    out.cells.push_back(check);
  }
  return out;
}

}  // namespace fluidpert

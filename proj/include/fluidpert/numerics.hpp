#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>
#include <vector>

namespace fluidpert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using IndexList = std::vector<Eigen::Index>;

/// Throws ErrorCode::NonFinite if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

/// Max absolute row sum.
double inf_norm(const Matrix& m);

/// Rows/columns of `m` picked by index lists (in list order).
Matrix pick(const Matrix& m, const IndexList& rows, const IndexList& cols);

/// Diagonal matrix with entries 1/|v_i|.
Matrix inverse_abs_diag(const Vector& v);

/// Partial-pivoted LU solve of M X = B. Throws Singular when a pivot falls
/// below pivot_tol * ||M||_inf.
Matrix solve_linear(const Matrix& m, const Matrix& b, double pivot_tol = 1e-14);

/// Inverse via solve_linear (same singularity rule).
Matrix inverse(const Matrix& m, double pivot_tol = 1e-14);

struct SylvesterOptions {
  std::size_t max_unknowns = 4096;
  double pivot_tol = 1e-14;
};

/// Solves K X + X U = H by vectorising to (I (x) K + U^T (x) I) vec(X) = vec(H).
/// Throws SizeLimit when p*q exceeds the cap and Singular when spec(K) and
/// spec(-U) intersect (numerically).
Matrix solve_sylvester(const Matrix& k, const Matrix& u, const Matrix& h,
                       const SylvesterOptions& options = {});

/// Scaling and squaring with the degree-13 Pade approximant.
Matrix matrix_exp(const Matrix& m);

/// Group inverse of a rank n-1 generator-type matrix with stationary row
/// vector `left_null` (pi M = 0, pi 1 = 1). A zero `left_null` on a
/// nonsingular M gives the ordinary inverse.
Matrix group_inverse(const Matrix& m, const RowVector& left_null);

struct SpectrumOptions {
  int iterations = 200;
  double margin = 1e-8;
};

/// True iff every eigenvalue of M has negative real part. Decided by power
/// iteration on e^M: the spectral radius of e^M is below one exactly when the
/// spectral abscissa of M is negative. Throws Inconclusive when the estimated
/// radius lies within `margin` of one.
bool stable_spectrum(const Matrix& m, const SpectrumOptions& options = {});

/// Estimated spectral radius of e^M from the same power iteration.
double exp_spectral_radius(const Matrix& m, int iterations = 200);

/// L(x) = int_0^x e^{K(x-s)} D e^{Ks} ds, read off the upper-right block of
/// exp([[K, D], [0, K]] x).
Matrix conv_integral(const Matrix& k, const Matrix& d, double x);

}  // namespace fluidpert

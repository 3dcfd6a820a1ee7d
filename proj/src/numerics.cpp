#include "fluidpert/numerics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>
#include <string>

#include "fluidpert/errors.hpp"

namespace fluidpert {

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFinite,
                std::string(what) + " contains NaN or infinite entries");
  }
}

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix pick(const Matrix& m, const IndexList& rows, const IndexList& cols) {
  return m(rows, cols);
}

Matrix inverse_abs_diag(const Vector& v) {
  return v.cwiseAbs().cwiseInverse().asDiagonal();
}

Matrix solve_linear(const Matrix& m, const Matrix& b, double pivot_tol) {
  if (m.rows() != m.cols() || m.rows() != b.rows()) {
    std::ostringstream msg;
    msg << "solve_linear: M is " << m.rows() << "x" << m.cols() << ", B has "
        << b.rows() << " rows";
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (m.rows() == 0) return Matrix(0, b.cols());
  Eigen::PartialPivLU<Matrix> lu(m);
  const double threshold = pivot_tol * inf_norm(m);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > threshold)) {
    std::ostringstream msg;
    msg << "pivot " << min_pivot << " below " << threshold;
    throw Error(ErrorCode::Singular, msg.str());
  }
  return lu.solve(b);
}

Matrix inverse(const Matrix& m, double pivot_tol) {
  return solve_linear(m, Matrix::Identity(m.rows(), m.cols()), pivot_tol);
}

Matrix solve_sylvester(const Matrix& k, const Matrix& u, const Matrix& h,
                       const SylvesterOptions& options) {
  const Eigen::Index p = k.rows();
  const Eigen::Index q = u.rows();
  if (k.cols() != p || u.cols() != q || h.rows() != p || h.cols() != q) {
    throw Error(ErrorCode::DimensionMismatch,
                "solve_sylvester: K must be p x p, U q x q, H p x q");
  }
  const auto n = static_cast<std::size_t>(p * q);
  if (n > options.max_unknowns) {
    throw Error(ErrorCode::SizeLimit, "solve_sylvester: " + std::to_string(n) +
                                          " unknowns exceed the cap of " +
                                          std::to_string(options.max_unknowns));
  }
  if (n == 0) return Matrix::Zero(p, q);

  // Column-major vec: entry (i, j) lives at i + j*p.
  Matrix big = Matrix::Zero(p * q, p * q);
  for (Eigen::Index j = 0; j < q; ++j) {
    big.block(j * p, j * p, p, p) += k;
    for (Eigen::Index l = 0; l < q; ++l) {
      const double coeff = u(l, j);
      if (coeff == 0.0) continue;
      big.block(j * p, l * p, p, p).diagonal().array() += coeff;
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(Matrix(h).data(), p * q);
  const Vector sol = solve_linear(big, rhs, options.pivot_tol);
  return Eigen::Map<const Matrix>(sol.data(), p, q);
}

Matrix matrix_exp(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix_exp: matrix not square");
  }
  if (m.size() == 0) return m;
  return m.exp();
}

Matrix group_inverse(const Matrix& m, const RowVector& left_null) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n || left_null.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "group_inverse: shape mismatch");
  }
  const Matrix projector = Vector::Ones(n) * left_null;
  return solve_linear(m - projector, Matrix::Identity(n, n)) + projector;
}

double exp_spectral_radius(const Matrix& m, int iterations) {
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;
  // Scale down when e^M overflows; the radius of e^{M} is then rebuilt from
  // that of e^{M/s} as r^s.
  double scale = 1.0;
  Matrix e = matrix_exp(m);
  while (!e.allFinite()) {
    scale *= 2.0;
    e = matrix_exp(m / scale);
  }

  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = 1.0 + 0.1 * static_cast<double>(i) / static_cast<double>(n);
  }
  v.normalize();

  const int warmup = iterations / 2;
  double log_growth = 0.0;
  int counted = 0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = e * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    if (it >= warmup) {
      log_growth += std::log(norm);
      ++counted;
    }
    v = w / norm;
  }
  return std::exp(scale * log_growth / counted);
}

bool stable_spectrum(const Matrix& m, const SpectrumOptions& options) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "stable_spectrum: not square");
  }
  const double radius = exp_spectral_radius(m, options.iterations);
  if (radius < 1.0 - options.margin) return true;
  if (radius > 1.0 + options.margin) return false;
  std::ostringstream msg;
  msg.precision(17);
  msg << "spectral radius of e^M is " << radius << ", within "
      << options.margin << " of 1";
  throw Error(ErrorCode::Inconclusive, msg.str());
}

Matrix conv_integral(const Matrix& k, const Matrix& d, double x) {
  const Eigen::Index p = k.rows();
  if (k.cols() != p || d.rows() != p || d.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "conv_integral: shape mismatch");
  }
  Matrix block = Matrix::Zero(2 * p, 2 * p);
  block.topLeftCorner(p, p) = k;
  block.topRightCorner(p, p) = d;
  block.bottomRightCorner(p, p) = k;
  return matrix_exp(block * x).topRightCorner(p, p);
}

}  // namespace fluidpert

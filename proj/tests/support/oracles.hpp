#pragma once

// Reference computations used only by the tests. None of these call the
// library's solvers; they are deliberately simple and slow.

#include <functional>
#include <random>

#include "fluidpert/core.hpp"
#include "fluidpert/perturb.hpp"

namespace oracle {

using fluidpert::Matrix;
using fluidpert::RowVector;
using fluidpert::Vector;

/// Truncated Taylor series with scaling and squaring (no Pade).
Matrix expm_taylor(const Matrix& m);

/// Composite Simpson rule on [a, b] with n (even) panels, matrix valued.
Matrix simpson(const std::function<Matrix(double)>& f, double a, double b, int n);

/// X = -int_0^T e^{Kt} H e^{Ut} dt by Simpson with exponentials propagated
/// step by step; K and U must be stable.
Matrix sylvester_integral(const Matrix& k, const Matrix& u, const Matrix& h,
                          double horizon, int panels);

/// X_{k+1} = K^{-1} (H - X_k U), for diagonally dominant test data.
Matrix sylvester_fixed_point(const Matrix& k, const Matrix& u, const Matrix& h,
                             int iterations = 500);

/// Stationary vector of a birth-death chain from detailed balance.
RowVector birth_death_stationary(const Matrix& a);

/// Largest real part of the eigenvalues (Eigen's general eigensolver).
double spectral_abscissa(const Matrix& m);

/// Two-phase model A = [[-a, a], [b, -b]], c = (cp, cm), cm < 0. The scalar
/// equation a/cp - (a/cp + b/|cm|) x + (b/|cm|) x^2 = 0 has roots 1 and
/// a|cm|/(b cp); the smaller one is returned.
double two_phase_psi(double a, double b, double cp, double cm);

/// Integral of the density of a stationary law over [0, length] given
/// q, K and the bracket, by Simpson with e^{Kh} stepping.
double density_mass(const RowVector& q, const Matrix& k, const Matrix& bracket,
                    double length, int panels);

/// Psi from the invariant subspace of the censored, rate-scaled generator:
/// [a b; -e -d] [X; I] = [X; I](-U). Censoring and scaling are redone here from
/// A and c. Rows are S+ and columns S- in ascending phase order.
Matrix psi_invariant_subspace(const Matrix& a, const Vector& c);

struct FuzzShape {
  int plus;
  int zero;
  int minus;
};

/// Irreducible generator: a random sparse pattern plus a Hamiltonian cycle,
/// off-diagonal rates in [0.2, 2].
Matrix random_generator(std::mt19937_64& rng, int n);

/// Random recurrent model with the given class sizes (phases in random order)
/// and mean drift at most -0.1.
fluidpert::FluidModel random_model(std::mt19937_64& rng, FuzzShape shape);

/// Random shape with 3..12 phases, at least one phase of each sign. With a
/// single down phase Psi is identically 1, so perturbation corpora ask for
/// min_minus = 2.
FuzzShape random_shape(std::mt19937_64& rng, int min_zero = 0, int min_minus = 1);

/// Zero row sums; off-diagonals in [-0.2, 0.5] where A is positive and in
/// [0, 0.5] where A is zero.
Matrix random_generator_direction(std::mt19937_64& rng, const Matrix& a);

/// Rate direction with entries in [-1, 1] on S+ and S-, and on S0:
/// positive (+1), negative (-1), a split (0), or zero (2).
Vector random_rate_direction(std::mt19937_64& rng, const fluidpert::FluidModel& m,
                             int zero_mode);

/// Slope-2 check: ratios of ||Psi(eps) - expansion||/eps^2 at consecutive
/// decades.
struct RatioCheck {
  std::vector<double> eps;
  std::vector<double> scaled;
  bool ok(double lo = 0.5, double hi = 2.0) const;
};

/// Psi of the model moved by eps along spec, solved from scratch on a model
/// built from A + eps A~ or c + eps c~ and laid out on the expansion's labels.
Matrix direct_psi(const fluidpert::FluidModel& m, const fluidpert::PerturbationSpec& spec,
                  const fluidpert::PsiExpansion& e, double eps);

/// ||Psi(eps) - psi_bar - eps psi1||_inf / eps^2 at eps = 1e-2, 1e-3, 1e-4.
RatioCheck expansion_ratio_check(const fluidpert::FluidModel& m,
                                 const fluidpert::PerturbationSpec& spec);

}  // namespace oracle

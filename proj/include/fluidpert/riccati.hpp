#pragma once

#include <functional>
#include <vector>

#include "fluidpert/core.hpp"
#include "fluidpert/numerics.hpp"

namespace fluidpert {

/// Coefficients of the nonsymmetric Riccati equation
///   b + a X + X d + X e X = 0,
/// for the fluid model a = C+^{-1} Q++, b = C+^{-1} Q+-, d = |C-^{-1}| Q--,
/// e = |C-^{-1}| Q-+.
struct RiccatiCoefficients {
  Matrix a;
  Matrix b;
  Matrix d;
  Matrix e;

  /// ||[a b; e d]||_inf, the scale the stopping rule is measured against.
  double scale() const;
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_newton = 50;
  int max_halvings = 20;
  /// Full Newton steps taken after the tolerance is met, while they keep
  /// contracting and the residual stays under the target. A small residual
  /// does not imply a small error when K (+) U is badly conditioned.
  bool polish = true;
  int max_polish = 6;
  /// Called with every accepted iterate (X_0 = 0 included).
  std::function<void(const Matrix&)> on_iterate;
};

struct RiccatiResult {
  Matrix x;
  int iterations = 0;
  double residual = 0.0;
  /// ||F||_inf after each accepted step, starting with F(0). Nonincreasing up
  /// to `converged_at`; polishing steps after it stay below the target.
  std::vector<double> residual_history;
  std::size_t converged_at = 0;
  double target = 0.0;
  int halvings = 0;
};

Matrix riccati_residual(const RiccatiCoefficients& c, const Matrix& x);

/// Minimal nonnegative solution by Newton's method from X_0 = 0. Each step
/// solves (a + X e) D + D (d + e X) = -F(X); a step that does not lower
/// ||F||_inf is halved (up to max_halvings times). Converged once
/// ||F||_inf <= tol * max(1, scale()). Throws NoConvergence.
RiccatiResult solve_riccati(const RiccatiCoefficients& c,
                            const NewtonOptions& options = {});

RiccatiCoefficients fluid_coefficients(const FluidModel& model);

struct UKPair {
  Matrix U;
  Matrix K;
};

/// U = |C-^{-1}| (Q-- + Q-+ Psi),  K = C+^{-1} Q++ + Psi |C-^{-1}| Q-+.
UKPair build_UK(const FluidModel& model, const Matrix& psi);

struct PsiSolution {
  Matrix psi;
  Matrix U;
  Matrix K;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  /// Original phase indices labelling the rows (S+) and columns (S-).
  IndexList rows;
  IndexList cols;
};

/// Throws EmptySide when S+ or S- is empty, NoConvergence from Newton.
PsiSolution solve_psi(const FluidModel& model, const NewtonOptions& options = {});

/// The model with A + eps A~ or c + eps c~. For a rate perturbation that moves
/// zero-rate phases the sign classes are rebuilt as [S+, S(+)] and
/// [S(-), S-]. Throws InvalidEpsilon when the perturbed model is not valid.
FluidModel perturbed_model(const FluidModel& model, const PerturbationSpec& spec,
                           double eps);

/// solve_psi on perturbed_model(model, spec, eps).
PsiSolution solve_psi_at(const FluidModel& model, const PerturbationSpec& spec,
                         double eps, const NewtonOptions& options = {});

}  // namespace fluidpert

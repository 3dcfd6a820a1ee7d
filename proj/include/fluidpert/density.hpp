#pragma once

#include "fluidpert/core.hpp"
#include "fluidpert/riccati.hpp"

namespace fluidpert {

/// Stationary law of the reflected level:
///   pi(x) = q e^{Kx} [C+^{-1}, Psi|C-|^{-1}, Theta],  x > 0,
/// with atoms p- and p0 at level zero. Bracket columns are ordered
/// [S+, S-, S0]; `columns` maps them back to phase indices.
struct StationaryLaw {
  Matrix K;
  Matrix theta;
  RowVector q;
  RowVector p_minus;
  RowVector p_zero;

  Matrix psi;
  Matrix bracket;
  IndexList columns;
  /// Generator of the phase at level zero on [S-, S0] and its left null
  /// vector [p-, p0].
  Matrix level_zero;
  RowVector p;
  Eigen::Index phases = 0;

  /// q (-K)^{-1} bracket 1, the mass on (0, inf).
  double continuous_mass() const;
  /// Atoms at level zero in phase order (zero on S+).
  RowVector atoms() const;
};

/// Throws NotRecurrent when the mean drift is not negative and
/// SingularNormalization when the normalising constant vanishes.
StationaryLaw stationary_law(const FluidModel& model, const PsiSolution& base);

/// pi(x) in phase order.
RowVector density_at(const StationaryLaw& law, double x);

/// First-order terms of the law under A + eps A~:
///   pi1(x) = q e^{Kx} [0, Psi1|C-|^{-1}, Theta1]
///          + (q1 e^{Kx} + q L1(x)) [C+^{-1}, Psi|C-|^{-1}, Theta].
struct FirstOrderLaw {
  Matrix psi1;
  Matrix K1;
  Matrix theta1;
  RowVector q1;
  RowVector p1_minus;
  RowVector p1_zero;
  Matrix bracket1;

  Matrix K;
  /// int_0^x e^{K(x-s)} K1 e^{Ks} ds
  Matrix L1(double x) const;
  /// d/deps of the atoms in phase order.
  RowVector atoms(const StationaryLaw& law) const;
};

/// Throws NotGeneratorKind for rate perturbations.
FirstOrderLaw first_order_law(const FluidModel& model, const PsiSolution& base,
                              const StationaryLaw& law,
                              const PerturbationSpec& spec);

/// pi1(x) in phase order.
RowVector density1_at(const FirstOrderLaw& fol, const StationaryLaw& law,
                      double x);

}  // namespace fluidpert

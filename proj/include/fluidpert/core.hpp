#pragma once

#include <string>
#include <vector>

#include "fluidpert/numerics.hpp"

namespace fluidpert {

/// Phase index sets in original numbering. The canonical order used by every
/// block formula is plus, then zero, then minus.
struct Partition {
  IndexList plus;
  IndexList zero;
  IndexList minus;

  /// Canonical position -> original phase index.
  IndexList canonical() const;
};

/// A validated Markov-modulated fluid model: an irreducible generator A and
/// net rates c, stored in the caller's phase order together with the
/// partition that orders them canonically.
class FluidModel {
 public:
  const Matrix& generator() const { return generator_; }
  const Vector& rates() const { return rates_; }
  const Partition& partition() const { return partition_; }
  const std::vector<std::string>& labels() const { return labels_; }
  Eigen::Index size() const { return generator_.rows(); }

  Matrix block(const IndexList& rows, const IndexList& cols) const {
    return pick(generator_, rows, cols);
  }
  /// C_+^{-1}
  Matrix plus_rate_inv() const;
  /// |C_-^{-1}|
  Matrix minus_rate_abs_inv() const;

 private:
  friend FluidModel make_model(const Matrix&, const Vector&, Partition,
                               std::vector<std::string>);
  Matrix generator_;
  Vector rates_;
  Partition partition_;
  std::vector<std::string> labels_;
};

struct ModelTolerances {
  /// Row sums must vanish to this multiple of ||A||_inf.
  double row_sum_rel = 1e-12;
};

/// Checks A and c and derives the sign partition (ascending phase order within
/// each set). Throws DimensionMismatch, NonFinite, NotAGenerator, Reducible.
FluidModel validate_model(const Matrix& a, const Vector& c,
                          std::vector<std::string> labels = {},
                          const ModelTolerances& tol = {});

/// Same checks, but keeps a caller-chosen order inside each sign class. The
/// partition must agree with the signs of c. Used when perturbed phases have
/// to be laid out as [S+, S(+)] and [S(-), S-].
FluidModel validate_model_ordered(const Matrix& a, const Vector& c,
                                  Partition order,
                                  std::vector<std::string> labels = {},
                                  const ModelTolerances& tol = {});

/// True when the directed graph of positive off-diagonal entries is strongly
/// connected.
bool is_irreducible(const Matrix& a);

/// xi with xi A = 0, xi 1 = 1, from the bordered system.
RowVector stationary_phase_dist(const FluidModel& model);

/// xi . c
double mean_drift(const FluidModel& model);

/// Generator on S+ u S- left after eliminating the zero-rate phases.
struct CensoredBlocks {
  Matrix pp;
  Matrix pm;
  Matrix mp;
  Matrix mm;

  Matrix assembled() const;
};

CensoredBlocks censor_zero_phases(const FluidModel& model);

enum class PerturbationKind { Generator, Rate };

/// How zero-rate phases move under a rate perturbation.
enum class Regime { Unaffected, ToPlus, ToMinus, General };

const char* to_string(Regime regime);

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::Generator;
  /// Generator kind: the direction A~ (original phase order).
  Matrix generator_direction;
  /// Rate kind: the diagonal of C~ (original phase order).
  Vector rate_direction;
  /// Zero-rate phases gaining a positive / negative rate.
  IndexList oplus;
  IndexList ominus;
  Regime regime = Regime::Unaffected;
};

/// A~ must have zero row sums and be nonnegative off the diagonal wherever A
/// has a structural zero. Throws InvalidPerturbation otherwise.
PerturbationSpec make_generator_perturbation(const FluidModel& model,
                                             const Matrix& direction);

/// Classifies S0 into S(+)/S(-). Rejects a direction that leaves some zero-rate
/// phases at zero while moving others.
PerturbationSpec make_rate_perturbation(const FluidModel& model,
                                        const Vector& direction);

}  // namespace fluidpert

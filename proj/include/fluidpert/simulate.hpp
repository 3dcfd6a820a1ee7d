#pragma once

#include <cstdint>

#include "fluidpert/core.hpp"

namespace fluidpert {

struct SimConfig {
  /// Paths per start phase (estimate_psi) or independent runs
  /// (estimate_density).
  std::int64_t replications = 10000;
  std::uint64_t seed = 1;
  double max_time = 1e4;
  double burn_in = 0.0;
  /// Worker threads; results do not depend on this.
  unsigned threads = 1;
};

struct PsiEstimate {
  /// Rows S+, columns S- (partition order).
  Matrix estimate;
  Matrix std_error;
  /// Fraction of all paths cut at max_time.
  double censored_fraction = 0.0;
  /// Per start phase.
  Vector censored;
  std::int64_t replications = 0;
};

/// Monte Carlo estimate of Psi: start the free level at 0 in each phase of S+
/// and record the phase in which it first goes below 0. Path r of start
/// phase i draws from its own generator seeded by (seed, i, r).
PsiEstimate estimate_psi(const FluidModel& model, const SimConfig& cfg);

struct DensityGrid {
  double bin_width = 0.1;
  int bins = 100;
};

/// Time-average occupation of the reflected process. `mass` is bins x n in
/// phase order; `density` is mass / bin_width. Bins, overflow and atoms add up
/// to one.
struct DensityHistogram {
  Vector edges;
  Matrix mass;
  Matrix density;
  RowVector overflow;
  RowVector atoms;
  double observed_time = 0.0;
};

/// Throws NotRecurrent when the mean drift is not negative.
DensityHistogram estimate_density(const FluidModel& model, const SimConfig& cfg,
                                  const DensityGrid& grid = {});

/// Stream seed for replication `index` of stream `stream`.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t index);

}  // namespace fluidpert

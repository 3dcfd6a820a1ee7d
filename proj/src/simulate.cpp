#include "fluidpert/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "fluidpert/errors.hpp"

namespace fluidpert {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Embedded jump chain of the phase process. Read-only after construction,
/// so one instance serves every worker.
class PhaseChain {
 public:
  explicit PhaseChain(const Matrix& a) : rates_(a.rows()), cumulative_(a.rows()) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      rates_[i] = -a(i, i);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (j != i) acc += a(i, j);
        cumulative_[i].push_back(acc);
      }
    }
  }

  double holding(Eigen::Index k, std::mt19937_64& rng) const {
    return std::exponential_distribution<double>(rates_[k])(rng);
  }
  Eigen::Index next(Eigen::Index k, std::mt19937_64& rng) const {
    const std::vector<double>& row = cumulative_[k];
    const double u = std::uniform_real_distribution<double>(0.0, row.back())(rng);
    const auto it = std::upper_bound(row.begin(), row.end(), u);
    return std::min<Eigen::Index>(it - row.begin(), row.size() - 1);
  }

 private:
  std::vector<double> rates_;
  std::vector<std::vector<double>> cumulative_;
};

unsigned worker_count(unsigned requested) {
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

template <class Body>
void parallel_for(std::int64_t count, unsigned threads, Body body) {
  threads = static_cast<unsigned>(std::min<std::int64_t>(worker_count(threads),
                                                         std::max<std::int64_t>(count, 1)));
  if (threads <= 1) {
    for (std::int64_t r = 0; r < count; ++r) body(0u, r);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t r = w; r < count; r += threads) body(w, r);
    });
  }
  for (auto& t : pool) t.join();
}

// Adds `duration` time units spent moving linearly from level y at rate c.
struct Occupation {
  double width;
  int bins;
  Matrix mass;
  RowVector overflow;
  RowVector atoms;

  Occupation(const DensityGrid& g, Eigen::Index phases)
      : width(g.bin_width),
        bins(g.bins),
        mass(Matrix::Zero(g.bins, phases)),
        overflow(RowVector::Zero(phases)),
        atoms(RowVector::Zero(phases)) {}

  void segment(Eigen::Index k, double lo, double hi, double speed) {
    const double top = width * bins;
    if (hi > top) {
      overflow(k) += (hi - std::max(lo, top)) / speed;
      hi = top;
    }
    if (lo >= hi) return;
    int b = static_cast<int>(lo / width);
    for (; b < bins; ++b) {
      const double left = b * width;
      const double right = left + width;
      if (left >= hi) break;
      const double overlap = std::min(hi, right) - std::max(lo, left);
      if (overlap > 0.0) mass(b, k) += overlap / speed;
    }
  }

  void add(Eigen::Index k, double y, double c, double duration) {
    if (duration <= 0.0) return;
    if (c == 0.0) {
      if (y == 0.0) {
        atoms(k) += duration;
      } else if (y >= width * bins) {
        overflow(k) += duration;
      } else {
        mass(static_cast<int>(y / width), k) += duration;
      }
    } else if (c > 0.0) {
      segment(k, y, y + c * duration, c);
    } else {
      const double to_zero = y / -c;
      if (duration <= to_zero) {
        segment(k, y + c * duration, y, -c);
      } else {
        segment(k, 0.0, y, -c);
        atoms(k) += duration - to_zero;
      }
    }
  }
};

}  // namespace

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

PsiEstimate estimate_psi(const FluidModel& model, const SimConfig& cfg) {
  if (cfg.replications < 1 || !(cfg.max_time > 0.0)) {
    throw Error(ErrorCode::Parse, "replications must be >= 1 and max_time > 0");
  }
  const Partition& part = model.partition();
  const Eigen::Index np = static_cast<Eigen::Index>(part.plus.size());
  const Eigen::Index nm = static_cast<Eigen::Index>(part.minus.size());
  std::vector<Eigen::Index> column(model.size(), -1);
  for (Eigen::Index j = 0; j < nm; ++j) column[part.minus[j]] = j;

  const PhaseChain chain(model.generator());
  const Vector& c = model.rates();
  const unsigned workers = worker_count(cfg.threads);
  // Integer tallies per worker: merging them is order-independent.
  std::vector<std::vector<std::int64_t>> hits(
      workers, std::vector<std::int64_t>(np * (nm + 1), 0));

  for (Eigen::Index i = 0; i < np; ++i) {
    const Eigen::Index start = part.plus[i];
    parallel_for(cfg.replications, workers, [&](unsigned w, std::int64_t r) {
      std::mt19937_64 rng(replication_seed(cfg.seed, start, r));
      Eigen::Index k = start;
      double y = 0.0;
      double t = 0.0;
      Eigen::Index slot = nm;  // censored unless a crossing is found
      while (t < cfg.max_time) {
        const double tau = chain.holding(k, rng);
        if (c(k) < 0.0 && y + c(k) * tau <= 0.0) {
          if (t + y / -c(k) <= cfg.max_time) slot = column[k];
          break;
        }
        y += c(k) * tau;
        t += tau;
        k = chain.next(k, rng);
      }
      ++hits[w][i * (nm + 1) + slot];
    });
  }

  PsiEstimate out;
  out.replications = cfg.replications;
  out.estimate = Matrix::Zero(np, nm);
  out.std_error = Matrix::Zero(np, nm);
  out.censored = Vector::Zero(np);
  const double n = static_cast<double>(cfg.replications);
  for (Eigen::Index i = 0; i < np; ++i) {
    for (Eigen::Index j = 0; j <= nm; ++j) {
      std::int64_t total = 0;
      for (const auto& h : hits) total += h[i * (nm + 1) + j];
      const double f = static_cast<double>(total) / n;
      if (j == nm) {
        out.censored(i) = f;
      } else {
        out.estimate(i, j) = f;
        out.std_error(i, j) = std::sqrt(f * (1.0 - f) / n);
      }
    }
  }
  out.censored_fraction = np > 0 ? out.censored.mean() : 0.0;
  return out;
}

DensityHistogram estimate_density(const FluidModel& model, const SimConfig& cfg,
                                  const DensityGrid& grid) {
  const double drift = mean_drift(model);
  if (!(drift < 0.0)) {
    throw Error(ErrorCode::NotRecurrent,
                "mean drift " + std::to_string(drift) + " is not negative");
  }
  if (cfg.replications < 1 || !(cfg.max_time > cfg.burn_in) || cfg.burn_in < 0.0 ||
      grid.bins < 1 || !(grid.bin_width > 0.0)) {
    throw Error(ErrorCode::Parse, "invalid simulation configuration");
  }
  const PhaseChain chain(model.generator());
  const Vector& c = model.rates();
  const Eigen::Index n = model.size();
  const RowVector xi = stationary_phase_dist(model);

  // One slot per replication, summed in replication order afterwards.
  std::vector<Occupation> runs(cfg.replications, Occupation(grid, n));
  parallel_for(cfg.replications, cfg.threads, [&](unsigned, std::int64_t r) {
    std::mt19937_64 rng(replication_seed(cfg.seed, n, r));
    Eigen::Index k = std::discrete_distribution<Eigen::Index>(
        xi.data(), xi.data() + n)(rng);
    Occupation& occ = runs[r];
    double y = 0.0;
    double t = 0.0;
    while (t < cfg.max_time) {
      const double tau = std::min(chain.holding(k, rng), cfg.max_time - t);
      double y_end = std::max(0.0, y + c(k) * tau);
      if (t + tau > cfg.burn_in) {
        const double skip = std::max(0.0, cfg.burn_in - t);
        const double y_from = std::max(0.0, y + c(k) * skip);
        occ.add(k, y_from, c(k), tau - skip);
      }
      y = y_end;
      t += tau;
      k = chain.next(k, rng);
    }
  });

  DensityHistogram out;
  Occupation total(grid, n);
  for (const Occupation& o : runs) {
    total.mass += o.mass;
    total.overflow += o.overflow;
    total.atoms += o.atoms;
  }
  out.observed_time = total.mass.sum() + total.overflow.sum() + total.atoms.sum();
  out.mass = total.mass / out.observed_time;
  out.overflow = total.overflow / out.observed_time;
  out.atoms = total.atoms / out.observed_time;
  out.density = out.mass / grid.bin_width;
  out.edges = Vector::LinSpaced(grid.bins + 1, 0.0, grid.bin_width * grid.bins);
  return out;
}

}  // namespace fluidpert

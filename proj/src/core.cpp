#include "fluidpert/core.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "fluidpert/errors.hpp"

namespace fluidpert {

IndexList Partition::canonical() const {
  IndexList order;
  order.reserve(plus.size() + zero.size() + minus.size());
  order.insert(order.end(), plus.begin(), plus.end());
  order.insert(order.end(), zero.begin(), zero.end());
  order.insert(order.end(), minus.begin(), minus.end());
  return order;
}

Matrix FluidModel::plus_rate_inv() const {
  return rates_(partition_.plus).cwiseInverse().asDiagonal();
}

Matrix FluidModel::minus_rate_abs_inv() const {
  return inverse_abs_diag(rates_(partition_.minus));
}

FluidModel make_model(const Matrix& a, const Vector& c, Partition partition,
                      std::vector<std::string> labels) {
  FluidModel model;
  model.generator_ = a;
  model.rates_ = c;
  model.partition_ = std::move(partition);
  model.labels_ = std::move(labels);
  return model;
}

bool is_irreducible(const Matrix& a) {
  const Eigen::Index n = a.rows();
  if (n <= 1) return true;
  // Forward and backward reachability from phase 0.
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = transpose ? a(j, i) : a(i, j);
        if (j != i && w > 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

namespace {

void check_generator(const Matrix& a, const Vector& c,
                     const std::vector<std::string>& labels,
                     const ModelTolerances& tol) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "A must be square");
  }
  if (c.size() != a.rows()) {
    std::ostringstream msg;
    msg << "A is " << a.rows() << "x" << a.cols() << " but c has length "
        << c.size();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != c.size()) {
    throw Error(ErrorCode::DimensionMismatch, "labels length differs from c");
  }
  if (a.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "empty model");
  }
  require_finite(a, "A");
  require_finite(c, "c");

  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && a(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "negative off-diagonal A(" << i << "," << j << ") = " << a(i, j);
        throw Error(ErrorCode::NotAGenerator, msg.str());
      }
    }
  }
  const double bound = tol.row_sum_rel * inf_norm(a);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = a.row(i).sum();
    if (std::abs(s) > bound) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " sums to " << s << " (tolerance " << bound << ")";
      throw Error(ErrorCode::NotAGenerator, msg.str());
    }
  }
  if (!is_irreducible(a)) {
    throw Error(ErrorCode::Reducible,
                "transition graph of A is not strongly connected");
  }
}

}  // namespace

FluidModel validate_model(const Matrix& a, const Vector& c,
                          std::vector<std::string> labels,
                          const ModelTolerances& tol) {
  check_generator(a, c, labels, tol);
  Partition partition;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c(i) > 0.0) {
      partition.plus.push_back(i);
    } else if (c(i) < 0.0) {
      partition.minus.push_back(i);
    } else {
      partition.zero.push_back(i);
    }
  }
  return make_model(a, c, std::move(partition), std::move(labels));
}

FluidModel validate_model_ordered(const Matrix& a, const Vector& c,
                                  Partition order,
                                  std::vector<std::string> labels,
                                  const ModelTolerances& tol) {
  check_generator(a, c, labels, tol);
  IndexList all = order.canonical();
  std::sort(all.begin(), all.end());
  bool cover = static_cast<Eigen::Index>(all.size()) == c.size();
  for (std::size_t k = 0; cover && k < all.size(); ++k) {
    cover = all[k] == static_cast<Eigen::Index>(k);
  }
  if (!cover) {
    throw Error(ErrorCode::DimensionMismatch,
                "partition is not a disjoint cover of the phases");
  }
  auto check_sign = [&](const IndexList& set, int sign, const char* name) {
    for (Eigen::Index i : set) {
      const int s = (c(i) > 0.0) - (c(i) < 0.0);
      if (s != sign) {
        std::ostringstream msg;
        msg << "phase " << i << " with rate " << c(i) << " listed in " << name;
        throw Error(ErrorCode::DimensionMismatch, msg.str());
      }
    }
  };
  check_sign(order.plus, 1, "S+");
  check_sign(order.zero, 0, "S0");
  check_sign(order.minus, -1, "S-");
  return make_model(a, c, std::move(order), std::move(labels));
}

RowVector stationary_phase_dist(const FluidModel& model) {
  const Eigen::Index n = model.size();
  // xi A = 0 with the last equation swapped for xi 1 = 1.
  Matrix system = model.generator().transpose();
  system.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  try {
    return solve_linear(system, rhs).transpose();
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularSystem,
                std::string("stationary distribution: ") + e.what());
  }
}

double mean_drift(const FluidModel& model) {
  return stationary_phase_dist(model).dot(model.rates());
}

Matrix CensoredBlocks::assembled() const {
  Matrix q(pp.rows() + mp.rows(), pp.cols() + pm.cols());
  q << pp, pm, mp, mm;
  return q;
}

CensoredBlocks censor_zero_phases(const FluidModel& model) {
  const Partition& p = model.partition();
  CensoredBlocks q{model.block(p.plus, p.plus), model.block(p.plus, p.minus),
                   model.block(p.minus, p.plus),
                   model.block(p.minus, p.minus)};
  if (p.zero.empty()) return q;

  Matrix escape;  // (-A00)^{-1} [A0+ A0-]
  try {
    Matrix rhs(p.zero.size(), p.plus.size() + p.minus.size());
    rhs << model.block(p.zero, p.plus), model.block(p.zero, p.minus);
    escape = solve_linear(-model.block(p.zero, p.zero), rhs);
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularBlock, std::string("A00: ") + e.what());
  }
  const auto np = static_cast<Eigen::Index>(p.plus.size());
  const auto nm = static_cast<Eigen::Index>(p.minus.size());
  const Matrix from_plus = model.block(p.plus, p.zero) * escape;
  const Matrix from_minus = model.block(p.minus, p.zero) * escape;
  q.pp += from_plus.leftCols(np);
  q.pm += from_plus.rightCols(nm);
  q.mp += from_minus.leftCols(np);
  q.mm += from_minus.rightCols(nm);
  return q;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::Unaffected: return "Unaffected";
    case Regime::ToPlus: return "ToPlus";
    case Regime::ToMinus: return "ToMinus";
    case Regime::General: return "General";
  }
  return "?";
}

PerturbationSpec make_generator_perturbation(const FluidModel& model,
                                             const Matrix& direction) {
  const Matrix& a = model.generator();
  if (direction.rows() != a.rows() || direction.cols() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "generator direction must match the shape of A");
  }
  require_finite(direction, "generator direction");
  const double bound = 1e-12 * std::max(1.0, inf_norm(direction));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (std::abs(direction.row(i).sum()) > bound) {
      throw Error(ErrorCode::InvalidPerturbation,
                  "row " + std::to_string(i) + " of the direction does not sum to 0");
    }
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) == 0.0 && direction(i, j) < 0.0) {
        throw Error(ErrorCode::InvalidPerturbation,
                    "direction is negative at a structural zero of A (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  PerturbationSpec spec;
  spec.kind = PerturbationKind::Generator;
  spec.generator_direction = direction;
  return spec;
}

PerturbationSpec make_rate_perturbation(const FluidModel& model,
                                        const Vector& direction) {
  if (direction.size() != model.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "rate direction must have one entry per phase");
  }
  require_finite(direction, "rate direction");
  PerturbationSpec spec;
  spec.kind = PerturbationKind::Rate;
  spec.rate_direction = direction;
  std::size_t still = 0;
  for (Eigen::Index i : model.partition().zero) {
    if (direction(i) > 0.0) {
      spec.oplus.push_back(i);
    } else if (direction(i) < 0.0) {
      spec.ominus.push_back(i);
    } else {
      ++still;
    }
  }
  const std::size_t moved = spec.oplus.size() + spec.ominus.size();
  if (still > 0 && moved > 0) {
    throw Error(ErrorCode::InvalidPerturbation,
                "some zero-rate phases move and others stay at zero");
  }
  if (moved == 0) {
    spec.regime = Regime::Unaffected;
  } else if (spec.ominus.empty()) {
    spec.regime = Regime::ToPlus;
  } else if (spec.oplus.empty()) {
    spec.regime = Regime::ToMinus;
  } else {
    spec.regime = Regime::General;
  }
  return spec;
}

}  // namespace fluidpert

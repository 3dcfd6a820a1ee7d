#include "fluidpert/riccati.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "fluidpert/errors.hpp"

namespace fluidpert {

double RiccatiCoefficients::scale() const {
  Matrix stacked(a.rows() + e.rows(), a.cols() + b.cols());
  stacked << a, b, e, d;
  return inf_norm(stacked);
}

Matrix riccati_residual(const RiccatiCoefficients& c, const Matrix& x) {
  return c.b + c.a * x + x * c.d + x * c.e * x;
}

RiccatiResult solve_riccati(const RiccatiCoefficients& c,
                            const NewtonOptions& options) {
  const double target = options.tol * std::max(1.0, c.scale());
  RiccatiResult out;
  out.x = Matrix::Zero(c.b.rows(), c.b.cols());
  Matrix f = riccati_residual(c, out.x);
  out.residual = inf_norm(f);
  out.residual_history.push_back(out.residual);
  if (options.on_iterate) options.on_iterate(out.x);

  auto newton_step = [&](const Matrix& x, const Matrix& fx) {
    return solve_sylvester(c.a + x * c.e, c.d + c.e * x, -fx);
  };

  while (out.residual > target) {
    if (out.iterations >= options.max_newton) {
      std::ostringstream msg;
      msg << "Newton did not reach " << target << " in " << options.max_newton
          << " steps (residual " << out.residual << ")";
      throw Error(ErrorCode::NoConvergence, msg.str());
    }
    const Matrix delta = newton_step(out.x, f);
    double step = 1.0;
    Matrix next = out.x + delta;
    Matrix f_next = riccati_residual(c, next);
    double r_next = inf_norm(f_next);
    int halvings = 0;
    while (!(r_next < out.residual) && halvings < options.max_halvings) {
      step *= 0.5;
      next = out.x + step * delta;
      f_next = riccati_residual(c, next);
      r_next = inf_norm(f_next);
      ++halvings;
    }
    if (!(r_next < out.residual)) {
      std::ostringstream msg;
      msg << "Newton stagnated at residual " << out.residual << " after "
          << out.iterations << " steps (target " << target << ")";
      throw Error(ErrorCode::NoConvergence, msg.str());
    }
    out.halvings += halvings;
    out.x = std::move(next);
    f = std::move(f_next);
    out.residual = r_next;
    out.residual_history.push_back(r_next);
    ++out.iterations;
    if (options.on_iterate) options.on_iterate(out.x);
  }

  out.converged_at = out.residual_history.size() - 1;
  out.target = target;

  if (options.polish) {
    double last_step = std::numeric_limits<double>::infinity();
    for (int k = 0; k < options.max_polish && out.residual > 0.0; ++k) {
      const Matrix delta = newton_step(out.x, f);
      const double step = inf_norm(delta);
      if (!(step < 0.5 * last_step)) break;
      Matrix next = out.x + delta;
      Matrix f_next = riccati_residual(c, next);
      const double r_next = inf_norm(f_next);
      if (!(r_next <= target)) break;
      out.x = std::move(next);
      f = std::move(f_next);
      out.residual = r_next;
      out.residual_history.push_back(r_next);
      ++out.iterations;
      if (options.on_iterate) options.on_iterate(out.x);
      if (step <= 1e-15 * std::max(1.0, inf_norm(out.x))) break;
      last_step = step;
    }
  }
  return out;
}

RiccatiCoefficients fluid_coefficients(const FluidModel& model) {
  const CensoredBlocks q = censor_zero_phases(model);
  const Matrix cp = model.plus_rate_inv();
  const Matrix cm = model.minus_rate_abs_inv();
  return {cp * q.pp, cp * q.pm, cm * q.mm, cm * q.mp};
}

UKPair build_UK(const FluidModel& model, const Matrix& psi) {
  const Partition& p = model.partition();
  if (psi.rows() != static_cast<Eigen::Index>(p.plus.size()) ||
      psi.cols() != static_cast<Eigen::Index>(p.minus.size())) {
    throw Error(ErrorCode::DimensionMismatch, "Psi must be |S+| x |S-|");
  }
  const RiccatiCoefficients c = fluid_coefficients(model);
  return {c.d + c.e * psi, c.a + psi * c.e};
}

PsiSolution solve_psi(const FluidModel& model, const NewtonOptions& options) {
  const Partition& p = model.partition();
  if (p.plus.empty() || p.minus.empty()) {
    throw Error(ErrorCode::EmptySide, "Psi needs phases of both signs");
  }
  const RiccatiCoefficients coeffs = fluid_coefficients(model);
  RiccatiResult r = solve_riccati(coeffs, options);
  PsiSolution sol;
  sol.U = coeffs.d + coeffs.e * r.x;
  sol.K = coeffs.a + r.x * coeffs.e;
  sol.psi = std::move(r.x);
  sol.iterations = r.iterations;
  sol.residual = r.residual;
  sol.residual_history = std::move(r.residual_history);
  sol.rows = p.plus;
  sol.cols = p.minus;
  return sol;
}

FluidModel perturbed_model(const FluidModel& model, const PerturbationSpec& spec,
                           double eps) {
  const Partition& base = model.partition();
  try {
    if (spec.kind == PerturbationKind::Generator) {
      const Matrix a = model.generator() + eps * spec.generator_direction;
      return validate_model_ordered(a, model.rates(), base, model.labels());
    }

    const Vector c = model.rates() + eps * spec.rate_direction;
    auto require = [&](const IndexList& set, bool positive, const char* what) {
      for (Eigen::Index i : set) {
        if (positive ? !(c(i) > 0.0) : !(c(i) < 0.0)) {
          std::ostringstream msg;
          msg << what << " phase " << i << " has rate " << c(i)
              << " at eps=" << eps;
          throw Error(ErrorCode::InvalidEpsilon, msg.str());
        }
      }
    };
    require(base.plus, true, "S+");
    require(base.minus, false, "S-");
    require(spec.oplus, true, "S(+)");
    require(spec.ominus, false, "S(-)");

    Partition order;
    order.plus = base.plus;
    order.plus.insert(order.plus.end(), spec.oplus.begin(), spec.oplus.end());
    if (spec.regime == Regime::Unaffected) order.zero = base.zero;
    order.minus = spec.ominus;
    order.minus.insert(order.minus.end(), base.minus.begin(), base.minus.end());
    return validate_model_ordered(model.generator(), c, std::move(order),
                                  model.labels());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidEpsilon) throw;
    throw Error(ErrorCode::InvalidEpsilon,
                std::string("perturbed model rejected: ") + e.what());
  }
}

PsiSolution solve_psi_at(const FluidModel& model, const PerturbationSpec& spec,
                         double eps, const NewtonOptions& options) {
  return solve_psi(perturbed_model(model, spec, eps), options);
}

}  // namespace fluidpert

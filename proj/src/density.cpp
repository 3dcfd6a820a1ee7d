#include "fluidpert/density.hpp"

#include <cmath>

#include "fluidpert/errors.hpp"
#include "fluidpert/perturb.hpp"

namespace fluidpert {
namespace {

IndexList concat(const IndexList& a, const IndexList& b) {
  IndexList out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

RowVector scatter(const RowVector& v, const IndexList& columns,
                  Eigen::Index phases) {
  RowVector out = RowVector::Zero(phases);
  for (std::size_t k = 0; k < columns.size(); ++k) out(columns[k]) = v(k);
  return out;
}

Matrix zero_coupling(const FluidModel& model, const Matrix& a, const Matrix& psi,
                     const Matrix& a_tilde, const Matrix& psi1) {
  // [A-- + A-+ Psi, A-0; A0- + A0+ Psi, A00] and its eps-derivative when
  // a_tilde is given.
  const Partition& p = model.partition();
  const IndexList rows = concat(p.minus, p.zero);
  Matrix out(rows.size(), rows.size());
  const Eigen::Index nm = static_cast<Eigen::Index>(p.minus.size());
  const Eigen::Index nz = static_cast<Eigen::Index>(p.zero.size());
  Matrix first = pick(a, rows, p.minus) + pick(a, rows, p.plus) * psi;
  if (psi1.size() > 0) first += pick(a_tilde, rows, p.plus) * psi1;
  out.leftCols(nm) = first;
  out.rightCols(nz) = pick(a, rows, p.zero);
  return out;
}

}  // namespace

double StationaryLaw::continuous_mass() const {
  return (q * solve_linear(-K, bracket.rowwise().sum()))(0);
}

RowVector StationaryLaw::atoms() const {
  return scatter(p, IndexList(columns.begin() + K.rows(), columns.end()), phases);
}

StationaryLaw stationary_law(const FluidModel& model, const PsiSolution& base) {
  const double drift = mean_drift(model);
  if (!(drift < 0.0)) {
    throw Error(ErrorCode::NotRecurrent,
                "mean drift " + std::to_string(drift) + " is not negative");
  }
  const Partition& part = model.partition();
  const Matrix cp = model.plus_rate_inv();
  const Matrix cm = model.minus_rate_abs_inv();
  const Matrix& psi = base.psi;
  const Eigen::Index np = static_cast<Eigen::Index>(part.plus.size());
  const Eigen::Index nm = static_cast<Eigen::Index>(part.minus.size());
  const Eigen::Index nz = static_cast<Eigen::Index>(part.zero.size());

  StationaryLaw law;
  law.phases = model.size();
  law.psi = psi;
  law.K = base.K;
  law.columns = concat(concat(part.plus, part.minus), part.zero);
  if (nz > 0) {
    law.theta = (cp * model.block(part.plus, part.zero) +
                 psi * cm * model.block(part.minus, part.zero)) *
                inverse(-model.block(part.zero, part.zero));
  } else {
    law.theta = Matrix::Zero(np, 0);
  }
  law.bracket.resize(np, np + nm + nz);
  law.bracket << cp, psi * cm, law.theta;

  law.level_zero = zero_coupling(model, model.generator(), psi, Matrix(), Matrix());
  Matrix bordered = law.level_zero;
  bordered.col(bordered.cols() - 1).setOnes();
  Vector rhs = Vector::Zero(bordered.rows());
  rhs(rhs.size() - 1) = 1.0;
  try {
    law.p = solve_linear(bordered.transpose(), rhs).transpose();
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularSystem,
                std::string("level-zero null vector: ") + e.what());
  }
  const IndexList zero_rows = concat(part.minus, part.zero);
  RowVector q = law.p * model.block(zero_rows, part.plus);
  const double scale = law.p.sum() + (q * solve_linear(-law.K,
                                                        law.bracket.rowwise().sum()))(0);
  if (!std::isfinite(scale) || std::abs(scale) < 1e-300) {
    throw Error(ErrorCode::SingularNormalization, "normalising constant vanishes");
  }
  law.p /= scale;
  law.q = q / scale;
  law.p_minus = law.p.head(nm);
  law.p_zero = law.p.tail(nz);
  return law;
}

RowVector density_at(const StationaryLaw& law, double x) {
  const RowVector row = law.q * matrix_exp(law.K * x) * law.bracket;
  return scatter(row, law.columns, law.phases);
}

Matrix FirstOrderLaw::L1(double x) const { return conv_integral(K, K1, x); }

RowVector FirstOrderLaw::atoms(const StationaryLaw& law) const {
  RowVector p1(p1_minus.size() + p1_zero.size());
  p1 << p1_minus, p1_zero;
  const Eigen::Index np = law.K.rows();
  return scatter(p1, IndexList(law.columns.begin() + np, law.columns.end()),
                 law.phases);
}

FirstOrderLaw first_order_law(const FluidModel& model, const PsiSolution& base,
                              const StationaryLaw& law,
                              const PerturbationSpec& spec) {
  if (spec.kind != PerturbationKind::Generator) {
    throw Error(ErrorCode::NotGeneratorKind,
                "density corrections need a generator perturbation");
  }
  const Partition& part = model.partition();
  const Matrix& a = model.generator();
  const Matrix& at = spec.generator_direction;
  const Matrix cp = model.plus_rate_inv();
  const Matrix cm = model.minus_rate_abs_inv();
  const Matrix& psi = base.psi;
  const Eigen::Index np = static_cast<Eigen::Index>(part.plus.size());
  const Eigen::Index nm = static_cast<Eigen::Index>(part.minus.size());
  const Eigen::Index nz = static_cast<Eigen::Index>(part.zero.size());

  FirstOrderLaw fol;
  fol.K = law.K;
  fol.psi1 = psi1_generator(model, base, at);
  const CensoredBlocks q = censor_zero_phases(model);
  const CensoredBlocks qt = q_tilde(model, at);
  fol.K1 = cp * qt.pp + fol.psi1 * cm * q.mp + psi * cm * qt.mp;

  if (nz > 0) {
    const IndexList& z = part.zero;
    const Matrix inv = inverse(-model.block(z, z));
    fol.theta1 = (cp * pick(at, part.plus, z) + fol.psi1 * cm * pick(a, part.minus, z) +
                  psi * cm * pick(at, part.minus, z)) * inv +
                 (cp * pick(a, part.plus, z) + psi * cm * pick(a, part.minus, z)) *
                     inv * pick(at, z, z) * inv;
  } else {
    fol.theta1 = Matrix::Zero(np, 0);
  }
  fol.bracket1.resize(np, np + nm + nz);
  fol.bracket1 << Matrix::Zero(np, np), fol.psi1 * cm, fol.theta1;

  // Differentiating p M = 0 gives the Poisson equation p1 M = -p M1, solved
  // with the group inverse; the null direction p is fixed by the derivative
  // of the normalisation.
  Matrix m1 = zero_coupling(model, at, psi, a, fol.psi1);
  const RowVector pi_m = law.p / law.p.sum();
  const RowVector r = -law.p * m1 * group_inverse(law.level_zero, pi_m);

  const IndexList zero_rows = concat(part.minus, part.zero);
  const RowVector q_r = r * model.block(zero_rows, part.plus) +
                        law.p * pick(at, zero_rows, part.plus);
  const Matrix neg_k = -law.K;
  const Vector v = law.bracket.rowwise().sum();
  const Vector v1 = fol.bracket1.rowwise().sum();
  const Vector kv = solve_linear(neg_k, v);
  const double c = -(r.sum() + (q_r * kv)(0) +
                     (law.q * solve_linear(neg_k, fol.K1 * kv))(0) +
                     (law.q * solve_linear(neg_k, v1))(0));
  const RowVector p1 = r + c * law.p;
  fol.q1 = q_r + c * law.q;
  fol.p1_minus = p1.head(nm);
  fol.p1_zero = p1.tail(nz);
  return fol;
}

RowVector density1_at(const FirstOrderLaw& fol, const StationaryLaw& law,
                      double x) {
  const Matrix e = matrix_exp(law.K * x);
  const RowVector row = law.q * e * fol.bracket1 +
                        (fol.q1 * e + law.q * fol.L1(x)) * law.bracket;
  return scatter(row, law.columns, law.phases);
}

}  // namespace fluidpert

#include "fluidpert/perturb.hpp"

#include <utility>

#include "fluidpert/errors.hpp"

namespace fluidpert {
namespace {

Vector sub(const Vector& v, const IndexList& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(k) = v(idx[k]);
  return out;
}

Matrix diag(const Vector& v, const IndexList& idx) {
  return sub(v, idx).asDiagonal();
}

IndexList concat(const IndexList& a, const IndexList& b) {
  IndexList out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void require_base(const FluidModel& model, const PsiSolution& base) {
  const Partition& p = model.partition();
  if (base.psi.rows() != static_cast<Eigen::Index>(p.plus.size()) ||
      base.psi.cols() != static_cast<Eigen::Index>(p.minus.size()) ||
      base.K.rows() != base.psi.rows() || base.U.rows() != base.psi.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "Psi solution does not belong to this model");
  }
}

void require_rate(const FluidModel& model, const PerturbationSpec& spec,
                  Regime regime) {
  if (spec.kind != PerturbationKind::Rate || spec.regime != regime) {
    throw Error(ErrorCode::WrongRegime,
                std::string("expected a rate perturbation in regime ") +
                    to_string(regime) + ", got " +
                    (spec.kind == PerturbationKind::Generator
                         ? "a generator perturbation"
                         : to_string(spec.regime)));
  }
  if (spec.rate_direction.size() != model.size()) {
    throw Error(ErrorCode::DimensionMismatch, "rate direction length");
  }
}

/// Terms shared by every rate regime: -Psi|C-^{-1}|C~- U - C+^{-1}C~+ Psi U.
Matrix rate_rhs(const FluidModel& model, const PsiSolution& base,
                const Vector& c_tilde) {
  const Partition& p = model.partition();
  return -base.psi * model.minus_rate_abs_inv() * diag(c_tilde, p.minus) *
             base.U -
         model.plus_rate_inv() * diag(c_tilde, p.plus) * base.psi * base.U;
}

PsiExpansion layout(const FluidModel& model, const PerturbationSpec& spec,
                    Regime regime) {
  const Partition& p = model.partition();
  PsiExpansion out;
  out.regime = regime;
  out.rows = concat(p.plus, spec.oplus);
  out.cols = concat(spec.ominus, p.minus);
  out.plus_rows = static_cast<Eigen::Index>(p.plus.size());
  out.ominus_cols = static_cast<Eigen::Index>(spec.ominus.size());
  return out;
}

// Inner problem on the split zero-rate phases, rates C~(+) and |C~(-)|.
struct Inner {
  Matrix coi;   // C~(+)^{-1}
  Matrix cni;   // |C~(-)^{-1}|
  Matrix g0;    // Psi_(+)(-)
  Matrix k_oo;  // K^(-1)_(+)(+)
  Matrix u_nn;  // U^(-1)_(-)(-)
};

Inner inner_problem(const FluidModel& model, const PerturbationSpec& spec,
                    const NewtonOptions& options) {
  require_rate(model, spec, Regime::General);
  const IndexList& o = spec.oplus;
  const IndexList& n = spec.ominus;
  Inner in;
  in.coi = inverse_abs_diag(sub(spec.rate_direction, o));
  in.cni = inverse_abs_diag(sub(spec.rate_direction, n));
  const RiccatiCoefficients rc{in.coi * model.block(o, o),
                               in.coi * model.block(o, n),
                               in.cni * model.block(n, n),
                               in.cni * model.block(n, o)};
  try {
    in.g0 = solve_riccati(rc, options).x;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoConvergence) throw;
    throw Error(ErrorCode::InnerRiccatiDiverged, e.what());
  }
  in.k_oo = rc.a + in.g0 * rc.e;
  in.u_nn = rc.d + rc.e * in.g0;
  return in;
}

}  // namespace

CensoredBlocks q_tilde(const FluidModel& model, const Matrix& a_tilde) {
  if (a_tilde.rows() != model.size() || a_tilde.cols() != model.size()) {
    throw Error(ErrorCode::DimensionMismatch, "A~ must match A");
  }
  const Partition& p = model.partition();
  const IndexList s = concat(p.plus, p.minus);
  const IndexList& z = p.zero;
  Matrix q = pick(a_tilde, s, s);
  if (!z.empty()) {
    const Matrix inv = inverse(-model.block(z, z));
    const Matrix right = inv * model.block(z, s);
    const Matrix left = model.block(s, z) * inv;
    q += pick(a_tilde, s, z) * right + left * pick(a_tilde, z, z) * right +
         left * pick(a_tilde, z, s);
  }
  const Eigen::Index np = static_cast<Eigen::Index>(p.plus.size());
  const Eigen::Index nm = static_cast<Eigen::Index>(p.minus.size());
  return {q.topLeftCorner(np, np), q.topRightCorner(np, nm),
          q.bottomLeftCorner(nm, np), q.bottomRightCorner(nm, nm)};
}

Matrix psi1_generator(const FluidModel& model, const PsiSolution& base,
                      const Matrix& a_tilde) {
  require_base(model, base);
  const CensoredBlocks qt = q_tilde(model, a_tilde);
  const Matrix cp = model.plus_rate_inv();
  const Matrix cm = model.minus_rate_abs_inv();
  const Matrix& psi = base.psi;
  const Matrix h = -cp * qt.pm - cp * qt.pp * psi - psi * cm * qt.mm -
                   psi * cm * qt.mp * psi;
  return solve_sylvester(base.K, base.U, h);
}

Matrix psi1_rate_unaffected(const FluidModel& model, const PsiSolution& base,
                            const Vector& c_tilde) {
  require_base(model, base);
  if (c_tilde.size() != model.size()) {
    throw Error(ErrorCode::DimensionMismatch, "rate direction length");
  }
  return solve_sylvester(base.K, base.U, rate_rhs(model, base, c_tilde));
}

PsiExpansion expand_to_plus(const FluidModel& model, const PsiSolution& base,
                            const PerturbationSpec& spec) {
  require_rate(model, spec, Regime::ToPlus);
  require_base(model, base);
  const Partition& p = model.partition();
  const IndexList& o = spec.oplus;
  const Matrix cp = model.plus_rate_inv();
  const Matrix cm = model.minus_rate_abs_inv();
  const Matrix& psi = base.psi;

  const Matrix inv_oo = inverse(-model.block(o, o));
  const Matrix c_o = diag(spec.rate_direction, o);
  const Matrix psi_om =
      inv_oo * (model.block(o, p.minus) + model.block(o, p.plus) * psi);
  const Matrix k_po = cp * model.block(p.plus, o) + psi * cm * model.block(p.minus, o);
  const Matrix p_oplus = k_po * inv_oo * c_o * psi_om;

  const Matrix h = rate_rhs(model, base, spec.rate_direction) - p_oplus * base.U;
  const Matrix x_pm = solve_sylvester(base.K, base.U, h);
  const Matrix x_om =
      inv_oo * c_o * psi_om * base.U + inv_oo * model.block(o, p.plus) * x_pm;

  PsiExpansion out = layout(model, spec, Regime::ToPlus);
  out.psi_bar.resize(psi.rows() + psi_om.rows(), psi.cols());
  out.psi_bar << psi, psi_om;
  out.psi1.resize(out.psi_bar.rows(), out.psi_bar.cols());
  out.psi1 << x_pm, x_om;
  out.aux["Psi_oplus_minus"] = psi_om;
  out.aux["K_plus_oplus"] = k_po;
  out.aux["P_oplus"] = p_oplus;
  return out;
}

PsiExpansion expand_to_minus(const FluidModel& model, const PsiSolution& base,
                             const PerturbationSpec& spec) {
  require_rate(model, spec, Regime::ToMinus);
  require_base(model, base);
  const Partition& p = model.partition();
  const IndexList& n = spec.ominus;
  const Matrix cp = model.plus_rate_inv();
  const Matrix cm = model.minus_rate_abs_inv();
  const Matrix& psi = base.psi;

  const Matrix inv_nn = inverse(-model.block(n, n));
  const Matrix c_n = diag(spec.rate_direction, n).cwiseAbs();
  const Matrix psi1_pn =
      (cp * model.block(p.plus, n) + psi * cm * model.block(p.minus, n)) *
      inv_nn * c_n;
  const Matrix p_ominus =
      psi1_pn * inv_nn * (model.block(n, p.minus) + model.block(n, p.plus) * psi);

  const Matrix h = rate_rhs(model, base, spec.rate_direction) - base.K * p_ominus;
  const Matrix x_pm = solve_sylvester(base.K, base.U, h);

  PsiExpansion out = layout(model, spec, Regime::ToMinus);
  out.psi_bar.resize(psi.rows(), n.size() + psi.cols());
  out.psi_bar << Matrix::Zero(psi.rows(), n.size()), psi;
  out.psi1.resize(out.psi_bar.rows(), out.psi_bar.cols());
  out.psi1 << psi1_pn, x_pm;
  out.aux["Psi1_plus_ominus"] = psi1_pn;
  out.aux["P_ominus"] = p_ominus;
  return out;
}

// General split. Psi(eps) in the perturbed layout has blocks
//   [ a(eps)  b(eps) ]   rows S+, S(+)
//   [ g(eps)  h(eps) ]   cols S(-), S-
// with a0 = 0, b0 = Psi. Matching powers of eps in the four block Riccati
// equations gives the recursion below; each step was checked against
// finite differences of solve_psi_at.
PsiExpansion expand_general(const FluidModel& model, const PsiSolution& base,
                            const PerturbationSpec& spec,
                            const NewtonOptions& inner) {
  require_rate(model, spec, Regime::General);
  require_base(model, base);
  const Partition& part = model.partition();
  const IndexList& P = part.plus;
  const IndexList& M = part.minus;
  const IndexList& O = spec.oplus;
  const IndexList& N = spec.ominus;
  auto A = [&](const IndexList& r, const IndexList& c) { return model.block(r, c); };

  const Inner in = inner_problem(model, spec, inner);
  const Matrix& coi = in.coi;
  const Matrix& cni = in.cni;
  const Matrix& g0 = in.g0;
  const Matrix cpi = model.plus_rate_inv();
  const Matrix cmi = model.minus_rate_abs_inv();
  const Matrix ctp = diag(spec.rate_direction, P);
  const Matrix ctm = diag(spec.rate_direction, M);
  const Matrix& b0 = base.psi;

  const Matrix inv_k = inverse(-in.k_oo);
  const Matrix inv_u = inverse(-in.u_nn);

  const Matrix h0 = inv_k * (coi * (A(O, M) + A(O, P) * b0) +
                             g0 * cni * (A(N, M) + A(N, P) * b0));
  const Matrix r_mn0 = A(M, N) + A(M, O) * g0;
  const Matrix a1 = (cpi * (A(P, N) + A(P, O) * g0) + b0 * cmi * r_mn0) * inv_u;
  const Matrix k_op = coi * A(O, P) + g0 * cni * A(N, P);
  const Matrix g1 =
      solve_sylvester(in.k_oo, in.u_nn, -k_op * a1 - h0 * cmi * r_mn0);

  const Matrix u_m1_nm = cni * (A(N, M) + A(N, P) * b0 + A(N, O) * h0);
  const Matrix u_0_mm = cmi * (A(M, M) + A(M, P) * b0 + A(M, O) * h0);
  const Matrix u_0_mn = cmi * r_mn0;
  const Matrix u_0_nn = cni * (A(N, P) * a1 + A(N, O) * g1);
  const Matrix k_0_pp = cpi * A(P, P) + a1 * cni * A(N, P) + b0 * cmi * A(M, P);
  const Matrix k_0_po = cpi * A(P, O) + a1 * cni * A(N, O) + b0 * cmi * A(M, O);

  const Matrix l_pn0 = A(P, N) + A(P, O) * g0;
  const Matrix l_pm0 = A(P, M) + A(P, P) * b0 + A(P, O) * h0;
  const Matrix alpha = -cpi * ctp * cpi * l_pn0 +
                       cpi * (A(P, P) * a1 + A(P, O) * g1) + a1 * u_0_nn +
                       b0 * cmi * (A(M, P) * a1 + A(M, O) * g1) +
                       b0 * cmi * ctm * u_0_mn;
  const Matrix beta = inv_k * (g1 * u_m1_nm + h0 * u_0_mm);
  const Matrix gamma = cpi * ctp * cpi * l_pm0 - b0 * cmi * ctm * u_0_mm;

  // After eliminating h1 and a2 the b1 equation has the unperturbed K and U
  // as coefficients.
  const Matrix k_c = k_0_pp + k_0_po * inv_k * k_op;
  const Matrix u_c = u_0_mm + u_0_mn * inv_u * u_m1_nm;
  const Matrix b1 =
      solve_sylvester(k_c, u_c, gamma - k_0_po * beta - alpha * inv_u * u_m1_nm);
  const Matrix h1 = inv_k * k_op * b1 + beta;
  const Matrix a2 = (alpha + b1 * u_0_mn) * inv_u;

  PsiExpansion out = layout(model, spec, Regime::General);
  const Eigen::Index rows = static_cast<Eigen::Index>(P.size() + O.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(N.size() + M.size());
  out.psi_bar.resize(rows, cols);
  out.psi_bar << Matrix::Zero(P.size(), N.size()), b0, g0, h0;
  out.psi1.resize(rows, cols);
  out.psi1 << a1, b1, g1, h1;

  out.aux["Psi_oplus_ominus"] = g0;
  out.aux["Psi_oplus_minus"] = h0;
  out.aux["Psi1_plus_ominus"] = a1;
  out.aux["Psi1_oplus_ominus"] = g1;
  out.aux["Psi2_plus_ominus"] = a2;
  out.aux["U_m1_ominus_ominus"] = in.u_nn;
  out.aux["U_m1_ominus_minus"] = u_m1_nm;
  out.aux["U_0_minus_minus"] = u_0_mm;
  out.aux["U_0_minus_ominus"] = u_0_mn;
  out.aux["U_0_ominus_ominus"] = u_0_nn;
  out.aux["K_m1_oplus_oplus"] = in.k_oo;
  out.aux["K_m1_oplus_plus"] = k_op;
  out.aux["K_0_plus_plus"] = k_0_pp;
  out.aux["K_0_plus_oplus"] = k_0_po;
  return out;
}

SeriesBlocks series_blocks(const PsiExpansion& general) {
  if (general.regime != Regime::General) {
    throw Error(ErrorCode::WrongRegime, "series blocks exist for the general split only");
  }
  auto get = [&](const char* name) { return general.aux.at(name); };
  SeriesBlocks s;
  s.U_m1["ominus,ominus"] = get("U_m1_ominus_ominus");
  s.U_m1["ominus,minus"] = get("U_m1_ominus_minus");
  s.U_0["minus,minus"] = get("U_0_minus_minus");
  s.U_0["minus,ominus"] = get("U_0_minus_ominus");
  s.U_0["ominus,ominus"] = get("U_0_ominus_ominus");
  s.K_m1["oplus,oplus"] = get("K_m1_oplus_oplus");
  s.K_m1["oplus,plus"] = get("K_m1_oplus_plus");
  s.K_0["plus,plus"] = get("K_0_plus_plus");
  s.K_0["plus,oplus"] = get("K_0_plus_oplus");
  return s;
}

PsiExpansion expand(const FluidModel& model, const PsiSolution& base,
                    const PerturbationSpec& spec) {
  if (spec.kind == PerturbationKind::Generator) {
    PsiExpansion out = layout(model, spec, Regime::Unaffected);
    out.psi_bar = base.psi;
    out.psi1 = psi1_generator(model, base, spec.generator_direction);
    return out;
  }
  switch (spec.regime) {
    case Regime::Unaffected: {
      PsiExpansion out = layout(model, spec, Regime::Unaffected);
      out.psi_bar = base.psi;
      out.psi1 = psi1_rate_unaffected(model, base, spec.rate_direction);
      return out;
    }
    case Regime::ToPlus:
      return expand_to_plus(model, base, spec);
    case Regime::ToMinus:
      return expand_to_minus(model, base, spec);
    case Regime::General:
      return expand_general(model, base, spec);
  }
  throw Error(ErrorCode::WrongRegime, "unknown regime");
}

ZeroBlockInverse zero_block_inverse(const FluidModel& model,
                                    const PerturbationSpec& spec,
                                    const NewtonOptions& inner) {
  const Inner in = inner_problem(model, spec, inner);
  const IndexList& o = spec.oplus;
  const IndexList& n = spec.ominus;
  const Matrix a_oo = model.block(o, o);
  const Matrix a_on = model.block(o, n);
  const Matrix a_no = model.block(n, o);
  const Matrix a_nn = model.block(n, n);

  ZeroBlockInverse z;
  const Matrix inv_nn = inverse(-a_nn);
  const Matrix inv_oo = inverse(-a_oo);
  const Matrix b_oo = -inverse(a_oo + a_on * inv_nn * a_no);
  z.B["oplus,oplus"] = b_oo;
  z.B["ominus,oplus"] = inv_nn * a_no * b_oo;
  z.B["oplus,ominus"] = b_oo * a_on * inv_nn;
  z.B["ominus,ominus"] = -inverse(a_nn + a_no * inv_oo * a_on);

  const Matrix inv_k = inverse(-in.k_oo);
  const Matrix inv_u = inverse(-in.u_nn);
  const Matrix eye = Matrix::Identity(n.size(), n.size());
  const Matrix d_no = inv_u * in.cni * a_no * inv_k * in.coi;
  const Matrix d_nn = inv_u * in.cni * (eye + a_no * inv_k * in.g0 * in.cni);
  z.D["oplus,oplus"] = inv_k * in.coi + in.g0 * d_no;
  z.D["ominus,oplus"] = d_no;
  z.D["oplus,ominus"] = inv_k * in.g0 * in.cni + in.g0 * d_nn;
  z.D["ominus,ominus"] = d_nn;
  return z;
}

}  // namespace fluidpert

#pragma once

#include <map>
#include <string>

#include "fluidpert/core.hpp"
#include "fluidpert/riccati.hpp"

namespace fluidpert {

/// Zeroth and first order terms of Psi(eps) = psi_bar + eps psi1 + O(eps^2).
///
/// Rows are [S+, S(+)] and columns [S(-), S-], i.e. the layout of the
/// perturbed model. For generator and unaffected rate perturbations S(+) and
/// S(-) are empty and both matrices are |S+| x |S-|.
struct PsiExpansion {
  Regime regime = Regime::Unaffected;
  Matrix psi_bar;
  Matrix psi1;
  /// Original phase indices of rows and columns.
  IndexList rows;
  IndexList cols;
  /// Number of leading rows in S+ (the rest are S(+)).
  Eigen::Index plus_rows = 0;
  /// Number of leading columns in S(-) (the rest are S-).
  Eigen::Index ominus_cols = 0;
  /// Intermediate blocks, keyed by name (e.g. "Psi_oplus_minus", "P_oplus").
  std::map<std::string, Matrix> aux;
};

/// eps^-1 and eps^0 coefficients of U(eps), K(eps) in the general split.
/// Keys are "row,col" with row/col in {plus, oplus, ominus, minus}.
struct SeriesBlocks {
  std::map<std::string, Matrix> U_m1;
  std::map<std::string, Matrix> U_0;
  std::map<std::string, Matrix> K_m1;
  std::map<std::string, Matrix> K_0;
};

/// d/d eps of the censored blocks for A + eps A~.
CensoredBlocks q_tilde(const FluidModel& model, const Matrix& a_tilde);

/// Psi1 for A + eps A~:
///   K X + X U = -C+^{-1}Q~+- - C+^{-1}Q~++ Psi - Psi|C-^{-1}|Q~-- - Psi|C-^{-1}|Q~-+ Psi.
Matrix psi1_generator(const FluidModel& model, const PsiSolution& base,
                      const Matrix& a_tilde);

/// Psi1 for c + eps c~ with c~ = 0 on S0:
///   K X + X U = -Psi|C-^{-1}|C~- U - C+^{-1}C~+ Psi U.
Matrix psi1_rate_unaffected(const FluidModel& model, const PsiSolution& base,
                            const Vector& c_tilde);

/// Every zero-rate phase becomes positive. Throws WrongRegime.
PsiExpansion expand_to_plus(const FluidModel& model, const PsiSolution& base,
                            const PerturbationSpec& spec);

/// Every zero-rate phase becomes negative. Throws WrongRegime.
PsiExpansion expand_to_minus(const FluidModel& model, const PsiSolution& base,
                             const PerturbationSpec& spec);

/// Zero-rate phases split between both signs. Throws WrongRegime and
/// InnerRiccatiDiverged.
PsiExpansion expand_general(const FluidModel& model, const PsiSolution& base,
                            const PerturbationSpec& spec,
                            const NewtonOptions& inner = {});

/// Series blocks of a general-regime expansion (read from its aux map).
SeriesBlocks series_blocks(const PsiExpansion& general);

/// Picks the expansion matching spec.kind / spec.regime.
PsiExpansion expand(const FluidModel& model, const PsiSolution& base,
                    const PerturbationSpec& spec);

/// The blocks of (-A00)^{-1} on the S(+)/S(-) split, once from Schur
/// complements of A00 (B) and once rebuilt from Psi_(+)(-), K^(-1)_(+)(+) and
/// U^(-1)_(-)(-) (D). Keys "oplus,oplus", "ominus,oplus", "oplus,ominus",
/// "ominus,ominus".
struct ZeroBlockInverse {
  std::map<std::string, Matrix> B;
  std::map<std::string, Matrix> D;
};

/// Requires a general-regime spec.
ZeroBlockInverse zero_block_inverse(const FluidModel& model,
                                    const PerturbationSpec& spec,
                                    const NewtonOptions& inner = {});

}  // namespace fluidpert

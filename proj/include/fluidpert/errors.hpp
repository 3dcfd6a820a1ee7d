#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluidpert {

enum class ErrorCode {
  NotAGenerator,
  Reducible,
  DimensionMismatch,
  NonFinite,
  SingularSystem,
  SingularBlock,
  Singular,
  SizeLimit,
  Inconclusive,
  NoConvergence,
  EmptySide,
  InvalidEpsilon,
  InvalidPerturbation,
  WrongRegime,
  InnerRiccatiDiverged,
  NotRecurrent,
  SingularNormalization,
  NotGeneratorKind,
  ShapeMismatch,
  Infeasible,
  UnknownCase,
  Parse,
  IO,
};

std::string_view to_string(ErrorCode code);

/// Every domain failure in the library is reported with one of these.
/// `code()` is stable and is what the CLI prints in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fluidpert

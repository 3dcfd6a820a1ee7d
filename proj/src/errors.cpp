#include "fluidpert/errors.hpp"

namespace fluidpert {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotAGenerator: return "NotAGenerator";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptySide: return "EmptySide";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::InvalidPerturbation: return "InvalidPerturbation";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::InnerRiccatiDiverged: return "InnerRiccatiDiverged";
    case ErrorCode::NotRecurrent: return "NotRecurrent";
    case ErrorCode::SingularNormalization: return "SingularNormalization";
    case ErrorCode::NotGeneratorKind: return "NotGeneratorKind";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::UnknownCase: return "UnknownCase";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::IO: return "IO";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace fluidpert

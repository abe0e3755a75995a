#include "qcons/error.hpp"

namespace qcons {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::ConnectivityFailure: return "ConnectivityFailure";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::UnsupportedReduction: return "UnsupportedReduction";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
    case ErrorCode::NotConverged: return "NotConverged";
  }
  return "Unknown";
}

}  // namespace qcons

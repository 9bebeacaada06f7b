#include "ledtree/error.hpp"

namespace ledtree {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFullBinary: return "NotFullBinary";
    case ErrorCode::CyclicStructure: return "CyclicStructure";
    case ErrorCode::IndexRangeViolation: return "IndexRangeViolation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateFoci: return "DegenerateFoci";
    case ErrorCode::InfeasiblePair: return "InfeasiblePair";
    case ErrorCode::CoincidentChildren: return "CoincidentChildren";
    case ErrorCode::NotFeasible: return "NotFeasible";
    case ErrorCode::TangentDirectionForbidden: return "TangentDirectionForbidden";
    case ErrorCode::AntiparallelBlock: return "AntiparallelBlock";
    case ErrorCode::UnknownExample: return "UnknownExample";
    case ErrorCode::ParameterViolation: return "ParameterViolation";
    case ErrorCode::StretchInfeasible: return "StretchInfeasible";
    case ErrorCode::EmptyFeasibleGrid: return "EmptyFeasibleGrid";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateDirections: return "DegenerateDirections";
    case ErrorCode::NotRegular: return "NotRegular";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::AllMissingRow: return "AllMissingRow";
    case ErrorCode::ZeroAnchorHeight: return "ZeroAnchorHeight";
    case ErrorCode::TopologyInferenceFailed: return "TopologyInferenceFailed";
    case ErrorCode::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "UnknownError";
}

}  // namespace ledtree

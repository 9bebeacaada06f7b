#pragma once

#include <stdexcept>
#include <string>

namespace ledtree {

enum class ErrorCode {
  // topology / instance construction
  NotFullBinary,
  CyclicStructure,
  IndexRangeViolation,
  DimensionMismatch,
  // feasible-set geometry
  DegenerateFoci,
  InfeasiblePair,
  CoincidentChildren,
  NotFeasible,
  TangentDirectionForbidden,
  AntiparallelBlock,
  UnknownExample,
  ParameterViolation,
  // solver
  StretchInfeasible,
  EmptyFeasibleGrid,
  NonConvergence,
  // certificate
  DegenerateDirections,
  NotRegular,
  // phylo
  EmptyTable,
  AllMissingRow,
  ZeroAnchorHeight,
  TopologyInferenceFailed,
  // cli / io
  DimensionUnsupported,
  InvalidInput,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. `index()` identifies the offending vertex, edge
/// or pipeline stage when that is meaningful, otherwise -1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int index = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        index_(index) {}

  ErrorCode code() const { return code_; }
  int index() const { return index_; }

 private:
  ErrorCode code_;
  int index_;
};

}  // namespace ledtree

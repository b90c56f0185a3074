#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace citerec {

enum class ErrorCode {
  kSchemaError,
  kDuplicateId,
  kDanglingEdge,
  kMissingAbstractMarker,
  kInvalidRatio,
  kInvalidArgument,
  kEmptyCandidatePool,
  kUnknownDocument,
  kEmptyQuery,
  kDimensionMismatch,
  kZeroVector,
  kNoKnownTokens,
  kMissingEmbedding,
  kConfigError,
  kEmptyRelevantSet,
  kQueryWithoutLabels,
  kNoNegativesAvailable,
  kMissingIndex,
  kUnknownId,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library, tagged with one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace citerec

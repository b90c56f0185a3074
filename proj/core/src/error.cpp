#include "citerec/error.hpp"

namespace citerec {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kDanglingEdge: return "DanglingEdge";
    case ErrorCode::kMissingAbstractMarker: return "MissingAbstractMarker";
    case ErrorCode::kInvalidRatio: return "InvalidRatio";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyCandidatePool: return "EmptyCandidatePool";
    case ErrorCode::kUnknownDocument: return "UnknownDocument";
    case ErrorCode::kEmptyQuery: return "EmptyQuery";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNoKnownTokens: return "NoKnownTokens";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kEmptyRelevantSet: return "EmptyRelevantSet";
    case ErrorCode::kQueryWithoutLabels: return "QueryWithoutLabels";
    case ErrorCode::kNoNegativesAvailable: return "NoNegativesAvailable";
    case ErrorCode::kMissingIndex: return "MissingIndex";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string with_code(ErrorCode code, const std::string& message) {
  std::string out(error_code_name(code));
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(with_code(code, message)), code_(code) {}

}  // namespace citerec

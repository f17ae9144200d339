#include "toolrag/error.hpp"

namespace toolrag {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownTool: return "UnknownTool";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kUnknownBackend: return "UnknownBackend";
    case ErrorCode::kAdapterError: return "AdapterError";
    case ErrorCode::kParseFailure: return "ParseFailure";
    case ErrorCode::kUnparseable: return "Unparseable";
    case ErrorCode::kPrecondition: return "PreconditionViolation";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kUpstreamError: return "UpstreamError";
    case ErrorCode::kUnknownField: return "UnknownField";
    case ErrorCode::kCacheIoError: return "CacheIoError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kMissingOptions: return "MissingOptions";
    case ErrorCode::kMissingGold: return "MissingGold";
    case ErrorCode::kStyleError: return "StyleError";
    case ErrorCode::kUnknownQuestionId: return "UnknownQuestionId";
    case ErrorCode::kNoRetrievalSteps: return "NoRetrievalSteps";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string join_reasons(const std::vector<std::string>& reasons) {
  std::string out;
  for (const auto& reason : reasons) {
    if (!out.empty()) out += "; ";
    out += reason;
  }
  return out;
}

}  // namespace

InvalidSpecError::InvalidSpecError(std::vector<std::string> reasons)
    : Error(ErrorCode::kInvalidSpec, join_reasons(reasons)), reasons_(std::move(reasons)) {}

}  // namespace toolrag

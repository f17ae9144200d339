#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toolrag {

enum class ErrorCode {
  kDuplicateName,
  kInvalidSpec,
  kParseError,
  kUnknownTool,
  kEmptyCorpus,
  kDimensionMismatch,
  kZeroVector,
  kBackendUnavailable,
  kUnknownBackend,
  kAdapterError,
  kParseFailure,
  kUnparseable,
  kPrecondition,
  kConfigError,
  kNotFound,
  kUpstreamError,
  kUnknownField,
  kCacheIoError,
  kSchemaError,
  kMissingOptions,
  kMissingGold,
  kStyleError,
  kUnknownQuestionId,
  kNoRetrievalSteps,
  kIoError,
};

std::string_view to_string(ErrorCode code);

/// Base error for every failure surfaced by the engine. The code is stable and
/// is what tests and the CLI switch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Tool spec rejected; carries one reason per offending field.
class InvalidSpecError : public Error {
 public:
  explicit InvalidSpecError(std::vector<std::string> reasons);

  const std::vector<std::string>& reasons() const noexcept { return reasons_; }

 private:
  std::vector<std::string> reasons_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(ErrorCode::kParseError,
              message + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class AdapterError : public Error {
 public:
  AdapterError(const std::string& message, bool retryable)
      : Error(ErrorCode::kAdapterError, message), retryable_(retryable) {}

  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

}  // namespace toolrag

#pragma once

#include <stdexcept>
#include <string>

namespace nhsteer {

enum class ErrorCode {
  ParseError,
  DimensionMismatch,
  UnsupportedExpression,
  NoFrame,
  SingularFrame,
  IdentificationFailure,
  SearchBudgetExhausted,
  SingularMatrix,
  IterationCapExceeded,
  CoverageGap,
  NoPath,
  DomainExit,
  StepFailure,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nhsteer

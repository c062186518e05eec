#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lorenz {

enum class ErrorCode {
  InvalidParams,
  InvalidArgument,
  BlowUp,
  StepUnderflow,
  OutOfSpan,
  NoSignChange,
  EmptyIntersection,
  MissingCheckpoint,
  SameClassAtEndpoints,
  Unresolved,
  NoCrossing,
  ConditionAFailed,
  AnchorNotFound,
  HorizonExhausted,
  ValidationFailed,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class LabError : public std::runtime_error {
 public:
  LabError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lorenz

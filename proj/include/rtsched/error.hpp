#pragma once

#include <stdexcept>
#include <string>

namespace rts {

enum class ErrorCode {
  InvalidArgument,
  GraphTooLarge,
  SpecViolation,
  StateSpaceTooLarge,
  ScheduleInvalid,
  NoSchedule,
  AllWeightsZero,
  NotCollocatedUniform,
  ZeroQ,
  StateSpaceExceeded,
  LookaheadUnavailable,
  ChainInvalid,
  PolicyIncompatible,
  ConfigError,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rts

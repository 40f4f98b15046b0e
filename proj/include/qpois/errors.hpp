#pragma once

#include <stdexcept>
#include <string>

namespace qp {

enum class ErrorCode {
  NotClosed,
  RankDeficient,
  NotInSpan,
  NotConvenient,
  NotTangent,
  LiftFailed,
  IncompatibleActions,
  BadSignature,
  NotEpimorphism,
  DegeneratePairing,
  NotInvariant,
  MaxIters,
  Stalled,
  SolverFailed,
  ConfigError,
  IoError,
  Unsupported,
};

const char* to_string(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qp

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dlearn {

enum class ErrorCode {
  EmptyDomain,
  NegativeMass,
  NotNormalized,
  InvalidParam,
  DomainMismatch,
  OutOfDomain,
  PreconditionViolated,
  Unsupported,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

// All library failures are reported through this exception; code() tells them apart.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace dlearn

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bernoulli {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NonpositiveRadius,
  NotConvex,
  InfeasibleSet,
  OrderingViolated,
  GapTooSmall,
  SingularSystem,
  DegenerateAnnulus,
  ResampleLimitExceeded,
  RunAborted,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonpositiveRadius: return "NonpositiveRadius";
    case ErrorKind::NotConvex: return "NotConvex";
    case ErrorKind::InfeasibleSet: return "InfeasibleSet";
    case ErrorKind::OrderingViolated: return "OrderingViolated";
    case ErrorKind::GapTooSmall: return "GapTooSmall";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::DegenerateAnnulus: return "DegenerateAnnulus";
    case ErrorKind::ResampleLimitExceeded: return "ResampleLimitExceeded";
    case ErrorKind::RunAborted: return "RunAborted";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the SGD step-rejection logic, the CLI exit codes) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace bernoulli

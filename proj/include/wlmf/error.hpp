#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wlmf {

enum class ErrorKind {
  NotPositiveDefinite,
  DimensionMismatch,
  NotSymmetric,
  NotHermitian,
  NonFinite,
  InvalidImpropriety,
  EmptyInput,
  InsufficientSamples,
  SingularAtOne,
  DegenerateWindow,
  NumericalInconsistency,
  DivergenceDetected,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wlmf

#include "wlmf/error.hpp"

namespace wlmf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InvalidImpropriety: return "InvalidImpropriety";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::SingularAtOne: return "SingularAtOne";
    case ErrorKind::DegenerateWindow: return "DegenerateWindow";
    case ErrorKind::NumericalInconsistency: return "NumericalInconsistency";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace wlmf

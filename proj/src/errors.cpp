#include "dmc/errors.hpp"

namespace dmc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kDomain:
      return "domain";
    case ErrorKind::kRange:
      return "range";
    case ErrorKind::kShape:
      return "shape";
    case ErrorKind::kGrid:
      return "grid";
    case ErrorKind::kPrecondition:
      return "precondition";
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kStepFailure:
      return "step-failure";
    case ErrorKind::kNumerical:
      return "numerical";
    case ErrorKind::kUnsupportedKernel:
      return "unsupported-kernel";
    case ErrorKind::kWindow:
      return "window";
  }
  return "unknown";
}

}  // namespace dmc

#pragma once

#include <stdexcept>
#include <string>

namespace dmc {

/// Failure categories. The CLI maps Config/Precondition/Shape/Grid/Domain/
/// Range to exit code 2 and the rest to exit code 3.
enum class ErrorKind {
  kDomain,
  kRange,
  kShape,
  kGrid,
  kPrecondition,
  kConfig,
  kStepFailure,
  kNumerical,
  kUnsupportedKernel,
  kWindow,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for errors caused by bad input rather than numerics.
  bool is_input_error() const noexcept {
    switch (kind_) {
      case ErrorKind::kStepFailure:
      case ErrorKind::kNumerical:
        return false;
      default:
        return true;
    }
  }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace dmc

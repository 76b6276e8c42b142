#pragma once

#include <stdexcept>
#include <string>

namespace dpdglm {

enum class ErrorCode {
  invalid_argument,
  invalid_design,
  domain_error,
  degenerate_data,
  bad_init,
  singular_system,
  fit_failed,
  selection_failed,
  io_error,
};

// All recoverable failures in the core are reported through this type so the
// C boundary can map them onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace dpdglm

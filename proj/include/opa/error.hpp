#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opa {

enum class ErrorCode {
  invalid_argument,
  index_out_of_range,
  envelope_overflow,
  cannot_certify,
  not_reproducible,
  undecidable,
  not_positive_definite,
  no_convergence,
  orthogonal_data,
  ill_conditioned,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the engine carries one of the codes above so that
/// front ends (CLI exit codes, Python exceptions) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 protected:
  struct preformatted_t {};
  Error(preformatted_t, ErrorCode code, const std::string& full) : std::runtime_error(full), code_(code) {}

 private:
  ErrorCode code_;
};

}  // namespace opa

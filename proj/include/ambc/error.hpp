#pragma once

#include <stdexcept>
#include <string>

namespace ambc {

enum class Errc {
  invalid_argument,
  invalid_seed,
  length_mismatch,
  insufficient_data,
  aliasing,
  dimension_mismatch,
  representation_mismatch,
  config,
  io,
};

const char* to_string(Errc code) noexcept;

/// Single exception type for the library. `code()` tells callers which
/// contract was broken without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ambc

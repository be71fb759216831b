#pragma once

#include <stdexcept>
#include <string>

namespace entroreg {

// Bad user-supplied data or parameters. The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// A violated internal invariant (a bug or numerical breakdown). Exit code 3.
struct InternalError : std::runtime_error {
  explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace entroreg

#pragma once

#include <stdexcept>
#include <string>

namespace sparsagg {

/// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  invalid_dictionary,
  shape,
  validation,
  numeric,
  config,
  degenerate_dictionary,
  condition_violated,
  non_convergence,
  unsupported,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace sparsagg

#pragma once

#include <stdexcept>
#include <string>

namespace occlumix {

/// Malformed arguments: mismatched dimensions, unknown ids, bad files.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Well-formed input that carries too little data for the operation
/// (empty co-occurrence set, no candidate region, empty pools).
class DegenerateInputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed (e.g. eigen-solver did not converge).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string &what) {
  if (!cond)
    throw InputError(what);
}

} // namespace detail
} // namespace occlumix

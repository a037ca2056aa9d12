#pragma once

#include <stdexcept>
#include <string>

namespace vocspace {

// Bad user input: malformed files, violated preconditions, unknown tokens.
// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An optimizer produced a non-finite value or failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vocspace

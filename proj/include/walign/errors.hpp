#pragma once

#include <stdexcept>
#include <string>

namespace walign {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: dimension mismatches, invalid weights,
// unparsable files. The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

// Covariance too close to singular to whiten.
class DegenerateSupportError : public InputError {
 public:
  using InputError::InputError;
};

// The LP solver broke down or a solve that must succeed did not. The CLI maps
// these to exit code 2.
class SolverError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_input(const std::string& what);

}  // namespace walign

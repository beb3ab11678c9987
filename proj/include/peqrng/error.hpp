#pragma once

#include <stdexcept>
#include <string>

namespace peqrng {

// Invalid argument, malformed file, or a violated precondition.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Lookup outside a tabulated domain (e.g. wavelength outside an MMI table).
class RangeError : public InputError {
 public:
  explicit RangeError(const std::string& what) : InputError(what) {}
};

// Input that is formally valid but annihilates the quantity being computed.
class DegenerateInputError : public InputError {
 public:
  explicit DegenerateInputError(const std::string& what) : InputError(what) {}
};

// Least-squares fit failed or was ill-posed.
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical search exhausted its budget without stabilizing.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace peqrng

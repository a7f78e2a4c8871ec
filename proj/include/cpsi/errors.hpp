#pragma once

#include <stdexcept>
#include <string>

namespace cpsi {

// Malformed or out-of-range user input (files, indices, dimensions).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hyperparameters that admit no feasible detection for the given length.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Underflow, degenerate covariance, or disagreement between the detector and
// the region algebra.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cpsi

#pragma once

#include <stdexcept>
#include <string>

namespace fms {

// Malformed input: files, grids, mismatched shapes, bad configuration.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A computation could not be carried out on otherwise valid input.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A Hessian-type quantity was requested at a datum while the profile has no
// analytic limit for k'(t)/t at t = 0.
class SingularEvaluation : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// A feature curve vanished identically and cannot be normalized.
class DegenerateFeature : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace fms

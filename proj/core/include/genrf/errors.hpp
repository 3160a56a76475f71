#pragma once

#include <stdexcept>
#include <string>

namespace genrf {

// Malformed or inconsistent input (files, dimensions, parameter ranges).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the denominator quadratic form of the GenRF statistic vanishes.
class DegenerateStatistic : public NumericalError {
 public:
  DegenerateStatistic(const std::string& what, double numerator,
                      double denominator, double residual_norm_sq);

  double numerator() const { return numerator_; }
  double denominator() const { return denominator_; }
  double residual_norm_sq() const { return residual_norm_sq_; }

 private:
  double numerator_;
  double denominator_;
  double residual_norm_sq_;
};

}  // namespace genrf

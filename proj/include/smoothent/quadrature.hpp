#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smoothent {

/// Numeric failure that still carries the best value computed so far.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double partial_value)
      : std::runtime_error(what), partial_value_(partial_value) {}
  [[nodiscard]] double partial_value() const { return partial_value_; }

 private:
  double partial_value_;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evals = 0;
  bool converged = true;
};

/// Adaptive Simpson on [a, b] to absolute tolerance tol, giving up (with
/// converged=false and the partial value) once max_evals is exceeded.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double tol, long max_evals = 1000000);

/// Same, but with the domain pre-split at the given interior breakpoints so
/// sharply peaked integrands are found by the refinement.
QuadratureResult integrate_split(const std::function<double(double)>& f,
                                 const std::vector<double>& breakpoints,
                                 double tol, long max_evals = 1000000);

}  // namespace smoothent

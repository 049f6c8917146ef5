#pragma once

// Fixed synthetic instances shared by the validation suites, the acceptance
// run and the tests.

#include "fbipg/harness.hpp"

namespace fbipg::instances {

inline BilevelProblem l1_least_squares(const LeastSquaresData& d) {
  const Index n = d.A.cols();
  return make_problem(SmoothFunction::least_squares(d.A, d.b), ProxFunction::zero(), SmoothFunction::zero(n),
                      ProxFunction::l1(1.0));
}

/// Consistent least squares, N = 40, n = 60, 5-sparse planted solution.
inline BilevelProblem wide_least_squares() { return l1_least_squares(gen_least_squares(40, 60, 7, true, 5)); }

/// Consistent least squares, N = 8, n = 12: small enough for exhaustive x'.
inline BilevelProblem reduced_least_squares() { return l1_least_squares(gen_least_squares(8, 12, 7, true, 3)); }

/// Consistent, full column rank (N = 20, n = 10): X* is a single point.
inline BilevelProblem tall_least_squares() { return l1_least_squares(gen_least_squares(20, 10, 7, true, 5)); }

/// phi(x) = (x - 1)^2 / 2, omega(x) = |x|.
inline BilevelProblem scalar() {
  DenseMatrix A(1, 1);
  A << 1.0;
  Vector b(1);
  b << 1.0;
  return make_problem(SmoothFunction::least_squares(A, b), ProxFunction::zero(), SmoothFunction::zero(1),
                      ProxFunction::l1(1.0));
}

/// Logistic loss (N = 200, m = 50) with an l1 outer objective.
inline BilevelProblem logistic_l1() {
  const auto d = gen_logistic(200, 50, 11);
  return make_problem(SmoothFunction::logistic(d.A, d.z), ProxFunction::zero(), SmoothFunction::zero(50),
                      ProxFunction::l1(1.0));
}

/// Lasso inner (g = l1(1)) with an l1 outer. A is scaled so the inner
/// curvature stays below 1 and b so the lasso solution is nonzero.
inline BilevelProblem lasso_l1() {
  const auto d = gen_least_squares(8, 12, 7, true, 3);
  return make_problem(SmoothFunction::least_squares(0.3 * d.A, 3.0 * d.b), ProxFunction::l1(1.0),
                      SmoothFunction::zero(12), ProxFunction::l1(1.0));
}

}  // namespace fbipg::instances

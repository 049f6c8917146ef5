#pragma once

// Parameter sequences of the dynamic-regularization scheme and closed-form
// evaluators for every convergence bound it comes with. All functions are
// pure; partial sums use compensated summation.

#include "fbipg/core.hpp"

#include <optional>
#include <span>
#include <utility>

namespace fbipg::rates {

/// alpha_k = (k + a)^(-gamma); alpha_{-1} = 0.
inline double alpha_k(long k, int a, double gamma) {
  if (k < 0) return 0.0;
  return std::pow(static_cast<double>(k + a), -gamma);
}

/// t_k = (k + a) / a; t_{-1} = 0.
inline double t_explicit(long k, int a) {
  if (k < 0) return 0.0;
  return static_cast<double>(k + a) / a;
}

/// Accelerated-gradient recursion t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2.
inline double t_fista(double t_prev) {
  if (!(t_prev >= 0)) throw ArgumentError("t_fista: t must be nonnegative");
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
}

/// d_k = t_{k-1}^2 - (t_k^2 - t_k), explicit t.
inline double d_k(long k, int a) {
  const double t = t_explicit(k, a);
  const double tp = t_explicit(k - 1, a);
  return tp * tp - (t * t - t);
}

/// eta_k = t_{k-1}^2 alpha_{k-1} - (t_k^2 - t_k) alpha_k, explicit t.
inline double eta_k(long k, int a, double gamma) {
  const double t = t_explicit(k, a);
  const double tp = t_explicit(k - 1, a);
  return tp * tp * alpha_k(k - 1, a, gamma) - (t * t - t) * alpha_k(k, a, gamma);
}

/// lambda_k = (t_{k-1} - 1) / t_k, the momentum weight.
inline double lambda_k(long k, int a) { return (t_explicit(k - 1, a) - 1.0) / t_explicit(k, a); }

/// pi_{s,k} = prod_{j=s}^k lambda_j, and 1 when k < s.
inline double pi(long s, long k, int a) {
  double p = 1.0;
  for (long j = s; j <= k; ++j) p *= lambda_k(j, a);
  return p;
}

/// sum_{s=0}^{k-1} alpha_s t_s (explicit t).
inline double sum_alpha_t(long k, int a, double gamma) {
  if (k < 1) throw ArgumentError("sum_alpha_t: k must be >= 1");
  CompensatedSum sum;
  for (long s = 0; s < k; ++s) sum.add(alpha_k(s, a, gamma) * t_explicit(s, a));
  return sum.value();
}

/// Three-case bound on sum_alpha_t in its citable form:
///   ((k+a-1)^(2-g) - 1)/(2-g) for 0<g<2,  ln(k+a-1) for g=2,  (1 - (k+a-1)^(2-g))/(g-2) for g>2.
inline double sum_alpha_t_bound(long k, int a, double gamma) {
  if (k < 1) throw ArgumentError("sum_alpha_t_bound: k must be >= 1");
  if (!(gamma > 0)) throw ArgumentError("sum_alpha_t_bound: gamma must be positive");
  const double m = static_cast<double>(k + a - 1);
  if (gamma == 2.0) return std::log(m);
  if (gamma < 2.0) return (std::pow(m, 2.0 - gamma) - 1.0) / (2.0 - gamma);
  return (1.0 - std::pow(m, 2.0 - gamma)) / (gamma - 2.0);
}

/// Tighter bound that keeps the 1/a factor carried through the derivation.
/// Diagnostic only; theorem checks use sum_alpha_t_bound. Holds for gamma >= 1
/// but not below (the summands then grow and the integral comparison flips).
inline double sum_alpha_t_bound_tight(long k, int a, double gamma) { return sum_alpha_t_bound(k, a, gamma) / a; }

/// Integral bound on sum_{n=n1}^{n2} n^(-r): (n2^(1-r) - (n1-1)^(1-r)) / (1-r).
/// n2 may be +inf. Valid for 0<r<1, and for r>1 when n1>=2.
inline double techsum_bound(double n1, double n2, double r) {
  if (!(r > 0) || r == 1.0) throw ArgumentError("techsum_bound: requires 0 < r != 1");
  if (n1 < 1 || n2 < n1) throw ArgumentError("techsum_bound: requires 1 <= n1 <= n2");
  if (r > 1 && n1 < 2) throw ArgumentError("techsum_bound: r > 1 requires n1 >= 2");
  const double upper = std::isinf(n2) ? (r > 1 ? 0.0 : kInf) : std::pow(n2, 1.0 - r);
  return (upper - std::pow(n1 - 1.0, 1.0 - r)) / (1.0 - r);
}

/// Constants entering the bounds. R2 = ||x0 - x'||^2, delta_omega = omega(x') - omega*.
struct RateParams {
  int a = 2;
  double gamma = 1.0;
  double beta = 1.0;
  double R2 = 0.0;
  double delta_omega = 0.0;
  std::optional<double> tau;
  std::optional<double> rho;
};

/// Inner rate for gamma > 2: a^2/(2(k+1)^2) (beta R2 + 2/(gamma-2) delta_omega).
inline double inner_bound_fast(long k, const RateParams& p) {
  if (!(p.gamma > 2)) throw ArgumentError("inner_bound_fast: requires gamma > 2");
  if (k < 1) throw ArgumentError("inner_bound_fast: requires k >= 1");
  const double a2 = static_cast<double>(p.a) * p.a;
  const double kp = static_cast<double>(k + 1);
  return a2 / (2.0 * kp * kp) * (p.beta * p.R2 + 2.0 / (p.gamma - 2.0) * p.delta_omega);
}

/// Inner rate for 0 < gamma <= 2: a^2 beta R2 / (2(k+1)^2) + a^2 c_k delta_omega / (k+1)^2.
inline double inner_bound(long k, const RateParams& p) {
  if (!(p.gamma > 0) || p.gamma > 2) throw ArgumentError("inner_bound: requires 0 < gamma <= 2");
  if (k < 1) throw ArgumentError("inner_bound: requires k >= 1");
  const double a2 = static_cast<double>(p.a) * p.a;
  const double kp = static_cast<double>(k + 1);
  const double c = p.gamma == 2.0 ? std::log(static_cast<double>(k + p.a - 1))
                                  : std::pow(kp, 2.0 - p.gamma) / (2.0 - p.gamma);
  return a2 * p.beta * p.R2 / (2.0 * kp * kp) + a2 * c * p.delta_omega / (kp * kp);
}

/// Best-iterate outer rate for 0 < gamma < 2: a^2 beta R2 / (2 (k+1)^(2-gamma)).
inline double outer_bound(long k, const RateParams& p) {
  if (!(p.gamma > 0) || !(p.gamma < 2)) throw ArgumentError("outer_bound: requires 0 < gamma < 2");
  const double a2 = static_cast<double>(p.a) * p.a;
  return a2 * p.beta * p.R2 / (2.0 * std::pow(static_cast<double>(k + 1), 2.0 - p.gamma));
}

struct BoundPair {
  double inner;
  double outer;
};

/// gamma = 1, evaluated at the better (in omega) of x^k and the running average:
/// inner pi^2 a^2 beta R2/(12k) + a^2 ln(k+1) delta_omega / k, outer a^2 beta R2 / (2(k+1)).
inline BoundPair simul_bounds_gamma1(long k, const RateParams& p) {
  if (k < 1) throw ArgumentError("simul_bounds_gamma1: requires k >= 1");
  const double a2 = static_cast<double>(p.a) * p.a;
  const double kd = static_cast<double>(k);
  return {std::numbers::pi * std::numbers::pi * a2 * p.beta * p.R2 / (12.0 * kd) +
              a2 * std::log(kd + 1.0) * p.delta_omega / kd,
          a2 * p.beta * p.R2 / (2.0 * (kd + 1.0))};
}

/// C = a^2 max{beta R2 + delta_omega, a^3 rho^2 / (tau (gamma-1)^2)}.
inline double holder_constant_C(const RateParams& p) {
  if (!p.tau || !p.rho) throw ArgumentError("holder_constant_C: tau and rho are required");
  if (!(*p.tau > 0)) throw ArgumentError("holder_constant_C: tau must be positive");
  if (!(p.gamma > 1) || !(p.gamma < 2)) throw ArgumentError("holder_constant_C: requires 1 < gamma < 2");
  const double a = p.a;
  const double g1 = p.gamma - 1.0;
  const double second = std::isinf(*p.tau) ? 0.0 : a * a * a * (*p.rho) * (*p.rho) / ((*p.tau) * g1 * g1);
  return a * a * std::max(p.beta * p.R2 + p.delta_omega, second);
}

struct HolderBounds {
  double inner;       // phi(x^k) - phi(x')        <= a C / (k+1)^2
  double outer_low;   // omega(x') - omega(x^k)    <= C / (a^2 (k+1))
  double outer_high;  // omega(x^k) - omega(x')    <= C / (k+1)^(2-gamma)
};

inline HolderBounds holder_bounds(long k, const RateParams& p) {
  const double C = holder_constant_C(p);
  const double kp = static_cast<double>(k + 1);
  const double a = p.a;
  return {a * C / (kp * kp), C / (a * a * kp), C / std::pow(kp, 2.0 - p.gamma)};
}

/// eta_k < (k+1)^(1-gamma) / 2, for 1 < gamma < 2.
inline bool boundeta_check(long k, int a, double gamma) {
  return eta_k(k, a, gamma) < 0.5 * std::pow(static_cast<double>(k + 1), 1.0 - gamma);
}

/// Truncated sum_{k=0}^{k_max} pi_{s,k} and its bound (5a/2) t_{s-1}. Truncation
/// only shrinks the left side.
inline std::pair<double, double> sumtechnical_sides(long s, int a, long k_max) {
  CompensatedSum sum;
  double prod = 1.0;
  for (long k = 0; k <= k_max; ++k) {
    if (k >= s) prod *= lambda_k(k, a);
    sum.add(prod);
  }
  return {sum.value(), 2.5 * a * t_explicit(s - 1, a)};
}

inline bool sumtechnical_check(long s, int a, long k_max) {
  const auto [lhs, rhs] = sumtechnical_sides(s, a, k_max);
  return lhs <= rhs;
}

/// Fixed-alpha guarantees given a single-level rate R_K on F_alpha:
/// inner R_K + alpha delta_omega, outer R_K / alpha.
inline BoundPair generic_fixed_bounds(double R_K, double alpha_K, double delta_omega) {
  if (!(alpha_K > 0)) throw ArgumentError("generic_fixed_bounds: alpha must be positive");
  return {R_K + alpha_K * delta_omega, R_K / alpha_K};
}

/// Least-squares slope of log(value) against log(k) over points with
/// k in [k_lo, k_hi] and positive finite value.
inline double fit_loglog_slope(std::span<const double> ks, std::span<const double> values, double k_lo, double k_hi) {
  if (ks.size() != values.size()) throw ArgumentError("fit_loglog_slope: length mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < k_lo || ks[i] > k_hi || ks[i] <= 0) continue;
    if (!(values[i] > 0) || !std::isfinite(values[i])) continue;
    const double x = std::log(ks[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 10) throw EstimationError("fit_loglog_slope: fewer than 10 usable points");
  const double md = static_cast<double>(m);
  const double denom = md * sxx - sx * sx;
  if (denom <= 0) throw EstimationError("fit_loglog_slope: degenerate k range");
  return (md * sxy - sx * sy) / denom;
}

}  // namespace fbipg::rates

#pragma once

#include "fbipg/core.hpp"

#include <map>
#include <optional>
#include <string>

namespace fbipg {

/// Ground truth for a problem instance. Any field may be missing when no
/// oracle could produce it; `method` records where each present field came from.
struct OracleReport {
  std::optional<double> phi_star;
  std::optional<Vector> x_prime;
  std::optional<double> omega_xprime;
  std::optional<double> omega_star_inf;
  std::optional<double> tau;
  std::optional<double> rho;
  std::optional<double> R2;  // ||x0 - x'||^2
  std::map<std::string, std::string> method;

  bool has_outer_solution() const { return x_prime && omega_xprime && phi_star; }
};

/// The same oracle for the lifted problem over w = (x, z): w' = (x', x').
inline OracleReport lift_oracle(const OracleReport& o) {
  OracleReport out = o;
  if (o.x_prime) {
    const Index n = o.x_prime->size();
    Vector w(2 * n);
    w.head(n) = *o.x_prime;
    w.tail(n) = *o.x_prime;
    out.x_prime = std::move(w);
  }
  if (o.R2) out.R2 = 2.0 * *o.R2;
  out.tau.reset();
  out.rho.reset();
  return out;
}

}  // namespace fbipg

#pragma once

// Bi-level problem assembly: inner phi = f + g, outer omega = sigma + psi,
// regularized F_alpha = phi + alpha * omega, the prox of g + alpha * psi and
// the lifted reformulation used when that prox has no closed form.

#include "fbipg/csv.hpp"
#include "fbipg/functions.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

namespace fbipg {

struct BilevelProblem {
  SmoothFunction inner_smooth;  // f
  ProxFunction inner_prox;      // g
  SmoothFunction outer_smooth;  // sigma
  ProxFunction outer_prox;      // psi
  double beta;                  // >= L(f) + L(sigma); the solver's step is 1/beta
  Index dim;
  std::optional<Index> lifted_block;  // n when this is the 2n-dimensional lifted problem
  std::optional<double> omega_star;   // inf of omega over R^n, when known

  bool lifted() const { return lifted_block.has_value(); }

  double inner_value(const Vector& x) const {
    require_dim(x.size(), dim, "inner_value");
    const double g = inner_prox.value(x);
    if (std::isinf(g)) return g;
    return inner_smooth.value(x) + g;
  }

  double outer_value(const Vector& x) const {
    require_dim(x.size(), dim, "outer_value");
    const double psi = outer_prox.value(x);
    if (std::isinf(psi)) return psi;
    return outer_smooth.value(x) + psi;
  }

  double regularized_value(double alpha, const Vector& x) const {
    if (!(alpha >= 0)) throw ArgumentError("regularized_value: alpha must be nonnegative");
    const double phi = inner_value(x);
    if (alpha == 0.0) return phi;
    return phi + alpha * outer_value(x);
  }
};

/// Validates dimensions and fills beta = L(f) + L(sigma) unless overridden.
/// omega_star defaults to 0 when sigma is zero and psi is l1 or zero.
inline BilevelProblem make_problem(SmoothFunction f, ProxFunction g, SmoothFunction sigma, ProxFunction psi,
                                   std::optional<double> beta_override = std::nullopt,
                                   std::optional<double> omega_star = std::nullopt) {
  const Index n = f.dim();
  if (sigma.dim() != n) {
    throw SpecError("outer_smooth: dimension " + std::to_string(sigma.dim()) + " does not match " + std::to_string(n));
  }
  if (g.dim() && *g.dim() != n) {
    throw SpecError("inner_prox: dimension " + std::to_string(*g.dim()) + " does not match " + std::to_string(n));
  }
  if (psi.dim() && *psi.dim() != n) {
    throw SpecError("outer_prox: dimension " + std::to_string(*psi.dim()) + " does not match " + std::to_string(n));
  }
  double beta = f.lipschitz() + sigma.lipschitz();
  if (beta_override) {
    if (!(*beta_override > 0) || !std::isfinite(*beta_override)) throw SpecError("beta_override: must be positive");
    beta = *beta_override;
  }
  if (!(beta > 0)) throw SpecError("beta: L(f) + L(sigma) is zero; supply beta_override");
  if (!omega_star && sigma.kind() == SmoothKind::zero &&
      (psi.kind() == ProxKind::l1 || psi.kind() == ProxKind::zero)) {
    omega_star = 0.0;
  }
  return BilevelProblem{std::move(f), std::move(g), std::move(sigma), std::move(psi), beta, n, std::nullopt, omega_star};
}

/// Doubles the variables to w = (x, z):
///   inner  f(x) + g(x) + 1/2 ||x - z||^2,   outer  sigma(x) + psi(z),
/// so the prox of g + alpha psi becomes blockwise. Minimizers of the lifted
/// inner problem have z = x with x minimizing phi.
inline BilevelProblem lift(const BilevelProblem& p) {
  if (p.lifted()) throw ArgumentError("lift: problem is already lifted");
  const Index n = p.dim;
  BilevelProblem out{SmoothFunction::coupled(p.inner_smooth),
                     ProxFunction::separable_pair(p.inner_prox, ProxFunction::zero(n), n),
                     SmoothFunction::first_block(p.outer_smooth),
                     ProxFunction::separable_pair(ProxFunction::zero(n), p.outer_prox, n),
                     p.beta + 2.0,
                     2 * n,
                     n,
                     p.omega_star};
  return out;
}

namespace detail {

// Box (or nonnegative orthant) that contains the origin; prox of I_C + lambda|.|
// is then clip(soft_threshold(v)).
inline bool is_origin_box(const ProxFunction& h) {
  if (h.kind() == ProxKind::indicator_nonneg) return true;
  if (h.kind() != ProxKind::indicator_box) return false;
  return (h.lo().array() <= 0.0).all() && (h.hi().array() >= 0.0).all();
}

inline Vector project(const ProxFunction& box, const Vector& v) { return box.prox(v, 1.0); }

}  // namespace detail

/// Exact prox of g + alpha * psi with the given step, when the pair is in the
/// closed-form table; std::nullopt tells the caller to lift instead.
///
///   (zero, any) / (any, zero)     -> single prox
///   (l1 w1, l1 w2)                -> soft threshold at (w1 + alpha w2) step
///   (origin box, l1), (l1, origin box) -> clip(soft threshold)
///   separable pairs               -> blockwise
inline std::optional<Vector> combined_prox(const ProxFunction& g, const ProxFunction& psi, double alpha,
                                           const Vector& v, double step) {
  if (!(alpha >= 0)) throw ArgumentError("combined_prox: alpha must be nonnegative");
  if (!(step > 0)) throw ArgumentError("combined_prox: step must be positive");
  if (alpha == 0.0 || psi.kind() == ProxKind::zero) return g.prox(v, step);
  if (g.kind() == ProxKind::zero) return psi.prox(v, alpha * step);

  if (g.kind() == ProxKind::separable_pair || psi.kind() == ProxKind::separable_pair) {
    const Index split = g.kind() == ProxKind::separable_pair ? g.split() : psi.split();
    const Index n = v.size();
    if (split >= n) throw ArgumentError("combined_prox: vector shorter than block split");
    auto head = combined_prox(g.restrict(0, split), psi.restrict(0, split), alpha, v.head(split), step);
    if (!head) return std::nullopt;
    auto tail = combined_prox(g.restrict(split, n - split), psi.restrict(split, n - split), alpha, v.tail(n - split), step);
    if (!tail) return std::nullopt;
    Vector out(n);
    out.head(split) = *head;
    out.tail(n - split) = *tail;
    return out;
  }

  if (g.dim()) require_dim(v.size(), *g.dim(), "combined_prox");
  if (psi.dim()) require_dim(v.size(), *psi.dim(), "combined_prox");

  if (g.kind() == ProxKind::l1 && psi.kind() == ProxKind::l1) {
    return ProxFunction::soft_threshold(v, (g.weight() + alpha * psi.weight()) * step);
  }
  if (detail::is_origin_box(g) && psi.kind() == ProxKind::l1) {
    return detail::project(g, ProxFunction::soft_threshold(v, alpha * psi.weight() * step));
  }
  if (g.kind() == ProxKind::l1 && detail::is_origin_box(psi)) {
    return detail::project(psi, ProxFunction::soft_threshold(v, g.weight() * step));
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON problem files
//
// {"dim": n,
//  "inner_smooth": {"kind": "least_squares", "A": "A.csv" | [[..]], "b": "b.csv" | [..], "N": opt, "lipschitz": opt},
//  "inner_prox":   {"kind": "zero"},
//  "outer_smooth": {"kind": "zero"},
//  "outer_prox":   {"kind": "l1", "weight": 1.0},
//  "beta_override": opt, "omega_star": opt}
//
// Smooth kinds: least_squares(A, b), logistic(A, z), squared_l2(weight, center), zero.
// Prox kinds: l1(weight), zero, indicator_nonneg, indicator_box(lo, hi), squared_l2(weight, center).
// Paths are resolved against the directory holding the problem file. Any
// component may carry "dim" to pin its dimension.

namespace detail {

using nlohmann::json;

inline const json& require_key(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw SpecError(where + "." + key + ": missing");
  return obj.at(key);
}

inline double number_field(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require_key(obj, key, where);
  if (!v.is_number()) throw SpecError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::optional<double> optional_number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  if (!obj.at(key).is_number()) throw SpecError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

inline DenseMatrix matrix_field(const json& obj, const std::string& key, const std::string& where,
                                const std::filesystem::path& base) {
  const json& v = require_key(obj, key, where);
  const std::string field = where + "." + key;
  try {
    if (v.is_string()) return csv::read_matrix(base / v.get<std::string>());
    if (v.is_array()) {
      std::vector<std::vector<double>> rows;
      for (const auto& row : v) {
        if (!row.is_array()) throw SpecError("expected an array of rows");
        rows.push_back(row.get<std::vector<double>>());
        if (rows.back().size() != rows.front().size()) throw SpecError("ragged rows");
      }
      return csv::rows_to_matrix(rows);
    }
  } catch (const SpecError& e) {
    throw SpecError(field + ": " + e.what());
  } catch (const json::exception& e) {
    throw SpecError(field + ": " + e.what());
  }
  throw SpecError(field + ": expected a path or inline rows");
}

inline Vector vector_field(const json& obj, const std::string& key, const std::string& where,
                           const std::filesystem::path& base) {
  const json& v = require_key(obj, key, where);
  const std::string field = where + "." + key;
  try {
    if (v.is_string()) return csv::read_vector(base / v.get<std::string>());
    if (v.is_array()) {
      const auto values = v.get<std::vector<double>>();
      return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    }
  } catch (const SpecError& e) {
    throw SpecError(field + ": " + e.what());
  } catch (const json::exception& e) {
    throw SpecError(field + ": " + e.what());
  }
  throw SpecError(field + ": expected a path or inline list");
}

inline std::string kind_field(const json& obj, const std::string& where) {
  const json& k = require_key(obj, "kind", where);
  if (!k.is_string()) throw SpecError(where + ".kind: expected a string");
  return k.get<std::string>();
}

inline void check_component_dim(const json& obj, const std::string& where, Index got, Index want) {
  if (got != want) {
    throw SpecError(where + ": dimension " + std::to_string(got) + " does not match dim " + std::to_string(want));
  }
  if (obj.contains("dim")) {
    const auto pinned = obj.at("dim").get<long long>();
    if (pinned != want) {
      throw SpecError(where + ".dim: dimension " + std::to_string(pinned) + " does not match dim " +
                      std::to_string(want));
    }
  }
}

inline SmoothFunction parse_smooth(const json& obj, const std::string& where, Index dim,
                                   const std::filesystem::path& base) {
  const std::string kind = kind_field(obj, where);
  const auto lip = optional_number(obj, "lipschitz", where);
  try {
    if (kind == "least_squares") {
      DenseMatrix A = matrix_field(obj, "A", where, base);
      Vector b = vector_field(obj, "b", where, base);
      if (b.size() != A.rows()) throw SpecError(where + ".b: length does not match rows of A");
      check_component_dim(obj, where, A.cols(), dim);
      return SmoothFunction::least_squares(std::move(A), std::move(b), optional_number(obj, "N", where), lip);
    }
    if (kind == "logistic") {
      DenseMatrix A = matrix_field(obj, "A", where, base);
      Vector z = vector_field(obj, "z", where, base);
      if (z.size() != A.rows()) throw SpecError(where + ".z: length does not match rows of A");
      check_component_dim(obj, where, A.cols(), dim);
      return SmoothFunction::logistic(std::move(A), std::move(z), optional_number(obj, "N", where), lip);
    }
    if (kind == "squared_l2") {
      Vector center = obj.contains("center") ? vector_field(obj, "center", where, base) : Vector::Zero(dim);
      check_component_dim(obj, where, center.size(), dim);
      return SmoothFunction::squared_l2(number_field(obj, "weight", where), std::move(center));
    }
    if (kind == "zero") {
      if (obj.contains("dim")) check_component_dim(obj, where, dim, dim);
      return SmoothFunction::zero(dim);
    }
  } catch (const ArgumentError& e) {
    throw SpecError(where + ": " + e.what());
  }
  throw SpecError(where + ".kind: unknown smooth kind '" + kind + "'");
}

inline ProxFunction parse_prox(const json& obj, const std::string& where, Index dim,
                               const std::filesystem::path& base) {
  const std::string kind = kind_field(obj, where);
  if (obj.contains("dim")) {
    if (!obj.at("dim").is_number_integer()) throw SpecError(where + ".dim: expected an integer");
    check_component_dim(obj, where, dim, dim);
  }
  try {
    if (kind == "l1") return ProxFunction::l1(number_field(obj, "weight", where), dim);
    if (kind == "zero") return ProxFunction::zero(dim);
    if (kind == "indicator_nonneg") return ProxFunction::indicator_nonneg(dim);
    if (kind == "indicator_box") {
      Vector lo = vector_field(obj, "lo", where, base);
      Vector hi = vector_field(obj, "hi", where, base);
      check_component_dim(obj, where, lo.size(), dim);
      check_component_dim(obj, where, hi.size(), dim);
      return ProxFunction::indicator_box(std::move(lo), std::move(hi));
    }
    if (kind == "squared_l2") {
      Vector center = obj.contains("center") ? vector_field(obj, "center", where, base) : Vector::Zero(dim);
      check_component_dim(obj, where, center.size(), dim);
      return ProxFunction::squared_l2(number_field(obj, "weight", where), std::move(center));
    }
  } catch (const ArgumentError& e) {
    throw SpecError(where + ": " + e.what());
  }
  throw SpecError(where + ".kind: unknown prox kind '" + kind + "'");
}

}  // namespace detail

inline BilevelProblem assemble_problem(const nlohmann::json& spec, const std::filesystem::path& base_dir = ".") {
  using detail::require_key;
  if (!spec.is_object()) throw SpecError("problem: expected a JSON object");
  const auto& dim_field = require_key(spec, "dim", "problem");
  if (!dim_field.is_number_integer() || dim_field.get<long long>() <= 0) {
    throw SpecError("problem.dim: expected a positive integer");
  }
  const Index dim = dim_field.get<Index>();
  auto f = detail::parse_smooth(require_key(spec, "inner_smooth", "problem"), "inner_smooth", dim, base_dir);
  auto g = detail::parse_prox(require_key(spec, "inner_prox", "problem"), "inner_prox", dim, base_dir);
  auto sigma = detail::parse_smooth(require_key(spec, "outer_smooth", "problem"), "outer_smooth", dim, base_dir);
  auto psi = detail::parse_prox(require_key(spec, "outer_prox", "problem"), "outer_prox", dim, base_dir);
  return make_problem(std::move(f), std::move(g), std::move(sigma), std::move(psi),
                      detail::optional_number(spec, "beta_override", "problem"),
                      detail::optional_number(spec, "omega_star", "problem"));
}

inline BilevelProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open problem file " + path.string());
  nlohmann::json spec;
  try {
    in >> spec;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
  return assemble_problem(spec, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace fbipg

#pragma once

// Fast bi-level proximal gradient with dynamic Tikhonov weights
// alpha_k = (k + a)^(-gamma), and the fixed-weight accelerated baseline.
//
// One iteration at index k:
//   y^k     = x^k + (t_{k-1} - 1)/t_k (x^k - x^{k-1})
//   x^{k+1} = prox_{(g + alpha_k psi)/beta}( y^k - (grad f(y^k) + alpha_k grad sigma(y^k)) / beta )
//   t_{k+1} = (k + 1 + a)/a            (explicit, default)
//           | (1 + sqrt(1 + 4 t_k^2))/2 (recursion)
// with t_{-1} = 0, t_0 = 1 and x^{-1} = x^0.

#include "fbipg/oracle.hpp"
#include "fbipg/problem.hpp"
#include "fbipg/rates.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fbipg {

enum class TMode { explicit_formula, fista_recursion };
enum class LiftMode { off, automatic, force };

struct FBiPGConfig {
  double gamma = 1.5;
  int a = 2;
  TMode t_mode = TMode::explicit_formula;
  long iters = 1000;
  long trace_stride = 1;
  LiftMode lift_mode = LiftMode::off;
  bool audit = false;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;  // zeros when absent
  bool track_ergodic = false;  // forced on when gamma == 1
  bool keep_iterates = false;  // store x^k in each trace record
};

inline void check_config(const FBiPGConfig& c) {
  if (!(c.gamma > 0) || !std::isfinite(c.gamma)) throw ConfigError("gamma must be positive");
  if (c.a < 2) throw ConfigError("a must be an integer >= 2");
  if (c.iters < 0) throw ConfigError("iters must be nonnegative");
  if (c.trace_stride < 1) throw ConfigError("trace_stride must be >= 1");
}

struct SolverState {
  long k = 0;
  Vector x;       // x^k
  Vector x_prev;  // x^{k-1}
  double t = 1.0;       // t_k
  double t_prev = 0.0;  // t_{k-1}
  double alpha = 0.0;   // alpha_{k-1}, the weight that produced x^k
  Vector ergodic_sum;   // sum_{s=1}^k x^s
  double omega_best = kInf;  // min_{1<=s<=k} omega(x^s)
  double tdelta_sum = 0.0;   // sum_{s<=k} t_{s-1} delta_s, delta_s = ||x^s - x^{s-1}||^2 / 2
};

inline SolverState initial_state(const Vector& x0) {
  SolverState s;
  s.x = x0;
  s.x_prev = x0;
  s.ergodic_sum = Vector::Zero(x0.size());
  return s;
}

/// y = x_k + (t_prev - 1)/t_k (x_k - x_prev).
inline Vector momentum_point(const Vector& x_k, const Vector& x_prev, double t_k, double t_prev) {
  if (!(t_k >= 1)) throw ArgumentError("momentum_point: t_k must be >= 1");
  require_dim(x_prev.size(), x_k.size(), "momentum_point");
  return x_k + ((t_prev - 1.0) / t_k) * (x_k - x_prev);
}

namespace detail {

inline Vector prox_gradient_point(const BilevelProblem& p, const Vector& y, double alpha) {
  Vector grad = p.inner_smooth.gradient(y);
  if (alpha != 0.0 && p.outer_smooth.kind() != SmoothKind::zero) grad += alpha * p.outer_smooth.gradient(y);
  const double step = 1.0 / p.beta;
  auto next = combined_prox(p.inner_prox, p.outer_prox, alpha, y - step * grad, step);
  if (!next) {
    throw ConfigError("prox of g + alpha*psi has no closed form for (" + std::string(to_string(p.inner_prox.kind())) +
                      ", " + to_string(p.outer_prox.kind()) + "); rerun with lift auto or force");
  }
  return std::move(*next);
}

inline double next_t(TMode mode, long k_next, int a, double t) {
  return mode == TMode::explicit_formula ? rates::t_explicit(k_next, a) : rates::t_fista(t);
}

// Advances state from index k to k+1 with weight alpha_k. Omega bookkeeping
// is left to the caller, which already evaluates omega(x^{k+1}).
inline SolverState advance(const SolverState& s, const BilevelProblem& p, double alpha, TMode mode, int a) {
  const Vector y = momentum_point(s.x, s.x_prev, s.t, s.t_prev);
  SolverState n;
  n.k = s.k + 1;
  n.x = prox_gradient_point(p, y, alpha);
  if (!n.x.allFinite()) throw NumericError("non-finite iterate", n.k);
  n.x_prev = s.x;
  n.t_prev = s.t;
  n.t = next_t(mode, n.k, a, s.t);
  n.alpha = alpha;
  n.ergodic_sum = s.ergodic_sum + n.x;
  n.omega_best = s.omega_best;
  n.tdelta_sum = s.tdelta_sum + s.t * 0.5 * (n.x - s.x).squaredNorm();
  return n;
}

}  // namespace detail

/// One step of the dynamic scheme: alpha_k = (k + a)^(-gamma), then the
/// prox-gradient update from the momentum point. omega_best is refreshed.
inline SolverState fbipg_step(const SolverState& state, const BilevelProblem& problem, const FBiPGConfig& config) {
  check_config(config);
  const double alpha = rates::alpha_k(state.k, config.a, config.gamma);
  SolverState next = detail::advance(state, problem, alpha, config.t_mode, config.a);
  next.omega_best = std::min(next.omega_best, problem.outer_value(next.x));
  return next;
}

// ---------------------------------------------------------------------------
// Traces

struct TraceRecord {
  long k = 0;
  double alpha_k = 0;
  double t_k = 0;
  double phi = 0;
  std::optional<double> phi_gap;
  double omega = 0;
  std::optional<double> omega_best;
  std::optional<double> omega_ergodic;
  std::optional<double> omega_tilde;
  std::optional<double> F_k_gap;
  double step_norm = 0;
  double tdelta_sum = 0;
  std::optional<double> mu_k;
  // Not serialized.
  std::optional<double> phi_tilde;  // phi at the argmin defining omega_tilde
  std::optional<Vector> x;
};

struct IterateTrace {
  std::vector<TraceRecord> records;

  const TraceRecord& back() const { return records.back(); }
  std::vector<double> ks() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(static_cast<double>(r.k));
    return out;
  }
};

inline constexpr const char* kTraceHeader =
    "k,alpha_k,t_k,phi,phi_gap,omega,omega_best,omega_ergodic,omega_tilde,F_k_gap,step_norm,tdelta_sum,mu_k";

inline void write_trace_csv(std::ostream& out, const IterateTrace& trace) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.k << ',' << format_double(r.alpha_k) << ',' << format_double(r.t_k) << ',' << format_double(r.phi)
        << ',' << opt(r.phi_gap) << ',' << format_double(r.omega) << ',' << opt(r.omega_best) << ','
        << opt(r.omega_ergodic) << ',' << opt(r.omega_tilde) << ',' << opt(r.F_k_gap) << ','
        << format_double(r.step_norm) << ',' << format_double(r.tdelta_sum) << ',' << opt(r.mu_k) << '\n';
  }
}

inline void write_trace_csv(const std::filesystem::path& path, const IterateTrace& trace) {
  std::ofstream out(path);
  if (!out) throw SpecError("cannot write " + path.string());
  write_trace_csv(out, trace);
}

// ---------------------------------------------------------------------------
// Runtime inequality audit

struct AuditCheck {
  std::string id;
  long k = 0;
  double lhs = 0;
  double rhs = 0;
  bool pass = true;
};

/// Pass/fail tallies per inequality id, the worst (largest lhs - rhs) check
/// seen for each id, and up to kMaxKept failing checks.
struct AuditLog {
  static constexpr std::size_t kMaxKept = 200;
  struct Tally {
    long passes = 0;
    long failures = 0;
    AuditCheck worst;
    bool has_worst = false;
  };
  std::map<std::string, Tally> tallies;
  std::vector<AuditCheck> failures;

  void add(AuditCheck c) {
    auto& t = tallies[c.id];
    if (c.pass) {
      ++t.passes;
    } else {
      ++t.failures;
      if (failures.size() < kMaxKept) failures.push_back(c);
    }
    if (!t.has_worst || c.lhs - c.rhs > t.worst.lhs - t.worst.rhs) {
      t.worst = c;
      t.has_worst = true;
    }
  }

  void check(const std::string& id, long k, double lhs, double rhs, double tol) {
    add(AuditCheck{id, k, lhs, rhs, lhs <= rhs + tol});
  }

  long total_passes() const {
    long n = 0;
    for (const auto& [id, t] : tallies) n += t.passes;
    return n;
  }
  long total_failures() const {
    long n = 0;
    for (const auto& [id, t] : tallies) n += t.failures;
    return n;
  }
};

inline double audit_tolerance(double rhs) { return 1e-8 * (1.0 + std::abs(rhs)); }

// ---------------------------------------------------------------------------
// Runs

struct RunResult {
  IterateTrace trace;
  AuditLog audit;
  Vector x_final;  // full iterate (both blocks when lifted)
  bool lifted = false;
  double beta = 0;

  /// x-block of the final iterate (the whole iterate when not lifted).
  Vector x_block() const { return lifted ? Vector(x_final.head(x_final.size() / 2)) : x_final; }
  /// z-block of the final iterate of a lifted run.
  Vector z_block() const {
    if (!lifted) throw ArgumentError("z_block: run was not lifted");
    return x_final.tail(x_final.size() / 2);
  }
};

namespace detail {

struct RunSettings {
  std::function<double(long)> alpha;  // alpha_k for k >= 0
  TMode t_mode = TMode::explicit_formula;
  int a = 2;
  long iters = 0;
  long trace_stride = 1;
  LiftMode lift_mode = LiftMode::off;
  bool audit = false;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;
  bool track_ergodic = false;
  bool keep_iterates = false;
};

inline bool needs_lift(const BilevelProblem& p, LiftMode mode) {
  if (p.lifted()) return false;
  if (mode == LiftMode::force) return true;
  if (mode == LiftMode::off) return false;
  return !combined_prox(p.inner_prox, p.outer_prox, 1.0, Vector::Zero(p.dim), 1.0).has_value();
}

inline RunResult run_core(const BilevelProblem& original, const RunSettings& cfg, const OracleReport* oracle_in) {
  const bool lifted = needs_lift(original, cfg.lift_mode);
  const BilevelProblem p = lifted ? lift(original) : original;
  std::optional<OracleReport> lifted_oracle;
  if (lifted && oracle_in) lifted_oracle = lift_oracle(*oracle_in);
  const OracleReport* oracle = lifted ? (lifted_oracle ? &*lifted_oracle : nullptr) : oracle_in;

  Vector x0 = Vector::Zero(original.dim);
  if (cfg.x0) {
    require_dim(cfg.x0->size(), original.dim, "x0");
    x0 = *cfg.x0;
  }
  if (lifted) {
    Vector w(2 * original.dim);
    w << x0, x0;
    x0 = std::move(w);
  }
  // Probe the prox table once up front so a missing closed form fails before iterating.
  (void)prox_gradient_point(p, x0, cfg.alpha(0));

  const std::optional<double> phi_star = oracle ? oracle->phi_star : std::nullopt;
  const Vector* x_prime = oracle && oracle->x_prime ? &*oracle->x_prime : nullptr;
  if (x_prime) require_dim(x_prime->size(), p.dim, "oracle x_prime");
  const double omega_xp = x_prime ? p.outer_value(*x_prime) : 0.0;
  const double phi_xp = x_prime ? p.inner_value(*x_prime) : 0.0;
  std::optional<double> omega_star = p.omega_star;
  if (oracle && oracle->omega_star_inf) omega_star = oracle->omega_star_inf;

  RunResult result;
  result.lifted = lifted;
  result.beta = p.beta;

  // Probe points for the per-step inequality; centered at x' when known.
  std::vector<Vector> probes;
  if (cfg.audit) {
    SplitMix64 rng = SplitMix64(cfg.seed).split(stream::kProbes);
    const double radius = x_prime ? (x0 - *x_prime).norm() : 0.0;
    for (int j = 0; j < 5; ++j) {
      Vector g = rng.normal_vector(p.dim);
      if (x_prime) {
        probes.push_back(*x_prime + (radius > 0 ? radius : 1.0) * g / g.norm());
      } else {
        probes.push_back(std::move(g));
      }
    }
    if (x_prime) probes.push_back(*x_prime);
  }
  const double R2 = x_prime ? (x0 - *x_prime).squaredNorm() : 0.0;

  auto reg_value = [&](double alpha, const Vector& x) { return p.regularized_value(alpha, x); };

  auto make_record = [&](const SolverState& s, double omega_now) {
    TraceRecord r;
    r.k = s.k;
    r.alpha_k = cfg.alpha(s.k);
    r.t_k = s.t;
    r.phi = p.inner_value(s.x);
    if (std::isnan(r.phi)) throw NumericError("non-finite inner value", s.k);
    if (phi_star) r.phi_gap = r.phi - *phi_star;
    r.omega = omega_now;
    if (s.k >= 1) r.omega_best = s.omega_best;
    if (cfg.track_ergodic && s.k >= 1) {
      const Vector avg = s.ergodic_sum / static_cast<double>(s.k);
      const double oe = p.outer_value(avg);
      r.omega_ergodic = oe;
      // Ties go to the last iterate.
      if (oe < omega_now) {
        r.omega_tilde = oe;
        r.phi_tilde = p.inner_value(avg);
      } else {
        r.omega_tilde = omega_now;
        r.phi_tilde = r.phi;
      }
    }
    if (x_prime) {
      r.F_k_gap = reg_value(r.alpha_k, s.x) - reg_value(r.alpha_k, *x_prime);
      r.mu_k = 0.5 * (s.x - *x_prime).squaredNorm();
    }
    r.step_norm = (s.x - s.x_prev).norm();
    r.tdelta_sum = s.tdelta_sum;
    if (cfg.keep_iterates) r.x = s.x;
    return r;
  };

  auto recorded = [&](long k) { return k % cfg.trace_stride == 0 || k == cfg.iters; };

  SolverState state = initial_state(x0);
  double omega_now = p.outer_value(state.x);
  result.trace.records.push_back(make_record(state, omega_now));

  // Running sums for the cumulative inequalities.
  CompensatedSum eta_omega_sum;  // sum_{s<k} eta_s (omega(x^s) - omega(x'))
  CompensatedSum alpha_t_sum;    // sum_{s<k} alpha_s t_s
  double alpha_prev = 0.0;       // alpha_{k-1}, alpha_{-1} = 0

  for (long k = 0; k < cfg.iters; ++k) {
    const double alpha = cfg.alpha(k);
    if (cfg.audit && x_prime) {
      const double eta = state.t_prev * state.t_prev * alpha_prev - (state.t * state.t - state.t) * alpha;
      eta_omega_sum.add(eta * (omega_now - omega_xp));
      alpha_t_sum.add(alpha * state.t);
    }

    SolverState next = advance(state, p, alpha, cfg.t_mode, cfg.a);
    const double omega_next = p.outer_value(next.x);
    if (std::isnan(omega_next)) throw NumericError("non-finite outer value", next.k);
    next.omega_best = std::min(state.omega_best, omega_next);

    if (cfg.audit && recorded(next.k)) {
      // Per-step inequality at index k, for every probe u:
      // t_k^2 (F_k(x^{k+1}) - F_k(u)) + beta/2 ||z^{k+1} - u||^2
      //   <= (t_k^2 - t_k)(F_k(x^k) - F_k(u)) + beta/2 ||z^k - u||^2,
      // z^k = (1 - t_{k-1}) x^{k-1} + t_{k-1} x^k.
      const double t = state.t;
      const Vector z_k = (1.0 - state.t_prev) * state.x_prev + state.t_prev * state.x;
      const Vector z_next = (1.0 - t) * state.x + t * next.x;
      const double F_next = reg_value(alpha, next.x);
      const double F_cur = reg_value(alpha, state.x);
      for (const auto& u : probes) {
        const double F_u = reg_value(alpha, u);
        if (std::isinf(F_u)) continue;
        const double lhs = t * t * (F_next - F_u) + 0.5 * p.beta * (z_next - u).squaredNorm();
        const double coef = t * t - t;
        const double rhs = (coef == 0.0 ? 0.0 : coef * (F_cur - F_u)) + 0.5 * p.beta * (z_k - u).squaredNorm();
        result.audit.check("step_inequality", k, lhs, rhs, audit_tolerance(rhs));
      }
      if (x_prime) {
        const double base = 0.5 * p.beta * R2;
        const double t2 = t * t;  // t_{(k+1)-1}^2
        const double lhs3 = t2 * (reg_value(alpha, next.x) - reg_value(alpha, *x_prime));
        const double rhs3 = base - eta_omega_sum.value();
        result.audit.check("cumulative_regularized", next.k, lhs3, rhs3, audit_tolerance(rhs3));
        if (omega_star) {
          const double lhs4 = t2 * (p.inner_value(next.x) - phi_xp);
          const double rhs4 = base + (omega_xp - *omega_star) * alpha_t_sum.value();
          result.audit.check("cumulative_inner", next.k, lhs4, rhs4, audit_tolerance(rhs4));
        }
      }
    }

    alpha_prev = alpha;
    state = std::move(next);
    omega_now = omega_next;
    if (recorded(state.k)) result.trace.records.push_back(make_record(state, omega_now));
  }
  result.x_final = state.x;
  return result;
}

}  // namespace detail

/// Runs `config.iters` iterations from x0 (zeros by default) and records every
/// trace_stride-th iterate plus the last. With an oracle, gap metrics are
/// filled; with audit on, the per-step and cumulative inequalities are checked
/// at each recorded step. Lifts the problem when lift_mode requires it.
inline RunResult run_fbipg(const BilevelProblem& problem, const FBiPGConfig& config,
                           const OracleReport* oracle = nullptr) {
  check_config(config);
  detail::RunSettings s;
  s.alpha = [a = config.a, g = config.gamma](long k) { return rates::alpha_k(k, a, g); };
  s.t_mode = config.t_mode;
  s.a = config.a;
  s.iters = config.iters;
  s.trace_stride = config.trace_stride;
  s.lift_mode = config.lift_mode;
  s.audit = config.audit;
  s.seed = config.seed;
  s.x0 = config.x0;
  s.track_ergodic = config.track_ergodic || config.gamma == 1.0;
  s.keep_iterates = config.keep_iterates;
  return detail::run_core(problem, s, oracle);
}

struct FixedRunOptions {
  long trace_stride = 1;
  LiftMode lift_mode = LiftMode::off;
  bool audit = false;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;
  bool keep_iterates = false;
};

/// Accelerated proximal gradient on F_alpha = phi + alpha omega with constant
/// alpha, recursion t-sequence and step 1/beta.
inline RunResult run_fista_fixed(const BilevelProblem& problem, double alpha, long iters,
                                 const FixedRunOptions& options = {}, const OracleReport* oracle = nullptr) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw ArgumentError("run_fista_fixed: alpha must be positive");
  if (iters < 0) throw ArgumentError("run_fista_fixed: iters must be nonnegative");
  if (options.trace_stride < 1) throw ArgumentError("run_fista_fixed: trace_stride must be >= 1");
  detail::RunSettings s;
  s.alpha = [alpha](long) { return alpha; };
  s.t_mode = TMode::fista_recursion;
  s.iters = iters;
  s.trace_stride = options.trace_stride;
  s.lift_mode = options.lift_mode;
  s.audit = options.audit;
  s.seed = options.seed;
  s.x0 = options.x0;
  s.keep_iterates = options.keep_iterates;
  return detail::run_core(problem, s, oracle);
}

/// Plain accelerated proximal gradient on the inner problem alone (alpha = 0).
inline RunResult run_inner_only(const BilevelProblem& problem, long iters, long trace_stride = 1,
                                std::optional<Vector> x0 = std::nullopt) {
  if (trace_stride < 1) throw ArgumentError("run_inner_only: trace_stride must be >= 1");
  detail::RunSettings s;
  s.alpha = [](long) { return 0.0; };
  s.t_mode = TMode::fista_recursion;
  s.iters = iters;
  s.trace_stride = trace_stride;
  s.lift_mode = LiftMode::off;
  s.x0 = std::move(x0);
  return detail::run_core(problem, s, nullptr);
}

}  // namespace fbipg

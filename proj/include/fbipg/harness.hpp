#pragma once

// Synthetic instances, ground-truth oracles and trace-vs-theory auditing.

#include "fbipg/oracle.hpp"
#include "fbipg/problem.hpp"
#include "fbipg/rates.hpp"
#include "fbipg/solver.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace fbipg {

// ---------------------------------------------------------------------------
// Generators

struct LeastSquaresData {
  DenseMatrix A;
  Vector b;
  Vector x_planted;
};

/// A has i.i.d. standard normal entries. x_planted has `sparsity` entries of
/// +-1 at random positions. b = A x_planted, plus N(0, noise_std^2) noise
/// when not consistent.
inline LeastSquaresData gen_least_squares(Index N, Index n, std::uint64_t seed, bool consistent, Index sparsity,
                                          double noise_std = 0.1) {
  if (N < 1 || n < 1) throw ArgumentError("gen_least_squares: N and n must be >= 1");
  if (sparsity < 0 || sparsity > n) throw ArgumentError("gen_least_squares: sparsity must lie in [0, n]");
  const SplitMix64 root(seed);
  SplitMix64 mat = root.split(stream::kMatrix);
  LeastSquaresData d;
  d.A.resize(N, n);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < n; ++j) d.A(i, j) = mat.normal();

  // Partial Fisher-Yates picks the support.
  SplitMix64 planted = root.split(stream::kPlanted);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  d.x_planted = Vector::Zero(n);
  for (Index s = 0; s < sparsity; ++s) {
    const auto pick = s + static_cast<Index>(planted.below(static_cast<std::uint64_t>(n - s)));
    std::swap(idx[s], idx[pick]);
    d.x_planted[idx[s]] = (planted.next() >> 63) ? 1.0 : -1.0;
  }

  d.b = d.A * d.x_planted;
  if (!consistent) {
    SplitMix64 noise = root.split(stream::kNoise);
    for (Index i = 0; i < N; ++i) d.b[i] += noise_std * noise.normal();
  }
  return d;
}

struct LogisticData {
  DenseMatrix A;
  Vector z;
  Vector w_planted;
};

/// Standard normal features; planted weights w ~ N(0, I/m), so a_i.w is
/// roughly standard normal and the classes overlap. z_i ~ Bernoulli(sigmoid(a_i.w)).
inline LogisticData gen_logistic(Index N, Index m, std::uint64_t seed) {
  if (N < 1 || m < 1) throw ArgumentError("gen_logistic: N and m must be >= 1");
  const SplitMix64 root(seed);
  SplitMix64 mat = root.split(stream::kMatrix);
  LogisticData d;
  d.A.resize(N, m);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < m; ++j) d.A(i, j) = mat.normal();
  SplitMix64 planted = root.split(stream::kPlanted);
  d.w_planted = planted.normal_vector(m) / std::sqrt(static_cast<double>(m));
  SplitMix64 labels = root.split(stream::kLabels);
  const Vector t = d.A * d.w_planted;
  d.z.resize(N);
  for (Index i = 0; i < N; ++i) d.z[i] = labels.uniform() < detail::sigmoid(t[i]) ? 1.0 : 0.0;
  return d;
}

// ---------------------------------------------------------------------------
// Oracles

namespace detail {

inline bool is_plain_least_squares(const BilevelProblem& p) {
  return !p.lifted() && p.inner_smooth.kind() == SmoothKind::least_squares && p.inner_prox.kind() == ProxKind::zero;
}

// X* = {x : V_r^T x = c} for least squares, with V_r the right singular
// vectors of the nonzero singular values and c = S_r^{-1} U_r^T b.
struct AffineSolutionSet {
  Eigen::MatrixXd M;  // r x n, orthonormal rows
  Vector c;
  Vector x_ls;        // minimum-norm point
  Vector singular_values;
  Index rank = 0;
};

inline AffineSolutionSet least_squares_solution_set(const SmoothFunction& f) {
  const Eigen::MatrixXd A = f.matrix();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double thresh = static_cast<double>(std::max(A.rows(), A.cols())) * std::numeric_limits<double>::epsilon() *
                        (s.size() ? s[0] : 0.0);
  AffineSolutionSet out;
  out.singular_values = s;
  while (out.rank < s.size() && s[out.rank] > thresh) ++out.rank;
  const Index r = out.rank;
  out.M = svd.matrixV().leftCols(r).transpose();
  out.c = (svd.matrixU().leftCols(r).transpose() * f.vector()).cwiseQuotient(s.head(r));
  out.x_ls = svd.matrixV().leftCols(r) * out.c;
  return out;
}

// min c^T x  s.t.  A x = b, x >= 0, A with full row rank. Two-phase dense
// tableau simplex, Dantzig pricing. The right-hand side is perturbed by a
// tiny deterministic amount so degenerate pivots (common here: the optimum
// is sparse) cannot cycle; callers re-solve on the final basis with the
// exact right-hand side. Returns nullopt when infeasible or unbounded.
struct SimplexResult {
  Vector x;
  std::vector<Index> basis;  // indices >= A.cols() are artificials
};

inline std::optional<SimplexResult> simplex_standard_form(const Eigen::MatrixXd& A, const Vector& b,
                                                          const Vector& cost) {
  const Index m = A.rows();
  const Index n = A.cols();
  const Index width = n + m + 1;  // originals, artificials, rhs
  const double tol = 1e-11;
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  SplitMix64 jitter(0x5EEDULL);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, width);
  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const double sgn = b[i] < 0 ? -1.0 : 1.0;
    T.row(i).head(n) = sgn * A.row(i);
    T(i, n + i) = 1.0;
    T(i, width - 1) = sgn * b[i] + 1e-8 * scale * jitter.uniform();
    basis[static_cast<std::size_t>(i)] = n + i;
  }

  auto pivot = [&](Index row, Index col) {
    T.row(row) /= T(row, col);
    for (Index i = 0; i <= m; ++i) {
      if (i != row && T(i, col) != 0.0) T.row(i) -= T(i, col) * T.row(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  };

  // Objective row holds reduced costs; its last entry is -objective.
  auto run = [&](Index allowed_cols) -> bool {
    for (long guard = 0; guard < 50 * (m + n) + 1000; ++guard) {
      Index enter = -1;
      double most = -tol;
      for (Index j = 0; j < allowed_cols; ++j) {
        if (T(m, j) < most) {
          most = T(m, j);
          enter = j;
        }
      }
      if (enter < 0) return true;
      Index leave = -1;
      double best = kInf;
      for (Index i = 0; i < m; ++i) {
        if (T(i, enter) > tol) {
          const double ratio = T(i, width - 1) / T(i, enter);
          if (ratio < best) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
    return false;
  };

  // Phase 1: minimize the sum of artificials.
  for (Index i = 0; i < m; ++i) T.row(m) -= T.row(i);
  for (Index i = 0; i < m; ++i) T(m, n + i) = 0.0;
  if (!run(n + m)) return std::nullopt;
  if (-T(m, width - 1) > 1e-6 * scale) return std::nullopt;
  for (Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) continue;
    Index col = -1;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(T(i, j)) > 1e-9 && (col < 0 || std::abs(T(i, j)) > std::abs(T(i, col)))) col = j;
    }
    if (col >= 0) pivot(i, col);
  }

  // Phase 2 on the original columns only.
  T.row(m).setZero();
  T.row(m).head(n) = cost.transpose();
  for (Index i = 0; i < m; ++i) {
    const Index bi = basis[static_cast<std::size_t>(i)];
    if (bi < n && cost[bi] != 0.0) T.row(m) -= cost[bi] * T.row(i);
  }
  if (!run(n)) return std::nullopt;

  SimplexResult out;
  out.x = Vector::Zero(n);
  for (Index i = 0; i < m; ++i) {
    const Index bi = basis[static_cast<std::size_t>(i)];
    if (bi < n) out.x[bi] = std::max(0.0, T(i, width - 1));
  }
  out.basis = std::move(basis);
  return out;
}

inline double support_threshold(const Vector& x) {
  return x.size() ? 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff()) : 0.0;
}

// Zeroes entries below the support threshold (round-off from degenerate bases).
inline Vector clean_support(Vector x) {
  const double t = support_threshold(x);
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) <= t) x[i] = 0.0;
  return x;
}

inline Index count_nonzeros(const Vector& x) {
  const double t = support_threshold(x);
  return (x.array().abs() > t).count();
}

}  // namespace detail

/// min ||x||_1 over {M x = c}, M with full row rank, via the LP
/// min 1^T(u + v), M(u - v) = c, u, v >= 0. The optimal basis found on the
/// perturbed LP is re-solved with the exact c.
inline Vector min_l1_simplex(const Eigen::MatrixXd& M, const Vector& c) {
  const Index r = M.rows();
  const Index n = M.cols();
  if (r == 0) return Vector::Zero(n);
  Eigen::MatrixXd big(r, 2 * n);
  big << M, -M;
  auto res = detail::simplex_standard_form(big, c, Vector::Ones(2 * n));
  if (!res) throw UnsupportedError("min_l1_simplex: LP solve failed");
  Vector x = res->x.head(n) - res->x.tail(n);
  const bool clean = std::all_of(res->basis.begin(), res->basis.end(), [&](Index j) { return j < 2 * n; });
  if (clean) {
    Eigen::MatrixXd B(r, r);
    for (Index q = 0; q < r; ++q) B.col(q) = big.col(res->basis[static_cast<std::size_t>(q)]);
    const Vector xb = B.fullPivLu().solve(c);
    if ((B * xb - c).norm() <= 1e-9 * (1.0 + c.norm()) && xb.minCoeff() >= -1e-9 * (1.0 + xb.cwiseAbs().maxCoeff())) {
      x.setZero();
      for (Index q = 0; q < r; ++q) {
        const Index j = res->basis[static_cast<std::size_t>(q)];
        if (j < n) x[j] += xb[q];
        else x[j - n] -= xb[q];
      }
    }
  }
  return detail::clean_support(x);
}

/// min ||x||_1 over {M x = c} by enumerating every basic solution: each
/// nonsingular r-column submatrix gives one vertex candidate. Returns the
/// minimizer and, when `all_values` is given, the L1 norm of every candidate.
inline Vector min_l1_enumerate(const Eigen::MatrixXd& M, const Vector& c, std::vector<double>* all_values = nullptr) {
  const Index r = M.rows();
  const Index n = M.cols();
  if (n > 20) throw UnsupportedError("min_l1_enumerate: n > 20");
  if (r == 0) return Vector::Zero(n);
  std::vector<bool> pick(static_cast<std::size_t>(n), false);
  std::fill(pick.begin(), pick.begin() + r, true);
  Vector best;
  double best_l1 = kInf;
  Eigen::MatrixXd Ms(r, r);
  std::vector<Index> cols(static_cast<std::size_t>(r));
  do {
    Index k = 0;
    for (Index j = 0; j < n; ++j)
      if (pick[static_cast<std::size_t>(j)]) cols[static_cast<std::size_t>(k++)] = j;
    for (Index q = 0; q < r; ++q) Ms.col(q) = M.col(cols[static_cast<std::size_t>(q)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Ms);
    if (lu.rank() < r) continue;
    const Vector xs = lu.solve(c);
    const double l1 = xs.lpNorm<1>();
    if (all_values) all_values->push_back(l1);
    if (l1 < best_l1) {
      best_l1 = l1;
      best = Vector::Zero(n);
      for (Index q = 0; q < r; ++q) best[cols[static_cast<std::size_t>(q)]] = xs[q];
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  if (best.size() == 0) throw UnsupportedError("min_l1_enumerate: no nonsingular basis");
  return detail::clean_support(best);
}

enum class PhiStarMode { closed_form, long_run };

struct LongRunOptions {
  long iters = 1000000;
  long stride = 1000;
};

/// closed_form: least squares with g = zero, ||b - A x_ls||^2 / (2N).
/// long_run: accelerated proximal gradient on the inner problem alone; the
/// minimum recorded value minus the spread of values over k in [K/10, K].
inline double compute_phi_star(const BilevelProblem& p, PhiStarMode mode, const LongRunOptions& lr = {}) {
  if (mode == PhiStarMode::closed_form) {
    if (!detail::is_plain_least_squares(p)) {
      throw ArgumentError("compute_phi_star: closed form needs a least-squares inner with g = zero");
    }
    const auto set = detail::least_squares_solution_set(p.inner_smooth);
    return p.inner_value(set.x_ls);
  }
  if (lr.iters < 10 || lr.stride < 1) throw ArgumentError("compute_phi_star: long run too short");
  const RunResult run = run_inner_only(p, lr.iters, lr.stride);
  double best = kInf;
  double window_hi = -kInf;
  double window_lo = kInf;
  for (const auto& rec : run.trace.records) {
    best = std::min(best, rec.phi);
    if (rec.k * 10 >= lr.iters) {
      window_hi = std::max(window_hi, rec.phi);
      window_lo = std::min(window_lo, rec.phi);
    }
  }
  return best - (window_hi - window_lo);
}

struct OuterOptimum {
  Vector x_prime;
  double omega_xprime = 0;
  double rho = 0;
  std::string method;
};

/// x' = argmin{psi(x) : x in X*} for least-squares inner, g = zero,
/// sigma = zero, psi = l1(w). Enumeration of basic solutions for n <= 20,
/// simplex above that when `allow_simplex` is set. rho = w sqrt(nnz(x')).
inline OuterOptimum compute_outer_opt(const BilevelProblem& p, bool allow_simplex = true) {
  if (!detail::is_plain_least_squares(p) || p.outer_smooth.kind() != SmoothKind::zero ||
      p.outer_prox.kind() != ProxKind::l1) {
    throw UnsupportedError("compute_outer_opt: needs least-squares inner, g = zero, sigma = zero, psi = l1");
  }
  if (p.dim > 20 && !allow_simplex) throw UnsupportedError("compute_outer_opt: n > 20");
  const auto set = detail::least_squares_solution_set(p.inner_smooth);
  OuterOptimum out;
  if (set.rank == p.dim) {
    out.x_prime = set.x_ls;
    out.method = "unique least-squares solution";
  } else if (p.dim <= 20) {
    out.x_prime = min_l1_enumerate(set.M, set.c);
    out.method = "basic-solution enumeration";
  } else {
    out.x_prime = min_l1_simplex(set.M, set.c);
    out.method = "simplex";
  }
  out.omega_xprime = p.outer_value(out.x_prime);
  out.rho = p.outer_prox.weight() * std::sqrt(static_cast<double>(detail::count_nonzeros(out.x_prime)));
  return out;
}

/// tau = sigma_min+(A)^2 / (2N): the Hölderian error-bound modulus of a
/// least-squares inner, exact for quadratics.
inline double compute_tau(const BilevelProblem& p) {
  if (!detail::is_plain_least_squares(p)) {
    throw UnsupportedError("compute_tau: needs a least-squares inner with g = zero");
  }
  const auto set = detail::least_squares_solution_set(p.inner_smooth);
  if (set.rank == 0) throw UnsupportedError("compute_tau: A is zero");
  const double s = set.singular_values[set.rank - 1];
  return s * s / (2.0 * p.inner_smooth.count());
}

/// Euclidean projection onto X* of a least-squares inner.
inline Vector project_solution_set(const BilevelProblem& p, const Vector& x) {
  const auto set = detail::least_squares_solution_set(p.inner_smooth);
  return x - set.M.transpose() * (set.M * x - set.c);
}

struct OracleOptions {
  std::optional<Vector> x0;
  bool allow_long_run = true;
  LongRunOptions long_run;
};

/// Fills every oracle field the problem structure supports; the rest stay empty.
inline OracleReport build_oracle(const BilevelProblem& p, const OracleOptions& opt = {}) {
  OracleReport o;
  const Vector x0 = opt.x0 ? *opt.x0 : Vector::Zero(p.dim);
  require_dim(x0.size(), p.dim, "build_oracle: x0");
  if (detail::is_plain_least_squares(p)) {
    o.phi_star = compute_phi_star(p, PhiStarMode::closed_form);
    o.method["phi_star"] = "closed form";
    o.tau = compute_tau(p);
    o.method["tau"] = "smallest nonzero singular value";
  } else if (opt.allow_long_run) {
    o.phi_star = compute_phi_star(p, PhiStarMode::long_run, opt.long_run);
    o.method["phi_star"] = "long run";
  }
  if (p.omega_star) {
    o.omega_star_inf = p.omega_star;
    o.method["omega_star_inf"] = "problem";
  }
  try {
    auto outer = compute_outer_opt(p);
    o.x_prime = outer.x_prime;
    o.omega_xprime = outer.omega_xprime;
    o.rho = outer.rho;
    o.R2 = (x0 - outer.x_prime).squaredNorm();
    o.method["x_prime"] = outer.method;
    o.method["rho"] = "sign subgradient";
    // With x' available, phi(x') is the most consistent phi* for the gaps.
    if (o.phi_star) o.phi_star = std::min(*o.phi_star, p.inner_value(outer.x_prime));
  } catch (const UnsupportedError&) {
  }
  return o;
}

// ---------------------------------------------------------------------------
// Trace auditing against the theoretical bounds

enum class Regime { fast, sub2, gamma1, holder, fixed };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::fast: return "fast";
    case Regime::sub2: return "sub2";
    case Regime::gamma1: return "gamma1";
    case Regime::holder: return "holder";
    case Regime::fixed: return "fixed";
  }
  return "?";
}

inline Regime parse_regime(const std::string& s) {
  if (s == "fast") return Regime::fast;
  if (s == "sub2") return Regime::sub2;
  if (s == "gamma1") return Regime::gamma1;
  if (s == "holder") return Regime::holder;
  if (s == "fixed") return Regime::fixed;
  throw ArgumentError("unknown regime '" + s + "'");
}

/// The regime whose theorem covers a dynamic run with this gamma.
inline Regime default_regime(double gamma) {
  if (gamma > 2) return Regime::fast;
  if (gamma == 1.0) return Regime::gamma1;
  return Regime::sub2;
}

struct AuditReport {
  Regime regime = Regime::fast;
  AuditLog log;
  // Relative growth of sum t_{s-1} delta_s over the last recorded decade.
  std::optional<double> tdelta_growth;

  long passes() const { return log.total_passes(); }
  long failures() const { return log.total_failures(); }
};

inline double bound_tolerance(double bound) { return 1e-8 * (1.0 + std::abs(bound)); }

/// Relative growth (S(K) - S(K/10)) / S(K) of a cumulative column over the
/// final decade of recorded k.
inline std::optional<double> final_decade_growth(const IterateTrace& trace, double TraceRecord::*field) {
  if (trace.records.size() < 2) return std::nullopt;
  const long K = trace.back().k;
  const TraceRecord* start = nullptr;
  for (const auto& r : trace.records) {
    if (r.k * 10 >= K) {
      start = &r;
      break;
    }
  }
  const double end = trace.back().*field;
  if (!start || end == 0.0) return std::nullopt;
  return (end - start->*field) / end;
}

/// Checks every recorded k >= 1 against the regime's bound(s). For dynamic
/// regimes with 1 < gamma < 2 the eta bound is checked too. `alpha` is the
/// fixed weight of a fixed run (ignored otherwise).
inline AuditReport audit_trace(const IterateTrace& trace, const BilevelProblem& p, const OracleReport& oracle,
                               const rates::RateParams& params, Regime regime) {
  if (!oracle.phi_star || !oracle.x_prime || !oracle.omega_xprime) {
    throw ArgumentError("audit_trace: oracle needs phi_star and x_prime");
  }
  const double g = params.gamma;
  switch (regime) {
    case Regime::fast:
      if (!(g > 2)) throw ArgumentError("audit_trace: fast regime needs gamma > 2");
      break;
    case Regime::sub2:
      if (!(g > 0) || g > 2) throw ArgumentError("audit_trace: sub2 regime needs 0 < gamma <= 2");
      break;
    case Regime::gamma1:
      if (g != 1.0) throw ArgumentError("audit_trace: gamma1 regime needs gamma = 1");
      break;
    case Regime::holder:
      if (!(g > 1) || !(g < 2)) throw ArgumentError("audit_trace: holder regime needs 1 < gamma < 2");
      if (!params.tau || !params.rho) throw ArgumentError("audit_trace: holder regime needs tau and rho");
      break;
    case Regime::fixed:
      break;
  }
  (void)p;
  const double phi_xp = *oracle.phi_star;
  const double omega_xp = *oracle.omega_xprime;

  AuditReport report;
  report.regime = regime;
  auto& log = report.log;
  auto check = [&](const char* id, long k, double lhs, double bound) {
    log.check(id, k, lhs, bound, bound_tolerance(bound));
  };

  if (regime == Regime::fixed) {
    const TraceRecord& last = trace.back();
    const long K = last.k;
    const double RK = 2.0 * params.beta * params.R2 / (static_cast<double>(K + 1) * (K + 1));
    const auto b = rates::generic_fixed_bounds(RK, last.alpha_k, params.delta_omega);
    check("fixed_inner", K, last.phi - phi_xp, b.inner);
    check("fixed_outer", K, last.omega - omega_xp, b.outer);
    return report;
  }

  for (const auto& r : trace.records) {
    if (r.k < 1) continue;
    const long k = r.k;
    switch (regime) {
      case Regime::fast:
        check("fast_inner_rate", k, r.phi - phi_xp, rates::inner_bound_fast(k, params));
        break;
      case Regime::sub2:
        check("inner_rate", k, r.phi - phi_xp, rates::inner_bound(k, params));
        if (g < 2) {
          if (!r.omega_best) throw ArgumentError("audit_trace: trace lacks omega_best");
          check("best_outer_rate", k, *r.omega_best - omega_xp, rates::outer_bound(k, params));
        }
        break;
      case Regime::gamma1: {
        if (!r.omega_tilde || !r.phi_tilde) throw ArgumentError("audit_trace: trace lacks omega_tilde");
        const auto b = rates::simul_bounds_gamma1(k, params);
        check("ergodic_inner_rate", k, *r.phi_tilde - phi_xp, b.inner);
        check("ergodic_outer_rate", k, *r.omega_tilde - omega_xp, b.outer);
        break;
      }
      case Regime::holder: {
        const auto b = rates::holder_bounds(k, params);
        check("holder_inner", k, r.phi - phi_xp, b.inner);
        check("holder_outer_lower", k, omega_xp - r.omega, b.outer_low);
        check("holder_outer_upper", k, r.omega - omega_xp, b.outer_high);
        break;
      }
      case Regime::fixed:
        break;
    }
    if (g > 1 && g < 2) {
      const double lhs = rates::eta_k(k, params.a, g);
      const double rhs = 0.5 * std::pow(static_cast<double>(k + 1), 1.0 - g);
      log.add(AuditCheck{"eta_decay", k, lhs, rhs, lhs < rhs});
    }
  }
  report.tdelta_growth = final_decade_growth(trace, &TraceRecord::tdelta_sum);
  return report;
}

inline rates::RateParams rate_params(const BilevelProblem& p, const OracleReport& o, double gamma, int a,
                                     double beta_override = 0.0) {
  rates::RateParams rp;
  rp.a = a;
  rp.gamma = gamma;
  rp.beta = beta_override > 0 ? beta_override : p.beta;
  rp.R2 = o.R2.value_or(0.0);
  if (o.omega_xprime && o.omega_star_inf) rp.delta_omega = std::max(0.0, *o.omega_xprime - *o.omega_star_inf);
  rp.tau = o.tau;
  rp.rho = o.rho;
  return rp;
}

// ---------------------------------------------------------------------------
// Convergence diagnostics

struct PointwiseDiagnostics {
  double max_tail_distance = 0;  // max_{k >= K/2} ||x^k - x^K||
  double mu_oscillation = 0;     // max - min of mu_k over k in [K/10, K]
  std::optional<double> tdelta_growth;
};

/// Needs a trace recorded with keep_iterates and an oracle (for mu_k).
inline PointwiseDiagnostics pointwise_diagnostics(const IterateTrace& trace) {
  if (trace.records.empty() || !trace.back().x) throw ArgumentError("pointwise_diagnostics: trace lacks iterates");
  PointwiseDiagnostics d;
  const long K = trace.back().k;
  const Vector& xK = *trace.back().x;
  double mu_hi = -kInf, mu_lo = kInf;
  for (const auto& r : trace.records) {
    if (2 * r.k >= K) d.max_tail_distance = std::max(d.max_tail_distance, (*r.x - xK).norm());
    if (10 * r.k >= K && r.mu_k) {
      mu_hi = std::max(mu_hi, *r.mu_k);
      mu_lo = std::min(mu_lo, *r.mu_k);
    }
  }
  d.mu_oscillation = mu_hi >= mu_lo ? mu_hi - mu_lo : 0.0;
  d.tdelta_growth = final_decade_growth(trace, &TraceRecord::tdelta_sum);
  return d;
}

/// (-log10 phi_gap, omega) pairs, keeping only points whose digit count
/// exceeds every earlier one, so the first coordinate is increasing.
inline std::vector<std::pair<double, double>> digits_vs_omega(const IterateTrace& trace) {
  std::vector<std::pair<double, double>> out;
  double best = -kInf;
  for (const auto& r : trace.records) {
    if (!r.phi_gap || !(*r.phi_gap > 0)) continue;
    const double digits = -std::log10(*r.phi_gap);
    if (digits > best) {
      best = digits;
      out.emplace_back(digits, r.omega);
    }
  }
  return out;
}

}  // namespace fbipg

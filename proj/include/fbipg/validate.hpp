#pragma once

// Brute-force validation suites. Each suite returns one line per
// (inequality, parameter set), reporting the worst case over the grid.

#include "fbipg/harness.hpp"
#include "fbipg/instances.hpp"
#include "fbipg/rates.hpp"

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fbipg::validate {

struct Line {
  bool pass = true;
  std::string id;
  std::string params;
  double lhs = 0;
  double rhs = 0;
};

inline std::string format(const Line& l) {
  std::ostringstream os;
  os << (l.pass ? "PASS " : "FAIL ") << l.id << ' ' << l.params << " lhs=" << format_double(l.lhs)
     << " rhs=" << format_double(l.rhs);
  return os.str();
}

inline void print(std::ostream& os, const std::vector<Line>& lines) {
  for (const auto& l : lines) os << format(l) << '\n';
}

inline bool all_pass(const std::vector<Line>& lines) {
  return std::all_of(lines.begin(), lines.end(), [](const Line& l) { return l.pass; });
}

inline std::string agk(int a, double gamma, long k) {
  return "a=" + std::to_string(a) + " gamma=" + format_double(gamma) + " k=" + std::to_string(k);
}

// Tracks the worst (largest lhs - rhs) point of a family of checks
// lhs <= rhs + tol (or lhs < rhs when strict).
class Worst {
 public:
  Worst(std::string id, bool strict = false) : id_(std::move(id)), strict_(strict) {}

  void add(double lhs, double rhs, std::string params, double tol = 0.0) {
    const bool ok = strict_ ? lhs < rhs : lhs <= rhs + tol;
    all_ok_ = all_ok_ && ok;
    const double margin = lhs - rhs;
    // Failing points outrank passing ones; otherwise the larger margin wins.
    const bool better = !seen_ || (!ok && worst_ok_) || (ok == worst_ok_ && margin > margin_);
    if (!better) return;
    seen_ = true;
    margin_ = margin;
    worst_ok_ = ok;
    line_ = Line{ok, id_, std::move(params), lhs, rhs};
  }

  Line line() const {
    Line l = line_;
    l.pass = all_ok_;
    return l;
  }

 private:
  std::string id_;
  bool strict_;
  bool seen_ = false;
  bool all_ok_ = true;
  bool worst_ok_ = true;
  double margin_ = 0;
  Line line_;
};

inline double eps_tol(double x) { return 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)); }

// ---------------------------------------------------------------------------

/// Sequence identities and the sum/sequence lemmas over fixed grids.
inline std::vector<Line> lemmas() {
  std::vector<Line> out;
  const int as[] = {2, 3, 5};
  const double gammas[] = {0.5, 1.0, 1.3, 1.5, 2.0, 3.0};

  // Integral bound on sum n^-r.
  for (double r : {0.3, 0.5, 1.3, 2.0, 3.0}) {
    for (long n1 : {1L, 2L, 5L, 100L}) {
      if (r > 1 && n1 < 2) continue;
      Worst w("power_sum_bound");
      CompensatedSum sum;
      for (long n2 = n1; n2 <= 100000; ++n2) {
        sum.add(std::pow(static_cast<double>(n2), -r));
        const double bound = rates::techsum_bound(static_cast<double>(n1), static_cast<double>(n2), r);
        w.add(sum.value(), bound,
              "r=" + format_double(r) + " n1=" + std::to_string(n1) + " k=" + std::to_string(n2), eps_tol(bound));
      }
      out.push_back(w.line());
    }
  }

  for (int a : as) {
    for (double g : gammas) {
      Worst sat("alpha_t_sum_bound", false);
      Worst eta_pos("eta_positive", true);
      Worst d_nonneg("d_nonneg");
      Worst eta_id("eta_identity");
      CompensatedSum sum;
      for (long k = 1; k <= 10000; ++k) {
        sum.add(rates::alpha_k(k - 1, a, g) * rates::t_explicit(k - 1, a));
        const double bound = rates::sum_alpha_t_bound(k, a, g);
        sat.add(sum.value(), bound, agk(a, g, k), eps_tol(bound));
        const double eta = rates::eta_k(k, a, g);
        eta_pos.add(0.0, eta, agk(a, g, k));
        d_nonneg.add(0.0, rates::d_k(k, a), agk(a, g, k));
        const double ak = rates::alpha_k(k, a, g), ap = rates::alpha_k(k - 1, a, g);
        const double tk = rates::t_explicit(k, a), tp = rates::t_explicit(k - 1, a);
        const double alt = (ap * tp * tp - ak * tk * tk) + ak * tk;
        eta_id.add(std::abs(eta - alt), 0.0, agk(a, g, k), 1e-12 * std::max(1.0, ap * tp * tp));
      }
      out.push_back(sat.line());
      out.push_back(eta_pos.line());
      out.push_back(d_nonneg.line());
      out.push_back(eta_id.line());
    }
  }

  for (int a : as) {
    Worst eta0("eta_zero");
    eta0.add(std::abs(rates::eta_k(0, a, 1.5)), 0.0, agk(a, 1.5, 0));
    out.push_back(eta0.line());
    Worst w("eta_gamma1");
    const double exact = (a - 1.0) / (static_cast<double>(a) * a);
    for (long k = 1; k <= 10000; ++k) w.add(std::abs(rates::eta_k(k, a, 1.0) - exact), 0.0, agk(a, 1.0, k), 1e-12);
    out.push_back(w.line());
    Worst l1("lambda1_zero");
    l1.add(std::abs(rates::lambda_k(1, a)), 0.0, "a=" + std::to_string(a) + " k=1");
    out.push_back(l1.line());
    Worst lr_hi("lambda_below_one", true), lr_lo("lambda_nonneg");
    for (long k = 1; k <= 10000; ++k) {
      const double lam = rates::lambda_k(k, a);
      lr_hi.add(lam, 1.0, "a=" + std::to_string(a) + " k=" + std::to_string(k));
      lr_lo.add(-lam, 0.0, "a=" + std::to_string(a) + " k=" + std::to_string(k));
    }
    out.push_back(lr_hi.line());
    out.push_back(lr_lo.line());
    Worst pe("pi_empty");
    for (long s = 1; s <= 50; ++s)
      for (long k = 0; k < s; ++k)
        pe.add(std::abs(rates::pi(s, k, a) - 1.0), 0.0, "a=" + std::to_string(a) + " s=" + std::to_string(s) + " k=" + std::to_string(k));
    out.push_back(pe.line());
    Worst te("t_condition_explicit");
    for (long k = 0; k <= 100000; ++k) {
      const double t = rates::t_explicit(k, a), tp = rates::t_explicit(k - 1, a);
      te.add(t * t - t, tp * tp, "a=" + std::to_string(a) + " k=" + std::to_string(k), eps_tol(tp * tp));
    }
    out.push_back(te.line());
  }

  {
    Worst tf("t_condition_fista");
    Worst growth("t_fista_growth");
    double tp = 0.0, t = 1.0;  // t_{-1}, t_0
    for (long k = 0; k <= 100000; ++k) {
      tf.add(t * t - t, tp * tp, "k=" + std::to_string(k), eps_tol(tp * tp));
      const double next = rates::t_fista(t);
      growth.add(t + 0.5, next, "k=" + std::to_string(k), eps_tol(next));
      tp = t;
      t = next;
    }
    out.push_back(tf.line());
    out.push_back(growth.line());
  }

  for (int a : as) {
    for (double g : {1.1, 1.3, 1.5, 1.7, 1.9}) {
      Worst w("eta_decay", true);
      for (long k = 0; k <= 10000; ++k) {
        w.add(rates::eta_k(k, a, g), 0.5 * std::pow(static_cast<double>(k + 1), 1.0 - g), agk(a, g, k));
      }
      out.push_back(w.line());
    }
  }

  for (int a : {3, 4, 5}) {
    for (long s : {1L, 2L, 3L, 10L, 100L, 1000L}) {
      Worst w("momentum_product_sum");
      const auto [lhs, rhs] = rates::sumtechnical_sides(s, a, 100000);
      w.add(lhs, rhs, "a=" + std::to_string(a) + " s=" + std::to_string(s) + " k=100000");
      out.push_back(w.line());
    }
  }
  return out;
}

/// Prox-gradient inequality on random least-squares instances, and the
/// runtime per-iteration/cumulative audits on the reduced instance.
inline std::vector<Line> inequalities(std::uint64_t seed) {
  std::vector<Line> out;
  SplitMix64 rng = SplitMix64(seed).split(stream::kProbes);

  for (const char* qname : {"l1", "indicator_nonneg"}) {
    Worst w(std::string("prox_inequality_") + qname);
    for (int trial = 0; trial < 20; ++trial) {
      const Index N = 6, n = 5;
      DenseMatrix A(N, n);
      for (Index i = 0; i < N; ++i)
        for (Index j = 0; j < n; ++j) A(i, j) = rng.normal();
      const auto s = SmoothFunction::least_squares(A, rng.normal_vector(N));
      const auto q = std::string(qname) == "l1" ? ProxFunction::l1(0.7) : ProxFunction::indicator_nonneg();
      const double L = s.lipschitz();
      const Vector y = rng.normal_vector(n);
      const Vector xp = q.prox(y - s.gradient(y) / L, 1.0 / L);
      for (int j = 0; j < 20; ++j) {
        Vector u = rng.normal_vector(n);
        if (q.is_indicator()) u = u.cwiseAbs();
        const double lhs = q.value(xp) + s.value(xp) - (q.value(u) + s.value(u));
        const double rhs = 0.5 * L * ((u - y).squaredNorm() - (u - xp).squaredNorm());
        w.add(lhs, rhs, "trial=" + std::to_string(trial), 1e-9 * (1.0 + std::abs(lhs) + std::abs(rhs)));
      }
    }
    out.push_back(w.line());
  }

  const auto p = instances::reduced_least_squares();
  const auto oracle = build_oracle(p);
  for (double g : {1.3, 1.5, 3.0}) {
    for (int a : {2, 3}) {
      FBiPGConfig c;
      c.gamma = g;
      c.a = a;
      c.iters = 2000;
      c.audit = true;
      c.seed = seed;
      const auto run = run_fbipg(p, c, &oracle);
      for (const char* id : {"step_inequality", "cumulative_regularized", "cumulative_inner"}) {
        auto it = run.audit.tallies.find(id);
        if (it == run.audit.tallies.end()) {
          out.push_back(Line{false, id, agk(a, g, 0) + " (not audited)", 0, 0});
          continue;
        }
        const auto& t = it->second;
        out.push_back(Line{t.failures == 0, id, agk(a, g, t.worst.k), t.worst.lhs, t.worst.rhs});
      }
    }
  }
  return out;
}

/// Error-bound exactness for a full-rank least-squares inner and the
/// Hölderian-regime bounds along a run.
inline std::vector<Line> holder(std::uint64_t seed) {
  std::vector<Line> out;
  const auto p = instances::tall_least_squares();
  const auto oracle = build_oracle(p);
  const double tau = *oracle.tau;
  SplitMix64 rng = SplitMix64(seed).split(stream::kProbes);
  Worst eb("error_bound_exact");
  for (int i = 0; i < 100; ++i) {
    const Vector x = 3.0 * rng.normal_vector(p.dim);
    const double dist2 = (x - project_solution_set(p, x)).squaredNorm();
    const double gap = p.inner_value(x) - *oracle.phi_star;
    eb.add(tau * dist2, gap, "probe=" + std::to_string(i), 1e-9 * (1.0 + gap));
  }
  out.push_back(eb.line());

  for (int a : {2, 3}) {
    for (double g : {1.3, 1.5}) {
      FBiPGConfig c;
      c.gamma = g;
      c.a = a;
      c.iters = 2000;
      const auto run = run_fbipg(p, c, &oracle);
      const auto rep = audit_trace(run.trace, p, oracle, rate_params(p, oracle, g, a), Regime::holder);
      for (const auto& [id, t] : rep.log.tallies) {
        out.push_back(Line{t.failures == 0, id, agk(a, g, t.worst.k), t.worst.lhs, t.worst.rhs});
      }
    }
  }
  return out;
}

/// Convergence of the iterates themselves (gamma = 1.5, a = 3, K = 1e5).
inline std::vector<Line> pointwise(std::uint64_t seed, long K = 100000) {
  std::vector<Line> out;
  const std::pair<const char*, BilevelProblem> cases[] = {{"scalar", instances::scalar()},
                                                         {"reduced", instances::reduced_least_squares()}};
  for (const auto& [name, p] : cases) {
    const auto oracle = build_oracle(p);
    FBiPGConfig c;
    c.gamma = 1.5;
    c.a = 3;
    c.iters = K;
    c.seed = seed;
    c.keep_iterates = true;
    const auto run = run_fbipg(p, c, &oracle);
    const auto d = pointwise_diagnostics(run.trace);
    const std::string params = std::string("instance=") + name + " " + agk(3, 1.5, K);
    out.push_back(Line{d.max_tail_distance <= 1e-3, "iterate_tail", params, d.max_tail_distance, 1e-3});
    out.push_back(Line{d.mu_oscillation <= 1e-6, "mu_oscillation", params, d.mu_oscillation, 1e-6});
    const double growth = d.tdelta_growth.value_or(0.0);
    out.push_back(Line{growth <= 1e-6, "tdelta_growth", params, growth, 1e-6});
  }
  return out;
}

inline std::vector<Line> run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "lemmas") return lemmas();
  if (name == "inequalities") return inequalities(seed);
  if (name == "holder") return holder(seed);
  if (name == "pointwise") return pointwise(seed);
  throw ArgumentError("unknown suite '" + name + "'");
}

}  // namespace fbipg::validate

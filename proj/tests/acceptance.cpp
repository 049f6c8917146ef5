// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "fbipg/instances.hpp"
#include "fbipg/validate.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace fbipg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int g_failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << id << "  " << detail << std::endl;
  if (!pass) ++g_failures;
}

// "id: passes/failures worst(k, lhs, rhs)" for every check family in a log.
std::string describe(const AuditLog& log) {
  std::ostringstream os;
  for (const auto& [id, t] : log.tallies) {
    os << id << " " << t.passes << "/" << t.failures;
    if (t.has_worst) os << " worst(k=" << t.worst.k << " lhs=" << t.worst.lhs << " rhs=" << t.worst.rhs << ")";
    os << "; ";
  }
  return os.str();
}

long checks_for(const AuditLog& log, const std::string& id) {
  auto it = log.tallies.find(id);
  return it == log.tallies.end() ? 0 : it->second.passes + it->second.failures;
}

RunResult run(const BilevelProblem& p, const OracleReport& o, double gamma, int a, long K, bool audit = false,
              std::uint64_t seed = 0) {
  FBiPGConfig c;
  c.gamma = gamma;
  c.a = a;
  c.iters = K;
  c.audit = audit;
  c.seed = seed;
  return run_fbipg(p, c, &o);
}

void ac1(const BilevelProblem& wide, const OracleReport& o) {
  const auto t0 = Clock::now();
  const long K = 10000;
  const auto r = run(wide, o, 3.0, 2, K);
  const auto rep = audit_trace(r.trace, wide, o, rate_params(wide, o, 3.0, 2), Regime::fast);
  std::vector<double> gaps;
  for (const auto& rec : r.trace.records) gaps.push_back(*rec.phi_gap);
  const auto ks = r.trace.ks();
  const double slope = rates::fit_loglog_slope(ks, gaps, 1e2, 1e4);
  const double secs = seconds_since(t0);
  const bool ok = rep.failures() == 0 && checks_for(rep.log, "fast_inner_rate") == K && slope <= -1.8 && secs < 60;
  std::ostringstream d;
  d << "gamma=3 a=2 K=" << K << " slope=" << slope << " (<= -1.8) final_gap=" << *r.trace.back().phi_gap
    << " runtime=" << secs << "s (< 60s) " << describe(rep.log);
  report("AC1", ok, d.str());
}

void ac2_ac3(const BilevelProblem& wide, const OracleReport& ow, const BilevelProblem& reduced,
             const OracleReport& orr) {
  const long K = 10000;
  bool ok2 = true;
  std::ostringstream d2;
  for (double g : {1.3, 1.5}) {
    const auto r = run(wide, ow, g, 2, K);
    const auto rep = audit_trace(r.trace, wide, ow, rate_params(wide, ow, g, 2), Regime::sub2);
    const auto& t = rep.log.tallies.at("inner_rate");
    ok2 = ok2 && t.failures == 0 && t.passes == K;
    d2 << "gamma=" << g << " inner_rate " << t.passes << "/" << t.failures << " worst(k=" << t.worst.k
       << " lhs=" << t.worst.lhs << " rhs=" << t.worst.rhs << "); ";
  }
  report("AC2", ok2, d2.str());

  const auto r = run(reduced, orr, 1.5, 2, K);
  const auto rep = audit_trace(r.trace, reduced, orr, rate_params(reduced, orr, 1.5, 2), Regime::sub2);
  const auto& t = rep.log.tallies.at("best_outer_rate");
  std::ostringstream d3;
  d3 << "N=8 n=12 gamma=1.5 omega(x')=" << *orr.omega_xprime << " via " << orr.method.at("x_prime")
     << "; best_outer_rate " << t.passes << "/" << t.failures << " worst(k=" << t.worst.k << " lhs=" << t.worst.lhs
     << " rhs=" << t.worst.rhs << ")";
  report("AC3", t.failures == 0 && t.passes == K, d3.str());
}

void ac4(const BilevelProblem& reduced, const OracleReport& o) {
  const long K = 10000;
  const auto r = run(reduced, o, 1.0, 2, K);
  const auto rep = audit_trace(r.trace, reduced, o, rate_params(reduced, o, 1.0, 2), Regime::gamma1);
  const bool ok = rep.failures() == 0 && checks_for(rep.log, "ergodic_inner_rate") == K &&
                  checks_for(rep.log, "ergodic_outer_rate") == K;
  report("AC4", ok, "gamma=1 a=2 K=10000 " + describe(rep.log));
}

void ac5() {
  const auto p = instances::tall_least_squares();
  const auto o = build_oracle(p);
  const long K = 10000;
  const auto r = run(p, o, 1.5, 2, K);
  const auto rep = audit_trace(r.trace, p, o, rate_params(p, o, 1.5, 2), Regime::holder);
  // tau and rho recomputed independently of the oracle
  const auto& A = p.inner_smooth.matrix();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const double smin = svd.singularValues()[A.cols() - 1];
  const double tau = smin * smin / (2.0 * A.rows());
  const double rho = std::sqrt(static_cast<double>(detail::count_nonzeros(*o.x_prime)));
  const bool consts = std::abs(*o.tau - tau) <= 1e-12 * tau && std::abs(*o.rho - rho) <= 1e-12 * rho;
  const bool counts = checks_for(rep.log, "holder_inner") == K && checks_for(rep.log, "holder_outer_lower") == K &&
                      checks_for(rep.log, "holder_outer_upper") == K;
  std::ostringstream d;
  d << "N=20 n=10 tau=" << *o.tau << " rho=" << *o.rho << " gamma=1.5 a=2 K=" << K << " " << describe(rep.log);
  report("AC5", rep.failures() == 0 && consts && counts, d.str());
}

void ac6(const BilevelProblem& reduced, const OracleReport& o) {
  const long K = 10000;
  long passes = 0, failures = 0;
  std::ostringstream d;
  bool all_present = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    for (double g : {1.3, 1.5, 3.0}) {
      for (int a : {2, 3}) {
        const auto r = run(reduced, o, g, a, K, true, seed);
        passes += r.audit.total_passes();
        failures += r.audit.total_failures();
        for (const char* id : {"step_inequality", "cumulative_regularized", "cumulative_inner"}) {
          all_present = all_present && checks_for(r.audit, id) > 0;
        }
        if (r.audit.total_failures()) {
          d << "seed=" << seed << " gamma=" << g << " a=" << a << ": " << describe(r.audit);
        }
      }
    }
  }
  d << "18 configurations, K=" << K << ", checks passed=" << passes << " failed=" << failures;
  report("AC6", failures == 0 && all_present, d.str());
}

void ac7(const BilevelProblem& reduced, const OracleReport& orr) {
  const long K = 10000;
  const auto p = instances::logistic_l1();
  const auto t0 = Clock::now();
  const auto o = build_oracle(p);
  const double oracle_secs = seconds_since(t0);
  FBiPGConfig c;
  c.gamma = 3.0;
  c.a = 2;
  c.iters = K;
  c.trace_stride = 100;
  const auto fb = run_fbipg(p, c, &o);
  FixedRunOptions fo;
  fo.trace_stride = 100;
  const auto fixed = run_fista_fixed(p, 1.0 / K, K, fo, &o);
  const double gap_fb = *fb.trace.back().phi_gap;
  const double gap_fixed = *fixed.trace.back().phi_gap;
  const bool stuck = gap_fixed >= 10.0 * gap_fb;

  const auto fr = run_fista_fixed(reduced, 1.0 / K, K, fo, &orr);
  const auto rep = audit_trace(fr.trace, reduced, orr, rate_params(reduced, orr, 1.0, 2), Regime::fixed);
  const bool bounds = rep.failures() == 0 && checks_for(rep.log, "fixed_inner") == 1 &&
                      checks_for(rep.log, "fixed_outer") == 1;
  std::ostringstream d;
  d << "logistic N=200 m=50: phi*=" << *o.phi_star << " (" << oracle_secs << "s) fixed_gap=" << gap_fixed
    << " fbipg_gap=" << gap_fb << " ratio=" << (gap_fb > 0 ? gap_fixed / gap_fb : kInf)
    << " (>= 10); reduced LS alpha=1/K: " << describe(rep.log);
  report("AC7", stuck && bounds, d.str());
}

void ac8() {
  const auto t0 = Clock::now();
  const auto lines = validate::pointwise(0, 100000);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  for (const auto& l : lines) d << validate::format(l) << "; ";
  d << "runtime=" << secs << "s (< 120s)";
  report("AC8", validate::all_pass(lines) && secs < 120, d.str());
}

void ac9() {
  const auto lines = validate::lemmas();
  long fails = 0;
  std::ostringstream d;
  for (const auto& l : lines) {
    if (!l.pass) {
      ++fails;
      d << validate::format(l) << "; ";
    }
  }
  d << lines.size() << " check families, " << fails << " failing";
  report("AC9", fails == 0, d.str());
}

void ac10() {
  const auto p = instances::lasso_l1();
  const auto o = build_oracle(p);
  const long K = 100000;
  FBiPGConfig c;
  c.gamma = 1.5;
  c.a = 2;
  c.iters = K;
  c.trace_stride = K;
  c.lift_mode = LiftMode::force;
  const auto lifted = run_fbipg(p, c, &o);
  c.lift_mode = LiftMode::off;
  const auto plain = run_fbipg(p, c, &o);

  const Vector x = lifted.x_block(), z = lifted.z_block();
  const double x_gap = p.inner_value(x) - *o.phi_star;
  const double lifted_gap = lifted.trace.back().phi - *o.phi_star;
  const double split = (x - z).norm();
  const double split_bound = std::sqrt(std::max(0.0, lifted_gap)) + 1e-8;
  const double match = std::abs(p.inner_value(x) - p.inner_value(plain.x_final));
  std::ostringstream d;
  d << "lifted=" << lifted.lifted << " beta=" << lifted.beta << " x_gap=" << x_gap << " (<= 1e-6) |x-z|=" << split
    << " (<= " << split_bound << ") |phi_lifted - phi_combined|=" << match << " (<= 1e-5)";
  report("AC10", lifted.lifted && x_gap <= 1e-6 && split <= split_bound && match <= 1e-5, d.str());
}

}  // namespace

int main() {
  std::cout.precision(6);
  const auto t0 = Clock::now();
  const auto wide = instances::wide_least_squares();
  const auto reduced = instances::reduced_least_squares();
  const auto ow = build_oracle(wide);
  const auto orr = build_oracle(reduced);

  ac1(wide, ow);
  ac2_ac3(wide, ow, reduced, orr);
  ac4(reduced, orr);
  ac5();
  ac6(reduced, orr);
  ac7(reduced, orr);
  ac8();
  ac9();
  ac10();

  std::cout << (g_failures ? "FAILED " : "ALL PASSED ") << "(" << g_failures << " failing criteria, "
            << seconds_since(t0) << "s)" << std::endl;
  return g_failures ? 1 : 0;
}

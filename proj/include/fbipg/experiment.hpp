#pragma once

// Experiment orchestration: one oracle per problem, any number of solver
// runs, a trace CSV per run and a summary.json tying them together.

#include "fbipg/harness.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

namespace fbipg {

enum class Algo { fbipg, fista_fixed };

struct RunSpec {
  Algo algo = Algo::fbipg;
  double gamma = 1.5;
  int a = 2;
  TMode t_mode = TMode::explicit_formula;
  LiftMode lift_mode = LiftMode::off;
  std::optional<double> alpha;  // fista_fixed; 1/K when absent
  std::optional<Regime> regime;  // fbipg; default_regime(gamma) when absent
  bool audit = false;            // runtime inequality audit
};

struct ExperimentConfig {
  std::filesystem::path problem;
  std::vector<RunSpec> runs;
  long K = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  long trace_every = 1;
  unsigned threads = 1;
  long long_run_iters = 1000000;
};

inline TMode parse_t_mode(const std::string& s) {
  if (s == "explicit") return TMode::explicit_formula;
  if (s == "fista") return TMode::fista_recursion;
  throw ArgumentError("unknown t-mode '" + s + "' (expected explicit or fista)");
}

inline LiftMode parse_lift_mode(const std::string& s) {
  if (s == "off") return LiftMode::off;
  if (s == "auto") return LiftMode::automatic;
  if (s == "force") return LiftMode::force;
  throw ArgumentError("unknown lift mode '" + s + "' (expected off, auto or force)");
}

inline Algo parse_algo(const std::string& s) {
  if (s == "fbipg") return Algo::fbipg;
  if (s == "fista-fixed") return Algo::fista_fixed;
  throw ArgumentError("unknown algo '" + s + "' (expected fbipg or fista-fixed)");
}

/// {"problem": path, "K": int, "seed": int, "out": dir, "trace_every": int,
///  "threads": int, "long_run_iters": int,
///  "runs": [{"algo": "fbipg", "gamma": g, "a": a, "t_mode": "explicit", "lift": "off",
///            "regime": "sub2", "audit": false},
///           {"algo": "fista-fixed", "alpha": number | "1/K"}]}
/// Relative paths resolve against `base_dir`.
inline ExperimentConfig parse_experiment(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  auto where = [](const std::string& key) { return "experiment." + key; };
  if (!j.is_object()) throw SpecError("experiment: expected a JSON object");
  ExperimentConfig c;
  try {
    if (!j.contains("problem")) throw SpecError(where("problem") + ": missing");
    c.problem = base_dir / j.at("problem").get<std::string>();
    if (j.contains("K")) c.K = j.at("K").get<long>();
    if (c.K < 1) throw SpecError(where("K") + ": must be >= 1");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.out = base_dir / j.at("out").get<std::string>();
    if (j.contains("trace_every")) c.trace_every = j.at("trace_every").get<long>();
    if (c.trace_every < 1) throw SpecError(where("trace_every") + ": must be >= 1");
    if (j.contains("threads")) c.threads = std::max(1u, j.at("threads").get<unsigned>());
    if (j.contains("long_run_iters")) c.long_run_iters = j.at("long_run_iters").get<long>();
    if (!j.contains("runs") || !j.at("runs").is_array() || j.at("runs").empty()) {
      throw SpecError(where("runs") + ": expected a non-empty array");
    }
    for (std::size_t i = 0; i < j.at("runs").size(); ++i) {
      const auto& r = j.at("runs")[i];
      const std::string at = where("runs[" + std::to_string(i) + "]");
      RunSpec s;
      try {
        s.algo = parse_algo(r.value("algo", std::string("fbipg")));
        s.gamma = r.value("gamma", s.gamma);
        s.a = r.value("a", s.a);
        s.t_mode = parse_t_mode(r.value("t_mode", std::string("explicit")));
        s.lift_mode = parse_lift_mode(r.value("lift", std::string("off")));
        s.audit = r.value("audit", false);
        if (r.contains("regime")) s.regime = parse_regime(r.at("regime").get<std::string>());
        if (r.contains("alpha")) {
          const auto& al = r.at("alpha");
          if (al.is_string()) {
            if (al.get<std::string>() != "1/K") throw ArgumentError("alpha: expected a number or \"1/K\"");
          } else {
            s.alpha = al.get<double>();
          }
        }
      } catch (const ArgumentError& e) {
        throw SpecError(at + ": " + e.what());
      }
      if (s.algo == Algo::fbipg && (!(s.gamma > 0) || s.a < 2)) {
        throw SpecError(at + ": needs gamma > 0 and a >= 2");
      }
      if (s.algo == Algo::fista_fixed && s.alpha && !(*s.alpha > 0)) throw SpecError(at + ".alpha: must be positive");
      c.runs.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("experiment: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open experiment file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
  return parse_experiment(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

// ---------------------------------------------------------------------------
// JSON helpers

inline nlohmann::json to_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

inline nlohmann::json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

/// Oracle fields of summary.json.
inline nlohmann::json oracle_json(const OracleReport& o, double beta) {
  nlohmann::json j;
  j["phi_star"] = to_json(o.phi_star);
  j["omega_star_inf"] = to_json(o.omega_star_inf);
  j["x_prime"] = o.x_prime ? to_json(*o.x_prime) : nlohmann::json();
  j["omega_xprime"] = to_json(o.omega_xprime);
  j["tau"] = to_json(o.tau);
  j["rho"] = to_json(o.rho);
  j["beta"] = beta;
  j["R2"] = to_json(o.R2);
  j["oracle_method"] = o.method;
  return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw SpecError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Runs

struct RunOutcome {
  RunSpec spec;
  RunResult result;
  std::optional<AuditReport> theory;
  std::vector<std::string> warnings;
};

inline std::optional<double> phi_gap_slope(const IterateTrace& trace) {
  const long K = trace.back().k;
  std::vector<double> ks, vals;
  for (const auto& r : trace.records) {
    if (!r.phi_gap) continue;
    ks.push_back(static_cast<double>(r.k));
    vals.push_back(*r.phi_gap);
  }
  try {
    return rates::fit_loglog_slope(ks, vals, std::max(1.0, K / 100.0), static_cast<double>(K));
  } catch (const EstimationError&) {
    return std::nullopt;
  }
}

/// Runs one configured algorithm and audits its trace when the oracle allows.
/// The oracle's R2 must be measured from the same x0.
inline RunOutcome execute_run(const BilevelProblem& p, const OracleReport* oracle, const RunSpec& spec, long K,
                              long trace_every, std::uint64_t seed, const std::optional<Vector>& x0 = std::nullopt) {
  RunOutcome out;
  out.spec = spec;
  if (spec.algo == Algo::fbipg) {
    FBiPGConfig c;
    c.gamma = spec.gamma;
    c.a = spec.a;
    c.t_mode = spec.t_mode;
    c.iters = K;
    c.trace_stride = trace_every;
    c.lift_mode = spec.lift_mode;
    c.audit = spec.audit;
    c.seed = seed;
    c.x0 = x0;
    c.track_ergodic = spec.regime == Regime::gamma1 || spec.gamma == 1.0;
    out.result = run_fbipg(p, c, oracle);
  } else {
    const double alpha = spec.alpha.value_or(1.0 / static_cast<double>(K));
    out.spec.alpha = alpha;
    FixedRunOptions fo;
    fo.trace_stride = trace_every;
    fo.lift_mode = spec.lift_mode;
    fo.audit = spec.audit;
    fo.seed = seed;
    fo.x0 = x0;
    out.result = run_fista_fixed(p, alpha, K, fo, oracle);
  }

  const bool can_audit = oracle && oracle->x_prime && oracle->phi_star && oracle->omega_xprime;
  if (!can_audit) {
    out.warnings.emplace_back("no outer solution oracle; theory audit skipped");
  } else if (out.result.lifted) {
    out.warnings.emplace_back("lifted run; theory audit skipped");
  } else if (spec.algo == Algo::fbipg && spec.t_mode != TMode::explicit_formula) {
    out.warnings.emplace_back("recursion t-sequence; theory audit skipped");
  } else {
    const Regime regime =
        spec.algo == Algo::fista_fixed ? Regime::fixed : spec.regime.value_or(default_regime(spec.gamma));
    auto params = rate_params(p, *oracle, spec.gamma, spec.a);
    try {
      out.theory = audit_trace(out.result.trace, p, *oracle, params, regime);
    } catch (const ArgumentError& e) {
      out.warnings.emplace_back(std::string("theory audit skipped: ") + e.what());
    }
  }
  return out;
}

inline nlohmann::json run_json(const RunOutcome& o, const std::string& trace_file) {
  const auto& trace = o.result.trace;
  const auto& last = trace.back();
  nlohmann::json j;
  j["algo"] = o.spec.algo == Algo::fbipg ? "fbipg" : "fista-fixed";
  j["gamma"] = o.spec.algo == Algo::fbipg ? nlohmann::json(o.spec.gamma) : nlohmann::json();
  j["a"] = o.spec.algo == Algo::fbipg ? nlohmann::json(o.spec.a) : nlohmann::json();
  j["alpha"] = o.spec.algo == Algo::fista_fixed ? to_json(o.spec.alpha) : nlohmann::json();
  j["K"] = last.k;
  j["final_phi_gap"] = to_json(last.phi_gap);
  j["final_omega"] = last.omega;
  j["slope_phi_gap"] = to_json(phi_gap_slope(trace));
  nlohmann::json audit;
  audit["regime"] = o.theory ? nlohmann::json(to_string(o.theory->regime)) : nlohmann::json();
  audit["passes"] = (o.theory ? o.theory->passes() : 0) + o.result.audit.total_passes();
  audit["failures"] = (o.theory ? o.theory->failures() : 0) + o.result.audit.total_failures();
  j["audit"] = audit;
  j["trace"] = trace_file;
  j["lifted"] = o.result.lifted;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [d, w] : digits_vs_omega(trace)) pts.push_back({d, w});
  j["digits_vs_omega"] = pts;
  j["warnings"] = o.warnings;
  return j;
}

inline long total_failures(const RunOutcome& o) {
  return (o.theory ? o.theory->failures() : 0) + o.result.audit.total_failures();
}

struct ExperimentReport {
  nlohmann::json summary;
  long failures = 0;
};

/// Writes run_<i>.csv per run and summary.json into config.out. Runs are
/// distributed over config.threads workers; output does not depend on the
/// thread count.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  const BilevelProblem p = load_problem(config.problem);
  OracleOptions oo;
  oo.long_run.iters = config.long_run_iters;
  const OracleReport oracle = build_oracle(p, oo);

  std::filesystem::create_directories(config.out);
  std::vector<std::optional<RunOutcome>> outcomes(config.runs.size());
  std::vector<std::string> errors(config.runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.runs.size(); i = next++) {
      try {
        outcomes[i] = execute_run(p, &oracle, config.runs[i], config.K, config.trace_every, config.seed);
        write_trace_csv(config.out / ("run_" + std::to_string(i) + ".csv"), outcomes[i]->result.trace);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned nthreads = std::min<unsigned>(config.threads, static_cast<unsigned>(config.runs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw std::runtime_error("run " + std::to_string(i) + ": " + errors[i]);
  }

  ExperimentReport report;
  nlohmann::json summary = oracle_json(oracle, p.beta);
  nlohmann::json warnings = nlohmann::json::array();
  if (!oracle.phi_star) warnings.push_back("phi_star unavailable; gap fields empty");
  if (!oracle.x_prime) warnings.push_back("x_prime unavailable; theory audits skipped");
  summary["runs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    summary["runs"].push_back(run_json(*outcomes[i], "run_" + std::to_string(i) + ".csv"));
    report.failures += total_failures(*outcomes[i]);
  }
  summary["warnings"] = warnings;
  write_json(config.out / "summary.json", summary);
  report.summary = std::move(summary);
  return report;
}

}  // namespace fbipg

// fbipg: generate instances, compute oracles, run solvers, validate the
// theory and drive experiments.
//
// Exit codes: 0 success, 1 audit failure, 2 usage or input error,
// 3 numerical failure during a run.

#include "fbipg/experiment.hpp"
#include "fbipg/validate.hpp"

#include <CLI11.hpp>

#include <climits>
#include <iostream>

namespace {

using namespace fbipg;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kAuditFailure = 1;
constexpr int kUsage = 2;
constexpr int kNumeric = 3;

struct GenArgs {
  std::string kind = "least-squares";
  long rows = 40;
  long cols = 60;
  long sparsity = 5;
  bool consistent = false;
  std::uint64_t seed = 0;
  std::string out = "data";
};

struct OracleArgs {
  std::string problem;
  std::string out = "oracle";
  long long_run_iters = 1000000;
};

struct SolveArgs {
  std::string problem;
  std::string algo = "fbipg";
  double gamma = 1.5;
  int a = 2;
  std::optional<double> alpha;
  long iters = 1000;
  std::string t_mode = "explicit";
  std::string lift = "off";
  bool audit = false;
  long trace_every = 1;
  std::string x0 = "zeros";
  std::string out = "run";
  std::uint64_t seed = 0;
  long long_run_iters = 1000000;
  bool no_oracle = false;
};

struct ValidateArgs {
  std::string suite;
  std::uint64_t seed = 0;
};

struct CompareArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

int cmd_gen(const GenArgs& g) {
  const fs::path out = g.out;
  fs::create_directories(out);
  nlohmann::json meta = {{"kind", g.kind}, {"rows", g.rows}, {"cols", g.cols}, {"seed", g.seed},
                         {"prng", "splitmix64"}};
  nlohmann::json inner;
  if (g.kind == "least-squares") {
    if (g.sparsity > g.cols) throw ArgumentError("--sparsity must not exceed --cols");
    const auto d = gen_least_squares(g.rows, g.cols, g.seed, g.consistent, g.sparsity);
    csv::write_matrix(out / "A.csv", d.A);
    csv::write_vector(out / "b.csv", d.b);
    csv::write_vector(out / "x_planted.csv", d.x_planted);
    meta["sparsity"] = g.sparsity;
    meta["consistent"] = g.consistent;
    if (!g.consistent) meta["noise_std"] = 0.1;
    inner = {{"kind", "least_squares"}, {"A", "A.csv"}, {"b", "b.csv"}};
  } else {
    const auto d = gen_logistic(g.rows, g.cols, g.seed);
    csv::write_matrix(out / "A.csv", d.A);
    csv::write_vector(out / "z.csv", d.z);
    csv::write_vector(out / "w_planted.csv", d.w_planted);
    inner = {{"kind", "logistic"}, {"A", "A.csv"}, {"z", "z.csv"}};
  }
  write_json(out / "meta.json", meta);
  nlohmann::json problem = {{"dim", g.cols},
                            {"inner_smooth", inner},
                            {"inner_prox", {{"kind", "zero"}}},
                            {"outer_smooth", {{"kind", "zero"}}},
                            {"outer_prox", {{"kind", "l1"}, {"weight", 1.0}}}};
  write_json(out / "problem.json", problem);
  std::cout << "wrote " << (out / "problem.json").string() << '\n';
  return kOk;
}

int cmd_oracle(const OracleArgs& o) {
  const auto p = load_problem(o.problem);
  OracleOptions oo;
  oo.long_run.iters = o.long_run_iters;
  const auto oracle = build_oracle(p, oo);
  fs::create_directories(o.out);
  const auto j = oracle_json(oracle, p.beta);
  write_json(fs::path(o.out) / "summary.json", j);
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_solve(const SolveArgs& s) {
  const auto p = load_problem(s.problem);
  std::optional<Vector> x0;
  if (s.x0 != "zeros") {
    x0 = csv::read_vector(s.x0);
    if (x0->size() != p.dim) throw ArgumentError("--x0: dimension does not match the problem");
  }
  std::optional<OracleReport> oracle;
  if (!s.no_oracle) {
    OracleOptions oo;
    oo.x0 = x0;
    oo.long_run.iters = s.long_run_iters;
    oracle = build_oracle(p, oo);
  }

  RunSpec spec;
  spec.algo = parse_algo(s.algo);
  spec.gamma = s.gamma;
  spec.a = s.a;
  spec.t_mode = parse_t_mode(s.t_mode);
  spec.lift_mode = parse_lift_mode(s.lift);
  spec.alpha = s.alpha;
  spec.audit = s.audit;

  if (spec.algo == Algo::fista_fixed && s.iters < 1 && !spec.alpha) {
    throw ArgumentError("--alpha is required when --iters is 0");
  }
  const RunOutcome outcome =
      execute_run(p, oracle ? &*oracle : nullptr, spec, s.iters, s.trace_every, s.seed, x0);

  const fs::path out = s.out;
  fs::create_directories(out);
  write_trace_csv(out / "trace.csv", outcome.result.trace);
  nlohmann::json summary = oracle ? oracle_json(*oracle, p.beta) : nlohmann::json{{"beta", p.beta}};
  summary["runs"] = nlohmann::json::array({run_json(outcome, "trace.csv")});
  summary["warnings"] = nlohmann::json::array();
  write_json(out / "summary.json", summary);

  const long failures = total_failures(outcome);
  const auto& last = outcome.result.trace.back();
  std::cout << "k=" << last.k << " phi=" << format_double(last.phi) << " omega=" << format_double(last.omega);
  if (last.phi_gap) std::cout << " phi_gap=" << format_double(*last.phi_gap);
  std::cout << '\n';
  if (s.audit || outcome.theory) {
    for (const auto& [id, t] : outcome.result.audit.tallies) {
      std::cout << (t.failures ? "FAIL " : "PASS ") << id << " passes=" << t.passes << " failures=" << t.failures
                << '\n';
    }
    if (outcome.theory) {
      for (const auto& [id, t] : outcome.theory->log.tallies) {
        std::cout << (t.failures ? "FAIL " : "PASS ") << id << " passes=" << t.passes << " failures=" << t.failures
                  << '\n';
      }
    }
  }
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
  return failures ? kAuditFailure : kOk;
}

int cmd_validate(const ValidateArgs& v) {
  const auto lines = validate::run_suite(v.suite, v.seed);
  validate::print(std::cout, lines);
  return validate::all_pass(lines) ? kOk : kAuditFailure;
}

int cmd_compare(const CompareArgs& c) {
  auto config = load_experiment(c.config);
  if (c.out) config.out = *c.out;
  if (c.threads) config.threads = std::max(1u, *c.threads);
  const auto report = run_experiment(config);
  for (const auto& run : report.summary.at("runs")) {
    std::cout << run.at("algo").get<std::string>() << " K=" << run.at("K") << " final_phi_gap=" << run.at("final_phi_gap")
              << " final_omega=" << run.at("final_omega") << " audit_failures=" << run.at("audit").at("failures")
              << '\n';
  }
  std::cout << "wrote " << (config.out / "summary.json").string() << '\n';
  return report.failures ? kAuditFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast bi-level proximal gradient: solvers, oracles and rate checks"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic instance");
  g->add_option("--kind", gen.kind)->check(CLI::IsMember({"least-squares", "logistic"}));
  g->add_option("--rows", gen.rows)->check(CLI::Range(1L, LONG_MAX));
  g->add_option("--cols", gen.cols)->check(CLI::Range(1L, LONG_MAX));
  g->add_option("--sparsity", gen.sparsity)->check(CLI::NonNegativeNumber);
  g->add_flag("--consistent", gen.consistent);
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out);

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "Compute phi*, x', omega*, tau, rho for a problem");
  o->add_option("--problem", orc.problem)->required();
  o->add_option("--out", orc.out);
  o->add_option("--long-run-iters", orc.long_run_iters)->check(CLI::Range(10L, LONG_MAX));

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Run one solver and write its trace");
  s->add_option("--problem", sol.problem)->required();
  s->add_option("--algo", sol.algo)->check(CLI::IsMember({"fbipg", "fista-fixed"}));
  s->add_option("--gamma", sol.gamma)->check(CLI::PositiveNumber);
  s->add_option("--a", sol.a)->check(CLI::Range(2, INT_MAX));
  s->add_option("--alpha", sol.alpha)->check(CLI::PositiveNumber);
  s->add_option("--iters", sol.iters)->check(CLI::NonNegativeNumber);
  s->add_option("--t-mode", sol.t_mode)->check(CLI::IsMember({"explicit", "fista"}));
  s->add_option("--lift", sol.lift)->check(CLI::IsMember({"off", "auto", "force"}));
  s->add_flag("--audit", sol.audit);
  s->add_option("--trace-every", sol.trace_every)->check(CLI::Range(1L, LONG_MAX));
  s->add_option("--x0", sol.x0, "CSV path or 'zeros'");
  s->add_option("--out", sol.out);
  s->add_option("--seed", sol.seed);
  s->add_option("--long-run-iters", sol.long_run_iters)->check(CLI::Range(10L, LONG_MAX));
  s->add_flag("--no-oracle", sol.no_oracle, "Skip the oracle (no gap metrics, no theory audit)");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Run a brute-force validation suite");
  v->add_option("--suite", val.suite)->required()->check(CLI::IsMember({"lemmas", "inequalities", "holder", "pointwise"}));
  v->add_option("--seed", val.seed);

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Run an experiment configuration");
  c->add_option("--config", cmp.config)->required();
  c->add_option("--out", cmp.out);
  c->add_option("--threads", cmp.threads)->check(CLI::Range(1u, 256u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*o) return cmd_oracle(orc);
    if (*s) return cmd_solve(sol);
    if (*v) return cmd_validate(val);
    if (*c) return cmd_compare(cmp);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}

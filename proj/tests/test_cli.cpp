// Drives the fbipg executable end to end and checks files and exit codes.

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fbipg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) const {
    const fs::path log = dir_ / "stdout.txt";
    const std::string cmd = std::string("cd '") + dir_.string() + "' && '" + FBIPG_CLI_PATH + "' " + args + " > '" +
                            log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read(log);
    return r;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static nlohmann::json json(const fs::path& p) { return nlohmann::json::parse(read(p)); }

  static long count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    long n = 0;
    while (std::getline(in, line)) ++n;
    return n;
  }

  void small_instance() const {
    ASSERT_EQ(run("gen --rows 8 --cols 12 --sparsity 3 --consistent --seed 7 --out data").code, 0);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenWritesInstance) {
  small_instance();
  for (const char* f : {"A.csv", "b.csv", "x_planted.csv", "meta.json", "problem.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "data" / f)) << f;
  }
  EXPECT_EQ(count_lines(dir_ / "data" / "A.csv"), 8);
  const auto meta = json(dir_ / "data" / "meta.json");
  EXPECT_EQ(meta.at("seed"), 7);
  EXPECT_EQ(meta.at("consistent"), true);
  ASSERT_EQ(run("gen --kind logistic --rows 20 --cols 4 --out logit").code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "logit" / "z.csv"));
}

TEST_F(Cli, GenIsDeterministic) {
  ASSERT_EQ(run("gen --rows 5 --cols 6 --seed 3 --out a").code, 0);
  ASSERT_EQ(run("gen --rows 5 --cols 6 --seed 3 --out b").code, 0);
  EXPECT_EQ(read(dir_ / "a" / "A.csv"), read(dir_ / "b" / "A.csv"));
  EXPECT_EQ(read(dir_ / "a" / "b.csv"), read(dir_ / "b" / "b.csv"));
}

TEST_F(Cli, OracleSummary) {
  small_instance();
  const auto r = run("oracle --problem data/problem.json --out orc");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json(dir_ / "orc" / "summary.json");
  for (const char* key : {"phi_star", "omega_star_inf", "x_prime", "omega_xprime", "tau", "rho", "R2"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.at("x_prime").size(), 12u);
}

TEST_F(Cli, SolveWithAuditPasses) {
  small_instance();
  const auto r = run("solve --problem data/problem.json --gamma 1.5 --iters 500 --audit --out run");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS step_inequality"), std::string::npos);
  EXPECT_NE(r.out.find("PASS inner_rate"), std::string::npos);
  EXPECT_EQ(count_lines(dir_ / "run" / "trace.csv"), 502);
  const auto j = json(dir_ / "run" / "summary.json");
  const auto& run0 = j.at("runs").at(0);
  for (const char* key : {"algo", "gamma", "a", "alpha", "K", "final_phi_gap", "final_omega", "slope_phi_gap", "audit"}) {
    EXPECT_TRUE(run0.contains(key)) << key;
  }
  EXPECT_EQ(run0.at("audit").at("failures"), 0);
  EXPECT_EQ(run0.at("audit").at("regime"), "sub2");
}

TEST_F(Cli, SolveZeroIterations) {
  small_instance();
  ASSERT_EQ(run("solve --problem data/problem.json --iters 0 --out run").code, 0);
  EXPECT_EQ(count_lines(dir_ / "run" / "trace.csv"), 2);
}

TEST_F(Cli, SolveFixedAlphaAndTraceStride) {
  small_instance();
  const auto r = run("solve --problem data/problem.json --algo fista-fixed --iters 100 --trace-every 10 --out run");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(count_lines(dir_ / "run" / "trace.csv"), 12);
  const auto j = json(dir_ / "run" / "summary.json");
  EXPECT_DOUBLE_EQ(j.at("runs").at(0).at("alpha").get<double>(), 0.01);
}

TEST_F(Cli, SolveCustomStart) {
  small_instance();
  std::ofstream(dir_ / "x0.csv") << "1\n1\n1\n1\n1\n1\n1\n1\n1\n1\n1\n1\n";
  const auto r = run("solve --problem data/problem.json --iters 50 --x0 x0.csv --out run");
  ASSERT_EQ(r.code, 0) << r.out;
  std::ofstream(dir_ / "bad.csv") << "1\n2\n";
  EXPECT_EQ(run("solve --problem data/problem.json --iters 5 --x0 bad.csv --out run").code, 2);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  small_instance();
  EXPECT_EQ(run("solve --problem data/problem.json --gamma 0").code, 2);
  EXPECT_EQ(run("solve --problem data/problem.json --a 1").code, 2);
  EXPECT_EQ(run("solve --problem data/problem.json --bogus").code, 2);
  EXPECT_EQ(run("solve --problem missing.json").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("validate").code, 2);
  EXPECT_EQ(run("validate --suite nope").code, 2);
}

TEST_F(Cli, LiftRequiredIsReported) {
  std::ofstream(dir_ / "p.json") << R"({"dim": 1,
      "inner_smooth": {"kind": "squared_l2", "weight": 1, "center": [0]},
      "inner_prox": {"kind": "squared_l2", "weight": 1, "center": [1]},
      "outer_smooth": {"kind": "zero"}, "outer_prox": {"kind": "l1", "weight": 1}})";
  const auto r = run("solve --problem p.json --iters 5 --long-run-iters 100 --out run");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("lift"), std::string::npos);
  EXPECT_EQ(run("solve --problem p.json --iters 5 --lift auto --long-run-iters 100 --out run").code, 0);
}

TEST_F(Cli, ValidateLemmas) {
  const auto r = run("validate --suite lemmas");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_NE(r.out.find("PASS alpha_t_sum_bound"), std::string::npos);
}

TEST_F(Cli, Compare) {
  small_instance();
  std::ofstream(dir_ / "exp.json") << R"({"problem": "data/problem.json", "K": 300, "out": "cmp",
      "runs": [{"algo": "fbipg", "gamma": 3}, {"algo": "fbipg", "gamma": 1.5, "audit": true},
               {"algo": "fista-fixed", "alpha": "1/K"}]})";
  const auto r = run("compare --config exp.json --threads 2");
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"run_0.csv", "run_1.csv", "run_2.csv", "summary.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "cmp" / f)) << f;
  }
  EXPECT_EQ(json(dir_ / "cmp" / "summary.json").at("runs").size(), 3u);
  EXPECT_EQ(run("compare --config missing.json").code, 2);
}

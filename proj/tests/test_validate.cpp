#include "fbipg/validate.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace fbipg;

namespace {

void expect_all_pass(const std::vector<validate::Line>& lines) {
  ASSERT_FALSE(lines.empty());
  for (const auto& l : lines) EXPECT_TRUE(l.pass) << validate::format(l);
}

}  // namespace

TEST(Worst, KeepsFailingPointOverLargerPassingMargin) {
  validate::Worst w("demo");
  w.add(0.0, 10.0, "a");  // margin -10, passes
  w.add(2.0, 1.0, "b");   // margin 1, fails
  w.add(5.0, 5.5, "c");   // margin -0.5, passes
  const auto l = w.line();
  EXPECT_FALSE(l.pass);
  EXPECT_EQ(l.params, "b");
}

TEST(Worst, StrictRejectsEquality) {
  validate::Worst strict("s", true), loose("l");
  strict.add(1.0, 1.0, "eq");
  loose.add(1.0, 1.0, "eq");
  EXPECT_FALSE(strict.line().pass);
  EXPECT_TRUE(loose.line().pass);
}

TEST(Format, OneLinePerCheck) {
  const validate::Line l{true, "eta_zero", "a=2", 0.0, 0.0};
  EXPECT_EQ(validate::format(l).rfind("PASS eta_zero a=2 lhs=", 0), 0u);
  std::ostringstream os;
  validate::print(os, {l, validate::Line{false, "x", "p", 1, 0}});
  EXPECT_NE(os.str().find("FAIL x p"), std::string::npos);
  EXPECT_FALSE(validate::all_pass({l, validate::Line{false, "x", "p", 1, 0}}));
}

TEST(Suites, LemmasAllPass) {
  const auto lines = validate::lemmas();
  expect_all_pass(lines);
  std::set<std::string> ids;
  for (const auto& l : lines) ids.insert(l.id);
  for (const char* id : {"power_sum_bound", "alpha_t_sum_bound", "eta_positive", "d_nonneg", "eta_identity", "eta_zero",
                         "eta_gamma1", "lambda1_zero", "pi_empty", "t_condition_explicit", "t_condition_fista",
                         "eta_decay", "momentum_product_sum"}) {
    EXPECT_TRUE(ids.count(id)) << id;
  }
}

TEST(Suites, InequalitiesAllPass) { expect_all_pass(validate::inequalities(0)); }

TEST(Suites, HolderAllPass) { expect_all_pass(validate::holder(1)); }

TEST(Suites, PointwiseAllPass) { expect_all_pass(validate::pointwise(0)); }

TEST(Suites, UnknownSuite) { EXPECT_THROW(validate::run_suite("nope", 0), ArgumentError); }

#include "fbipg/functions.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <cmath>

using namespace fbipg;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

DenseMatrix mat(Index r, Index c, std::initializer_list<double> xs) {
  DenseMatrix m(r, c);
  Index i = 0;
  for (double x : xs) {
    m(i / c, i % c) = x;
    ++i;
  }
  return m;
}

DenseMatrix random_matrix(Index r, Index c, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DenseMatrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

Vector labels(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
  return z;
}

std::vector<SmoothFunction> sample_functions() {
  const DenseMatrix A = random_matrix(15, 6, 3);
  SplitMix64 rng(4);
  return {SmoothFunction::least_squares(A, rng.normal_vector(15)), SmoothFunction::logistic(A, labels(15, 5)),
          SmoothFunction::squared_l2(2.5, rng.normal_vector(6)), SmoothFunction::zero(6)};
}

}  // namespace

TEST(SmoothValue, LeastSquaresExamples) {
  const DenseMatrix I = DenseMatrix::Identity(2, 2);
  EXPECT_DOUBLE_EQ(SmoothFunction::least_squares(I, vec({0, 0}), 2.0).value(vec({0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(SmoothFunction::least_squares(I, vec({1, 1}), 2.0).value(vec({0, 0})), 0.5);
}

TEST(SmoothValue, LogisticAtZeroIsLog2) {
  const auto f = SmoothFunction::logistic(mat(1, 1, {0.0}), vec({1}), 1.0);
  EXPECT_NEAR(f.value(vec({0})), std::log(2.0), 1e-12);
}

TEST(SmoothValue, LogisticStableForHugeMargins) {
  const auto f = SmoothFunction::logistic(mat(2, 1, {1.0, 1.0}), vec({1, 0}));
  const double v = f.value(vec({800.0}));
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, 400.0, 1e-9);  // one term ~0, the other ~800, averaged
  EXPECT_TRUE(f.gradient(vec({-800.0})).allFinite());
}

TEST(SmoothValue, DimensionMismatchThrows) {
  const auto f = SmoothFunction::least_squares(DenseMatrix::Identity(2, 2), vec({1, 1}));
  EXPECT_THROW(f.value(vec({1, 2, 3})), ArgumentError);
  EXPECT_THROW(f.gradient(vec({1})), ArgumentError);
  EXPECT_THROW(SmoothFunction::least_squares(DenseMatrix::Identity(2, 2), vec({1})), ArgumentError);
  EXPECT_THROW(SmoothFunction::logistic(DenseMatrix::Identity(2, 2), vec({1, 2})), ArgumentError);
}

TEST(SmoothGradient, Examples) {
  const Vector g1 = SmoothFunction::squared_l2(1.0, Vector::Zero(2)).gradient(vec({3, -1}));
  EXPECT_DOUBLE_EQ(g1[0], 3.0);
  EXPECT_DOUBLE_EQ(g1[1], -1.0);
  const Vector g2 = SmoothFunction::least_squares(DenseMatrix::Identity(2, 2), vec({1, 1}), 2.0).gradient(vec({0, 0}));
  EXPECT_DOUBLE_EQ(g2[0], -0.5);
  EXPECT_DOUBLE_EQ(g2[1], -0.5);
  const Vector g3 = SmoothFunction::logistic(mat(1, 1, {1.0}), vec({1}), 1.0).gradient(vec({0}));
  EXPECT_NEAR(g3[0], -0.5, 1e-15);
}

TEST(SmoothGradient, MatchesCentralDifferences) {
  SplitMix64 rng(17);
  for (const auto& f : sample_functions()) {
    const Vector x = rng.normal_vector(f.dim());
    const Vector g = f.gradient(x);
    for (Index i = 0; i < f.dim(); ++i) {
      const double h = 1e-6;
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      EXPECT_NEAR(g[i], (f.value(xp) - f.value(xm)) / (2 * h), 1e-6) << to_string(f.kind()) << " coord " << i;
    }
  }
}

TEST(SmoothLipschitz, Examples) {
  EXPECT_DOUBLE_EQ(SmoothFunction::zero(3).lipschitz(), 0.0);
  EXPECT_NEAR(SmoothFunction::least_squares(DenseMatrix::Identity(2, 2), Vector::Zero(2), 2.0).lipschitz(), 0.5, 1e-12);
  EXPECT_NEAR(SmoothFunction::logistic(DenseMatrix::Identity(2, 2), vec({0, 1}), 2.0).lipschitz(), 0.125, 1e-12);
}

TEST(SmoothLipschitz, OverrideIsHonoured) {
  const auto f = SmoothFunction::least_squares(DenseMatrix::Identity(2, 2), Vector::Zero(2), 2.0, 3.0);
  EXPECT_DOUBLE_EQ(f.lipschitz(), 3.0);
  EXPECT_TRUE(f.lipschitz_overridden());
  EXPECT_NEAR(lipschitz_bound(f), 0.5, 1e-12);
}

TEST(SmoothLipschitz, BoundsGradientDifferences) {
  SplitMix64 rng(23);
  for (const auto& f : sample_functions()) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vector u = 3.0 * rng.normal_vector(f.dim());
      const Vector v = 3.0 * rng.normal_vector(f.dim());
      const double lhs = (f.gradient(u) - f.gradient(v)).norm();
      EXPECT_LE(lhs, f.lipschitz() * (u - v).norm() * (1 + 1e-10) + 1e-14) << to_string(f.kind());
    }
  }
}

TEST(SmoothConvexity, MidpointInequality) {
  SplitMix64 rng(29);
  for (const auto& f : sample_functions()) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vector u = 2.0 * rng.normal_vector(f.dim());
      const Vector v = 2.0 * rng.normal_vector(f.dim());
      const double mid = f.value(0.5 * (u + v));
      EXPECT_LE(mid, 0.5 * (f.value(u) + f.value(v)) + 1e-12) << to_string(f.kind());
    }
  }
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(estimate_spectral_norm(DenseMatrix::Identity(3, 3)), 1.0, 1e-12);
  EXPECT_NEAR(estimate_spectral_norm(mat(2, 2, {2, 0, 0, 1})), 4.0, 1e-10);
  EXPECT_NEAR(estimate_spectral_norm(mat(2, 2, {1, 1, 1, 1})), 4.0, 1e-12);
}

TEST(SpectralNorm, AgreesWithSvdOnRandomMatrices) {
  for (Index n : {1, 2, 5, 13, 30, 50}) {
    const DenseMatrix A = random_matrix(n, (n * 7) % 50 + 1, 100 + n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const double s = svd.singularValues()[0];
    EXPECT_NEAR(estimate_spectral_norm(A), s * s, 1e-4 * s * s) << n;
  }
}

TEST(SpectralNorm, DeterministicAndValidatesInput) {
  const DenseMatrix A = random_matrix(10, 8, 1);
  EXPECT_EQ(estimate_spectral_norm(A, 50, 9), estimate_spectral_norm(A, 50, 9));
  EXPECT_THROW(estimate_spectral_norm(DenseMatrix(0, 0)), ArgumentError);
  EXPECT_THROW(estimate_spectral_norm(A, 0), ArgumentError);
  EXPECT_EQ(estimate_spectral_norm(DenseMatrix::Zero(3, 3)), 0.0);
}

TEST(Prox, Examples) {
  const Vector v = vec({3, -0.5});
  EXPECT_TRUE(ProxFunction::l1(1.0).prox(v, 1.0).isApprox(vec({2, 0})));
  EXPECT_TRUE(ProxFunction::l1(0.0).prox(v, 1.0).isApprox(v));
  for (double step : {0.1, 1.0, 50.0}) {
    EXPECT_TRUE(ProxFunction::indicator_nonneg().prox(vec({-2, 5}), step).isApprox(vec({0, 5})));
  }
  EXPECT_TRUE(ProxFunction::zero().prox(vec({1, 2}), 7.0).isApprox(vec({1, 2})));
}

TEST(Prox, BoxAndSquaredL2) {
  const auto box = ProxFunction::indicator_box(vec({-1, 0}), vec({1, 2}));
  EXPECT_TRUE(box.prox(vec({5, -3}), 1.0).isApprox(vec({1, 0})));
  EXPECT_EQ(box.value(vec({2, 1})), kInf);
  EXPECT_EQ(box.value(vec({0, 1})), 0.0);
  EXPECT_THROW(ProxFunction::indicator_box(vec({1}), vec({0})), ArgumentError);
  // argmin w/2 (u - c)^2 + (u - v)^2 / (2 step): u = (v + step w c) / (1 + step w)
  const auto sq = ProxFunction::squared_l2(2.0, vec({1}));
  EXPECT_NEAR(sq.prox(vec({4}), 0.5)[0], (4 + 1.0) / 2.0, 1e-15);
}

TEST(Prox, MinimizesSubproblemAgainstGridSearch) {
  const std::vector<ProxFunction> fns = {
      ProxFunction::l1(0.7), ProxFunction::zero(), ProxFunction::indicator_nonneg(),
      ProxFunction::indicator_box(vec({-0.5}), vec({1.5})), ProxFunction::squared_l2(1.3, vec({0.4}))};
  SplitMix64 rng(31);
  for (const auto& h : fns) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector v = vec({3.0 * rng.normal()});
      const double step = 0.1 + 2.0 * rng.uniform();
      const double u = h.prox(v, step)[0];
      auto obj = [&](double x) { return h.value(vec({x})) + (x - v[0]) * (x - v[0]) / (2 * step); };
      double best = kInf;
      for (int i = -100000; i <= 100000; ++i) best = std::min(best, obj(i / 1e4));
      EXPECT_LE(obj(u), best + 1e-12) << to_string(h.kind());
      EXPECT_GE(obj(u), best - 1e-7) << to_string(h.kind());
    }
  }
}

TEST(Prox, Nonexpansive) {
  const std::vector<ProxFunction> fns = {ProxFunction::l1(1.0), ProxFunction::indicator_nonneg(),
                                         ProxFunction::squared_l2(0.5, Vector::Ones(4)),
                                         ProxFunction::indicator_box(-Vector::Ones(4), Vector::Ones(4))};
  SplitMix64 rng(37);
  for (const auto& h : fns) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector u = 2.0 * rng.normal_vector(4), v = 2.0 * rng.normal_vector(4);
      EXPECT_LE((h.prox(u, 0.8) - h.prox(v, 0.8)).norm(), (u - v).norm() + 1e-14);
    }
  }
}

TEST(Prox, SeparablePairActsBlockwise) {
  const auto pair = ProxFunction::separable_pair(ProxFunction::l1(1.0), ProxFunction::indicator_nonneg(), 2);
  const Vector out = pair.prox(vec({3, -0.5, -2, 4}), 1.0);
  EXPECT_TRUE(out.isApprox(vec({2, 0, 0, 4})));
  EXPECT_DOUBLE_EQ(pair.value(vec({1, -2, 0, 3})), 3.0);
  EXPECT_EQ(pair.value(vec({1, -2, -1, 3})), kInf);
  EXPECT_TRUE(pair.restrict(2, 2).prox(vec({-2, 4}), 1.0).isApprox(vec({0, 4})));
}

TEST(Prox, ValidatesArguments) {
  EXPECT_THROW(ProxFunction::l1(-1.0), ArgumentError);
  EXPECT_THROW(ProxFunction::l1(1.0).prox(vec({1}), 0.0), ArgumentError);
  EXPECT_THROW(ProxFunction::l1(1.0, 3).prox(vec({1, 2}), 1.0), ArgumentError);
}

TEST(Prox, IndicatorValueOutsideIsInfinite) {
  EXPECT_EQ(ProxFunction::indicator_nonneg().value(vec({-1})), kInf);
  EXPECT_EQ(ProxFunction::indicator_nonneg().value(vec({0, 2})), 0.0);
}

TEST(L1Subgradient, SignWithZeroOnZeros) {
  const Vector g = l1_subgradient(vec({2, 0, -3}), 1.5);
  EXPECT_TRUE(g.isApprox(vec({1.5, 0, -1.5})));
}

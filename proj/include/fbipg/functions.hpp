#pragma once

// Catalog of the smooth convex pieces (value, gradient, gradient Lipschitz
// constant) and the proximable convex pieces (value, prox) that make up a
// bi-level problem.

#include "fbipg/core.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace fbipg {

/// Power iteration for lambda_max(A^T A), i.e. the squared spectral norm of A.
/// The start vector is drawn from `seed`, so the estimate is reproducible.
/// Stops early once the Rayleigh quotient is stationary to machine precision.
inline double estimate_spectral_norm(const DenseMatrix& A, int iters = 1000, std::uint64_t seed = 0) {
  if (A.rows() == 0 || A.cols() == 0) throw ArgumentError("estimate_spectral_norm: empty matrix");
  if (iters < 1) throw ArgumentError("estimate_spectral_norm: iters must be >= 1");
  SplitMix64 rng = SplitMix64(seed).split(stream::kPower);
  Vector v = rng.normal_vector(A.cols());
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = A.transpose() * (A * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    w /= norm;
    const bool settled = it > 10 && std::abs(next - lambda) <= 1e-16 * std::abs(next) &&
                         (w - v).norm() <= 1e-14;
    v = std::move(w);
    lambda = next;
    if (settled) break;
  }
  return lambda;
}

enum class SmoothKind { least_squares, logistic, squared_l2, zero, coupled, first_block };

inline const char* to_string(SmoothKind k) {
  switch (k) {
    case SmoothKind::least_squares: return "least_squares";
    case SmoothKind::logistic: return "logistic";
    case SmoothKind::squared_l2: return "squared_l2";
    case SmoothKind::zero: return "zero";
    case SmoothKind::coupled: return "coupled";
    case SmoothKind::first_block: return "first_block";
  }
  return "?";
}

namespace detail {

// log(1 + e^t) without overflow.
inline double log1pexp(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

/// Convex, continuously differentiable function with Lipschitz gradient.
///
/// least_squares: (1/2N) ||Ax - b||^2
/// logistic:      (1/N) sum_i [log(1 + e^{a_i.x}) - z_i a_i.x]  (negative log-likelihood)
/// squared_l2:    (weight/2) ||x - center||^2
/// coupled:       base(x) + 1/2 ||x - z||^2    over w = (x, z)
/// first_block:   base(x)                      over w = (x, z)
///
/// Immutable; copies share the underlying data.
class SmoothFunction {
 public:
  static SmoothFunction least_squares(DenseMatrix A, Vector b, std::optional<double> N = std::nullopt,
                                      std::optional<double> lipschitz_override = std::nullopt) {
    if (A.rows() == 0 || A.cols() == 0) throw ArgumentError("least_squares: empty matrix");
    require_dim(b.size(), A.rows(), "least_squares: b");
    auto d = std::make_shared<Data>();
    d->kind = SmoothKind::least_squares;
    d->count = N.value_or(static_cast<double>(A.rows()));
    if (!(d->count > 0)) throw ArgumentError("least_squares: N must be positive");
    d->A = std::move(A);
    d->b = std::move(b);
    d->dim = d->A.cols();
    return finish(std::move(d), lipschitz_override);
  }

  static SmoothFunction logistic(DenseMatrix A, Vector labels, std::optional<double> N = std::nullopt,
                                 std::optional<double> lipschitz_override = std::nullopt) {
    if (A.rows() == 0 || A.cols() == 0) throw ArgumentError("logistic: empty matrix");
    require_dim(labels.size(), A.rows(), "logistic: labels");
    for (Index i = 0; i < labels.size(); ++i) {
      if (labels[i] != 0.0 && labels[i] != 1.0) throw ArgumentError("logistic: labels must be 0 or 1");
    }
    auto d = std::make_shared<Data>();
    d->kind = SmoothKind::logistic;
    d->count = N.value_or(static_cast<double>(A.rows()));
    if (!(d->count > 0)) throw ArgumentError("logistic: N must be positive");
    d->A = std::move(A);
    d->b = std::move(labels);
    d->dim = d->A.cols();
    return finish(std::move(d), lipschitz_override);
  }

  static SmoothFunction squared_l2(double weight, Vector center) {
    if (!(weight >= 0)) throw ArgumentError("squared_l2: weight must be nonnegative");
    if (center.size() == 0) throw ArgumentError("squared_l2: dimension must be positive");
    auto d = std::make_shared<Data>();
    d->kind = SmoothKind::squared_l2;
    d->weight = weight;
    d->dim = center.size();
    d->b = std::move(center);
    return finish(std::move(d), std::nullopt);
  }

  static SmoothFunction zero(Index dim) {
    if (dim <= 0) throw ArgumentError("zero: dimension must be positive");
    auto d = std::make_shared<Data>();
    d->kind = SmoothKind::zero;
    d->dim = dim;
    return finish(std::move(d), std::nullopt);
  }

  static SmoothFunction coupled(const SmoothFunction& base) {
    auto d = std::make_shared<Data>();
    d->kind = SmoothKind::coupled;
    d->dim = 2 * base.dim();
    d->base = base.data_;
    return finish(std::move(d), std::nullopt);
  }

  static SmoothFunction first_block(const SmoothFunction& base) {
    auto d = std::make_shared<Data>();
    d->kind = SmoothKind::first_block;
    d->dim = 2 * base.dim();
    d->base = base.data_;
    return finish(std::move(d), std::nullopt);
  }

  SmoothKind kind() const { return data_->kind; }
  Index dim() const { return data_->dim; }
  /// Override when one was supplied, else the computed bound.
  double lipschitz() const { return data_->lipschitz; }
  bool lipschitz_overridden() const { return data_->overridden; }

  const DenseMatrix& matrix() const { return data_->A; }
  /// b for least_squares, labels for logistic, center for squared_l2.
  const Vector& vector() const { return data_->b; }
  double count() const { return data_->count; }
  double weight() const { return data_->weight; }
  SmoothFunction base() const { return SmoothFunction(data_->base); }

  double value(const Vector& x) const {
    require_dim(x.size(), dim(), "SmoothFunction::value");
    return value_impl(*data_, x);
  }

  Vector gradient(const Vector& x) const {
    require_dim(x.size(), dim(), "SmoothFunction::gradient");
    return gradient_impl(*data_, x);
  }

 private:
  struct Data {
    SmoothKind kind = SmoothKind::zero;
    Index dim = 0;
    DenseMatrix A;
    Vector b;
    double count = 1.0;
    double weight = 0.0;
    double lipschitz = 0.0;
    bool overridden = false;
    std::shared_ptr<const Data> base;
  };

  explicit SmoothFunction(std::shared_ptr<const Data> d) : data_(std::move(d)) {}

  static double bound_impl(const Data& d) {
    switch (d.kind) {
      case SmoothKind::least_squares: return estimate_spectral_norm(d.A) / d.count;
      case SmoothKind::logistic: return estimate_spectral_norm(d.A) / (4.0 * d.count);
      case SmoothKind::squared_l2: return d.weight;
      case SmoothKind::zero: return 0.0;
      // Hessian block [[H + I, -I], [-I, I]] with ||H|| <= L_base has norm <= L_base + 2.
      case SmoothKind::coupled: return d.base->lipschitz + 2.0;
      case SmoothKind::first_block: return d.base->lipschitz;
    }
    return 0.0;
  }

  static SmoothFunction finish(std::shared_ptr<Data> d, std::optional<double> override_value) {
    if (override_value) {
      if (!(*override_value >= 0) || !std::isfinite(*override_value)) {
        throw ArgumentError("lipschitz override must be finite and nonnegative");
      }
      d->lipschitz = *override_value;
      d->overridden = true;
    } else {
      d->lipschitz = bound_impl(*d);
    }
    return SmoothFunction(std::move(d));
  }

  static double value_impl(const Data& d, const Vector& x) {
    switch (d.kind) {
      case SmoothKind::least_squares:
        return (d.A * x - d.b).squaredNorm() / (2.0 * d.count);
      case SmoothKind::logistic: {
        const Vector t = d.A * x;
        CompensatedSum s;
        for (Index i = 0; i < t.size(); ++i) s.add(detail::log1pexp(t[i]) - d.b[i] * t[i]);
        return s.value() / d.count;
      }
      case SmoothKind::squared_l2:
        return 0.5 * d.weight * (x - d.b).squaredNorm();
      case SmoothKind::zero:
        return 0.0;
      case SmoothKind::coupled: {
        const Index n = d.base->dim;
        return value_impl(*d.base, x.head(n)) + 0.5 * (x.head(n) - x.tail(n)).squaredNorm();
      }
      case SmoothKind::first_block:
        return value_impl(*d.base, x.head(d.base->dim));
    }
    return 0.0;
  }

  static Vector gradient_impl(const Data& d, const Vector& x) {
    switch (d.kind) {
      case SmoothKind::least_squares:
        return d.A.transpose() * (d.A * x - d.b) / d.count;
      case SmoothKind::logistic: {
        Vector r = d.A * x;
        for (Index i = 0; i < r.size(); ++i) r[i] = detail::sigmoid(r[i]) - d.b[i];
        return d.A.transpose() * r / d.count;
      }
      case SmoothKind::squared_l2:
        return d.weight * (x - d.b);
      case SmoothKind::zero:
        return Vector::Zero(d.dim);
      case SmoothKind::coupled: {
        const Index n = d.base->dim;
        const Vector diff = x.head(n) - x.tail(n);
        Vector g(2 * n);
        g.head(n) = gradient_impl(*d.base, x.head(n)) + diff;
        g.tail(n) = -diff;
        return g;
      }
      case SmoothKind::first_block: {
        const Index n = d.base->dim;
        Vector g = Vector::Zero(2 * n);
        g.head(n) = gradient_impl(*d.base, x.head(n));
        return g;
      }
    }
    return Vector();
  }

  friend double lipschitz_bound(const SmoothFunction& fn);

  std::shared_ptr<const Data> data_;
};

/// The catalog formula for the gradient Lipschitz constant, ignoring any override:
/// least_squares -> lambda_max(A^T A)/N, logistic -> lambda_max(A^T A)/(4N),
/// squared_l2 -> weight, zero -> 0.
inline double lipschitz_bound(const SmoothFunction& fn) { return SmoothFunction::bound_impl(*fn.data_); }

enum class ProxKind { l1, zero, indicator_nonneg, indicator_box, squared_l2, separable_pair };

inline const char* to_string(ProxKind k) {
  switch (k) {
    case ProxKind::l1: return "l1";
    case ProxKind::zero: return "zero";
    case ProxKind::indicator_nonneg: return "indicator_nonneg";
    case ProxKind::indicator_box: return "indicator_box";
    case ProxKind::squared_l2: return "squared_l2";
    case ProxKind::separable_pair: return "separable_pair";
  }
  return "?";
}

/// Proper, lsc, convex function with an inexpensive prox. Every kind is
/// coordinate-separable. Kinds without vector data (l1, zero, indicator_nonneg)
/// apply to any dimension unless one is fixed at construction.
class ProxFunction {
 public:
  static ProxFunction l1(double weight, std::optional<Index> dim = std::nullopt) {
    if (!(weight >= 0) || !std::isfinite(weight)) throw ArgumentError("l1: weight must be finite and nonnegative");
    ProxFunction p(ProxKind::l1);
    p.weight_ = weight;
    p.dim_ = dim;
    return p;
  }

  static ProxFunction zero(std::optional<Index> dim = std::nullopt) {
    ProxFunction p(ProxKind::zero);
    p.dim_ = dim;
    return p;
  }

  static ProxFunction indicator_nonneg(std::optional<Index> dim = std::nullopt) {
    ProxFunction p(ProxKind::indicator_nonneg);
    p.dim_ = dim;
    return p;
  }

  static ProxFunction indicator_box(Vector lo, Vector hi) {
    require_dim(hi.size(), lo.size(), "indicator_box: hi");
    if (lo.size() == 0) throw ArgumentError("indicator_box: empty box");
    for (Index i = 0; i < lo.size(); ++i) {
      if (!(lo[i] <= hi[i])) throw ArgumentError("indicator_box: lo must not exceed hi");
    }
    ProxFunction p(ProxKind::indicator_box);
    p.dim_ = lo.size();
    p.lo_ = std::move(lo);
    p.hi_ = std::move(hi);
    return p;
  }

  /// (weight/2) ||x - center||^2.
  static ProxFunction squared_l2(double weight, Vector center) {
    if (!(weight >= 0) || !std::isfinite(weight)) throw ArgumentError("squared_l2: weight must be finite and nonnegative");
    ProxFunction p(ProxKind::squared_l2);
    p.weight_ = weight;
    p.dim_ = center.size();
    p.center_ = std::move(center);
    return p;
  }

  /// first on coordinates [0, split), second on [split, end).
  static ProxFunction separable_pair(ProxFunction first, ProxFunction second, Index split) {
    if (split <= 0) throw ArgumentError("separable_pair: split must be positive");
    if (first.dim() && *first.dim() != split) throw ArgumentError("separable_pair: first block dimension mismatch");
    ProxFunction p(ProxKind::separable_pair);
    p.split_ = split;
    if (second.dim()) p.dim_ = split + *second.dim();
    p.first_ = std::make_shared<const ProxFunction>(std::move(first));
    p.second_ = std::make_shared<const ProxFunction>(std::move(second));
    return p;
  }

  ProxKind kind() const { return kind_; }
  std::optional<Index> dim() const { return dim_; }
  double weight() const { return weight_; }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  const Vector& center() const { return center_; }
  Index split() const { return split_; }
  const ProxFunction& first() const { return *first_; }
  const ProxFunction& second() const { return *second_; }

  bool is_indicator() const { return kind_ == ProxKind::indicator_nonneg || kind_ == ProxKind::indicator_box; }

  /// Function value; +inf outside the domain of an indicator.
  double value(const Vector& x) const {
    check_dim(x.size(), "ProxFunction::value");
    switch (kind_) {
      case ProxKind::l1: return weight_ * x.lpNorm<1>();
      case ProxKind::zero: return 0.0;
      case ProxKind::indicator_nonneg: return (x.array() >= 0.0).all() ? 0.0 : kInf;
      case ProxKind::indicator_box:
        return ((x.array() >= lo_.array()) && (x.array() <= hi_.array())).all() ? 0.0 : kInf;
      case ProxKind::squared_l2: return 0.5 * weight_ * (x - center_).squaredNorm();
      case ProxKind::separable_pair:
        if (x.size() <= split_) throw ArgumentError("separable_pair: vector shorter than split");
        return first_->value(x.head(split_)) + second_->value(x.tail(x.size() - split_));
    }
    return 0.0;
  }

  /// argmin_u { h(u) + ||u - v||^2 / (2 step) }.
  Vector prox(const Vector& v, double step) const {
    if (!(step > 0)) throw ArgumentError("prox: step must be positive");
    check_dim(v.size(), "ProxFunction::prox");
    switch (kind_) {
      case ProxKind::l1: return soft_threshold(v, weight_ * step);
      case ProxKind::zero: return v;
      case ProxKind::indicator_nonneg: return v.cwiseMax(0.0);
      case ProxKind::indicator_box: return v.cwiseMax(lo_).cwiseMin(hi_);
      case ProxKind::squared_l2: return (v + step * weight_ * center_) / (1.0 + step * weight_);
      case ProxKind::separable_pair: {
        if (v.size() <= split_) throw ArgumentError("separable_pair: vector shorter than split");
        Vector out(v.size());
        out.head(split_) = first_->prox(v.head(split_), step);
        out.tail(v.size() - split_) = second_->prox(v.tail(v.size() - split_), step);
        return out;
      }
    }
    return v;
  }

  /// The same function restricted to coordinates [begin, begin + len).
  ProxFunction restrict(Index begin, Index len) const {
    if (len <= 0 || begin < 0 || (dim_ && begin + len > *dim_)) throw ArgumentError("restrict: range out of bounds");
    switch (kind_) {
      case ProxKind::l1: return l1(weight_, len);
      case ProxKind::zero: return zero(len);
      case ProxKind::indicator_nonneg: return indicator_nonneg(len);
      case ProxKind::indicator_box: return indicator_box(lo_.segment(begin, len), hi_.segment(begin, len));
      case ProxKind::squared_l2: return squared_l2(weight_, center_.segment(begin, len));
      case ProxKind::separable_pair: {
        const Index end = begin + len;
        if (end <= split_) return first_->restrict(begin, len);
        if (begin >= split_) return second_->restrict(begin - split_, len);
        return separable_pair(first_->restrict(begin, split_ - begin), second_->restrict(0, end - split_),
                              split_ - begin);
      }
    }
    return *this;
  }

  static Vector soft_threshold(const Vector& v, double threshold) {
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
      const double a = std::abs(v[i]) - threshold;
      // |v_i| == threshold lands exactly on 0.
      out[i] = a > 0 ? std::copysign(a, v[i]) : 0.0;
    }
    return out;
  }

 private:
  explicit ProxFunction(ProxKind k) : kind_(k) {}

  void check_dim(Index n, const char* what) const {
    if (dim_) require_dim(n, *dim_, what);
  }

  ProxKind kind_;
  std::optional<Index> dim_;
  double weight_ = 0.0;
  Vector lo_, hi_, center_;
  Index split_ = 0;
  std::shared_ptr<const ProxFunction> first_, second_;
};

/// The subgradient of weight*||.||_1 used for rho: weight*sign(x_i), and 0 on
/// zero coordinates. Other selections from the subdifferential are equally
/// valid; this one is the minimum-norm element.
inline Vector l1_subgradient(const Vector& x, double weight) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) g[i] = x[i] > 0 ? weight : (x[i] < 0 ? -weight : 0.0);
  return g;
}

}  // namespace fbipg

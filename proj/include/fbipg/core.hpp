#pragma once

// Shared vocabulary: dense vector/matrix types, error classes, the seeded
// PRNG used everywhere, compensated summation and number formatting.

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <system_error>

namespace fbipg {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Problem/experiment files that fail to parse or validate. The message always
// names the offending field.
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  NumericError(const std::string& what, long iteration)
      : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
        iteration(iteration) {}
  long iteration;
};

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// SplitMix64 (Steele, Lea & Flood 2014). Every component that needs
/// randomness derives its own stream with split(tag), so adding draws in one
/// component never perturbs another. Normals use Box-Muller on 53-bit
/// uniforms; nothing here depends on the standard library's distribution
/// implementations, so streams are identical across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  SplitMix64 split(std::uint64_t tag) const {
    SplitMix64 child(state_ ^ (tag * 0xD1B54A32D192ED03ULL));
    child.next();
    return SplitMix64(child.next());
  }

  // Uniform on (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Component tags for SplitMix64::split.
namespace stream {
inline constexpr std::uint64_t kMatrix = 1;
inline constexpr std::uint64_t kPlanted = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kLabels = 4;
inline constexpr std::uint64_t kProbes = 5;
inline constexpr std::uint64_t kPower = 6;
}  // namespace stream

/// Neumaier variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_dim(Index got, Index want, const char* what) {
  if (got != want) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                        ", expected " + std::to_string(want) + ")");
  }
}

}  // namespace fbipg

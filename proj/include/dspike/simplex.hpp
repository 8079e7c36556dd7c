#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dspike {

/// Absolute tolerance on the unit-sum constraint used throughout the library.
inline constexpr double kSimplexTolerance = 1e-9;

/// Raised when a sequence is not a point on the probability simplex.
class SimplexError : public std::invalid_argument {
 public:
  SimplexError(const std::string& what, std::ptrdiff_t index)
      : std::invalid_argument(what), index_(index) {}

  /// Offending entry, or -1 when the failure is the sum.
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

/// A point on the probability simplex: entries are nonnegative and sum to one.
class WeightVector {
 public:
  WeightVector() = default;

  /// Validates `values` within `tolerance`; see validate_simplex().
  static WeightVector from_values(std::span<const double> values,
                                  double tolerance = kSimplexTolerance);

  /// Takes ownership of an already-normalized vector without re-checking.
  /// Callers guarantee the invariant (e.g. the output of exp-normalize).
  static WeightVector trusted(Eigen::VectorXd values) {
    WeightVector w;
    w.values_ = std::move(values);
    return w;
  }

  static WeightVector uniform(std::size_t K) {
    if (K == 0) throw std::invalid_argument("uniform weights need K >= 1");
    return trusted(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(K),
                                             1.0 / static_cast<double>(K)));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::vector<double> to_vector() const {
    return {values_.data(), values_.data() + values_.size()};
  }

  friend bool operator==(const WeightVector& a, const WeightVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Eigen::VectorXd values_;
};

/// Checks that `values` lies on the simplex within `tolerance`. Entries in
/// [-tolerance, 0) are clamped to zero and the result is renormalized.
inline WeightVector validate_simplex(std::span<const double> values,
                                     double tolerance = kSimplexTolerance) {
  if (values.empty()) throw SimplexError("empty weight sequence", -1);
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i];
    if (!std::isfinite(x) || x < -tolerance) {
      throw SimplexError("weight " + std::to_string(i) + " is negative or not finite (" +
                             std::to_string(x) + ")",
                         static_cast<std::ptrdiff_t>(i));
    }
    v[static_cast<Eigen::Index>(i)] = x < 0.0 ? 0.0 : x;
    sum += x;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw SimplexError("weights sum to " + std::to_string(sum) + ", not 1", -1);
  }
  return WeightVector::trusted(v / v.sum());
}

inline WeightVector WeightVector::from_values(std::span<const double> values, double tolerance) {
  return validate_simplex(values, tolerance);
}

/// Normalizes log-scale positive variates to the simplex. Stable when every
/// log value is far below the underflow threshold.
inline WeightVector normalize_log(std::span<const double> log_values) {
  if (log_values.empty()) throw std::invalid_argument("normalize_log: empty input");
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : log_values) hi = std::max(hi, v);
  Eigen::VectorXd out(static_cast<Eigen::Index>(log_values.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < log_values.size(); ++i) {
    const double e = std::exp(log_values[i] - hi);
    out[static_cast<Eigen::Index>(i)] = e;
    total += e;
  }
  return WeightVector::trusted(out / total);
}

/// Binary inclusion indicators, one per simplex coordinate.
class InclusionVector {
 public:
  InclusionVector() = default;
  explicit InclusionVector(std::size_t K, bool value = false)
      : bits_(K, value ? 1 : 0), count_(value ? K : 0) {}
  explicit InclusionVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) {
      if (b > 1) throw std::invalid_argument("inclusion bits must be 0 or 1");
      count_ += b;
    }
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  /// Number of active coordinates, |gamma|.
  std::size_t count() const noexcept { return count_; }

  void set(std::size_t i, bool value) {
    const std::uint8_t b = value ? 1 : 0;
    if (bits_[i] != b) {
      count_ = value ? count_ + 1 : count_ - 1;
      bits_[i] = b;
    }
  }

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const InclusionVector& a, const InclusionVector& b) {
    return a.bits_ == b.bits_;
  }

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

/// Sum of absolute coordinate differences.
inline double l1_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: dimension mismatch");
  return (a - b).cwiseAbs().sum();
}

/// l1 error of an estimate against the truth.
inline double l1_error(const WeightVector& estimate, const WeightVector& truth) {
  return l1_distance(estimate.values(), truth.values());
}

/// A member of the structure set: `s` equal weights 1/s on `support`, zero elsewhere.
struct StructuredTruth {
  std::set<std::size_t> support;  // 0-based indices
  std::size_t K = 0;

  std::size_t s() const noexcept { return support.size(); }

  WeightVector weights() const {
    if (support.size() < 2) throw std::invalid_argument("structured truth needs s >= 2");
    if (support.empty() || *support.rbegin() >= K) {
      throw std::invalid_argument("structured truth support index out of range");
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
    for (auto i : support) v[static_cast<Eigen::Index>(i)] = 1.0 / static_cast<double>(support.size());
    return WeightVector::trusted(v);
  }
};

/// True when `w` has exactly `s` entries equal to 1/s (within `tol`) and zeros elsewhere.
inline bool in_structure_set(const WeightVector& w, std::size_t s, double tol = 1e-12) {
  if (s < 2) return false;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    if (std::abs(w[i] - 1.0 / static_cast<double>(s)) > tol) return false;
    ++nonzero;
  }
  return nonzero == s;
}

}  // namespace dspike

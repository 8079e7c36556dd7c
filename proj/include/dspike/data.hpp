#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dspike/simplex.hpp"

namespace dspike {

/// An n x K matrix of individual predictions (one column per forecaster or
/// learner) and the length-n observed response.
class EnsembleData {
 public:
  EnsembleData() = default;

  /// Validates shapes and finiteness. `allow_empty` admits n = 0, used only
  /// by conditional updates that must reduce to the prior.
  EnsembleData(Eigen::MatrixXd X, Eigen::VectorXd y, bool allow_empty = false)
      : X_(std::move(X)), y_(std::move(y)) {
    if (X_.rows() != y_.size()) {
      throw std::invalid_argument("ensemble data: X has " + std::to_string(X_.rows()) +
                                  " rows but y has " + std::to_string(y_.size()));
    }
    if (X_.cols() < 2) throw std::invalid_argument("ensemble data: need K >= 2 columns");
    if (!allow_empty && X_.rows() < 1) throw std::invalid_argument("ensemble data: need n >= 1");
    if (!X_.allFinite() || !y_.allFinite()) {
      throw std::invalid_argument("ensemble data: missing or non-finite entries");
    }
  }

  Eigen::Index n() const noexcept { return X_.rows(); }
  Eigen::Index K() const noexcept { return X_.cols(); }
  const Eigen::MatrixXd& X() const noexcept { return X_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }

  /// Rows [first, first + count).
  EnsembleData rows(Eigen::Index first, Eigen::Index count) const {
    return EnsembleData(X_.middleRows(first, count), y_.segment(first, count), count == 0);
  }

  /// Residual sum of squares of the combination `weights`.
  double rss(const Eigen::VectorXd& weights) const {
    if (weights.size() != K()) throw std::invalid_argument("rss: dimension mismatch");
    return (y_ - X_ * weights).squaredNorm();
  }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
};

/// Gaussian log-likelihood of y = X beta + eps, eps ~ N(0, I / precision).
inline double log_likelihood(const WeightVector& beta, double precision, const EnsembleData& data) {
  if (static_cast<Eigen::Index>(beta.size()) != data.K()) {
    throw std::invalid_argument("log_likelihood: beta has " + std::to_string(beta.size()) +
                                " entries, data has K = " + std::to_string(data.K()));
  }
  if (!(precision > 0.0)) throw std::invalid_argument("log_likelihood: precision must be positive");
  const double n = static_cast<double>(data.n());
  return -0.5 * n * std::log(2.0 * std::numbers::pi / precision) -
         0.5 * precision * data.rss(beta.values());
}

/// Root mean squared error of predictions against targets.
inline double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
  if (predicted.size() != actual.size() || predicted.size() == 0) {
    throw std::invalid_argument("rmse: sizes differ or empty");
  }
  return std::sqrt((predicted - actual).squaredNorm() / static_cast<double>(actual.size()));
}

}  // namespace dspike

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dspike/data.hpp"
#include "dspike/simplex.hpp"

namespace dspike {

struct LassoFit {
  Eigen::VectorXd coefficients;
  double lambda = 0.0;
  std::size_t n_iterations = 0;  // full sweeps performed
  bool converged = false;
  /// Largest absolute coordinate change in the final sweep.
  double last_max_update = 0.0;
  /// Objective value after each sweep.
  std::vector<double> objective_path;
};

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

/// (1/2n) ||y - X b||^2 + lambda ||b||_1
inline double lasso_objective(const EnsembleData& data, const Eigen::VectorXd& b, double lambda) {
  const double n = static_cast<double>(data.n());
  return 0.5 * data.rss(b) / n + lambda * b.cwiseAbs().sum();
}

/// Smallest lambda at which every coefficient is zero: max_j |X_j' y| / n.
inline double lasso_lambda_max(const EnsembleData& data) {
  return (data.X().transpose() * data.y()).cwiseAbs().maxCoeff() / static_cast<double>(data.n());
}

/// Cyclic coordinate descent for the lasso without intercept or column
/// standardization. Stops when no coordinate moved by more than `tolerance`
/// in a sweep; `converged` stays false if `max_sweeps` ran out first.
inline LassoFit lasso_coordinate_descent(const EnsembleData& data, double lambda,
                                         double tolerance = 1e-10, std::size_t max_sweeps = 100000) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lasso: lambda must be nonnegative");
  const Eigen::Index K = data.K();
  const double n = static_cast<double>(data.n());
  const Eigen::MatrixXd& X = data.X();

  Eigen::VectorXd col_sq = X.colwise().squaredNorm().transpose() / n;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd r = data.y();

  LassoFit fit;
  fit.lambda = lambda;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_update = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double old = b[j];
      const double z = X.col(j).dot(r) / n + col_sq[j] * old;
      const double updated = soft_threshold(z, lambda) / col_sq[j];
      if (updated != old) {
        r.noalias() -= (updated - old) * X.col(j);
        b[j] = updated;
        max_update = std::max(max_update, std::abs(updated - old));
      }
    }
    fit.n_iterations = sweep + 1;
    fit.last_max_update = max_update;
    fit.objective_path.push_back(0.5 * r.squaredNorm() / n + lambda * b.cwiseAbs().sum());
    if (max_update < tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.coefficients = std::move(b);
  return fit;
}

/// Equal weights 1/K.
inline WeightVector simple_average(std::size_t K) { return WeightVector::uniform(K); }

struct TwoStepOptions {
  /// Count only strictly positive coefficients as selected.
  bool positives_only = false;
  double tolerance = 1e-10;
  std::size_t max_sweeps = 100000;
};

/// Select-then-equalize: run the lasso, then put weight 1/|S| on the selected
/// set S. An empty selection falls back to the simple average.
inline WeightVector two_step_lasso(const EnsembleData& data, double lambda,
                                   const TwoStepOptions& options = {}) {
  const LassoFit fit = lasso_coordinate_descent(data, lambda, options.tolerance, options.max_sweeps);
  const Eigen::Index K = data.K();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(K);
  Eigen::Index selected = 0;
  for (Eigen::Index j = 0; j < K; ++j) {
    const double c = fit.coefficients[j];
    if (options.positives_only ? c > 0.0 : c != 0.0) {
      w[j] = 1.0;
      ++selected;
    }
  }
  if (selected == 0) return simple_average(static_cast<std::size_t>(K));
  return WeightVector::trusted(w / static_cast<double>(selected));
}

}  // namespace dspike

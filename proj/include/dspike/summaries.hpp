#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dspike/data.hpp"
#include "dspike/sampler.hpp"
#include "dspike/simplex.hpp"

namespace dspike {

namespace detail {

inline std::size_t window_length(const Trace& trace, std::size_t burn_in) {
  if (burn_in >= trace.size()) {
    throw std::invalid_argument("posterior summary: burn-in leaves no samples");
  }
  return trace.size() - burn_in;
}

}  // namespace detail

/// Average of the post-burn-in beta samples, renormalized onto the simplex.
inline WeightVector posterior_mean(const Trace& trace, std::size_t burn_in) {
  const std::size_t m = detail::window_length(trace, burn_in);
  const auto first = static_cast<Eigen::Index>(burn_in);
  Eigen::VectorXd mean =
      trace.betas.middleRows(first, static_cast<Eigen::Index>(m)).colwise().sum().transpose();
  mean /= static_cast<double>(m);
  mean = mean.cwiseMax(0.0);
  return WeightVector::trusted(mean / mean.sum());
}

struct CredibleBall {
  WeightVector center;
  double radius = 0.0;
  double level = 0.0;
};

/// l1 ball around the posterior mean whose radius is the empirical `level`
/// quantile (nearest rank) of ||beta_t - center||_1 over the window.
inline CredibleBall credible_ball(const Trace& trace, std::size_t burn_in, double level) {
  if (!(level > 0.0 && level <= 1.0)) {
    throw std::invalid_argument("credible_ball: level must lie in (0, 1]");
  }
  CredibleBall ball;
  ball.center = posterior_mean(trace, burn_in);
  ball.level = level;
  const std::size_t m = trace.size() - burn_in;
  std::vector<double> dist(m);
  for (std::size_t t = 0; t < m; ++t) {
    dist[t] = (trace.betas.row(static_cast<Eigen::Index>(burn_in + t)).transpose() -
               ball.center.values())
                  .cwiseAbs()
                  .sum();
  }
  auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(m)));
  rank = std::clamp<std::size_t>(rank, 1, m);
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(rank - 1), dist.end());
  ball.radius = dist[rank - 1];
  return ball;
}

/// Fraction of post-burn-in iterations with gamma_i = 1.
inline std::vector<double> inclusion_frequencies(const Trace& trace, std::size_t burn_in) {
  const std::size_t m = detail::window_length(trace, burn_in);
  std::vector<std::size_t> counts(trace.K, 0);
  for (std::size_t t = burn_in; t < trace.size(); ++t)
    for (std::size_t i = 0; i < trace.K; ++i) counts[i] += trace.included(t, i) ? 1 : 0;
  std::vector<double> out(trace.K);
  for (std::size_t i = 0; i < trace.K; ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(m);
  }
  return out;
}

/// Indices whose inclusion frequency is strictly above `threshold`.
inline std::vector<std::size_t> selected_group(const std::vector<double>& inclusion_freq,
                                               double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("selected_group: threshold must lie in [0, 1]");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < inclusion_freq.size(); ++i)
    if (inclusion_freq[i] > threshold) out.push_back(i);
  return out;
}

/// Post-burn-in mean of the noise precision.
inline double precision_mean(const Trace& trace, std::size_t burn_in) {
  const std::size_t m = detail::window_length(trace, burn_in);
  double s = 0.0;
  for (std::size_t t = burn_in; t < trace.size(); ++t) s += trace.precisions[t];
  return s / static_cast<double>(m);
}

struct PosteriorSummary {
  WeightVector mean;
  WeightVector credible_center;
  double credible_radius_l1 = 0.0;
  double level = 0.95;
  std::vector<double> inclusion_freq;
  double sigma_inv2_mean = 0.0;
};

inline PosteriorSummary summarize(const Trace& trace, std::size_t burn_in, double level = 0.95) {
  PosteriorSummary s;
  CredibleBall ball = credible_ball(trace, burn_in, level);
  s.mean = ball.center;
  s.credible_center = ball.center;
  s.credible_radius_l1 = ball.radius;
  s.level = level;
  s.inclusion_freq = inclusion_frequencies(trace, burn_in);
  s.sigma_inv2_mean = precision_mean(trace, burn_in);
  return s;
}

/// Bias and spread of a group of columns, with bias = prediction - response.
struct GroupDiagnostics {
  std::vector<std::size_t> group;
  std::vector<double> per_column_bias;
  /// Sample variance of the bias vector X_j - y.
  std::vector<double> per_column_variance;
  /// Sample variance of the predictions X_j themselves.
  std::vector<double> per_column_prediction_variance;
  double mean_pairwise_bias_correlation = 0.0;

  double mean_bias() const {
    double s = 0.0;
    for (double b : per_column_bias) s += b;
    return s / static_cast<double>(per_column_bias.size());
  }
  double mean_variance() const {
    double s = 0.0;
    for (double v : per_column_variance) s += v;
    return s / static_cast<double>(per_column_variance.size());
  }
};

namespace detail {

inline double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mu = v.mean();
  return (v.array() - mu).square().sum() / static_cast<double>(v.size() - 1);
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double denom = std::sqrt((da * da).sum() * (db * db).sum());
  if (!(denom > 0.0)) {
    throw std::domain_error("group_diagnostics: correlation undefined for a constant bias vector");
  }
  return std::clamp((da * db).sum() / denom, -1.0, 1.0);
}

}  // namespace detail

inline GroupDiagnostics group_diagnostics(const EnsembleData& data,
                                          const std::vector<std::size_t>& group) {
  if (group.size() < 2) {
    throw std::invalid_argument(
        "group_diagnostics: pairwise correlation needs at least two columns");
  }
  if (data.n() < 2) throw std::invalid_argument("group_diagnostics: needs at least two rows");
  GroupDiagnostics d;
  d.group = group;
  std::vector<Eigen::VectorXd> bias;
  bias.reserve(group.size());
  for (std::size_t j : group) {
    if (j >= static_cast<std::size_t>(data.K())) {
      throw std::out_of_range("group_diagnostics: column index out of range");
    }
    const Eigen::VectorXd col = data.X().col(static_cast<Eigen::Index>(j));
    bias.push_back(col - data.y());
    d.per_column_bias.push_back(bias.back().mean());
    d.per_column_variance.push_back(detail::sample_variance(bias.back()));
    d.per_column_prediction_variance.push_back(detail::sample_variance(col));
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < bias.size(); ++a)
    for (std::size_t b = a + 1; b < bias.size(); ++b) {
      total += detail::pearson(bias[a], bias[b]);
      ++pairs;
    }
  d.mean_pairwise_bias_correlation = total / static_cast<double>(pairs);
  return d;
}

}  // namespace dspike

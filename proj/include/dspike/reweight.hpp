#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dspike/csv.hpp"
#include "dspike/data.hpp"
#include "dspike/sampler.hpp"
#include "dspike/summaries.hpp"

namespace dspike {

/// Settings for ensemble reweighting: rho1 = K^1.5, rho2 = 1/K, theta = 0.2.
inline SamplerConfig default_reweight_config(std::size_t K, std::uint64_t seed = 1) {
  SamplerConfig c;
  const double k = static_cast<double>(K);
  c.prior = DoubleSpikePrior{std::pow(k, 1.5), 1.0 / k, 0.2, 0.01, 0.01};
  c.seed = seed;
  return c;
}

struct ReweightResult {
  WeightVector weights;
  Eigen::VectorXd holdout_predictions;
  double holdout_rmse = 0.0;
  double equal_weight_rmse = 0.0;
  std::vector<double> inclusion_freq;
  double threshold = 0.2;
  std::vector<std::size_t> selected;
  /// Columns with the smallest training RMSE, as many as were selected.
  std::vector<std::size_t> best_individual;
  /// Diagnostics on the holdout rows; empty when the group has fewer than
  /// two columns.
  std::optional<GroupDiagnostics> selected_diagnostics;
  std::optional<GroupDiagnostics> best_individual_diagnostics;
  double acceptance_rate = 0.0;
};

/// Fits the double spike posterior on `train`, combines the holdout columns
/// with the posterior mean weights and reports holdout RMSE plus bias
/// diagnostics of the selected group.
inline ReweightResult reweight_ensemble(const EnsembleData& train, const EnsembleData& holdout,
                                        const SamplerConfig& config, double threshold = 0.2) {
  if (train.K() != holdout.K()) {
    throw std::invalid_argument("reweight: train has K = " + std::to_string(train.K()) +
                                ", holdout has K = " + std::to_string(holdout.K()));
  }
  const Trace trace = run_chain(config, train);
  ReweightResult r;
  r.weights = posterior_mean(trace, config.burn_in);
  r.holdout_predictions = holdout.X() * r.weights.values();
  r.holdout_rmse = rmse(r.holdout_predictions, holdout.y());
  r.equal_weight_rmse = rmse(holdout.X().rowwise().mean(), holdout.y());
  r.inclusion_freq = inclusion_frequencies(trace, config.burn_in);
  r.threshold = threshold;
  r.selected = selected_group(r.inclusion_freq, threshold);
  r.acceptance_rate = trace.acceptance_rate(config.burn_in);

  const auto K = static_cast<std::size_t>(train.K());
  std::vector<double> train_rmse(K);
  for (std::size_t j = 0; j < K; ++j) {
    train_rmse[j] = rmse(train.X().col(static_cast<Eigen::Index>(j)), train.y());
  }
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return train_rmse[a] < train_rmse[b]; });
  r.best_individual.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r.selected.size()));
  std::sort(r.best_individual.begin(), r.best_individual.end());

  if (holdout.n() >= 2) {
    if (r.selected.size() >= 2) r.selected_diagnostics = group_diagnostics(holdout, r.selected);
    if (r.best_individual.size() >= 2) {
      r.best_individual_diagnostics = group_diagnostics(holdout, r.best_individual);
    }
  }
  return r;
}

/// column,weight,incl_freq,selected
inline void write_weights(std::ostream& out, const ReweightResult& r,
                          const std::vector<std::string>& names) {
  out << "column,weight,incl_freq,selected\n";
  std::vector<bool> sel(r.weights.size(), false);
  for (std::size_t j : r.selected) sel[j] = true;
  for (std::size_t j = 0; j < r.weights.size(); ++j) {
    out << (j < names.size() ? names[j] : std::to_string(j + 1)) << ',' << format_double(r.weights[j])
        << ',' << format_double(r.inclusion_freq[j]) << ',' << (sel[j] ? 1 : 0) << '\n';
  }
}

/// group,size,mean_bias,mean_bias_variance,mean_prediction_variance,mean_pairwise_bias_correlation
/// plus the holdout RMSE of the weighted and equal-weight combinations.
inline void write_diagnostics(std::ostream& out, const ReweightResult& r) {
  out << "group,size,mean_bias,mean_bias_variance,mean_prediction_variance,"
         "mean_pairwise_bias_correlation,holdout_rmse,equal_weight_rmse\n";
  auto row = [&](const char* name, const std::vector<std::size_t>& group,
                 const std::optional<GroupDiagnostics>& d) {
    out << name << ',' << group.size() << ',';
    if (d) {
      double pv = 0.0;
      for (double v : d->per_column_prediction_variance) pv += v;
      pv /= static_cast<double>(d->per_column_prediction_variance.size());
      out << format_double(d->mean_bias()) << ',' << format_double(d->mean_variance()) << ','
          << format_double(pv) << ',' << format_double(d->mean_pairwise_bias_correlation);
    } else {
      out << ",,,";
    }
    out << ',' << format_double(r.holdout_rmse) << ',' << format_double(r.equal_weight_rmse) << '\n';
  };
  row("selected", r.selected, r.selected_diagnostics);
  row("best_individual", r.best_individual, r.best_individual_diagnostics);
}

}  // namespace dspike

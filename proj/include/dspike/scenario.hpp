#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "dspike/data.hpp"
#include "dspike/random.hpp"
#include "dspike/simplex.hpp"

namespace dspike {

enum class ScenarioId { Scenario1 = 1, Scenario2 = 2 };

/// Simulation design: X iid N(0, design_sd^2), y = X beta* + N(0, noise_sd^2).
/// Scenario1 has beta* = (1/s, ..., 1/s, 0, ..., 0). Scenario2 perturbs the
/// three leading weights to (0.3089, 0.3672, 0.2739) and spreads 0.05 evenly
/// over the remaining K - 3 coordinates.
struct ScenarioSpec {
  ScenarioId id = ScenarioId::Scenario1;
  std::size_t n = 80;
  std::size_t K = 40;
  std::size_t s = 3;
  double noise_sd = 1.5;
  double design_sd = 3.0;
  std::uint64_t seed = 1;

  static ScenarioSpec defaults(ScenarioId id) {
    ScenarioSpec spec;
    spec.id = id;
    return spec;
  }

  void validate() const {
    if (n < 1 || K < 2) throw std::invalid_argument("scenario needs n >= 1 and K >= 2");
    if (s < 2 || s > K) throw std::invalid_argument("scenario needs 2 <= s <= K");
    if (id == ScenarioId::Scenario2 && (s != 3 || K < 4)) {
      throw std::invalid_argument("scenario 2 is defined for s = 3 and K >= 4");
    }
    if (!(noise_sd > 0.0) || !(design_sd > 0.0)) {
      throw std::invalid_argument("scenario standard deviations must be positive");
    }
  }
};

inline WeightVector scenario_truth(const ScenarioSpec& spec) {
  spec.validate();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.K));
  if (spec.id == ScenarioId::Scenario1) {
    b.head(static_cast<Eigen::Index>(spec.s)).setConstant(1.0 / static_cast<double>(spec.s));
  } else {
    b[0] = 0.3089;
    b[1] = 0.3672;
    b[2] = 0.2739;
    b.tail(static_cast<Eigen::Index>(spec.K - 3)).setConstant(0.05 / static_cast<double>(spec.K - 3));
  }
  return validate_simplex({b.data(), static_cast<std::size_t>(b.size())});
}

struct Scenario {
  EnsembleData data;
  WeightVector truth;
};

inline Scenario generate_scenario(const ScenarioSpec& spec, Rng& rng) {
  WeightVector truth = scenario_truth(spec);
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto K = static_cast<Eigen::Index>(spec.K);
  Eigen::MatrixXd X(n, K);
  for (Eigen::Index j = 0; j < K; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = spec.design_sd * standard_normal(rng);
  Eigen::VectorXd y = X * truth.values();
  for (Eigen::Index i = 0; i < n; ++i) y[i] += spec.noise_sd * standard_normal(rng);
  return Scenario{EnsembleData(std::move(X), std::move(y)), std::move(truth)};
}

inline Scenario generate_scenario(const ScenarioSpec& spec) {
  Rng rng = make_rng(spec.seed);
  return generate_scenario(spec, rng);
}

}  // namespace dspike

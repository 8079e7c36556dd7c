#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dspike/random.hpp"
#include "dspike/simplex.hpp"

namespace dspike {

/// Hyperparameters of the double spike Dirichlet prior and of the Gamma
/// prior on the noise precision.
///
/// beta | gamma ~ Dir(rho1 * gamma + rho2 * (1 - gamma)), gamma_i ~ Bernoulli(theta),
/// precision ~ Gamma(a1, a2) (shape, rate).
struct DoubleSpikePrior {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double theta = 0.0;
  double a1 = 0.01;
  double a2 = 0.01;

  /// Defaults from the contraction theory: rho1 = K^alpha1, rho2 = K^-alpha2.
  static DoubleSpikePrior from_exponents(std::size_t K, double alpha1, double alpha2, double theta,
                                         double a1 = 0.01, double a2 = 0.01) {
    const double k = static_cast<double>(K);
    DoubleSpikePrior p{std::pow(k, alpha1), std::pow(k, -alpha2), theta, a1, a2};
    p.validate();
    return p;
  }

  void validate() const {
    if (!(rho2 > 0.0) || !(rho1 > rho2)) {
      throw std::invalid_argument("double spike prior needs rho1 > rho2 > 0 (got rho1 = " +
                                  std::to_string(rho1) + ", rho2 = " + std::to_string(rho2) + ")");
    }
    if (!(theta > 0.0 && theta < 1.0)) {
      throw std::invalid_argument("double spike prior needs theta in (0, 1)");
    }
    if (!(a1 > 0.0) || !(a2 > 0.0)) {
      throw std::invalid_argument("noise prior needs a1 > 0 and a2 > 0");
    }
  }

  double concentration(bool active) const noexcept { return active ? rho1 : rho2; }

  std::vector<double> concentrations(const InclusionVector& gamma) const {
    std::vector<double> c(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) c[i] = concentration(gamma[i]);
    return c;
  }
};

/// Grid of (alpha1, alpha2) exponents for rho1 = K^alpha1 and rho2 = K^-alpha2.
struct HyperGridSpec {
  std::vector<double> alpha1_grid;
  std::vector<double> alpha2_grid;
  double theta = 0.0;  // <= 0 means "use 1/K per run"

  void validate() const {
    if (alpha1_grid.empty() || alpha2_grid.empty()) {
      throw std::invalid_argument("hyperparameter grid must not be empty");
    }
    for (double a : alpha1_grid)
      if (!(a > 0.0)) throw std::invalid_argument("alpha1 grid values must be positive");
    for (double a : alpha2_grid)
      if (!(a > 0.0)) throw std::invalid_argument("alpha2 grid values must be positive");
  }
};

/// `count` equally spaced points on [lo, hi].
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

/// One draw of (gamma, log A, beta) from the prior.
struct PriorDraw {
  InclusionVector gamma;
  std::vector<double> log_a;  // log of the latent Gamma variates
  WeightVector beta;
};

/// Draws log A_i ~ log Gamma(c_i, 1) for the given inclusion pattern and
/// returns beta = A / ||A||_1.
inline PriorDraw sample_given_inclusion(const DoubleSpikePrior& prior, InclusionVector gamma,
                                        Rng& rng) {
  PriorDraw d;
  d.log_a.resize(gamma.size());
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    d.log_a[i] = log_gamma_variate(rng, prior.concentration(gamma[i]));
  }
  d.beta = normalize_log(d.log_a);
  d.gamma = std::move(gamma);
  return d;
}

/// Draws from the hierarchical prior through its Gamma representation.
/// theta is only required to lie in [0, 1] here, so that degenerate
/// inclusion patterns can be produced on purpose.
inline PriorDraw sample_double_spike_prior(const DoubleSpikePrior& prior, std::size_t K, Rng& rng) {
  if (K < 2) throw std::invalid_argument("sample_double_spike_prior: K must be >= 2");
  if (!(prior.theta >= 0.0 && prior.theta <= 1.0)) {
    throw std::invalid_argument("sample_double_spike_prior: theta outside [0, 1]");
  }
  if (!(prior.rho1 > 0.0 && prior.rho2 > 0.0)) {
    throw std::invalid_argument("sample_double_spike_prior: concentrations must be positive");
  }
  InclusionVector gamma(K);
  for (std::size_t i = 0; i < K; ++i) gamma.set(i, bernoulli(rng, prior.theta));
  return sample_given_inclusion(prior, std::move(gamma), rng);
}

/// Smallest value substituted for a positive entry before taking logs.
inline constexpr double kDensityFloor = 1e-300;

/// log Dirichlet density with concentration `conc` at `beta`. An exact zero
/// entry yields +inf (concentration < 1) or -inf (concentration > 1).
inline double log_dirichlet_density(const Eigen::VectorXd& beta, std::span<const double> conc) {
  if (static_cast<std::size_t>(beta.size()) != conc.size()) {
    throw std::invalid_argument("log_dirichlet_density: dimension mismatch");
  }
  double total = 0.0;
  double out = 0.0;
  for (std::size_t i = 0; i < conc.size(); ++i) {
    const double c = conc[i];
    const double b = beta[static_cast<Eigen::Index>(i)];
    total += c;
    out -= std::lgamma(c);
    if (c == 1.0) continue;
    if (b <= 0.0) {
      return c < 1.0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
    }
    out += (c - 1.0) * std::log(std::max(b, kDensityFloor));
  }
  return out + std::lgamma(total);
}

/// log Dir(beta; rho1 * gamma + rho2 * (1 - gamma)).
inline double log_conditional_prior_density(const WeightVector& beta, const InclusionVector& gamma,
                                            double rho1, double rho2) {
  if (beta.size() != gamma.size()) {
    throw std::invalid_argument("log_conditional_prior_density: beta and gamma lengths differ");
  }
  std::vector<double> c(gamma.size());
  for (std::size_t i = 0; i < gamma.size(); ++i) c[i] = gamma[i] ? rho1 : rho2;
  return log_dirichlet_density(beta.values(), c);
}

/// Largest K accepted by log_marginal_prior_density (2^K mixture terms).
inline constexpr std::size_t kMarginalMaxK = 20;

/// log g(beta; theta, rho1, rho2): the prior with gamma summed out, by
/// enumeration of all 2^K inclusion patterns and log-sum-exp.
inline double log_marginal_prior_density(const Eigen::VectorXd& beta, const DoubleSpikePrior& prior) {
  const std::size_t K = static_cast<std::size_t>(beta.size());
  if (K == 0 || K > kMarginalMaxK) {
    throw std::invalid_argument("log_marginal_prior_density: K must be in [1, 20]");
  }
  const double theta = prior.theta;
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("log_marginal_prior_density: theta outside [0, 1]");
  }
  std::vector<double> log_b(K);
  std::vector<bool> zero(K);
  for (std::size_t i = 0; i < K; ++i) {
    zero[i] = beta[static_cast<Eigen::Index>(i)] <= 0.0;
    log_b[i] = std::log(std::max(beta[static_cast<Eigen::Index>(i)], kDensityFloor));
  }
  const double lg1 = std::lgamma(prior.rho1);
  const double lg2 = std::lgamma(prior.rho2);
  const double log_t = std::log(theta);
  const double log_1mt = std::log1p(-theta);

  std::vector<double> terms;
  terms.reserve(std::size_t{1} << K);
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << K); ++mask) {
    const auto m = static_cast<std::size_t>(std::popcount(mask));
    if ((m > 0 && theta == 0.0) || (m < K && theta == 1.0)) continue;
    double t = std::lgamma(prior.rho1 * m + prior.rho2 * (K - m)) - lg1 * m - lg2 * (K - m);
    bool diverges = false;
    for (std::size_t i = 0; i < K; ++i) {
      const double c = (mask >> i) & 1u ? prior.rho1 : prior.rho2;
      if (c == 1.0) continue;
      if (zero[i]) {
        if (c < 1.0) diverges = true;
        else t = -std::numeric_limits<double>::infinity();
      }
      t += (c - 1.0) * log_b[i];
    }
    if (diverges) return std::numeric_limits<double>::infinity();
    if (m > 0) t += m * log_t;
    if (m < K) t += (K - m) * log_1mt;
    terms.push_back(t);
  }
  double hi = -std::numeric_limits<double>::infinity();
  for (double t : terms) hi = std::max(hi, t);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - hi);
  return hi + std::log(s);
}

inline double log_marginal_prior_density(const WeightVector& beta, const DoubleSpikePrior& prior) {
  return log_marginal_prior_density(beta.values(), prior);
}

}  // namespace dspike

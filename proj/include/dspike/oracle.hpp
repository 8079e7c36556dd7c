#pragma once

// Brute-force reference computations used to check the samplers. Nothing
// here depends on sampler.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "dspike/data.hpp"
#include "dspike/prior.hpp"
#include "dspike/random.hpp"
#include "dspike/simplex.hpp"

namespace dspike {

struct SymmetricPrior {
  double rho = 1.0;
};

struct QuadratureSpec {
  std::size_t K = 3;
  std::size_t grid_points_per_dim = 200;
  std::variant<DoubleSpikePrior, SymmetricPrior> prior = SymmetricPrior{};

  static constexpr std::size_t kMaxK = 4;
  static constexpr double kMaxCells = 1e7;

  /// Number of cells in the tiling: grid_points_per_dim^(K-1).
  double cells() const {
    return std::pow(static_cast<double>(grid_points_per_dim), static_cast<double>(K) - 1.0);
  }

  void validate() const {
    if (K < 2 || K > kMaxK) throw std::invalid_argument("quadrature: K must lie in [2, 4]");
    if (grid_points_per_dim < 1) throw std::invalid_argument("quadrature: empty grid");
    if (cells() > kMaxCells) throw std::invalid_argument("quadrature: grid too large");
  }
};

namespace detail {

/// Calls f(beta) at the centroid of every cell of the Freudenthal tiling of
/// the simplex into m^(K-1) congruent pieces. In cumulative coordinates
/// z_k = beta_1 + ... + beta_k the simplex is {0 <= z_1 <= ... <= z_{K-1} <= 1};
/// each cube of side 1/m splits into (K-1)! simplices by the ordering of the
/// fractional parts, and the centroid's fractional parts are the distinct
/// values 1/K, ..., (K-1)/K. A cube piece lies in the simplex iff its
/// centroid is strictly increasing.
template <class F>
void for_each_simplex_cell(std::size_t K, std::size_t m, F&& f) {
  const std::size_t d = K - 1;
  const double h = 1.0 / static_cast<double>(m);
  std::vector<double> frac(d);
  for (std::size_t k = 0; k < d; ++k) frac[k] = static_cast<double>(k + 1) / static_cast<double>(K);
  std::vector<std::size_t> perm(d);
  std::vector<std::size_t> c(d, 0);
  std::vector<double> z(d);
  Eigen::VectorXd beta(static_cast<Eigen::Index>(K));

  while (true) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      bool inside = true;
      for (std::size_t k = 0; k < d; ++k) {
        z[k] = h * (static_cast<double>(c[k]) + frac[perm[k]]);
        if (k > 0 && !(z[k] > z[k - 1])) {
          inside = false;
          break;
        }
      }
      if (inside) {
        double prev = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          beta[static_cast<Eigen::Index>(k)] = z[k] - prev;
          prev = z[k];
        }
        beta[static_cast<Eigen::Index>(d)] = 1.0 - prev;
        f(beta);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));

    // next weakly increasing cube index
    std::size_t k = d;
    while (k > 0 && c[k - 1] + 1 >= m) --k;
    if (k == 0) break;
    const std::size_t v = c[k - 1] + 1;
    for (std::size_t j = k - 1; j < d; ++j) c[j] = v;
  }
}

}  // namespace detail

/// log prior density used by the quadrature.
inline double quadrature_log_prior(const Eigen::VectorXd& beta, const QuadratureSpec& spec) {
  if (const auto* sym = std::get_if<SymmetricPrior>(&spec.prior)) {
    std::vector<double> conc(static_cast<std::size_t>(beta.size()), sym->rho);
    return log_dirichlet_density(beta, conc);
  }
  return log_marginal_prior_density(beta, std::get<DoubleSpikePrior>(spec.prior));
}

/// Posterior mean of beta under a known noise precision, by an equal-weight
/// sum over cell centroids of exp(log prior + log likelihood).
inline WeightVector exact_posterior_tiny(const EnsembleData& data, const QuadratureSpec& spec,
                                         double sigma_inv2) {
  spec.validate();
  if (static_cast<std::size_t>(data.K()) != spec.K) {
    throw std::invalid_argument("quadrature: data and spec disagree on K");
  }
  if (!(sigma_inv2 > 0.0)) throw std::invalid_argument("quadrature: precision must be positive");

  const Eigen::MatrixXd& X = data.X();
  const Eigen::VectorXd& y = data.y();

  double log_scale = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.K));
  Eigen::VectorXd resid(y.size());
  detail::for_each_simplex_cell(spec.K, spec.grid_points_per_dim, [&](const Eigen::VectorXd& beta) {
    resid.noalias() = y - X * beta;
    const double lw = quadrature_log_prior(beta, spec) - 0.5 * sigma_inv2 * resid.squaredNorm();
    if (!std::isfinite(lw)) {
      if (lw == -std::numeric_limits<double>::infinity()) return;
      throw std::domain_error("quadrature: non-finite integrand");
    }
    if (lw > log_scale) {
      const double r = std::exp(log_scale - lw);
      total *= r;
      acc *= r;
      log_scale = lw;
    }
    const double w = std::exp(lw - log_scale);
    total += w;
    acc += w * beta;
  });
  if (!(total > 0.0)) throw std::domain_error("quadrature: integrand vanished everywhere");
  return WeightVector::trusted(acc / total);
}

/// Integral of exp(log_density) over the simplex by the same tiling.
template <class LogDensity>
double simplex_integral(std::size_t K, std::size_t m, LogDensity&& log_density) {
  const double cell_volume = std::exp(-std::lgamma(static_cast<double>(K)) -
                                      (static_cast<double>(K) - 1.0) * std::log(static_cast<double>(m)));
  double total = 0.0;
  detail::for_each_simplex_cell(K, m, [&](const Eigen::VectorXd& beta) {
    total += std::exp(log_density(beta));
  });
  return total * cell_volume;
}

struct DirichletMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

inline DirichletMoments dirichlet_moment_oracle(const std::vector<double>& concentration) {
  if (concentration.empty()) throw std::invalid_argument("dirichlet moments: empty concentration");
  double a0 = 0.0;
  for (double c : concentration) {
    if (!(c > 0.0)) throw std::invalid_argument("dirichlet moments: concentrations must be positive");
    a0 += c;
  }
  const auto K = static_cast<Eigen::Index>(concentration.size());
  DirichletMoments m{Eigen::VectorXd(K), Eigen::VectorXd(K)};
  for (Eigen::Index i = 0; i < K; ++i) {
    const double c = concentration[static_cast<std::size_t>(i)];
    m.mean[i] = c / a0;
    m.variance[i] = c * (a0 - c) / (a0 * a0 * (a0 + 1.0));
  }
  return m;
}

/// Mean and variance of beta under the double spike prior, by enumerating
/// all inclusion patterns and mixing the Dirichlet moments.
inline DirichletMoments double_spike_prior_moments(const DoubleSpikePrior& prior, std::size_t K) {
  if (K < 2 || K > kMarginalMaxK) throw std::invalid_argument("prior moments: K must lie in [2, 20]");
  const auto k = static_cast<Eigen::Index>(K);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(k);
  std::vector<double> conc(K);
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << K); ++mask) {
    double p = 1.0;
    for (std::size_t i = 0; i < K; ++i) {
      const bool on = (mask >> i) & 1u;
      conc[i] = on ? prior.rho1 : prior.rho2;
      p *= on ? prior.theta : 1.0 - prior.theta;
    }
    if (p == 0.0) continue;
    const DirichletMoments m = dirichlet_moment_oracle(conc);
    mean += p * m.mean;
    second += p * (m.variance + m.mean.cwiseProduct(m.mean));
  }
  return {mean, second - mean.cwiseProduct(mean)};
}

/// Dirichlet draw by stick breaking with Beta inverse-CDF steps; shares no
/// code with the Gamma-representation sampler.
inline Eigen::VectorXd sample_dirichlet_stick_breaking(const std::vector<double>& conc, Rng& rng) {
  const std::size_t K = conc.size();
  double rest = std::accumulate(conc.begin(), conc.end(), 0.0);
  Eigen::VectorXd out(static_cast<Eigen::Index>(K));
  double remaining = 1.0;
  for (std::size_t i = 0; i + 1 < K; ++i) {
    rest -= conc[i];
    const double u = std::generate_canonical<double, 53>(rng);
    const double v = boost::math::ibeta_inv(conc[i], rest, u);
    out[static_cast<Eigen::Index>(i)] = remaining * v;
    remaining *= 1.0 - v;
  }
  out[static_cast<Eigen::Index>(K - 1)] = remaining;
  return out;
}

struct OrderStatisticResult {
  double estimate = 0.0;
  double bound = 0.0;
  double mc_se = 0.0;
  bool pass = false;
};

namespace detail {

/// Largest and second largest of a log-scale Dir(alpha, ..., alpha) draw,
/// plus the log normalizer.
struct TopTwo {
  double first = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  double log_total = 0.0;
};

inline TopTwo symmetric_dirichlet_top_two(double alpha, std::size_t K, Rng& rng,
                                          std::vector<double>& scratch) {
  scratch.resize(K);
  TopTwo r;
  for (std::size_t i = 0; i < K; ++i) {
    const double l = log_gamma_variate(rng, alpha);
    scratch[i] = l;
    if (l > r.first) {
      r.second = r.first;
      r.first = l;
    } else if (l > r.second) {
      r.second = l;
    }
  }
  double s = 0.0;
  for (double l : scratch) s += std::exp(l - r.first);
  r.log_total = r.first + std::log(s);
  return r;
}

inline OrderStatisticResult frequency_result(std::size_t hits, std::size_t n, double bound) {
  OrderStatisticResult r;
  r.estimate = static_cast<double>(hits) / static_cast<double>(n);
  r.bound = bound;
  r.mc_se = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(n));
  r.pass = r.estimate >= bound - 3.0 * r.mc_se;
  return r;
}

}  // namespace detail

/// Monte Carlo check of pr(pi_(K-1) <= t pi_(K)) >= t^(alpha (K-1)) under a
/// symmetric Dir(alpha) draw pi.
inline OrderStatisticResult order_statistic_check(double alpha, std::size_t K, double t,
                                             std::size_t n_samples, Rng& rng) {
  if (!(alpha > 0.0) || K < 2 || !(t > 0.0 && t <= 1.0) || n_samples == 0) {
    throw std::invalid_argument("order_statistic_check: invalid arguments");
  }
  const double log_t = std::log(t);
  std::vector<double> scratch;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto top = detail::symmetric_dirichlet_top_two(alpha, K, rng, scratch);
    hits += (top.second - top.first <= log_t) ? 1 : 0;
  }
  return detail::frequency_result(hits, n_samples,
                                  std::pow(t, alpha * (static_cast<double>(K) - 1.0)));
}

/// Monte Carlo check of pr(pi_(K-1) <= alpha) >= alpha^(alpha (K-1)).
inline OrderStatisticResult expected_max_prob_check(double alpha, std::size_t K, std::size_t n_samples,
                                                  Rng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0) || K < 2 || n_samples == 0) {
    throw std::invalid_argument("expected_max_prob_check: invalid arguments");
  }
  const double log_alpha = std::log(alpha);
  std::vector<double> scratch;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto top = detail::symmetric_dirichlet_top_two(alpha, K, rng, scratch);
    hits += (top.second - top.log_total <= log_alpha) ? 1 : 0;
  }
  return detail::frequency_result(hits, n_samples,
                                  std::pow(alpha, alpha * (static_cast<double>(K) - 1.0)));
}

/// pr(min(p, 1-p) <= t max(p, 1-p)) for p ~ Beta(alpha, alpha), by
/// integrating the Beta density over [0, t / (1 + t)] and doubling.
inline double beta_ratio_probability(double alpha, double t) {
  if (!(alpha > 0.0) || !(t > 0.0 && t <= 1.0)) {
    throw std::invalid_argument("beta_ratio_probability: invalid arguments");
  }
  const double upper = t / (1.0 + t);
  const double log_norm = 2.0 * std::lgamma(alpha) - std::lgamma(2.0 * alpha);
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto density = [&](double x) {
    if (!(x > 0.0)) return 0.0;
    return std::exp((alpha - 1.0) * (std::log(x) + std::log1p(-x)) - log_norm);
  };
  const double p = integrator.integrate(density, 0.0, upper);
  return std::min(1.0, 2.0 * p);
}

/// Asymptotic Kolmogorov distribution tail pr(K > x).
inline double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.27) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
template <class Cdf>
KsResult ks_one_sample(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)};
}

/// Two-sample Kolmogorov-Smirnov test.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks test: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d)};
}

/// CDF of Gamma(shape, rate).
inline double gamma_cdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, rate * x);
}

}  // namespace dspike

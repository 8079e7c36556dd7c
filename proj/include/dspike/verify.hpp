#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "dspike/oracle.hpp"
#include "dspike/prior.hpp"
#include "dspike/sampler.hpp"
#include "dspike/summaries.hpp"

namespace dspike {

/// Small K = 3 regression with known noise precision 1, used to compare the
/// samplers against quadrature.
struct TinyFixture {
  EnsembleData data;
  DoubleSpikePrior prior{4.0, 0.8, 0.4, 0.01, 0.01};
  double symmetric_rho = 0.8;
  double precision = 1.0;
};

inline TinyFixture tiny_fixture(std::uint64_t seed = 20240607) {
  Rng rng = make_rng(seed);
  Eigen::MatrixXd X(20, 3);
  for (Eigen::Index i = 0; i < 20; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = standard_normal(rng);
  const Eigen::Vector3d truth(0.6, 0.4, 0.0);
  Eigen::VectorXd y = X * truth;
  for (Eigen::Index i = 0; i < 20; ++i) y[i] += standard_normal(rng);
  return TinyFixture{EnsembleData(std::move(X), std::move(y))};
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// pr(second largest <= t * largest) >= t^(alpha (K-1)) for every cell of {0.05, 0.1, 0.5, 1} x {3, 5, 10, 40} x {0.3, 0.5, 0.7}.
inline CheckResult check_order_statistic_grid(std::size_t n_samples = 100000, std::uint64_t seed = 11) {
  CheckResult r{"order statistic bound grid", false, {}};
  std::size_t failures = 0;
  std::size_t cell = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (double alpha : {0.05, 0.1, 0.5, 1.0})
    for (std::size_t K : {3, 5, 10, 40})
      for (double t : {0.3, 0.5, 0.7}) {
        Rng rng = make_rng(seed, {cell++});
        const auto res = order_statistic_check(alpha, K, t, n_samples, rng);
        if (!res.pass) ++failures;
        if (res.mc_se > 0.0) worst = std::min(worst, (res.estimate - res.bound) / res.mc_se);
      }
  r.pass = failures == 0;
  r.detail = std::to_string(cell - failures) + "/" + std::to_string(cell) +
             " cells pass; smallest (estimate - bound)/se = " + std::to_string(worst);
  return r;
}

inline CheckResult check_second_largest_bound(std::size_t n_samples = 100000, std::uint64_t seed = 12) {
  CheckResult r{"second largest probability bound", false, {}};
  Rng a = make_rng(seed, {0});
  Rng b = make_rng(seed, {1});
  const auto r1 = expected_max_prob_check(0.01, 10, n_samples, a);
  const auto r2 = expected_max_prob_check(0.05, 40, n_samples, b);
  r.pass = r1.pass && r2.pass;
  r.detail = "alpha=0.01,K=10: " + std::to_string(r1.estimate) + " vs " + std::to_string(r1.bound) +
             "; alpha=0.05,K=40: " + std::to_string(r2.estimate) + " vs " + std::to_string(r2.bound);
  return r;
}

/// Double spike prior sample means against the enumerated mixture mean,
/// every coordinate within 3 Monte Carlo standard errors.
inline CheckResult check_prior_moments(const DoubleSpikePrior& prior, std::size_t K,
                                       std::size_t n_samples = 100000, std::uint64_t seed = 13) {
  CheckResult r{"double spike prior mean", false, {}};
  const DirichletMoments exact = double_spike_prior_moments(prior, K);
  Rng rng = make_rng(seed);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  for (std::size_t s = 0; s < n_samples; ++s) sum += sample_double_spike_prior(prior, K, rng).beta.values();
  const Eigen::VectorXd mean = sum / static_cast<double>(n_samples);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double se = std::sqrt(exact.variance[i] / static_cast<double>(n_samples));
    worst = std::max(worst, std::abs(mean[i] - exact.mean[i]) / se);
  }
  r.pass = worst <= 3.0;
  r.detail = "K=" + std::to_string(K) + ", largest |mean - exact|/se = " + std::to_string(worst);
  return r;
}

inline CheckResult check_prior_moments_default(std::size_t n_samples = 100000) {
  return check_prior_moments(DoubleSpikePrior{10.0, 0.05, 0.3, 0.01, 0.01}, 8, n_samples);
}

/// Double spike chain (exact balance) and symmetric chain against quadrature
/// on the tiny fixture; both within `tol` per coordinate.
inline CheckResult check_tiny_posterior(std::size_t niter = 200000, double tol = 0.02,
                                        std::size_t grid = 500) {
  CheckResult r{"tiny posterior agreement", false, {}};
  const TinyFixture f = tiny_fixture();

  const WeightVector ds_exact =
      exact_posterior_tiny(f.data, QuadratureSpec{3, grid, f.prior}, f.precision);
  SamplerConfig c;
  c.prior = f.prior;
  c.niter = niter;
  c.burn_in = niter / 10;
  c.balance = BalanceMode::ExactBalance;
  c.fixed_precision = f.precision;
  c.seed = 21;
  const double ds_err = max_abs_diff(posterior_mean(run_chain(c, f.data), c.burn_in).values(), ds_exact.values());

  const WeightVector sym_exact =
      exact_posterior_tiny(f.data, QuadratureSpec{3, grid, SymmetricPrior{f.symmetric_rho}}, f.precision);
  SymmetricConfig s;
  s.rho = f.symmetric_rho;
  s.niter = niter;
  s.burn_in = niter / 10;
  s.fixed_precision = f.precision;
  s.seed = 22;
  const double sym_err = max_abs_diff(
      posterior_mean(run_symmetric_dirichlet_chain(s, f.data), s.burn_in).values(), sym_exact.values());

  r.pass = ds_err <= tol && sym_err <= tol;
  r.detail = "double spike max error " + std::to_string(ds_err) + ", symmetric max error " +
             std::to_string(sym_err) + " (tolerance " + std::to_string(tol) + ")";
  return r;
}

/// Runs every oracle check, printing one line each. True iff all pass.
inline bool run_verification_suite(std::ostream& out) {
  std::vector<CheckResult> results;
  results.push_back(check_order_statistic_grid());
  results.push_back(check_second_largest_bound());
  results.push_back(check_prior_moments_default());
  results.push_back(check_tiny_posterior());
  bool ok = true;
  for (const auto& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.pass;
  }
  return ok;
}

}  // namespace dspike

#include <cmath>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "dspike/oracle.hpp"
#include "dspike/verify.hpp"

using namespace dspike;

TEST(Quadrature, CountsCellsAndIntegratesVolume) {
  for (std::size_t K : {2, 3, 4}) {
    std::size_t cells = 0;
    detail::for_each_simplex_cell(K, 7, [&](const Eigen::VectorXd& b) {
      ++cells;
      EXPECT_NEAR(b.sum(), 1.0, 1e-12);
      EXPECT_GT(b.minCoeff(), 0.0);
    });
    EXPECT_EQ(cells, static_cast<std::size_t>(std::pow(7.0, double(K) - 1.0)));
    // uniform density on the simplex is (K-1)!
    const double v = simplex_integral(K, 7, [&](const Eigen::VectorXd&) { return std::lgamma(double(K)); });
    EXPECT_NEAR(v, 1.0, 1e-12);
  }
  EXPECT_THROW((QuadratureSpec{5, 10, SymmetricPrior{}}.validate()), std::invalid_argument);
  EXPECT_THROW((QuadratureSpec{4, 1000, SymmetricPrior{}}.validate()), std::invalid_argument);
}

TEST(Quadrature, AsymmetricDirichletMean) {
  const std::vector<double> conc{2.0, 3.0, 4.0};
  const double m1 = simplex_integral(3, 400, [&](const Eigen::VectorXd& b) {
    return std::log(b[0]) + log_dirichlet_density(b, conc);
  });
  EXPECT_NEAR(m1, 2.0 / 9.0, 1e-5);
}

TEST(Quadrature, FlatLikelihoodGivesPriorMean) {
  const EnsembleData d(Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Zero(4));
  const WeightVector sym = exact_posterior_tiny(d, QuadratureSpec{3, 300, SymmetricPrior{0.7}}, 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(sym[i], 1.0 / 3, 1e-12);
}

TEST(Quadrature, DominantLikelihoodConcentrates) {
  Eigen::MatrixXd X(3, 2);
  X << 1, 0, 0, 1, 2, -1;
  const Eigen::VectorXd y = X.col(0);
  const EnsembleData d(X, y);
  const WeightVector w = exact_posterior_tiny(d, QuadratureSpec{2, 20000, SymmetricPrior{1.0}}, 1e5);
  EXPECT_GT(w[0], 0.995);
}

TEST(Quadrature, StableUnderRefinement) {
  const TinyFixture f = tiny_fixture();
  const WeightVector a = exact_posterior_tiny(f.data, QuadratureSpec{3, 500, f.prior}, f.precision);
  const WeightVector b = exact_posterior_tiny(f.data, QuadratureSpec{3, 1000, f.prior}, f.precision);
  EXPECT_LT(max_abs_diff(a.values(), b.values()), 1e-3);
}

TEST(DirichletMoments, UniformOnSegment) {
  const DirichletMoments m = dirichlet_moment_oracle({1.0, 1.0});
  EXPECT_DOUBLE_EQ(m.mean[0], 0.5);
  EXPECT_DOUBLE_EQ(m.variance[0], 1.0 / 12);
  EXPECT_THROW(dirichlet_moment_oracle({1.0, 0.0}), std::invalid_argument);
}

TEST(DirichletMoments, AgreeWithStickBreakingDraws) {
  Rng pick = make_rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t K = 2 + uniform_index(pick, 5);
    std::vector<double> conc(K);
    for (auto& c : conc) c = 0.2 + 3.0 * std::generate_canonical<double, 53>(pick);
    const DirichletMoments m = dirichlet_moment_oracle(conc);
    Rng rng = make_rng(100 + static_cast<std::uint64_t>(rep));
    const int N = 20000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
    for (int s = 0; s < N; ++s) sum += sample_dirichlet_stick_breaking(conc, rng);
    for (std::size_t i = 0; i < K; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      EXPECT_NEAR(sum[k] / N, m.mean[k], 4.0 * std::sqrt(m.variance[k] / N));
    }
  }
}

TEST(DirichletMoments, DoubleSpikeMixtureLimits) {
  // theta = 1: plain Dir(rho1)
  const DirichletMoments all = double_spike_prior_moments(DoubleSpikePrior{2.0, 0.5, 1.0}, 4);
  const DirichletMoments ref = dirichlet_moment_oracle({2.0, 2.0, 2.0, 2.0});
  EXPECT_LT((all.variance - ref.variance).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(all.mean.sum(), 1.0, 1e-14);
}

TEST(PriorMomentsCheck, Passes) {
  EXPECT_TRUE(check_prior_moments(DoubleSpikePrior{10.0, 0.05, 0.3}, 6, 40000, 3).pass);
}

TEST(OrderStatistic, EqualityAtTOne) {
  Rng rng = make_rng(2);
  const auto r = order_statistic_check(0.5, 5, 1.0, 1000, rng);
  EXPECT_EQ(r.estimate, 1.0);
  EXPECT_EQ(r.bound, 1.0);
  EXPECT_TRUE(r.pass);
}

TEST(OrderStatistic, TwoComponentsMatchBetaProbability) {
  for (double alpha : {0.1, 0.5, 1.0, 3.0})
    for (double t : {0.2, 0.5, 0.9}) {
      const double p = beta_ratio_probability(alpha, t);
      EXPECT_NEAR(p, 2.0 * boost::math::ibeta(alpha, alpha, t / (1 + t)), 1e-10);
      Rng rng = make_rng(3);
      const auto r = order_statistic_check(alpha, 2, t, 100000, rng);
      EXPECT_NEAR(r.estimate, p, 4.0 * std::sqrt(p * (1 - p) / 100000)) << alpha << ' ' << t;
      EXPECT_GE(p, r.bound - 1e-12);
    }
  EXPECT_NEAR(beta_ratio_probability(1.0, 0.5), 2.0 / 3, 1e-12);
}

TEST(OrderStatistic, BoundHoldsForSmallAlpha) {
  Rng rng = make_rng(4);
  const auto r = order_statistic_check(0.1, 5, 0.5, 100000, rng);
  EXPECT_NEAR(r.bound, std::pow(0.5, 0.4), 1e-15);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.estimate, r.bound);
}

TEST(OrderStatistic, SecondLargestProbability) {
  Rng rng = make_rng(5);
  const auto r = expected_max_prob_check(0.01, 10, 50000, rng);
  EXPECT_NEAR(r.bound, 0.6607, 1e-4);
  EXPECT_TRUE(r.pass);
  EXPECT_THROW(expected_max_prob_check(1.0, 10, 10, rng), std::invalid_argument);
}

TEST(Ks, KolmogorovTailValues) {
  EXPECT_EQ(kolmogorov_tail(0.0), 1.0);
  EXPECT_NEAR(kolmogorov_tail(1.36), 0.05, 1e-3);
  EXPECT_NEAR(kolmogorov_tail(1.63), 0.01, 2e-4);
}

TEST(Ks, OneSampleUniformAcceptsAndShiftRejects) {
  Rng rng = make_rng(6);
  std::vector<double> u(5000);
  for (auto& v : u) v = std::generate_canonical<double, 53>(rng);
  auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_GT(ks_one_sample(u, cdf).p_value, 0.01);
  std::vector<double> shifted = u;
  for (auto& v : shifted) v = std::min(1.0, v + 0.05);
  EXPECT_LT(ks_one_sample(shifted, cdf).p_value, 1e-6);
}

TEST(Ks, TwoSample) {
  Rng rng = make_rng(7);
  std::vector<double> a(3000), b(3000), c(3000);
  for (auto& v : a) v = standard_normal(rng);
  for (auto& v : b) v = standard_normal(rng);
  for (auto& v : c) v = standard_normal(rng) + 0.2;
  EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
  EXPECT_LT(ks_two_sample(a, c).p_value, 1e-4);
  EXPECT_NEAR(ks_two_sample({1, 2}, {3, 4}).statistic, 1.0, 1e-15);
}

TEST(GammaCdf, Exponential) {
  EXPECT_NEAR(gamma_cdf(1.0, 1.0, 2.0), 1.0 - std::exp(-2.0), 1e-15);
  EXPECT_EQ(gamma_cdf(-1.0, 1.0, 2.0), 0.0);
}

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dspike/baselines.hpp"
#include "dspike/random.hpp"

using namespace dspike;

namespace {

EnsembleData noisy_data(std::uint64_t seed, Eigen::Index n, Eigen::Index K) {
  Rng rng = make_rng(seed);
  Eigen::MatrixXd X(n, K);
  for (auto& x : X.reshaped()) x = standard_normal(rng);
  Eigen::VectorXd y = X.leftCols(2).rowwise().sum();
  for (auto& v : y) v += standard_normal(rng);
  return EnsembleData(X, y);
}

}  // namespace

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
}

TEST(Lasso, ZeroAboveLambdaMax) {
  const EnsembleData d = noisy_data(1, 40, 6);
  const double lmax = lasso_lambda_max(d);
  EXPECT_TRUE(lasso_coordinate_descent(d, lmax).coefficients.isZero());
  EXPECT_TRUE(lasso_coordinate_descent(d, 2 * lmax).coefficients.isZero());
  EXPECT_FALSE(lasso_coordinate_descent(d, 0.9 * lmax).coefficients.isZero());
  EXPECT_THROW(lasso_coordinate_descent(d, -1.0), std::invalid_argument);
}

TEST(Lasso, OrthonormalDesignGivesLeastSquares) {
  // columns orthogonal with X'X = n I
  Eigen::MatrixXd X(4, 2);
  X << 1, 1, 1, -1, -1, 1, -1, -1;
  Eigen::VectorXd y(4);
  y << 3, 1, -1, 0.5;
  const EnsembleData d(X, y);
  const Eigen::VectorXd ols = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  const LassoFit f = lasso_coordinate_descent(d, 0.0);
  EXPECT_TRUE(f.converged);
  EXPECT_LE((f.coefficients - ols).cwiseAbs().maxCoeff(), 1e-12);
  // soft-thresholded OLS for lambda > 0
  const LassoFit g = lasso_coordinate_descent(d, 0.3);
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(g.coefficients[j], soft_threshold(ols[j], 0.3), 1e-12);
}

TEST(Lasso, MatchesBruteForceGridOnK2) {
  Eigen::MatrixXd X(5, 2);
  X << 1.0, 0.4, -0.3, 1.2, 0.8, 0.9, 2.0, -0.5, 0.1, 0.3;
  Eigen::VectorXd y(5);
  y << 1.0, 0.7, 1.4, 1.3, 0.2;
  const EnsembleData d(X, y);
  const double lambda = 0.1;
  const LassoFit f = lasso_coordinate_descent(d, lambda, 1e-14);
  // coarse grid, then zoom in three times
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d arg(0, 0);
  double half = 3.0;
  for (int level = 0; level < 4; ++level) {
    const Eigen::Vector2d c = arg;
    const int m = 400;
    for (int i = -m; i <= m; ++i)
      for (int j = -m; j <= m; ++j) {
        const Eigen::Vector2d b(c[0] + half * i / m, c[1] + half * j / m);
        const double v = lasso_objective(d, b, lambda);
        if (v < best) {
          best = v;
          arg = b;
        }
      }
    half /= 50.0;
  }
  EXPECT_LE(lasso_objective(d, f.coefficients, lambda), best + 1e-8);
  EXPECT_GE(lasso_objective(d, f.coefficients, lambda), best - 1e-8);
}

TEST(Lasso, ObjectiveNonIncreasingAndKkt) {
  const EnsembleData d = noisy_data(2, 50, 12);
  const double lambda = 0.05;
  const LassoFit f = lasso_coordinate_descent(d, lambda, 1e-13);
  ASSERT_TRUE(f.converged);
  for (std::size_t s = 1; s < f.objective_path.size(); ++s) {
    EXPECT_LE(f.objective_path[s], f.objective_path[s - 1] + 1e-14);
  }
  const Eigen::VectorXd grad = d.X().transpose() * (d.y() - d.X() * f.coefficients) / 50.0;
  for (Eigen::Index j = 0; j < 12; ++j) {
    const double b = f.coefficients[j];
    if (b != 0.0) {
      EXPECT_NEAR(grad[j], lambda * (b > 0 ? 1.0 : -1.0), 1e-9);
    } else {
      EXPECT_LE(std::abs(grad[j]), lambda + 1e-9);
    }
  }
}

TEST(TwoStep, EqualWeightsOnSelection) {
  Eigen::MatrixXd X(4, 3);
  X << 1, 1, 0, 1, -1, 0, -1, 1, 0, -1, -1, 0;
  Eigen::VectorXd y(4);
  y << 3, 1, -1, 0.5;
  const EnsembleData d(X, y);
  // ols = (0.875, 0.375, 0); only column 0 survives at lambda 0.5
  const WeightVector w = two_step_lasso(d, 0.5);
  EXPECT_EQ(w.to_vector(), (std::vector<double>{1.0, 0.0, 0.0}));
  const WeightVector w2 = two_step_lasso(d, 0.1);
  EXPECT_EQ(w2.to_vector(), (std::vector<double>{0.5, 0.5, 0.0}));
}

TEST(TwoStep, NegativeCoefficientsAndFallback) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 1, 1, -1, -1, 1, -1, -1;
  Eigen::VectorXd y(4);
  y << 1, -1, 1, -1;
  X.col(1) *= -1.0;  // y is now minus column 2
  const EnsembleData d(X, y);
  EXPECT_EQ(two_step_lasso(d, 0.1).to_vector(), (std::vector<double>{0.0, 1.0}));
  TwoStepOptions pos;
  pos.positives_only = true;
  EXPECT_EQ(two_step_lasso(d, 0.1, pos).to_vector(), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(two_step_lasso(d, 100.0).to_vector(), (std::vector<double>{0.5, 0.5}));
}

TEST(SimpleAverage, Uniform) {
  const WeightVector w = simple_average(4);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(w[i], 0.25);
}

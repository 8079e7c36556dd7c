#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dspike/baselines.hpp"
#include "dspike/data.hpp"
#include "dspike/prior.hpp"
#include "dspike/sampler.hpp"
#include "dspike/simplex.hpp"
#include "dspike/summaries.hpp"

namespace dspike {

enum class Method { DoubleSpike, SymmetricDirichlet, TwoStepLasso, SimpleAverage };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::DoubleSpike: return "ds";
    case Method::SymmetricDirichlet: return "symdir";
    case Method::TwoStepLasso: return "lasso2";
    case Method::SimpleAverage: return "avg";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::DoubleSpike, Method::SymmetricDirichlet, Method::TwoStepLasso,
                   Method::SimpleAverage}) {
    if (method_name(m) == s) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(s) + "' (ds, symdir, lasso2, avg)");
}

inline bool is_bayesian(Method m) {
  return m == Method::DoubleSpike || m == Method::SymmetricDirichlet;
}

/// Hyperparameters of one grid cell: (rho1, rho2) for ds, (rho) for symdir,
/// (lambda) for lasso2, nothing for avg. Unused slots are NaN.
struct Hyper {
  double a = std::numeric_limits<double>::quiet_NaN();
  double b = std::numeric_limits<double>::quiet_NaN();
};

/// Exponent grids. Double spike uses rho1 = K^alpha1, rho2 = K^-alpha2; the
/// symmetric baseline uses rho = K^-a; the lasso uses lambda = exp(l).
struct MethodGrid {
  HyperGridSpec double_spike;
  std::vector<double> symmetric_exponents;
  std::vector<double> log_lambda;

  /// Simulation grids: alpha1 on [0.5, 2] at 6 points, alpha2 on [1, 2] at 4
  /// points (also the symmetric grid), log lambda on [-8, 8] at 80 points.
  static MethodGrid simulation() {
    MethodGrid g;
    g.double_spike.alpha1_grid = linspace(0.5, 2.0, 6);
    g.double_spike.alpha2_grid = linspace(1.0, 2.0, 4);
    g.symmetric_exponents = g.double_spike.alpha2_grid;
    g.log_lambda = linspace(-8.0, 8.0, 80);
    return g;
  }

  /// Forecast-combination grids: alpha1 on [1, 3] at 100 points, alpha2 on
  /// [1, 3] at 20 points (also the symmetric grid), lasso as in simulation().
  static MethodGrid forecasting() {
    MethodGrid g;
    g.double_spike.alpha1_grid = linspace(1.0, 3.0, 100);
    g.double_spike.alpha2_grid = linspace(1.0, 3.0, 20);
    g.symmetric_exponents = g.double_spike.alpha2_grid;
    g.log_lambda = linspace(-8.0, 8.0, 80);
    return g;
  }
};

/// Flattened hyperparameter cells for one method, with the index of the
/// grid midpoint.
struct MethodCells {
  std::vector<Hyper> cells;
  std::size_t midpoint = 0;
};

inline MethodCells method_cells(Method m, const MethodGrid& grid, std::size_t K) {
  const double k = static_cast<double>(K);
  MethodCells out;
  switch (m) {
    case Method::DoubleSpike: {
      grid.double_spike.validate();
      const auto& a1 = grid.double_spike.alpha1_grid;
      const auto& a2 = grid.double_spike.alpha2_grid;
      for (double x : a1)
        for (double z : a2) out.cells.push_back({std::pow(k, x), std::pow(k, -z)});
      out.midpoint = ((a1.size() - 1) / 2) * a2.size() + (a2.size() - 1) / 2;
      break;
    }
    case Method::SymmetricDirichlet:
      if (grid.symmetric_exponents.empty()) throw std::invalid_argument("empty symmetric grid");
      for (double x : grid.symmetric_exponents) out.cells.push_back({std::pow(k, -x)});
      out.midpoint = (out.cells.size() - 1) / 2;
      break;
    case Method::TwoStepLasso:
      if (grid.log_lambda.empty()) throw std::invalid_argument("empty lambda grid");
      for (double l : grid.log_lambda) out.cells.push_back({std::exp(l)});
      out.midpoint = (out.cells.size() - 1) / 2;
      break;
    case Method::SimpleAverage:
      out.cells.push_back({});
      break;
  }
  return out;
}

/// Settings shared by every fit of a study or rolling evaluation.
struct FitSettings {
  std::size_t niter = 20000;
  std::size_t burn_in = 15000;
  /// theta for the double spike prior; <= 0 means 1/K.
  double theta = 0.0;
  double a1 = 0.01;
  double a2 = 0.01;
  BalanceMode balance = BalanceMode::Plain;
  InitMode init = InitMode::AllIncluded;
  SymmetricKernel kernel = SymmetricKernel::Independence;
  TwoStepOptions lasso;

  double theta_for(std::size_t K) const {
    return theta > 0.0 ? theta : 1.0 / static_cast<double>(K);
  }
};

inline SamplerConfig double_spike_config(const Hyper& h, const FitSettings& s, std::size_t K,
                                         std::uint64_t seed) {
  SamplerConfig c;
  c.prior = DoubleSpikePrior{h.a, h.b, s.theta_for(K), s.a1, s.a2};
  c.niter = s.niter;
  c.burn_in = s.burn_in;
  c.balance = s.balance;
  c.init = s.init;
  c.seed = seed;
  return c;
}

inline SymmetricConfig symmetric_config(const Hyper& h, const FitSettings& s, std::uint64_t seed) {
  SymmetricConfig c;
  c.rho = h.a;
  c.kernel = s.kernel;
  c.niter = s.niter;
  c.burn_in = s.burn_in;
  c.a1 = s.a1;
  c.a2 = s.a2;
  c.seed = seed;
  return c;
}

/// Runs the chain of a Bayesian method.
inline Trace run_method_chain(Method m, const Hyper& h, const FitSettings& s,
                              const EnsembleData& data, std::uint64_t seed) {
  const auto K = static_cast<std::size_t>(data.K());
  if (m == Method::DoubleSpike) return run_chain(double_spike_config(h, s, K, seed), data);
  if (m == Method::SymmetricDirichlet) return run_symmetric_dirichlet_chain(symmetric_config(h, s, seed), data);
  throw std::invalid_argument("run_method_chain: not a Bayesian method");
}

/// Point estimate of the weights: posterior mean for the Bayesian methods.
inline WeightVector fit_weights(Method m, const Hyper& h, const FitSettings& s,
                                const EnsembleData& data, std::uint64_t seed) {
  switch (m) {
    case Method::DoubleSpike:
    case Method::SymmetricDirichlet:
      return posterior_mean(run_method_chain(m, h, s, data, seed), s.burn_in);
    case Method::TwoStepLasso:
      return two_step_lasso(data, h.a, s.lasso);
    case Method::SimpleAverage:
      return simple_average(static_cast<std::size_t>(data.K()));
  }
  throw std::logic_error("fit_weights: unreachable");
}

/// Average over post-burn-in iterations of ||beta_t - truth||_1.
inline double mean_l1_error(const Trace& trace, std::size_t burn_in, const WeightVector& truth) {
  if (burn_in >= trace.size()) throw std::invalid_argument("mean_l1_error: empty window");
  double s = 0.0;
  for (std::size_t t = burn_in; t < trace.size(); ++t) {
    s += (trace.betas.row(static_cast<Eigen::Index>(t)).transpose() - truth.values()).cwiseAbs().sum();
  }
  return s / static_cast<double>(trace.size() - burn_in);
}

/// A 64-bit seed for stream (base, a, b).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  Rng r = make_rng(base, {a, b});
  return r();
}

}  // namespace dspike

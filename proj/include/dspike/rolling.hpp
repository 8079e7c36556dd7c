#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <vector>

#include "dspike/csv.hpp"
#include "dspike/methods.hpp"
#include "dspike/parallel.hpp"

namespace dspike {

struct RollingEvalSpec {
  /// First forecast period, 1-based; the fit for period t uses rows 1..t-1.
  std::size_t start_period = 2;
  Method method = Method::SimpleAverage;
  MethodGrid grid = MethodGrid::simulation();
  FitSettings fit;
  std::uint64_t seed = 1;
  /// 1-based periods left out of the second RMSE.
  std::vector<std::size_t> exclude_periods;
  std::size_t threads = 1;

  void validate() const {
    if (start_period < 2) throw std::invalid_argument("rolling evaluation needs start_period >= 2");
    if (is_bayesian(method) && (fit.niter == 0 || fit.burn_in >= fit.niter)) {
      throw std::invalid_argument("rolling evaluation needs 0 <= burn_in < niter");
    }
  }
};

struct RollingForecast {
  std::size_t period = 0;  // 1-based
  double actual = 0.0;
  double forecast = 0.0;
  std::size_t selected = 0;  // index into the flattened grid
  Hyper hyper;
  bool excluded = false;
};

struct RollingResult {
  std::vector<RollingForecast> forecasts;
  double rmse = 0.0;
  double rmse_excluding = 0.0;
  std::size_t n_candidates = 0;
};

/// Rolling out-of-sample evaluation. For each period t >= start_period every
/// grid cell is fitted on rows 1..t-1 and forecasts row t. The emitted
/// forecast uses the cell whose earlier emitted-period forecasts have the
/// smallest RMSE; the first period uses the grid midpoint. Ties go to the
/// lower cell index.
inline RollingResult rolling_forecast_eval(const EnsembleData& data, const RollingEvalSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(data.n());
  if (n < spec.start_period) {
    throw std::invalid_argument("rolling evaluation: start period " + std::to_string(spec.start_period) +
                                " is beyond the " + std::to_string(n) + " available rows");
  }
  const MethodCells grid = method_cells(spec.method, spec.grid, static_cast<std::size_t>(data.K()));
  const std::size_t H = grid.cells.size();
  const std::size_t periods = n - spec.start_period + 1;

  // cache[p * H + h]: forecast of cell h for period start_period + p
  std::vector<double> cache(periods * H);
  parallel_for(periods * H, spec.threads, [&](std::size_t job) {
    const std::size_t p = job / H;
    const std::size_t h = job % H;
    const std::size_t t = spec.start_period + p;
    const EnsembleData train = data.rows(0, static_cast<Eigen::Index>(t - 1));
    const WeightVector w =
        fit_weights(spec.method, grid.cells[h], spec.fit, train, derive_seed(spec.seed, t, h));
    cache[job] = data.X().row(static_cast<Eigen::Index>(t - 1)).dot(w.values());
  });

  const std::set<std::size_t> excluded(spec.exclude_periods.begin(), spec.exclude_periods.end());
  RollingResult res;
  res.n_candidates = H;
  std::vector<double> sse(H, 0.0);
  double total = 0.0;
  double total_kept = 0.0;
  std::size_t kept = 0;
  for (std::size_t p = 0; p < periods; ++p) {
    const std::size_t t = spec.start_period + p;
    std::size_t pick = grid.midpoint;
    if (p > 0) pick = static_cast<std::size_t>(std::min_element(sse.begin(), sse.end()) - sse.begin());
    RollingForecast f;
    f.period = t;
    f.actual = data.y()[static_cast<Eigen::Index>(t - 1)];
    f.forecast = cache[p * H + pick];
    f.selected = pick;
    f.hyper = grid.cells[pick];
    f.excluded = excluded.count(t) != 0;
    const double e2 = (f.forecast - f.actual) * (f.forecast - f.actual);
    total += e2;
    if (!f.excluded) {
      total_kept += e2;
      ++kept;
    }
    res.forecasts.push_back(f);
    for (std::size_t h = 0; h < H; ++h) {
      const double d = cache[p * H + h] - f.actual;
      sse[h] += d * d;
    }
  }
  res.rmse = std::sqrt(total / static_cast<double>(periods));
  res.rmse_excluding = kept > 0 ? std::sqrt(total_kept / static_cast<double>(kept))
                                : std::numeric_limits<double>::quiet_NaN();
  return res;
}

/// period,actual,forecast,selected,hyper_1,hyper_2,excluded
inline void write_forecasts(std::ostream& out, const RollingResult& res) {
  out << "period,actual,forecast,selected,hyper_1,hyper_2,excluded\n";
  auto opt = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  for (const auto& f : res.forecasts) {
    out << f.period << ',' << format_double(f.actual) << ',' << format_double(f.forecast) << ','
        << f.selected << ',' << opt(f.hyper.a) << ',' << opt(f.hyper.b) << ',' << (f.excluded ? 1 : 0)
        << '\n';
  }
}

}  // namespace dspike

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dspike/config.hpp"
#include "dspike/csv.hpp"
#include "dspike/parallel.hpp"
#include "dspike/reweight.hpp"
#include "dspike/rolling.hpp"
#include "dspike/scenario.hpp"
#include "dspike/study.hpp"

using namespace dspike;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dspike_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

StudyConfig small_study() {
  StudyConfig c;
  c.scenario = ScenarioSpec::defaults(ScenarioId::Scenario1);
  c.scenario.n = 30;
  c.scenario.K = 6;
  c.grid.double_spike.alpha1_grid = {1.0, 2.0};
  c.grid.double_spike.alpha2_grid = {1.5};
  c.grid.symmetric_exponents = {1.0, 400.0};  // K^-400 underflows: a recorded failure
  c.grid.log_lambda = {-2.0, 0.0};
  c.n_reps = 3;
  c.fit.niter = 400;
  c.fit.burn_in = 200;
  c.base_seed = 5;
  c.threads = 1;
  return c;
}

// y equals column 0; the other columns are noisy.
EnsembleData perfect_forecaster_panel(std::size_t n, std::size_t K, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y[i] = 2.0 + standard_normal(rng);
    X(i, 0) = y[i];
    for (Eigen::Index j = 1; j < X.cols(); ++j) X(i, j) = y[i] + 2.0 * standard_normal(rng);
  }
  return EnsembleData(X, y);
}

}  // namespace

TEST(Scenario, Defaults) {
  const ScenarioSpec s = ScenarioSpec::defaults(ScenarioId::Scenario1);
  EXPECT_EQ(s.n, 80u);
  EXPECT_EQ(s.K, 40u);
  EXPECT_EQ(s.s, 3u);
  EXPECT_EQ(s.noise_sd, 1.5);
  EXPECT_EQ(s.design_sd, 3.0);
}

TEST(Scenario, TruthVectors) {
  const WeightVector t1 = scenario_truth(ScenarioSpec::defaults(ScenarioId::Scenario1));
  const WeightVector t2 = scenario_truth(ScenarioSpec::defaults(ScenarioId::Scenario2));
  EXPECT_NEAR(t2.values().sum(), 1.0, 1e-12);
  EXPECT_NEAR(l1_distance(t1.values(), t2.values()), 0.1677, 1e-4);
  EXPECT_NEAR(l1_error(simple_average(40), t1), 1.85, 1e-12);
  ScenarioSpec bad = ScenarioSpec::defaults(ScenarioId::Scenario2);
  bad.s = 4;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Scenario, DesignStandardDeviation) {
  ScenarioSpec s = ScenarioSpec::defaults(ScenarioId::Scenario1);
  s.n = 2500;
  s.seed = 9;
  const Scenario sc = generate_scenario(s);
  const Eigen::ArrayXd x = sc.data.X().reshaped().array();
  const double N = static_cast<double>(x.size());
  const double sd = std::sqrt((x - x.mean()).square().sum() / (N - 1));
  EXPECT_NEAR(sd, 3.0, 3.0 * 3.0 / std::sqrt(2.0 * N));
  const Eigen::VectorXd resid = sc.data.y() - sc.data.X() * sc.truth.values();
  EXPECT_NEAR(std::sqrt(resid.squaredNorm() / 2500.0), 1.5, 0.1);
}

TEST(Study, AverageOnlyGivesOnePointEightFive) {
  StudyConfig c;
  c.methods = {Method::SimpleAverage};
  c.n_reps = 1;
  const StudyReport r = run_replication_study(c);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_NEAR(r.rows[0].mean_error, 1.85, 1e-12);
  EXPECT_EQ(r.rows[0].n_reps, 1u);
}

TEST(Study, ReportMatchesRecordsAndRecordsFailures) {
  const StudyConfig c = small_study();
  const StudyReport r = run_replication_study(c);
  const auto cells = study_cells(c);
  ASSERT_EQ(r.rows.size(), cells.size());
  ASSERT_EQ(r.records.size(), cells.size() * c.n_reps);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    double s = 0.0;
    std::size_t n = 0, failed = 0;
    for (const auto& rec : r.records) {
      if (rec.cell != k) continue;
      if (rec.ok) {
        s += rec.error;
        ++n;
      } else {
        ++failed;
      }
    }
    EXPECT_EQ(r.rows[k].n_reps, n);
    EXPECT_EQ(r.rows[k].n_failed, failed);
    if (n > 0) {
      EXPECT_NEAR(r.rows[k].mean_error, s / double(n), 1e-12);
    }
    EXPECT_GE(r.rows[k].mean_error, 0.0);
  }
  // the underflowing symmetric cell fails in every replication
  std::size_t sym_failures = 0;
  for (const auto& row : r.rows)
    if (row.method == Method::SymmetricDirichlet) sym_failures += row.n_failed;
  EXPECT_EQ(sym_failures, c.n_reps);

  // round trip through the persisted records
  std::ostringstream out;
  write_study_records(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  std::vector<ReplicationRecord> parsed;
  while (std::getline(in, line)) {
    const auto f = detail::split(line, ',');
    ReplicationRecord rec;
    rec.replication = std::stoul(std::string(f[0]));
    rec.cell = std::stoul(std::string(f[1]));
    rec.ok = f[5] == "1";
    detail::parse_double(f[6], rec.error);
    parsed.push_back(rec);
  }
  const auto again = aggregate_records(cells, parsed);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    EXPECT_NEAR(again[k].mean_error, r.rows[k].mean_error, 1e-12);
    EXPECT_NEAR(again[k].mc_se, r.rows[k].mc_se, 1e-12);
  }
}

TEST(Study, IndependentOfThreadCount) {
  StudyConfig c = small_study();
  const StudyReport a = run_replication_study(c);
  c.threads = 3;
  const StudyReport b = run_replication_study(c);
  std::ostringstream sa, sb;
  write_study_report(sa, a);
  write_study_report(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Parallel, RethrowsAndCoversAllJobs) {
  std::vector<int> hit(50, 0);
  parallel_for(50, 4, [&](std::size_t j) { hit[j] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t j) {
                 if (j == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Rolling, SimpleAverageIsRowMean) {
  const EnsembleData d = perfect_forecaster_panel(12, 4, 1);
  RollingEvalSpec spec;
  spec.start_period = 3;
  const RollingResult r = rolling_forecast_eval(d, spec);
  ASSERT_EQ(r.forecasts.size(), 10u);
  double sse = 0.0;
  for (const auto& f : r.forecasts) {
    EXPECT_NEAR(f.forecast, d.X().row(static_cast<Eigen::Index>(f.period - 1)).mean(), 1e-14);
    EXPECT_EQ(f.actual, d.y()[static_cast<Eigen::Index>(f.period - 1)]);
    sse += (f.forecast - f.actual) * (f.forecast - f.actual);
  }
  EXPECT_NEAR(r.rmse, std::sqrt(sse / 10), 1e-14);
}

TEST(Rolling, SingleCellIsPlainRollingFit) {
  const EnsembleData d = perfect_forecaster_panel(10, 3, 2);
  RollingEvalSpec spec;
  spec.method = Method::DoubleSpike;
  spec.grid.double_spike.alpha1_grid = {1.5};
  spec.grid.double_spike.alpha2_grid = {1.0};
  spec.fit.niter = 300;
  spec.fit.burn_in = 100;
  spec.seed = 4;
  const RollingResult r = rolling_forecast_eval(d, spec);
  EXPECT_EQ(r.n_candidates, 1u);
  for (const auto& f : r.forecasts) {
    EXPECT_EQ(f.selected, 0u);
    const EnsembleData train = d.rows(0, static_cast<Eigen::Index>(f.period - 1));
    const WeightVector w = fit_weights(Method::DoubleSpike, f.hyper, spec.fit, train, derive_seed(4, f.period, 0));
    EXPECT_EQ(f.forecast, d.X().row(static_cast<Eigen::Index>(f.period - 1)).dot(w.values()));
  }
}

TEST(Rolling, PerfectForecasterBeatsAverage) {
  const EnsembleData d = perfect_forecaster_panel(30, 6, 3);
  RollingEvalSpec avg;
  avg.start_period = 5;
  RollingEvalSpec ds = avg;
  ds.method = Method::DoubleSpike;
  ds.grid.double_spike.alpha1_grid = {1.0, 2.0};
  ds.grid.double_spike.alpha2_grid = {1.0, 2.0};
  ds.fit.niter = 2000;
  ds.fit.burn_in = 1000;
  EXPECT_LT(rolling_forecast_eval(d, ds).rmse, rolling_forecast_eval(d, avg).rmse);
}

TEST(Rolling, NeverReadsFutureRows) {
  const EnsembleData d = perfect_forecaster_panel(16, 4, 5);
  const std::size_t cut = 9;
  Eigen::MatrixXd X = d.X();
  Eigen::VectorXd y = d.y();
  for (Eigen::Index i = static_cast<Eigen::Index>(cut); i < X.rows(); ++i) {
    X.row(i).setConstant(1e6);
    y[i] = -1e6;
  }
  const EnsembleData poisoned(X, y);
  for (Method m : {Method::DoubleSpike, Method::TwoStepLasso}) {
    RollingEvalSpec spec;
    spec.method = m;
    spec.grid.double_spike.alpha1_grid = {1.0, 2.0};
    spec.grid.double_spike.alpha2_grid = {1.0};
    spec.grid.log_lambda = {-3.0, -1.0, 0.0};
    spec.fit.niter = 300;
    spec.fit.burn_in = 100;
    const RollingResult a = rolling_forecast_eval(d, spec);
    const RollingResult b = rolling_forecast_eval(poisoned, spec);
    for (const auto& f : a.forecasts) {
      if (f.period > cut) break;
      const auto& g = b.forecasts[f.period - spec.start_period];
      EXPECT_EQ(f.forecast, g.forecast);
      EXPECT_EQ(f.selected, g.selected);
    }
  }
}

TEST(Rolling, ExclusionOnlyAffectsSecondRmse) {
  const EnsembleData d = perfect_forecaster_panel(10, 3, 6);
  RollingEvalSpec spec;
  spec.exclude_periods = {4, 7};
  const RollingResult r = rolling_forecast_eval(d, spec);
  RollingEvalSpec plain;
  const RollingResult p = rolling_forecast_eval(d, plain);
  EXPECT_EQ(r.rmse, p.rmse);
  double sse = 0.0;
  int n = 0;
  for (const auto& f : r.forecasts) {
    EXPECT_EQ(f.excluded, f.period == 4 || f.period == 7);
    if (!f.excluded) {
      sse += (f.forecast - f.actual) * (f.forecast - f.actual);
      ++n;
    }
  }
  EXPECT_NEAR(r.rmse_excluding, std::sqrt(sse / n), 1e-14);
}

TEST(Rolling, RejectsBadStart) {
  const EnsembleData d = perfect_forecaster_panel(5, 3, 7);
  RollingEvalSpec spec;
  spec.start_period = 1;
  EXPECT_THROW(rolling_forecast_eval(d, spec), std::invalid_argument);
  spec.start_period = 6;
  EXPECT_THROW(rolling_forecast_eval(d, spec), std::invalid_argument);
}

TEST(Csv, FormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0}) {
    double back = 0.0;
    ASSERT_TRUE(detail::parse_double(format_double(v), back));
    EXPECT_EQ(back, v);
  }
}

TEST(Csv, PanelRoundTrip) {
  const std::string text = "f1,y,f2\n1.5,2,3\n4,5.25,6\n-7,8,9.125\n";
  std::istringstream in(text);
  const Panel p = panel_from_table(read_numeric_table(in), "y");
  EXPECT_EQ(p.data.n(), 3);
  EXPECT_EQ(p.data.K(), 2);
  EXPECT_EQ(p.columns, (std::vector<std::string>{"f1", "f2"}));
  EXPECT_EQ(p.data.y()[1], 5.25);
  EXPECT_EQ(p.data.X()(2, 0), -7.0);
  std::ostringstream out;
  write_panel(out, p);
  std::istringstream again(out.str());
  const Panel q = panel_from_table(read_numeric_table(again), "y");
  EXPECT_EQ(q.data.X(), p.data.X());
  EXPECT_EQ(q.data.y(), p.data.y());
}

TEST(Csv, EmptyCellNamesRowAndColumn) {
  std::istringstream in("y,a,b\n1,2,3\n4,,6\n");
  try {
    read_numeric_table(in, "panel.csv");
    FAIL() << "expected an error";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "a");
    EXPECT_NE(std::string(e.what()).find("panel.csv"), std::string::npos);
  }
  std::istringstream bad("y,a,b\n1,x,3\n");
  EXPECT_THROW(read_numeric_table(bad), CsvError);
  std::istringstream ragged("y,a,b\n1,2\n");
  EXPECT_THROW(read_numeric_table(ragged), CsvError);
  std::istringstream dup("y,a,a\n1,2,3\n");
  EXPECT_THROW(read_numeric_table(dup), CsvError);
  std::istringstream ok("y,a,b\n1,2,3\n");
  EXPECT_THROW(panel_from_table(read_numeric_table(ok), "z"), CsvError);
}

TEST(Csv, SurveyPanelShape) {
  const fs::path dir = scratch_dir("shape");
  {
    std::ofstream out(dir / "survey.csv");
    out << "y";
    for (int j = 1; j <= 23; ++j) out << ",f" << j;
    out << '\n';
    for (int i = 0; i < 70; ++i) {
      out << i * 0.1;
      for (int j = 1; j <= 23; ++j) out << ',' << i * 0.1 + j * 0.01;
      out << '\n';
    }
  }
  const Panel p = ingest_csv((dir / "survey.csv").string(), "y");
  EXPECT_EQ(p.data.n(), 70);
  EXPECT_EQ(p.data.K(), 23);
}

TEST(Config, ParsesKeyValues) {
  std::istringstream in("# comment\nreps = 3\n\nalpha1-grid=0.5, 1 ,2\nmethods=ds,avg\n");
  const KeyValueConfig c = KeyValueConfig::parse(in);
  EXPECT_EQ(c.get_size("reps", 0), 3u);
  EXPECT_EQ(c.get_list("alpha1-grid", {}), (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_EQ(c.get_string("methods", ""), "ds,avg");
  EXPECT_EQ(c.get_double("theta", 0.25), 0.25);
  EXPECT_THROW(c.require_known({"reps"}), std::runtime_error);
  std::istringstream dup("a=1\na=2\n");
  EXPECT_THROW(KeyValueConfig::parse(dup), std::runtime_error);
  std::istringstream frac("reps=2.5\n");
  EXPECT_THROW(KeyValueConfig::parse(frac).get_size("reps", 0), std::runtime_error);
}

TEST(Reweight, PerfectEnsembleHasZeroRmse) {
  Rng rng = make_rng(8);
  Eigen::VectorXd y(20);
  for (auto& v : y) v = standard_normal(rng);
  Eigen::MatrixXd X(20, 5);
  for (Eigen::Index j = 0; j < 5; ++j) X.col(j) = y;
  const EnsembleData holdout(X, y);
  Eigen::MatrixXd Xt(20, 5);
  for (auto& v : Xt.reshaped()) v = standard_normal(rng);
  SamplerConfig c = default_reweight_config(5, 3);
  c.niter = 500;
  c.burn_in = 200;
  const ReweightResult r = reweight_ensemble(EnsembleData(Xt, y), holdout, c);
  EXPECT_NEAR(r.holdout_rmse, 0.0, 1e-12);
  EXPECT_NEAR(r.equal_weight_rmse, 0.0, 1e-12);
  EXPECT_EQ(r.best_individual.size(), r.selected.size());
  EXPECT_NEAR(c.prior.rho1, std::pow(5.0, 1.5), 1e-12);
  EXPECT_NEAR(c.prior.rho2, 0.2, 1e-15);
  EXPECT_EQ(c.prior.theta, 0.2);
}

#ifdef DSPIKE_CLI_PATH
TEST(Cli, FitAndSimulateAreByteIdentical) {
  const fs::path dir = scratch_dir("cli");
  {
    std::ofstream out(dir / "panel.csv");
    const EnsembleData d = perfect_forecaster_panel(15, 4, 9);
    Panel p{d, {"a", "b", "c", "d"}, "y"};
    write_panel(out, p);
  }
  const std::string cli = DSPIKE_CLI_PATH;
  auto run = [&](const std::string& args) { return std::system((cli + " " + args + " > /dev/null").c_str()); };
  for (int k = 0; k < 2; ++k) {
    const std::string tag = std::to_string(k);
    ASSERT_EQ(run("fit --data " + (dir / "panel.csv").string() +
                  " --target y --rho1 8 --rho2 0.1 --theta 0.25 --niter 500 --burn-in 100 --seed 3 --trace-out " +
                  (dir / ("trace" + tag + ".csv")).string() + " --summary-out " +
                  (dir / ("summary" + tag + ".csv")).string()),
              0);
    ASSERT_EQ(run("simulate --scenario 2 --reps 1 --niter 200 --burn-in 100 --seed 4 --out " +
                  (dir / ("report" + tag + ".csv")).string()),
              0);
  }
  EXPECT_EQ(slurp(dir / "trace0.csv"), slurp(dir / "trace1.csv"));
  EXPECT_EQ(slurp(dir / "summary0.csv"), slurp(dir / "summary1.csv"));
  EXPECT_EQ(slurp(dir / "report0.csv"), slurp(dir / "report1.csv"));
  EXPECT_FALSE(slurp(dir / "trace0.csv").empty());
  EXPECT_NE(run("fit --data " + (dir / "missing.csv").string() +
                " --target y --rho1 8 --rho2 0.1 --theta 0.25 --trace-out x --summary-out y 2> /dev/null"),
            0);
}
#endif

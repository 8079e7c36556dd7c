#include <cstdint>
#include <exception>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dspike/config.hpp"
#include "dspike/csv.hpp"
#include "dspike/reweight.hpp"
#include "dspike/rolling.hpp"
#include "dspike/study.hpp"
#include "dspike/trace_io.hpp"
#include "dspike/verify.hpp"

namespace {

using namespace dspike;

BalanceMode parse_balance(const std::string& s) {
  if (s == "plain") return BalanceMode::Plain;
  if (s == "exact") return BalanceMode::ExactBalance;
  throw std::invalid_argument("balance must be 'plain' or 'exact'");
}

InitMode parse_init(const std::string& s) {
  if (s == "all") return InitMode::AllIncluded;
  if (s == "prior") return InitMode::Prior;
  throw std::invalid_argument("init must be 'all' or 'prior'");
}

SymmetricKernel parse_kernel(const std::string& s) {
  if (s == "independence") return SymmetricKernel::Independence;
  if (s == "refresh") return SymmetricKernel::CoordinateRefresh;
  throw std::invalid_argument("symmetric kernel must be 'independence' or 'refresh'");
}

MethodGrid parse_grid(const std::string& s) {
  if (s == "simulation") return MethodGrid::simulation();
  if (s == "forecasting") return MethodGrid::forecasting();
  throw std::invalid_argument("grid must be 'simulation' or 'forecasting'");
}

struct SimulateArgs {
  int scenario = 1;
  std::size_t reps = 20;
  std::size_t niter = 20000;
  std::size_t burn_in = 15000;
  std::uint64_t seed = 1;
  std::string out;
  std::string records_out;
  std::string grid_file;
  std::size_t threads = 0;
};

// Keys accepted in a --grid-file; the CLI flags of the same name win.
const std::set<std::string> kGridKeys{
    "scenario", "reps", "niter", "burn-in", "seed", "threads", "grid", "methods", "alpha1-grid",
    "alpha2-grid", "symmetric-exponents", "log-lambda", "theta", "balance", "init",
    "symmetric-kernel", "positives-only", "n", "K", "noise-sd", "design-sd"};

int run_simulate(const SimulateArgs& a, const CLI::App& cmd) {
  KeyValueConfig cfg;
  if (!a.grid_file.empty()) {
    cfg = KeyValueConfig::load(a.grid_file);
    cfg.require_known(kGridKeys);
  }
  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };

  StudyConfig sc;
  const int scenario = given("--scenario") ? a.scenario : static_cast<int>(cfg.get_size("scenario", 1));
  if (scenario != 1 && scenario != 2) throw std::invalid_argument("scenario must be 1 or 2");
  sc.scenario = ScenarioSpec::defaults(scenario == 1 ? ScenarioId::Scenario1 : ScenarioId::Scenario2);
  sc.scenario.n = cfg.get_size("n", sc.scenario.n);
  sc.scenario.K = cfg.get_size("K", sc.scenario.K);
  sc.scenario.noise_sd = cfg.get_double("noise-sd", sc.scenario.noise_sd);
  sc.scenario.design_sd = cfg.get_double("design-sd", sc.scenario.design_sd);

  sc.n_reps = given("--reps") ? a.reps : cfg.get_size("reps", a.reps);
  sc.fit.niter = given("--niter") ? a.niter : cfg.get_size("niter", a.niter);
  sc.fit.burn_in = given("--burn-in") ? a.burn_in : cfg.get_size("burn-in", a.burn_in);
  sc.base_seed = given("--seed") ? a.seed : static_cast<std::uint64_t>(cfg.get_size("seed", a.seed));
  sc.threads = given("--threads") ? a.threads : cfg.get_size("threads", a.threads);

  sc.grid = parse_grid(cfg.get_string("grid", "simulation"));
  sc.grid.double_spike.alpha1_grid = cfg.get_list("alpha1-grid", sc.grid.double_spike.alpha1_grid);
  sc.grid.double_spike.alpha2_grid = cfg.get_list("alpha2-grid", sc.grid.double_spike.alpha2_grid);
  sc.grid.symmetric_exponents = cfg.get_list("symmetric-exponents", sc.grid.symmetric_exponents);
  sc.grid.log_lambda = cfg.get_list("log-lambda", sc.grid.log_lambda);
  sc.fit.theta = cfg.get_double("theta", 0.0);
  sc.fit.balance = parse_balance(cfg.get_string("balance", "plain"));
  sc.fit.init = parse_init(cfg.get_string("init", "all"));
  sc.fit.kernel = parse_kernel(cfg.get_string("symmetric-kernel", "independence"));
  sc.fit.lasso.positives_only = cfg.get_size("positives-only", 0) != 0;
  if (cfg.has("methods")) {
    sc.methods.clear();
    for (auto m : detail::split(cfg.get_string("methods", ""), ',')) sc.methods.push_back(parse_method(m));
  }

  const StudyReport report = run_replication_study(sc);
  {
    auto out = open_output(a.out);
    write_study_report(out, report);
  }
  if (!a.records_out.empty()) {
    auto out = open_output(a.records_out);
    write_study_records(out, report);
  }
  for (Method m : sc.methods) {
    if (const StudyRow* best = report.best(m)) {
      std::cout << "best " << method_name(m) << ": " << format_double(best->mean_error) << " (se "
                << format_double(best->mc_se) << ")\n";
    }
  }
  return 0;
}

struct FitArgs {
  std::string data;
  std::string target;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double theta = 0.0;
  double a1 = 0.01;
  double a2 = 0.01;
  std::size_t niter = 20000;
  std::size_t burn_in = 15000;
  std::uint64_t seed = 1;
  std::string balance = "plain";
  std::string init = "all";
  double level = 0.95;
  std::string trace_out;
  std::string summary_out;
};

int run_fit(const FitArgs& a) {
  const Panel panel = ingest_csv(a.data, a.target);
  SamplerConfig c;
  c.prior = DoubleSpikePrior{a.rho1, a.rho2, a.theta, a.a1, a.a2};
  c.niter = a.niter;
  c.burn_in = a.burn_in;
  c.seed = a.seed;
  c.balance = parse_balance(a.balance);
  c.init = parse_init(a.init);
  const Trace trace = run_chain(c, panel.data);
  {
    auto out = open_output(a.trace_out);
    write_trace_csv(out, trace);
  }
  {
    auto out = open_output(a.summary_out);
    write_summary_csv(out, summarize(trace, c.burn_in, a.level));
  }
  std::cout << "acceptance rate after burn-in: " << format_double(trace.acceptance_rate(c.burn_in)) << '\n';
  return 0;
}

struct CombineArgs {
  std::string data;
  std::string target;
  std::string method;
  std::size_t start_period = 2;
  std::vector<std::size_t> exclude;
  std::string out;
  std::string grid = "simulation";
  double theta = 0.05;
  std::size_t niter = 2000;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

int run_combine(const CombineArgs& a) {
  const Panel panel = ingest_csv(a.data, a.target);
  RollingEvalSpec spec;
  spec.start_period = a.start_period;
  spec.method = parse_method(a.method);
  spec.grid = parse_grid(a.grid);
  spec.fit.theta = a.theta;
  spec.fit.niter = a.niter;
  spec.fit.burn_in = a.burn_in;
  spec.seed = a.seed;
  spec.exclude_periods = a.exclude;
  spec.threads = a.threads;
  const RollingResult res = rolling_forecast_eval(panel.data, spec);
  auto out = open_output(a.out);
  write_forecasts(out, res);
  std::cout << "rmse: " << format_double(res.rmse) << '\n';
  if (!a.exclude.empty()) std::cout << "rmse excluding listed periods: " << format_double(res.rmse_excluding) << '\n';
  return 0;
}

struct ReweightArgs {
  std::string train;
  std::string holdout;
  std::string target;
  std::string out;
  std::string diagnostics_out;
  double alpha1 = 1.5;
  double rho2 = 0.0;  // 0: 1/K
  double theta = 0.2;
  double threshold = 0.2;
  std::size_t niter = 20000;
  std::size_t burn_in = 15000;
  std::uint64_t seed = 1;
};

int run_reweight(const ReweightArgs& a) {
  const Panel train = ingest_csv(a.train, a.target);
  const Panel holdout = ingest_csv(a.holdout, a.target);
  if (train.columns != holdout.columns) throw std::invalid_argument("train and holdout columns differ");
  const auto K = static_cast<std::size_t>(train.data.K());
  SamplerConfig c = default_reweight_config(K, a.seed);
  c.prior.rho1 = std::pow(static_cast<double>(K), a.alpha1);
  if (a.rho2 > 0.0) c.prior.rho2 = a.rho2;
  c.prior.theta = a.theta;
  c.niter = a.niter;
  c.burn_in = a.burn_in;
  const ReweightResult r = reweight_ensemble(train.data, holdout.data, c, a.threshold);
  {
    auto out = open_output(a.out);
    write_weights(out, r, train.columns);
  }
  {
    auto out = open_output(a.diagnostics_out);
    write_diagnostics(out, r);
  }
  std::cout << "holdout rmse: " << format_double(r.holdout_rmse)
            << ", equal weights: " << format_double(r.equal_weight_rmse) << ", selected "
            << r.selected.size() << " of " << K << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double spike Dirichlet weights for forecast and ensemble combination"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Replication study on a simulated scenario");
  simulate->add_option("--scenario", sim.scenario)->check(CLI::IsMember({1, 2}));
  simulate->add_option("--reps", sim.reps);
  simulate->add_option("--niter", sim.niter);
  simulate->add_option("--burn-in", sim.burn_in);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--threads", sim.threads, "Worker threads (0: all cores)");
  simulate->add_option("--out", sim.out)->required();
  simulate->add_option("--records-out", sim.records_out, "Per-replication records");
  simulate->add_option("--grid-file", sim.grid_file, "key=value settings")->check(CLI::ExistingFile);

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Run the double spike sampler on a panel");
  fitc->add_option("--data", fit.data)->required()->check(CLI::ExistingFile);
  fitc->add_option("--target", fit.target)->required();
  fitc->add_option("--rho1", fit.rho1)->required();
  fitc->add_option("--rho2", fit.rho2)->required();
  fitc->add_option("--theta", fit.theta)->required();
  fitc->add_option("--a1", fit.a1);
  fitc->add_option("--a2", fit.a2);
  fitc->add_option("--niter", fit.niter);
  fitc->add_option("--burn-in", fit.burn_in);
  fitc->add_option("--seed", fit.seed);
  fitc->add_option("--balance", fit.balance, "plain or exact");
  fitc->add_option("--init", fit.init, "all or prior");
  fitc->add_option("--level", fit.level, "Credible ball level");
  fitc->add_option("--trace-out", fit.trace_out)->required();
  fitc->add_option("--summary-out", fit.summary_out)->required();

  CombineArgs comb;
  auto* combine = app.add_subcommand("combine", "Rolling out-of-sample forecast combination");
  combine->add_option("--data", comb.data)->required()->check(CLI::ExistingFile);
  combine->add_option("--target", comb.target)->required();
  combine->add_option("--method", comb.method)->required()->check(CLI::IsMember({"ds", "symdir", "lasso2", "avg"}));
  combine->add_option("--start-period", comb.start_period)->required();
  combine->add_option("--exclude-periods", comb.exclude)->delimiter(',');
  combine->add_option("--out", comb.out)->required();
  combine->add_option("--grid", comb.grid, "simulation or forecasting");
  combine->add_option("--theta", comb.theta);
  combine->add_option("--niter", comb.niter);
  combine->add_option("--burn-in", comb.burn_in);
  combine->add_option("--seed", comb.seed);
  combine->add_option("--threads", comb.threads);

  ReweightArgs rw;
  auto* reweight = app.add_subcommand("reweight", "Reweight ensemble members and report diagnostics");
  reweight->add_option("--train", rw.train)->required()->check(CLI::ExistingFile);
  reweight->add_option("--holdout", rw.holdout)->required()->check(CLI::ExistingFile);
  reweight->add_option("--target", rw.target)->required();
  reweight->add_option("--out", rw.out)->required();
  reweight->add_option("--diagnostics-out", rw.diagnostics_out)->required();
  reweight->add_option("--alpha1", rw.alpha1, "rho1 = K^alpha1");
  reweight->add_option("--rho2", rw.rho2, "Default 1/K");
  reweight->add_option("--theta", rw.theta);
  reweight->add_option("--threshold", rw.threshold, "Selection frequency threshold");
  reweight->add_option("--niter", rw.niter);
  reweight->add_option("--burn-in", rw.burn_in);
  reweight->add_option("--seed", rw.seed);

  auto* verify = app.add_subcommand("verify", "Run the oracle checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim, *simulate);
    if (fitc->parsed()) return run_fit(fit);
    if (combine->parsed()) return run_combine(comb);
    if (reweight->parsed()) return run_reweight(rw);
    if (verify->parsed()) return run_verification_suite(std::cout) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

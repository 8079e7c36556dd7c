#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <ostream>
#include <string>
#include <vector>

#include "dspike/csv.hpp"
#include "dspike/methods.hpp"
#include "dspike/parallel.hpp"
#include "dspike/scenario.hpp"

namespace dspike {

struct StudyConfig {
  ScenarioSpec scenario;
  MethodGrid grid = MethodGrid::simulation();
  std::vector<Method> methods{Method::DoubleSpike, Method::SymmetricDirichlet, Method::TwoStepLasso,
                              Method::SimpleAverage};
  std::size_t n_reps = 20;
  FitSettings fit;
  std::uint64_t base_seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const {
    scenario.validate();
    if (n_reps < 1) throw std::invalid_argument("study needs at least one replication");
    if (methods.empty()) throw std::invalid_argument("study needs at least one method");
    if (fit.niter == 0 || fit.burn_in >= fit.niter) {
      throw std::invalid_argument("study needs 0 <= burn_in < niter");
    }
  }
};

struct StudyCell {
  Method method = Method::SimpleAverage;
  Hyper hyper;
};

inline std::vector<StudyCell> study_cells(const StudyConfig& config) {
  std::vector<StudyCell> out;
  for (Method m : config.methods)
    for (const Hyper& h : method_cells(m, config.grid, config.scenario.K).cells) out.push_back({m, h});
  return out;
}

/// Outcome of one (replication, cell) job.
struct ReplicationRecord {
  std::size_t replication = 0;
  std::size_t cell = 0;
  Method method = Method::SimpleAverage;
  Hyper hyper;
  bool ok = false;
  double error = 0.0;       // mean per-iteration l1 error, or l1 error of the point estimate
  double acceptance = 0.0;  // MH acceptance rate after burn-in (Bayesian methods only)
  std::string message;      // failure reason
};

struct StudyRow {
  Method method = Method::SimpleAverage;
  Hyper hyper;
  double mean_error = 0.0;
  double mc_se = 0.0;
  std::size_t n_reps = 0;
  std::size_t n_failed = 0;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  std::vector<ReplicationRecord> records;

  /// Row with the smallest mean error for `m`, or nullptr.
  const StudyRow* best(Method m) const {
    const StudyRow* out = nullptr;
    for (const auto& r : rows) {
      if (r.method != m || r.n_reps == 0) continue;
      if (!out || r.mean_error < out->mean_error) out = &r;
    }
    return out;
  }
};

/// Averages per-replication records into one row per cell.
inline std::vector<StudyRow> aggregate_records(const std::vector<StudyCell>& cells,
                                               const std::vector<ReplicationRecord>& records) {
  std::vector<StudyRow> rows(cells.size());
  std::vector<std::vector<double>> errs(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    rows[c].method = cells[c].method;
    rows[c].hyper = cells[c].hyper;
  }
  for (const auto& r : records) {
    if (r.ok) errs[r.cell].push_back(r.error);
    else ++rows[r.cell].n_failed;
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& e = errs[c];
    rows[c].n_reps = e.size();
    if (e.empty()) continue;
    double s = 0.0;
    for (double x : e) s += x;
    const double mean = s / static_cast<double>(e.size());
    double ss = 0.0;
    for (double x : e) ss += (x - mean) * (x - mean);
    rows[c].mean_error = mean;
    rows[c].mc_se = e.size() > 1 ? std::sqrt(ss / static_cast<double>(e.size() - 1) /
                                             static_cast<double>(e.size()))
                                 : 0.0;
  }
  return rows;
}

/// Replication study: fresh data per replication, every method x grid cell
/// fitted on it. Each job's seed derives from (base_seed, replication, cell),
/// so the report does not depend on the number of threads.
inline StudyReport run_replication_study(const StudyConfig& config) {
  config.validate();
  const std::vector<StudyCell> cells = study_cells(config);

  std::vector<Scenario> datasets;
  datasets.reserve(config.n_reps);
  for (std::size_t r = 0; r < config.n_reps; ++r) {
    Rng rng = make_rng(config.base_seed, {r});
    datasets.push_back(generate_scenario(config.scenario, rng));
  }

  StudyReport report;
  report.records.resize(config.n_reps * cells.size());
  parallel_for(report.records.size(), config.threads, [&](std::size_t job) {
    const std::size_t r = job / cells.size();
    const std::size_t c = job % cells.size();
    ReplicationRecord& rec = report.records[job];
    rec.replication = r;
    rec.cell = c;
    rec.method = cells[c].method;
    rec.hyper = cells[c].hyper;
    const Scenario& sc = datasets[r];
    try {
      const std::uint64_t seed = derive_seed(config.base_seed, r, c);
      if (is_bayesian(rec.method)) {
        const Trace trace = run_method_chain(rec.method, rec.hyper, config.fit, sc.data, seed);
        rec.error = mean_l1_error(trace, config.fit.burn_in, sc.truth);
        rec.acceptance = trace.acceptance_rate(config.fit.burn_in);
      } else {
        rec.error = l1_error(fit_weights(rec.method, rec.hyper, config.fit, sc.data, seed), sc.truth);
      }
      rec.ok = std::isfinite(rec.error);
      if (!rec.ok) rec.message = "non-finite error";
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.message = e.what();
    }
  });
  report.rows = aggregate_records(cells, report.records);
  return report;
}

namespace detail {

inline std::string optional_number(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace detail

/// method,hyper_1,hyper_2,mean_error,mc_se,n_reps,n_failed
inline void write_study_report(std::ostream& out, const StudyReport& report) {
  out << "method,hyper_1,hyper_2,mean_error,mc_se,n_reps,n_failed\n";
  for (const auto& r : report.rows) {
    out << method_name(r.method) << ',' << detail::optional_number(r.hyper.a) << ','
        << detail::optional_number(r.hyper.b) << ',' << format_double(r.mean_error) << ','
        << format_double(r.mc_se) << ',' << r.n_reps << ',' << r.n_failed << '\n';
  }
}

/// replication,cell,method,hyper_1,hyper_2,ok,error,acceptance,message
inline void write_study_records(std::ostream& out, const StudyReport& report) {
  out << "replication,cell,method,hyper_1,hyper_2,ok,error,acceptance,message\n";
  for (const auto& r : report.records) {
    std::string msg = r.message;
    for (char& ch : msg)
      if (ch == ',' || ch == '\n') ch = ';';
    out << r.replication << ',' << r.cell << ',' << method_name(r.method) << ','
        << detail::optional_number(r.hyper.a) << ',' << detail::optional_number(r.hyper.b) << ','
        << (r.ok ? 1 : 0) << ',' << format_double(r.error) << ',' << format_double(r.acceptance)
        << ',' << msg << '\n';
  }
}

}  // namespace dspike

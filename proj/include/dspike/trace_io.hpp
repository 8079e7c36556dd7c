#pragma once

#include <ostream>
#include <string>

#include "dspike/csv.hpp"
#include "dspike/sampler.hpp"
#include "dspike/summaries.hpp"

namespace dspike {

/// One row per iteration: iter, accepted, move_kind, sigma_inv2, beta_1..beta_K.
inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "iter,accepted,move_kind,sigma_inv2";
  for (std::size_t i = 1; i <= trace.K; ++i) out << ",beta_" << i;
  out << '\n';
  for (std::size_t t = 0; t < trace.size(); ++t) {
    out << (t + 1) << ',' << (trace.moves[t].accepted ? 1 : 0) << ','
        << to_string(trace.moves[t].move.tag) << ',' << format_double(trace.precisions[t]);
    for (std::size_t i = 0; i < trace.K; ++i) {
      out << ',' << format_double(trace.betas(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)));
    }
    out << '\n';
  }
}

/// Single-row summary: mean_i, incl_freq_i, radius, level, sigma_inv2_mean.
inline void write_summary_csv(std::ostream& out, const PosteriorSummary& s) {
  const std::size_t K = s.mean.size();
  for (std::size_t i = 1; i <= K; ++i) out << "mean_" << i << ',';
  for (std::size_t i = 1; i <= K; ++i) out << "incl_freq_" << i << ',';
  out << "radius,level,sigma_inv2_mean\n";
  for (std::size_t i = 0; i < K; ++i) out << format_double(s.mean[i]) << ',';
  for (std::size_t i = 0; i < K; ++i) out << format_double(s.inclusion_freq[i]) << ',';
  out << format_double(s.credible_radius_l1) << ',' << format_double(s.level) << ','
      << format_double(s.sigma_inv2_mean) << '\n';
}

}  // namespace dspike

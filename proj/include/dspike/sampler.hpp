#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dspike/data.hpp"
#include "dspike/prior.hpp"
#include "dspike/random.hpp"
#include "dspike/simplex.hpp"

namespace dspike {

/// How the Metropolis-Hastings ratio treats the asymmetry of Add/Delete
/// proposals. Plain uses the prior-odds x likelihood ratio only;
/// ExactBalance also multiplies by q(gamma | gamma~) / q(gamma~ | gamma) so
/// that detailed balance holds exactly.
enum class BalanceMode { Plain, ExactBalance };

/// Starting inclusion vector. Prior draws gamma iid Bernoulli(theta);
/// AllIncluded starts from gamma = (1, ..., 1), i.e. beta near equal weights.
enum class InitMode { Prior, AllIncluded };

enum class MoveTag : std::uint8_t { Add = 0, Delete = 1, Swap = 2, Stay = 3 };

inline std::string_view to_string(MoveTag tag) {
  switch (tag) {
    case MoveTag::Add: return "add";
    case MoveTag::Delete: return "delete";
    case MoveTag::Swap: return "swap";
    case MoveTag::Stay: return "stay";
  }
  return "?";
}

inline std::string_view to_string(BalanceMode mode) {
  return mode == BalanceMode::Plain ? "plain" : "exact";
}

/// A proposed change of the inclusion vector. `requested` is the uniformly
/// drawn kind; `tag` is what was executed after infeasible kinds fall back
/// to Stay.
struct MoveKind {
  MoveTag tag = MoveTag::Stay;
  MoveTag requested = MoveTag::Stay;
  std::ptrdiff_t added = -1;    // index switched 0 -> 1
  std::ptrdiff_t removed = -1;  // index switched 1 -> 0
};

struct SamplerConfig {
  DoubleSpikePrior prior;
  std::size_t niter = 20000;
  std::size_t burn_in = 15000;
  BalanceMode balance = BalanceMode::Plain;
  InitMode init = InitMode::AllIncluded;
  /// Known noise precision; when empty the precision gets a Gamma(a1, a2)
  /// prior and is updated by Gibbs steps.
  std::optional<double> fixed_precision;
  std::uint64_t seed = 1;

  void validate() const {
    prior.validate();
    if (niter == 0 || burn_in >= niter) {
      throw std::invalid_argument("sampler config needs 0 <= burn_in < niter");
    }
    if (fixed_precision && !(*fixed_precision > 0.0)) {
      throw std::invalid_argument("fixed noise precision must be positive");
    }
  }
};

/// Transition kernel of the symmetric Dirichlet baseline. Independence
/// proposes a whole new beta from the prior each iteration. CoordinateRefresh
/// follows that with one sweep redrawing each latent A_i from its Gamma(rho, 1)
/// prior in turn (accepted on the likelihood ratio), which mixes far better
/// when rho is small.
enum class SymmetricKernel { Independence, CoordinateRefresh };

/// Configuration of the symmetric Dirichlet baseline chain.
struct SymmetricConfig {
  double rho = 1.0;
  SymmetricKernel kernel = SymmetricKernel::Independence;
  std::size_t niter = 20000;
  std::size_t burn_in = 15000;
  std::optional<double> fixed_precision;
  double a1 = 0.01;
  double a2 = 0.01;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("symmetric Dirichlet needs rho > 0");
    if (niter == 0 || burn_in >= niter) {
      throw std::invalid_argument("sampler config needs 0 <= burn_in < niter");
    }
    if (fixed_precision && !(*fixed_precision > 0.0)) {
      throw std::invalid_argument("fixed noise precision must be positive");
    }
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw std::invalid_argument("noise prior needs a1, a2 > 0");
  }
};

/// Current (gamma, A, beta, precision) of one chain. A is held on the log
/// scale; beta = A / ||A||_1.
struct ChainState {
  InclusionVector gamma;
  std::vector<double> log_a;
  WeightVector beta;
  double precision = 1.0;
};

struct Proposal {
  MoveKind move;
  InclusionVector gamma;
  std::vector<double> log_a;
  WeightVector beta;
};

struct MoveRecord {
  MoveKind move;
  bool accepted = false;
};

/// Ordered post-initialization samples of one chain.
struct Trace {
  using BetaMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  std::string method;  // "double-spike" or "symmetric-dirichlet"
  SamplerConfig config;
  std::size_t K = 0;
  BetaMatrix betas;                  // niter x K
  std::vector<std::uint8_t> gammas;  // niter * K, row-major
  std::vector<double> precisions;
  std::vector<MoveRecord> moves;

  std::size_t size() const noexcept { return precisions.size(); }
  std::uint64_t seed() const noexcept { return config.seed; }
  bool included(std::size_t t, std::size_t i) const { return gammas[t * K + i] != 0; }

  double acceptance_rate(std::size_t from = 0) const {
    if (from >= moves.size()) return 0.0;
    std::size_t acc = 0;
    for (std::size_t t = from; t < moves.size(); ++t) acc += moves[t].accepted ? 1 : 0;
    return static_cast<double>(acc) / static_cast<double>(moves.size() - from);
  }

  void reserve(std::size_t niter, std::size_t k) {
    K = k;
    betas.resize(static_cast<Eigen::Index>(niter), static_cast<Eigen::Index>(k));
    gammas.reserve(niter * k);
    precisions.reserve(niter);
    moves.reserve(niter);
  }

  void record(const ChainState& s, const MoveRecord& m) {
    const auto t = static_cast<Eigen::Index>(precisions.size());
    betas.row(t) = s.beta.values().transpose();
    gammas.insert(gammas.end(), s.gamma.bits().begin(), s.gamma.bits().end());
    precisions.push_back(s.precision);
    moves.push_back(m);
  }
};

/// Initial state: gamma iid Bernoulli(theta), A from its conditional prior,
/// precision at its prior mean a1 / a2 (or at the fixed value).
inline ChainState init_chain(const SamplerConfig& config, std::size_t K, Rng& rng) {
  if (K < 2) throw std::invalid_argument("init_chain: K must be >= 2");
  PriorDraw d = config.init == InitMode::Prior
                    ? sample_double_spike_prior(config.prior, K, rng)
                    : sample_given_inclusion(config.prior, InclusionVector(K, true), rng);
  ChainState s;
  s.gamma = std::move(d.gamma);
  s.log_a = std::move(d.log_a);
  s.beta = std::move(d.beta);
  s.precision = config.fixed_precision ? *config.fixed_precision : config.prior.a1 / config.prior.a2;
  return s;
}

/// Proposal: pick Add/Delete/Swap/Stay with equal probability,
/// edit gamma accordingly and redraw every latent Gamma variate from its
/// conditional prior given the candidate gamma.
inline Proposal propose_move(const ChainState& state, const DoubleSpikePrior& prior, Rng& rng) {
  const std::size_t K = state.gamma.size();
  std::vector<std::size_t> zeros;
  std::vector<std::size_t> ones;
  zeros.reserve(K);
  ones.reserve(K);
  for (std::size_t i = 0; i < K; ++i) (state.gamma[i] ? ones : zeros).push_back(i);

  MoveKind move;
  move.requested = static_cast<MoveTag>(uniform_index(rng, 4));
  move.tag = move.requested;
  InclusionVector gamma = state.gamma;
  switch (move.requested) {
    case MoveTag::Add:
      if (zeros.empty()) {
        move.tag = MoveTag::Stay;
      } else {
        move.added = static_cast<std::ptrdiff_t>(zeros[uniform_index(rng, zeros.size())]);
        gamma.set(static_cast<std::size_t>(move.added), true);
      }
      break;
    case MoveTag::Delete:
      if (ones.empty()) {
        move.tag = MoveTag::Stay;
      } else {
        move.removed = static_cast<std::ptrdiff_t>(ones[uniform_index(rng, ones.size())]);
        gamma.set(static_cast<std::size_t>(move.removed), false);
      }
      break;
    case MoveTag::Swap:
      if (zeros.empty() || ones.empty()) {
        move.tag = MoveTag::Stay;
      } else {
        move.added = static_cast<std::ptrdiff_t>(zeros[uniform_index(rng, zeros.size())]);
        move.removed = static_cast<std::ptrdiff_t>(ones[uniform_index(rng, ones.size())]);
        gamma.set(static_cast<std::size_t>(move.added), true);
        gamma.set(static_cast<std::size_t>(move.removed), false);
      }
      break;
    case MoveTag::Stay:
      break;
  }
  PriorDraw d = sample_given_inclusion(prior, std::move(gamma), rng);
  return Proposal{move, std::move(d.gamma), std::move(d.log_a), std::move(d.beta)};
}

/// log q(gamma | gamma~) - log q(gamma~ | gamma) for an executed move from a
/// state with `active` of `K` coordinates included. Swap and Stay are
/// symmetric.
inline double proposal_log_correction(MoveTag executed, std::size_t active, std::size_t K) {
  const double m1 = static_cast<double>(active);
  const double m0 = static_cast<double>(K - active);
  switch (executed) {
    case MoveTag::Add: return std::log(m0) - std::log(m1 + 1.0);
    case MoveTag::Delete: return std::log(m1) - std::log(m0 + 1.0);
    default: return 0.0;
  }
}

/// Log acceptance ratio from precomputed residual sums of squares.
inline double acceptance_log_ratio(std::size_t active, std::size_t candidate_active, MoveTag executed,
                                   std::size_t K, double rss, double candidate_rss, double precision,
                                   double theta, BalanceMode mode) {
  const double dk = static_cast<double>(candidate_active) - static_cast<double>(active);
  double lr = 0.5 * precision * (rss - candidate_rss);
  if (dk != 0.0) lr += dk * (std::log(theta) - std::log1p(-theta));
  if (mode == BalanceMode::ExactBalance) lr += proposal_log_correction(executed, active, K);
  return lr;
}

inline double acceptance_log_ratio(const ChainState& state, const Proposal& candidate, double theta,
                                   const EnsembleData& data, BalanceMode mode) {
  if (static_cast<Eigen::Index>(state.beta.size()) != data.K() ||
      candidate.beta.size() != state.beta.size()) {
    throw std::invalid_argument("acceptance_log_ratio: dimension mismatch");
  }
  return acceptance_log_ratio(state.gamma.count(), candidate.gamma.count(), candidate.move.tag,
                              state.gamma.size(), data.rss(state.beta.values()),
                              data.rss(candidate.beta.values()), state.precision, theta, mode);
}

/// Conjugate draw of the noise precision from Gamma(a1 + n/2, a2 + RSS/2).
inline double gibbs_update_sigma(const WeightVector& beta, const EnsembleData& data, double a1,
                                 double a2, Rng& rng) {
  const double rss = data.n() == 0 ? 0.0 : data.rss(beta.values());
  return gamma_variate(rng, a1 + 0.5 * static_cast<double>(data.n()), a2 + 0.5 * rss);
}

/// Metropolis-Hastings coin: accept with probability exp(min(0, log_ratio)).
inline bool accept(double log_ratio, Rng& rng) {
  const double u = std::generate_canonical<double, 53>(rng);
  return u < std::exp(std::min(0.0, log_ratio));
}

/// Runs the Add/Delete/Swap/Stay sampler for config.niter iterations. The
/// result depends only on (config, data).
inline Trace run_chain(const SamplerConfig& config, const EnsembleData& data) {
  config.validate();
  const auto K = static_cast<std::size_t>(data.K());
  Rng rng = make_rng(config.seed);
  ChainState state = init_chain(config, K, rng);
  double rss = data.rss(state.beta.values());

  Trace trace;
  trace.method = "double-spike";
  trace.config = config;
  trace.reserve(config.niter, K);

  for (std::size_t t = 0; t < config.niter; ++t) {
    Proposal p = propose_move(state, config.prior, rng);
    const double cand_rss = data.rss(p.beta.values());
    const double lr = acceptance_log_ratio(state.gamma.count(), p.gamma.count(), p.move.tag, K, rss,
                                           cand_rss, state.precision, config.prior.theta,
                                           config.balance);
    MoveRecord rec{p.move, accept(lr, rng)};
    if (rec.accepted) {
      state.gamma = std::move(p.gamma);
      state.log_a = std::move(p.log_a);
      state.beta = std::move(p.beta);
      rss = cand_rss;
    }
    if (!config.fixed_precision) {
      state.precision = gamma_variate(rng, config.prior.a1 + 0.5 * static_cast<double>(data.n()),
                                      config.prior.a2 + 0.5 * rss);
    }
    trace.record(state, rec);
  }
  return trace;
}

namespace detail {

/// Running Xβ for β = A / ||A||_1 with A held as exp(log_a - shift), so
/// single-coordinate changes cost O(n).
class LatentCombination {
 public:
  LatentCombination(const EnsembleData& data, const std::vector<double>& log_a) : data_(data) {
    reset(log_a);
  }

  void reset(const std::vector<double>& log_a) {
    log_a_ = log_a;
    shift_ = *std::max_element(log_a.begin(), log_a.end());
    a_.resize(static_cast<Eigen::Index>(log_a.size()));
    for (std::size_t i = 0; i < log_a.size(); ++i) {
      a_[static_cast<Eigen::Index>(i)] = std::exp(log_a[i] - shift_);
    }
    total_ = a_.sum();
    xa_.noalias() = data_.X() * a_;
  }

  double rss() const { return (data_.y() - xa_ / total_).squaredNorm(); }

  /// RSS after replacing coordinate i with exp(new_log_a); leaves the state
  /// unchanged. `scratch` receives the candidate X A.
  double rss_if(std::size_t i, double new_log_a, Eigen::VectorXd& scratch, double& new_a,
                double& new_total) {
    if (new_log_a > shift_) rescale(new_log_a);
    const auto k = static_cast<Eigen::Index>(i);
    new_a = std::exp(new_log_a - shift_);
    pending_log_a_ = new_log_a;
    if (a_[k] > 0.5 * total_) {
      // replacing the dominant term: the running sums would cancel, so
      // rebuild the candidate from the log values
      std::vector<double> cand = log_a_;
      cand[i] = new_log_a;
      const double shift = *std::max_element(cand.begin(), cand.end());
      Eigen::VectorXd a(a_.size());
      for (std::size_t j = 0; j < cand.size(); ++j) a[static_cast<Eigen::Index>(j)] = std::exp(cand[j] - shift);
      new_total = a.sum();
      scratch.noalias() = data_.X() * a;
      pending_full_ = true;
      return (data_.y() - scratch / new_total).squaredNorm();
    }
    pending_full_ = false;
    new_total = total_ - a_[k] + new_a;
    scratch = xa_ + (new_a - a_[k]) * data_.X().col(k);
    return (data_.y() - scratch / new_total).squaredNorm();
  }

  /// Accepts the candidate from the preceding rss_if call.
  void commit(std::size_t i, double new_a, double new_total, Eigen::VectorXd& scratch) {
    log_a_[i] = pending_log_a_;
    if (pending_full_) {
      reset(log_a_);
      return;
    }
    a_[static_cast<Eigen::Index>(i)] = new_a;
    total_ = new_total;
    xa_.swap(scratch);
  }

 private:
  void rescale(double new_shift) {
    const double f = std::exp(shift_ - new_shift);
    a_ *= f;
    xa_ *= f;
    total_ *= f;
    shift_ = new_shift;
  }

  const EnsembleData& data_;
  Eigen::VectorXd a_;
  Eigen::VectorXd xa_;
  std::vector<double> log_a_;
  double total_ = 0.0;
  double shift_ = 0.0;
  double pending_log_a_ = 0.0;
  bool pending_full_ = false;
};

}  // namespace detail

/// Baseline: symmetric Dir(rho, ..., rho) prior, sampled by independence
/// Metropolis-Hastings with prior proposals. The prior cancels against the
/// proposal, so the ratio is the likelihood ratio alone.
inline Trace run_symmetric_dirichlet_chain(const SymmetricConfig& config, const EnsembleData& data) {
  config.validate();
  const auto K = static_cast<std::size_t>(data.K());
  Rng rng = make_rng(config.seed);

  DoubleSpikePrior flat{config.rho, config.rho, 0.0, config.a1, config.a2};
  ChainState state;
  {
    PriorDraw d = sample_given_inclusion(flat, InclusionVector(K), rng);
    state.gamma = std::move(d.gamma);
    state.log_a = std::move(d.log_a);
    state.beta = std::move(d.beta);
  }
  state.precision = config.fixed_precision ? *config.fixed_precision : config.a1 / config.a2;
  double rss = data.rss(state.beta.values());

  Trace trace;
  trace.method = "symmetric-dirichlet";
  trace.config.prior = flat;
  trace.config.niter = config.niter;
  trace.config.burn_in = config.burn_in;
  trace.config.fixed_precision = config.fixed_precision;
  trace.config.seed = config.seed;
  trace.reserve(config.niter, K);

  Eigen::VectorXd scratch;
  for (std::size_t t = 0; t < config.niter; ++t) {
    PriorDraw d = sample_given_inclusion(flat, state.gamma, rng);
    const double cand_rss = data.rss(d.beta.values());
    MoveRecord rec;
    rec.accepted = accept(0.5 * state.precision * (rss - cand_rss), rng);
    if (rec.accepted) {
      state.log_a = std::move(d.log_a);
      state.beta = std::move(d.beta);
      rss = cand_rss;
    }
    if (config.kernel == SymmetricKernel::CoordinateRefresh) {
      detail::LatentCombination comb(data, state.log_a);
      rss = comb.rss();
      for (std::size_t i = 0; i < K; ++i) {
        const double proposal = log_gamma_variate(rng, config.rho);
        double new_a = 0.0;
        double new_total = 0.0;
        const double cand = comb.rss_if(i, proposal, scratch, new_a, new_total);
        if (accept(0.5 * state.precision * (rss - cand), rng)) {
          comb.commit(i, new_a, new_total, scratch);
          state.log_a[i] = proposal;
          rss = cand;
        }
      }
      state.beta = normalize_log(state.log_a);
      rss = data.rss(state.beta.values());
    }
    if (!config.fixed_precision) {
      state.precision = gamma_variate(rng, config.a1 + 0.5 * static_cast<double>(data.n()),
                                      config.a2 + 0.5 * rss);
    }
    trace.record(state, rec);
  }
  return trace;
}

}  // namespace dspike

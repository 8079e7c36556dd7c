#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace dspike {

/// Random source used across the library. Every stochastic routine takes one
/// by reference; nothing touches global state.
using Rng = std::mt19937_64;

/// Seeds an engine from a base seed plus stream coordinates (replication
/// index, grid cell, ...). Distinct coordinate tuples give unrelated streams.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Uniform draw on the open-closed interval (0, 1].
inline double uniform_positive(Rng& rng) {
  return 1.0 - std::generate_canonical<double, 53>(rng);
}

/// log of a Gamma(shape, 1) variate. For shape < 1 the draw is boosted to
/// shape + 1 and multiplied by U^(1/shape), carried out on the log scale so
/// that tiny shapes (ρ₂ ~ 1e-4) never underflow to an exact zero.
inline double log_gamma_variate(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    double x = g(rng);
    while (!(x > 0.0)) x = g(rng);
    return std::log(x);
  }
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  double x = g(rng);
  while (!(x > 0.0)) x = g(rng);
  return std::log(x) + std::log(uniform_positive(rng)) / shape;
}

/// Gamma(shape, rate) variate, floored at the smallest normal double.
inline double gamma_variate(Rng& rng, double shape, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("gamma rate must be positive");
  const double v = std::exp(log_gamma_variate(rng, shape) - std::log(rate));
  return std::max(v, std::numeric_limits<double>::min());
}

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::generate_canonical<double, 53>(rng) < p;
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

/// Uniform index in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> d(0, n - 1);
  return d(rng);
}

}  // namespace dspike

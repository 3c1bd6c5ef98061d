#pragma once

// Wireless system simulators. These are the "model" the learner never sees:
// AWGN parallel channels, the multiple-access interference channel, and the
// fading process driving both. Fading states are channel powers (squared
// magnitudes), so the exponential sampler draws the power directly. All
// rates are natural logarithms.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "zopd/random.hpp"
#include "zopd/vec.hpp"

namespace zopd {

struct ChannelParams {
  Vec noise;       // nu, per user, > 0
  double p_max = 0.0;
  Vec weights;     // user priorities, >= 0, summing to 1

  int n_users() const { return static_cast<int>(noise.size()); }

  void validate() const {
    if (noise.empty()) throw std::invalid_argument("ChannelParams: noise vector is empty");
    for (double v : noise)
      if (!(v > 0.0)) throw std::invalid_argument("ChannelParams: noise must be entrywise > 0");
    if (!(p_max > 0.0)) throw std::invalid_argument("ChannelParams: p_max must be > 0");
    if (weights.size() != noise.size())
      throw std::invalid_argument("ChannelParams: weights/noise length mismatch");
    if (!all_nonnegative(weights))
      throw std::invalid_argument("ChannelParams: weights must be entrywise >= 0");
    if (std::abs(sum(weights) - 1.0) > 1e-12)
      throw std::invalid_argument("ChannelParams: weights must sum to 1");
  }
};

// Per-coordinate i.i.d. fading: exponential with a given rate (the default
// rate 1/2 gives mean 2), or a deterministic fixture vector for tests and
// closed-form oracles.
class FadingSampler {
 public:
  FadingSampler() = default;

  static FadingSampler exponential(int dim, double rate, std::uint64_t seed) {
    if (dim <= 0) throw std::invalid_argument("FadingSampler: dim must be positive");
    if (!(rate > 0.0)) throw std::invalid_argument("FadingSampler: rate must be positive");
    FadingSampler s;
    s.dim_ = dim;
    s.rate_ = rate;
    s.rng_ = SplitMix64(seed);
    s.fixed_ = false;
    return s;
  }

  static FadingSampler fixed(Vec values) {
    if (values.empty()) throw std::invalid_argument("FadingSampler: fixture is empty");
    for (double v : values)
      if (v < 0.0) throw std::invalid_argument("FadingSampler: fixture must be >= 0");
    FadingSampler s;
    s.dim_ = static_cast<int>(values.size());
    s.fixture_ = std::move(values);
    s.fixed_ = true;
    return s;
  }

  int dim() const { return dim_; }
  bool is_fixed() const { return fixed_; }
  double rate() const { return rate_; }

  void reseed(std::uint64_t seed) { rng_ = SplitMix64(seed); }

  Vec draw() {
    if (fixed_) return fixture_;
    Vec out(static_cast<std::size_t>(dim_));
    for (double& v : out) v = -std::log(rng_.uniform01()) / rate_;
    return out;
  }

 private:
  int dim_ = 0;
  double rate_ = 0.5;
  Vec fixture_;
  SplitMix64 rng_{0};
  bool fixed_ = false;
};

// rate_i = log(1 + h_i p_i / nu_i)
inline Vec awgn_rates(const Vec& h, const Vec& p, const ChannelParams& params) {
  const std::size_t n = h.size();
  if (p.size() != n || params.noise.size() != n)
    throw std::invalid_argument("awgn_rates: dimension mismatch");
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::log1p(h[i] * p[i] / params.noise[i]);
  return out;
}

// rate_i = log(1 + h_i p_i / (nu_i + sum_{j != i} h_j p_j))
inline Vec mai_rates(const Vec& h, const Vec& p, const ChannelParams& params) {
  const std::size_t n = h.size();
  if (p.size() != n || params.noise.size() != n)
    throw std::invalid_argument("mai_rates: dimension mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += h[j] * p[j];
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double interference = total - h[i] * p[i];
    out[i] = std::log1p(h[i] * p[i] / (params.noise[i] + interference));
  }
  return out;
}

// Canonical stacked service vector: the rates followed by the expected-power
// budget component p_max - sum_i p_i.
template <class RatesFn>
Vec service_with_budget(RatesFn&& rates, const Vec& h, const Vec& p, const ChannelParams& params) {
  Vec out = rates(h, p, params);
  out.push_back(params.p_max - sum(p));
  return out;
}

// Uniform draw from the probability simplex (normalized unit exponentials).
inline Vec simplex_weights(int n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("simplex_weights: n must be positive");
  SplitMix64 rng(seed);
  Vec out(static_cast<std::size_t>(n));
  double total = 0.0;
  for (double& v : out) {
    v = -std::log(rng.uniform01());
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace zopd

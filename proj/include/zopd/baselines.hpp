#pragma once

// Model-aware reference policies: clairvoyant waterfilling for the AWGN
// program, uniform power allocation, and per-realization scalar WMMSE for
// the interference channel. These see the true channel model and exist only
// as benchmarks; the learner never touches them.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "zopd/channels.hpp"
#include "zopd/vec.hpp"

namespace zopd {

struct ErgodicEstimate {
  double sumrate = 0.0;
  double sumrate_se = 0.0;
  double power = 0.0;
  double power_se = 0.0;
};

// Monte Carlo estimate of the ergodic weighted sumrate and expected power of
// a per-realization allocation rule.
template <class Rule, class RatesFn>
ErgodicEstimate ergodic_eval(Rule&& rule, RatesFn&& rates, const ChannelParams& params,
                             FadingSampler fading, int mc_n) {
  if (mc_n < 1) throw std::invalid_argument("ergodic_eval: mc_n must be >= 1");
  params.validate();
  double sum_r = 0.0, sum_r2 = 0.0, sum_p = 0.0, sum_p2 = 0.0;
  for (int k = 0; k < mc_n; ++k) {
    const Vec h = fading.draw();
    const Vec p = rule(h);
    const double r = dot(params.weights, rates(h, p, params));
    const double pw = sum(p);
    sum_r += r;
    sum_r2 += r * r;
    sum_p += pw;
    sum_p2 += pw * pw;
  }
  ErgodicEstimate out;
  out.sumrate = sum_r / mc_n;
  out.power = sum_p / mc_n;
  if (mc_n > 1) {
    out.sumrate_se = std::sqrt(std::max(0.0, sum_r2 / mc_n - out.sumrate * out.sumrate) / (mc_n - 1));
    out.power_se = std::sqrt(std::max(0.0, sum_p2 / mc_n - out.power * out.power) / (mc_n - 1));
  }
  return out;
}

// Globally optimal unparameterized policy for the AWGN program, from the
// pointwise optimality condition p_i(h) = (w_i / lambda - nu_i / h_i)_+ with
// the dual price lambda tuned by bisection until the expected total power
// meets the budget. Per-realization allocations carry a large finite cap so
// Monte Carlo stays finite under vanishing fading.
struct WaterfillingSolution {
  double lambda_star = 0.0;
  bool budget_binding = true;
  ErgodicEstimate ergodic;
  ChannelParams params;
  double cap = 0.0;

  Vec allocate(const Vec& h) const {
    const std::size_t n = h.size();
    Vec p(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (lambda_star <= 0.0) {
        p[i] = h[i] > 0.0 ? cap : 0.0;
        continue;
      }
      const double level = params.weights[i] / lambda_star -
                           (h[i] > 0.0 ? params.noise[i] / h[i] : std::numeric_limits<double>::infinity());
      p[i] = std::min(std::max(level, 0.0), cap);
    }
    return p;
  }
};

inline WaterfillingSolution clairvoyant_awgn(const ChannelParams& params, FadingSampler fading,
                                             int mc_n, double tol) {
  if (mc_n < 1000) throw std::invalid_argument("clairvoyant_awgn: mc_n must be >= 1000");
  if (!(tol > 0.0)) throw std::invalid_argument("clairvoyant_awgn: tol must be > 0");
  params.validate();

  WaterfillingSolution sol;
  sol.params = params;
  sol.cap = 1e3 * params.p_max;

  // Common random numbers across all bisection probes.
  std::vector<Vec> draws;
  draws.reserve(static_cast<std::size_t>(mc_n));
  for (int k = 0; k < mc_n; ++k) draws.push_back(fading.draw());

  const auto mean_power = [&](double lambda) {
    double acc = 0.0;
    sol.lambda_star = lambda;
    for (const Vec& h : draws) acc += sum(sol.allocate(h));
    return acc / mc_n;
  };

  double lo = 1e-8, hi = 1e8;
  if (mean_power(lo) <= params.p_max) {
    // Budget slack even at a vanishing price: the constraint does not bind.
    sol.lambda_star = 0.0;
    sol.budget_binding = false;
  } else {
    double lambda = lo;
    for (int it = 0; it < 200; ++it) {
      lambda = 0.5 * (lo + hi);
      const double power = mean_power(lambda);
      if (std::abs(power - params.p_max) <= tol) break;
      if (power > params.p_max)
        lo = lambda;
      else
        hi = lambda;
    }
    sol.lambda_star = lambda;
    sol.budget_binding = true;
  }

  // Ergodic estimates on the same common-random-number draw set.
  double sum_r = 0.0, sum_r2 = 0.0, sum_p = 0.0, sum_p2 = 0.0;
  for (const Vec& h : draws) {
    const Vec p = sol.allocate(h);
    const double r = dot(params.weights, awgn_rates(h, p, params));
    const double pw = sum(p);
    sum_r += r;
    sum_r2 += r * r;
    sum_p += pw;
    sum_p2 += pw * pw;
  }
  sol.ergodic.sumrate = sum_r / mc_n;
  sol.ergodic.power = sum_p / mc_n;
  sol.ergodic.sumrate_se =
      std::sqrt(std::max(0.0, sum_r2 / mc_n - sol.ergodic.sumrate * sol.ergodic.sumrate) / (mc_n - 1));
  sol.ergodic.power_se =
      std::sqrt(std::max(0.0, sum_p2 / mc_n - sol.ergodic.power * sol.ergodic.power) / (mc_n - 1));
  return sol;
}

// p_i identically p_max / N_S.
inline Vec uniform_policy(const ChannelParams& params) {
  params.validate();
  return constant(static_cast<std::size_t>(params.n_users()), params.p_max / params.n_users());
}

// Per-realization weighted-sumrate maximization on the scalar interference
// channel by alternating weighted-MMSE updates in the amplitude domain
// (v_i = sqrt(p_i), channel amplitudes sqrt(h_i)), with the power budget
// enforced through a bisection on its multiplier. The alternation is run
// from the uniform start, a channel-proportional start, and every
// single-user vertex; the best stationary point wins, which in particular
// makes the result dominate the uniform and all single-user allocations.
// Still a stationary-point heuristic, not a certified global optimum.
struct WmmseResult {
  Vec powers;
  double weighted_sumrate = 0.0;
  int iterations = 0;    // iterations spent by the winning start
  bool converged = false;
  std::vector<double> sumrate_path;  // winning start's sumrate after every full update
};

namespace detail {

struct WmmsePath {
  Vec v;
  double value = 0.0;
  std::vector<double> path;
  int iterations = 0;
  bool converged = false;
};

inline WmmsePath wmmse_from(Vec v, const Vec& h, const Vec& ha, const ChannelParams& params,
                            int max_iters, double tol) {
  const std::size_t n = h.size();
  const auto sumrate_of = [&](const Vec& amps) {
    Vec p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = amps[i] * amps[i];
    return dot(params.weights, mai_rates(h, p, params));
  };

  WmmsePath out;
  Vec u(n), wmse(n);
  double last = sumrate_of(v);
  out.path.push_back(last);
  Vec best_v = v;
  double best_val = last;

  for (int it = 0; it < max_iters; ++it) {
    // MMSE receive scalars.
    double rx_power = 0.0;
    for (std::size_t j = 0; j < n; ++j) rx_power += h[j] * v[j] * v[j];
    for (std::size_t i = 0; i < n; ++i) u[i] = ha[i] * v[i] / (params.noise[i] + rx_power);

    // MSE weights 1 / e_i.
    for (std::size_t i = 0; i < n; ++i) wmse[i] = 1.0 / (1.0 - u[i] * ha[i] * v[i]);

    // Amplitude update: v_i(delta) with the budget multiplier found by
    // bisection on the feasible side of sum v^2 <= p_max.
    const auto amplitudes = [&](double delta) {
      Vec amps(n);
      double cross = 0.0;
      for (std::size_t j = 0; j < n; ++j) cross += params.weights[j] * wmse[j] * u[j] * u[j];
      for (std::size_t i = 0; i < n; ++i) {
        const double numer = params.weights[i] * wmse[i] * u[i] * ha[i];
        const double denom = h[i] * cross + delta;
        amps[i] = denom > 0.0 ? numer / denom : 0.0;
      }
      return amps;
    };
    const auto total_power = [&](const Vec& amps) {
      double acc = 0.0;
      for (double a : amps) acc += a * a;
      return acc;
    };

    Vec cand = amplitudes(0.0);
    if (total_power(cand) > params.p_max) {
      double d_lo = 0.0, d_hi = 1.0;
      while (total_power(amplitudes(d_hi)) > params.p_max) d_hi *= 2.0;
      Vec feasible = amplitudes(d_hi);
      for (int b = 0; b < 200; ++b) {
        const double mid = 0.5 * (d_lo + d_hi);
        const Vec probe = amplitudes(mid);
        if (total_power(probe) > params.p_max) {
          d_lo = mid;
        } else {
          d_hi = mid;
          feasible = probe;
        }
      }
      cand = feasible;  // the feasible endpoint, so the budget always holds
    }
    v = cand;

    const double now = sumrate_of(v);
    out.path.push_back(now);
    out.iterations = it + 1;
    if (now > best_val) {
      best_val = now;
      best_v = v;
    }
    if (std::abs(now - last) <= tol) {
      out.converged = true;
      break;
    }
    last = now;
  }
  out.v = std::move(best_v);
  out.value = best_val;
  return out;
}

}  // namespace detail

inline WmmseResult wmmse_powers(const Vec& h, const ChannelParams& params, int max_iters = 100,
                                double tol = 1e-6) {
  params.validate();
  const std::size_t n = h.size();
  if (static_cast<int>(n) != params.n_users())
    throw std::invalid_argument("wmmse_powers: fading dimension mismatch");
  for (double v : h)
    if (v < 0.0) throw std::invalid_argument("wmmse_powers: fading must be >= 0");

  WmmseResult out;
  if (max_abs(h) == 0.0) {
    // Any allocation earns zero rate; return the zero vector.
    out.powers = zeros(n);
    out.converged = true;
    return out;
  }

  Vec ha(n);
  for (std::size_t i = 0; i < n; ++i) ha[i] = std::sqrt(h[i]);

  std::vector<Vec> starts;
  starts.push_back(Vec(n, std::sqrt(params.p_max / static_cast<double>(n))));
  {
    Vec prop(n, 0.0);
    const double total = sum(h);
    if (total > 0.0)
      for (std::size_t i = 0; i < n; ++i) prop[i] = std::sqrt(params.p_max * h[i] / total);
    starts.push_back(std::move(prop));
  }
  for (std::size_t i = 0; i < n; ++i) {
    Vec vertex(n, 0.0);
    vertex[i] = std::sqrt(params.p_max);
    starts.push_back(std::move(vertex));
  }

  detail::WmmsePath best;
  double best_val = -1.0;
  for (const Vec& v0 : starts) {
    detail::WmmsePath run = detail::wmmse_from(v0, h, ha, params, max_iters, tol);
    if (run.value > best_val) {
      best_val = run.value;
      best = std::move(run);
    }
  }

  out.powers.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.powers[i] = best.v[i] * best.v[i];
  out.weighted_sumrate = best_val;
  out.iterations = best.iterations;
  out.converged = best.converged;
  out.sumrate_path = std::move(best.path);
  return out;
}

}  // namespace zopd

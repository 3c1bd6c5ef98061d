#pragma once

// The model-free randomized primal-dual loop. Each iteration draws one fresh
// fading state and one Gaussian direction per decision block, spends exactly
// three service probes (two for the primal step, one for the dual step, all
// against the same fading draw), and applies projected stochastic
// quasi-gradient updates to (x, theta, lambda_s, lambda_r).
//
// mu_s == 0 routes the metric-side updates to user-supplied analytic
// gradients; mu_r == 0 analogously requires an analytic service Jacobian and
// spends only the two remaining probes.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zopd/problem.hpp"
#include "zopd/random.hpp"
#include "zopd/smoothing.hpp"
#include "zopd/vec.hpp"

namespace zopd {

inline Vec project_box(const Vec& v, const Vec& lower, const Vec& upper) {
  if (v.size() != lower.size() || v.size() != upper.size())
    throw std::invalid_argument("project_box: dimension mismatch");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("project_box: lower > upper");
    out[i] = std::min(std::max(v[i], lower[i]), upper[i]);
  }
  return out;
}

inline Vec positive_part(const Vec& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return out;
}

// Trailing moving average with a truncated head: entry t averages the last
// min(window, t+1) samples. The sliding sum is rebuilt exactly once per
// window stride, so rounding drift never outlives one window.
inline std::vector<double> ergodic_average(const std::vector<double>& series, long window) {
  if (window < 1) throw std::invalid_argument("ergodic_average: window must be >= 1");
  if (window == 1) return series;
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (static_cast<long>(t) % window == 0) {
      acc = 0.0;
      const std::size_t lo = t >= static_cast<std::size_t>(window - 1)
                                 ? t - static_cast<std::size_t>(window - 1)
                                 : 0;
      for (std::size_t k = lo; k <= t; ++k) acc += series[k];
    } else {
      acc += series[t];
      if (static_cast<long>(t) >= window) acc -= series[t - static_cast<std::size_t>(window)];
    }
    const long span = std::min<long>(window, static_cast<long>(t) + 1);
    out[t] = acc / static_cast<double>(span);
  }
  return out;
}

struct PdState {
  Vec x;
  Vec theta;
  Vec lambda_s;
  Vec lambda_r;
  long iter = 0;
};

// Constant per-coordinate step sizes with an optional harmonic decay
// factor(n) = 1 / (1 + decay * n).
struct StepSizes {
  Vec gamma_x;
  Vec gamma_theta;
  Vec gamma_lambda_s;
  Vec gamma_lambda_r;
  double decay = 0.0;

  double factor(long n) const { return decay > 0.0 ? 1.0 / (1.0 + decay * n) : 1.0; }

  void validate(const ErgodicProblem& prob) const {
    auto check = [](const Vec& g, int n, const char* name) {
      if (static_cast<int>(g.size()) != n)
        throw std::invalid_argument(std::string("StepSizes: ") + name + " has wrong length");
      if (!all_nonnegative(g))
        throw std::invalid_argument(std::string("StepSizes: ") + name + " must be >= 0");
    };
    check(gamma_x, prob.n_x, "gamma_x");
    check(gamma_theta, prob.theta_dim, "gamma_theta");
    check(gamma_lambda_s, prob.n_g, "gamma_lambda_s");
    check(gamma_lambda_r, prob.n_service, "gamma_lambda_r");
    if (decay < 0.0) throw std::invalid_argument("StepSizes: decay must be >= 0");
  }
};

// Per-iteration record: the state entering the step plus the fresh probe.
struct IterRecord {
  long iter = 0;
  double objective = 0.0;  // g0(x^n)
  Vec service;             // f(phi(H^{n+1}, theta^n), H^{n+1})
  Vec violation;           // extended x^n minus service (positive = violated)
  Vec utility;             // g(x^n), empty when n_g == 0
  Vec lambda_s;
  Vec lambda_r;
  std::uint64_t probes = 0;  // cumulative probe count after the step
};

struct RunTrace {
  std::vector<IterRecord> rows;

  std::vector<double> column(const std::function<double(const IterRecord&)>& get) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const IterRecord& r : rows) out.push_back(get(r));
    return out;
  }
};

class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(long iter, std::string snapshot)
      : std::runtime_error("non-finite iterate at iteration " + std::to_string(iter) + ": " +
                           snapshot),
        iter_(iter) {}

  long iteration() const { return iter_; }

 private:
  long iter_;
};

// The three per-role random streams consumed by the loop. Streams are
// derived from one master seed by role tag, so configurations that skip a
// stream (e.g. mu_s == 0 never touches gauss_s) leave the others untouched.
struct PdStreams {
  GaussianStream gauss_s;
  GaussianStream gauss_r;
  FadingSampler fading;

  static PdStreams from_seed(std::uint64_t seed, const FadingSampler& proto) {
    PdStreams s;
    s.gauss_s = GaussianStream(derive_seed(seed, "gauss-s"));
    s.gauss_r = GaussianStream(derive_seed(seed, "gauss-r"));
    s.fading = proto;
    s.fading.reseed(derive_seed(seed, "fading"));
    return s;
  }
};

namespace detail {

inline Vec jacobian_transpose_apply(const std::vector<Vec>& rows, const Vec& lambda, int n_cols) {
  Vec out = zeros(static_cast<std::size_t>(n_cols));
  if (rows.size() != lambda.size())
    throw std::invalid_argument("jacobian rows do not match multiplier length");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != n_cols)
      throw std::invalid_argument("jacobian row has wrong length");
    for (int k = 0; k < n_cols; ++k) out[static_cast<std::size_t>(k)] += lambda[i] * rows[i][static_cast<std::size_t>(k)];
  }
  return out;
}

inline std::string state_snapshot(const PdState& s) {
  return "max|x| = " + std::to_string(max_abs(s.x)) +
         ", max|theta| = " + std::to_string(max_abs(s.theta)) +
         ", max|lambda_s| = " + std::to_string(max_abs(s.lambda_s)) +
         ", max|lambda_r| = " + std::to_string(max_abs(s.lambda_r));
}

}  // namespace detail

// One iteration. Stream consumption order is fixed: gauss_s (only when
// mu_s > 0), then gauss_r (only when mu_r > 0), then one fading draw.
inline IterRecord step(PdState& state, const SurrogateProblem& prob, const StepSizes& steps,
                       PdStreams& streams) {
  const ErgodicProblem& base = prob.base;
  const double mu_s = prob.smoothing.mu_s;
  const double mu_r = prob.smoothing.mu_r;
  const double decay = steps.factor(state.iter);

  GaussianDraw u_s, u_r;
  if (mu_s > 0.0) u_s = streams.gauss_s.draw(base.n_x);
  if (mu_r > 0.0) u_r = streams.gauss_r.draw(base.theta_dim);
  const Vec h = streams.fading.draw();

  IterRecord record;
  record.iter = state.iter;
  record.objective = base.objective(state.x);
  record.lambda_s = state.lambda_s;
  record.lambda_r = state.lambda_r;
  if (base.n_g > 0) record.utility = base.utility(state.x);

  // Metric-side ascent direction: objective plus utility pullback minus the
  // service multipliers on the free coordinates.
  Vec x_dir;
  if (mu_s > 0.0) {
    const double d_obj = finite_diff(base.objective, state.x, mu_s, u_s);
    x_dir = scale(u_s.values, d_obj);
    if (base.n_g > 0) {
      const Vec d_util = vector_finite_diff(base.utility, state.x, mu_s, u_s);
      const double pull = dot(d_util, state.lambda_s);
      for (int i = 0; i < base.n_x; ++i)
        x_dir[static_cast<std::size_t>(i)] += pull * u_s.values[static_cast<std::size_t>(i)];
    }
  } else {
    if (!base.objective_grad)
      throw std::invalid_argument("step: mu_s == 0 requires an analytic objective gradient");
    x_dir = base.objective_grad(state.x);
    if (base.n_g > 0) {
      if (!base.utility_jac)
        throw std::invalid_argument("step: mu_s == 0 requires an analytic utility Jacobian");
      const Vec pull = detail::jacobian_transpose_apply(base.utility_jac(state.x),
                                                        state.lambda_s, base.n_x);
      x_dir = add(x_dir, pull);
    }
  }
  for (int i = 0; i < base.n_x; ++i)
    x_dir[static_cast<std::size_t>(i)] -= state.lambda_r[static_cast<std::size_t>(i)];

  // Parameter-side ascent direction from the probe pair at theta^n.
  Vec theta_dir;
  if (mu_r > 0.0) {
    const auto probe_at = [&](const Vec& th) { return probe_service(base, th, h); };
    const VectorDiffSample sample = vector_diff_sample(probe_at, state.theta, mu_r, u_r);
    record.service = sample.base;
    const double pull = dot(sample.diff, state.lambda_r);
    theta_dir = scale(u_r.values, pull);
  } else {
    if (!base.service_theta_jac)
      throw std::invalid_argument("step: mu_r == 0 requires an analytic service Jacobian");
    record.service = probe_service(base, state.theta, h);
    theta_dir = detail::jacobian_transpose_apply(base.service_theta_jac(state.theta, h),
                                                 state.lambda_r, base.theta_dim);
  }
  record.violation = sub(base.extended_x(state.x), record.service);

  // Primal updates (projection onto the box; Theta is all of R^{N_phi}).
  Vec x_next(static_cast<std::size_t>(base.n_x));
  for (int i = 0; i < base.n_x; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    x_next[k] = state.x[k] + decay * steps.gamma_x[k] * x_dir[k];
  }
  x_next = project_box(x_next, base.x_lower, base.x_upper);

  Vec theta_next(static_cast<std::size_t>(base.theta_dim));
  for (int i = 0; i < base.theta_dim; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    theta_next[k] = state.theta[k] + decay * steps.gamma_theta[k] * theta_dir[k];
  }

  // Dual updates from evaluations at the refreshed primal point, reusing the
  // same fading draw.
  Vec lambda_s_next = state.lambda_s;
  if (base.n_g > 0) {
    const Vec probe_point = mu_s > 0.0 ? add_scaled(x_next, mu_s, u_s.values) : x_next;
    const Vec g_next = base.utility(probe_point);
    for (int i = 0; i < base.n_g; ++i) {
      const std::size_t k = static_cast<std::size_t>(i);
      lambda_s_next[k] = state.lambda_s[k] - decay * steps.gamma_lambda_s[k] * g_next[k];
    }
    lambda_s_next = positive_part(lambda_s_next);
  }

  const Vec theta_probe =
      mu_r > 0.0 ? add_scaled(theta_next, mu_r, u_r.values) : theta_next;
  const Vec service_next = probe_service(base, theta_probe, h);
  const Vec xt_next = base.extended_x(x_next);
  const Vec slack = surrogate_slack(prob);
  Vec lambda_r_next(static_cast<std::size_t>(base.n_service));
  for (int i = 0; i < base.n_service; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    lambda_r_next[k] = state.lambda_r[k] -
                       decay * steps.gamma_lambda_r[k] * (service_next[k] - xt_next[k] - slack[k]);
  }
  lambda_r_next = positive_part(lambda_r_next);

  state.x = std::move(x_next);
  state.theta = std::move(theta_next);
  state.lambda_s = std::move(lambda_s_next);
  state.lambda_r = std::move(lambda_r_next);
  state.iter += 1;

  if (!all_finite(state.x) || !all_finite(state.theta) || !all_finite(state.lambda_s) ||
      !all_finite(state.lambda_r)) {
    throw NumericalAbort(record.iter, detail::state_snapshot(state));
  }

  record.probes = base.probes();
  return record;
}

// n_iters sequential steps from `init`, with streams derived from `seed`.
// On a numerical abort the rows completed so far are moved into *partial
// (when provided) before the abort is rethrown with its iteration index.
inline RunTrace run(const SurrogateProblem& prob, const StepSizes& steps, const PdState& init,
                    long n_iters, std::uint64_t seed, RunTrace* partial = nullptr) {
  if (n_iters < 1) throw std::invalid_argument("run: n_iters must be >= 1");
  prob.validate();
  steps.validate(prob.base);
  if (static_cast<int>(init.x.size()) != prob.base.n_x ||
      static_cast<int>(init.theta.size()) != prob.base.theta_dim ||
      static_cast<int>(init.lambda_s.size()) != prob.base.n_g ||
      static_cast<int>(init.lambda_r.size()) != prob.base.n_service)
    throw std::invalid_argument("run: initial state dimensions do not match the problem");

  PdStreams streams = PdStreams::from_seed(seed, prob.base.fading);
  PdState state = init;
  RunTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(n_iters));
  for (long n = 0; n < n_iters; ++n) {
    try {
      trace.rows.push_back(step(state, prob, steps, streams));
    } catch (const NumericalAbort&) {
      if (partial) *partial = std::move(trace);
      throw;
    }
  }
  return trace;
}

}  // namespace zopd

#pragma once

// The parameterized ergodic program and its smoothed surrogate: objective,
// utility constraints, the black-box service composition f(phi(H, theta), H),
// box sets, and the feasibility slack. The service evaluator is reachable
// only through probe_service, which tallies every evaluation; nothing in the
// library ever differentiates through it.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "zopd/channels.hpp"
#include "zopd/random.hpp"
#include "zopd/smoothing.hpp"
#include "zopd/vec.hpp"

namespace zopd {

struct ErgodicProblem {
  int n_x = 0;        // free ergodic metrics (dimension of x)
  int n_service = 0;  // service vector length; coordinates past n_x are pinned to 0
  int n_g = 0;        // utility constraints (may be 0)
  int theta_dim = 0;

  std::function<double(const Vec&)> objective;        // g0(x)
  std::function<Vec(const Vec&)> objective_grad;      // optional; required when mu_s == 0
  std::function<Vec(const Vec&)> utility;             // g(x), length n_g
  std::function<std::vector<Vec>(const Vec&)> utility_jac;  // optional rows d g_i / dx

  std::function<Vec(const Vec&, const Vec&)> policy_forward;  // (h, theta) -> p
  std::function<Vec(const Vec&, const Vec&)> service;         // (p, h) -> R^{n_service}
  // Optional analytic Jacobian rows d f_i(phi(h, theta), h) / d theta, used
  // only when mu_r == 0 (synthetic problems).
  std::function<std::vector<Vec>(const Vec&, const Vec&)> service_theta_jac;

  FadingSampler fading;  // prototype; runs reseed a copy
  Vec x_lower, x_upper;  // box on the free metrics

  std::shared_ptr<std::atomic<std::uint64_t>> probe_count =
      std::make_shared<std::atomic<std::uint64_t>>(0);

  std::uint64_t probes() const { return probe_count->load(); }

  Vec extended_x(const Vec& x) const {
    Vec out = x;
    out.resize(static_cast<std::size_t>(n_service), 0.0);
    return out;
  }

  void validate() const {
    if (n_x <= 0) throw std::invalid_argument("ErgodicProblem: n_x must be positive");
    if (n_service < n_x)
      throw std::invalid_argument("ErgodicProblem: n_service must be >= n_x");
    if (n_g < 0) throw std::invalid_argument("ErgodicProblem: n_g must be >= 0");
    if (theta_dim <= 0) throw std::invalid_argument("ErgodicProblem: theta_dim must be positive");
    if (!objective) throw std::invalid_argument("ErgodicProblem: objective is required");
    if (n_g > 0 && !utility)
      throw std::invalid_argument("ErgodicProblem: utility is required when n_g > 0");
    if (!policy_forward) throw std::invalid_argument("ErgodicProblem: policy_forward is required");
    if (!service) throw std::invalid_argument("ErgodicProblem: service is required");
    if (fading.dim() <= 0) throw std::invalid_argument("ErgodicProblem: fading sampler is required");
    if (static_cast<int>(x_lower.size()) != n_x || static_cast<int>(x_upper.size()) != n_x)
      throw std::invalid_argument("ErgodicProblem: x bounds must have length n_x");
    for (int i = 0; i < n_x; ++i) {
      if (!(x_lower[static_cast<std::size_t>(i)] <= x_upper[static_cast<std::size_t>(i)]))
        throw std::invalid_argument("ErgodicProblem: x_lower must be <= x_upper");
    }
  }
};

// Evaluate f(phi(h, theta), h) and tally one probe. Evaluator failures are
// surfaced with the probing context attached.
inline Vec probe_service(const ErgodicProblem& prob, const Vec& theta, const Vec& h) {
  try {
    Vec p = prob.policy_forward(h, theta);
    Vec out = prob.service(p, h);
    if (static_cast<int>(out.size()) != prob.n_service)
      throw std::runtime_error("service returned " + std::to_string(out.size()) +
                               " components, expected " + std::to_string(prob.n_service));
    prob.probe_count->fetch_add(1, std::memory_order_relaxed);
    return out;
  } catch (const std::exception& e) {
    throw std::runtime_error("service probe failed (|theta| = " + std::to_string(norm2(theta)) +
                             ", h = " + to_string(h) + "): " + e.what());
  }
}

struct SurrogateProblem {
  ErgodicProblem base;
  SmoothingConfig smoothing;

  void validate() const {
    base.validate();
    smoothing.validate();
    if (!smoothing.slack_scale.empty() &&
        static_cast<int>(smoothing.slack_scale.size()) != base.n_service)
      throw std::invalid_argument("SurrogateProblem: slack_scale length must match n_service");
  }
};

// S(mu_r) = C * mu_r * sqrt(N_phi); entrywise >= 0, zero at mu_r = 0.
inline Vec surrogate_slack(const SurrogateProblem& s) {
  return s.smoothing.slack(s.base.n_service, s.base.theta_dim);
}

enum class ConstraintFlag { StrictlyFeasible, Feasible, Violated };

struct ConstraintEstimate {
  double value = 0.0;    // constraint slack estimate (>= 0 is feasible)
  double std_err = 0.0;  // Monte Carlo standard error (0 for exact rows)
  ConstraintFlag flag = ConstraintFlag::Feasible;
};

struct FeasibilityReport {
  std::vector<ConstraintEstimate> utility;           // g(x), exact
  std::vector<ConstraintEstimate> service;           // E f(phi(H,theta),H) - x
  std::vector<ConstraintEstimate> service_smoothed;  // smoothed row minus slack
};

namespace detail {

inline ConstraintFlag classify(double value, double std_err) {
  // Two standard errors decide strictness; exact rows degenerate to sign.
  if (value > 2.0 * std_err) return ConstraintFlag::StrictlyFeasible;
  if (value < -2.0 * std_err) return ConstraintFlag::Violated;
  return ConstraintFlag::Feasible;
}

}  // namespace detail

// Monte Carlo feasibility diagnostics at a fixed (x, theta). The smoothed
// service row samples theta + mu_r * U jointly with the fading draw.
inline FeasibilityReport feasibility_report(const SurrogateProblem& s, const Vec& x,
                                            const Vec& theta, int mc_samples,
                                            std::uint64_t seed) {
  if (mc_samples < 1) throw std::invalid_argument("feasibility_report: mc_samples must be >= 1");
  s.validate();
  const ErgodicProblem& prob = s.base;

  FeasibilityReport report;
  if (prob.n_g > 0) {
    const Vec g = prob.utility(x);
    for (double v : g) report.utility.push_back({v, 0.0, detail::classify(v, 0.0)});
  }

  FadingSampler fading = prob.fading;
  fading.reseed(derive_seed(seed, "feasibility-fading"));
  GaussianStream gauss(derive_seed(seed, "feasibility-gauss"));
  const Vec xt = prob.extended_x(x);
  const Vec slack = surrogate_slack(s);

  const std::size_t n = static_cast<std::size_t>(prob.n_service);
  Vec raw_mean(n, 0.0), raw_m2(n, 0.0), sm_mean(n, 0.0), sm_m2(n, 0.0);
  for (int k = 0; k < mc_samples; ++k) {
    const Vec h = fading.draw();
    const Vec f_raw = probe_service(prob, theta, h);
    Vec theta_shift = theta;
    if (s.smoothing.mu_r > 0.0) {
      const GaussianDraw u = gauss.draw(prob.theta_dim);
      theta_shift = add_scaled(theta, s.smoothing.mu_r, u.values);
    }
    const Vec f_sm = probe_service(prob, theta_shift, h);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = f_raw[i] - xt[i];
      const double b = f_sm[i] - xt[i] - slack[i];
      // Welford running moments
      const double da = a - raw_mean[i];
      raw_mean[i] += da / (k + 1);
      raw_m2[i] += da * (a - raw_mean[i]);
      const double db = b - sm_mean[i];
      sm_mean[i] += db / (k + 1);
      sm_m2[i] += db * (b - sm_mean[i]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double se_raw =
        mc_samples > 1 ? std::sqrt(raw_m2[i] / (mc_samples - 1) / mc_samples) : 0.0;
    const double se_sm =
        mc_samples > 1 ? std::sqrt(sm_m2[i] / (mc_samples - 1) / mc_samples) : 0.0;
    report.service.push_back({raw_mean[i], se_raw, detail::classify(raw_mean[i], se_raw)});
    report.service_smoothed.push_back({sm_mean[i], se_sm, detail::classify(sm_mean[i], se_sm)});
  }
  return report;
}

}  // namespace zopd

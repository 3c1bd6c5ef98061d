#pragma once

// Gaussian-convolution smoothing primitives: two-point finite differences,
// zeroth-order gradient samples and Monte Carlo estimates of smoothed values.
// All routines treat the target function as a black box reachable only
// through evaluations.

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "zopd/random.hpp"
#include "zopd/vec.hpp"

namespace zopd {

// Smoothing scales for the metric space (mu_s) and the parameter space
// (mu_r), plus the per-constraint slack coefficients C. The feasibility
// slack is C * mu_r * sqrt(n_phi): zero at mu_r = 0 and increasing in mu_r.
struct SmoothingConfig {
  double mu_s = 0.0;
  double mu_r = 0.0;
  Vec slack_scale;  // one entry per service constraint; empty means all-zero

  void validate() const {
    if (mu_s < 0.0) throw std::invalid_argument("SmoothingConfig: mu_s must be >= 0");
    if (mu_r < 0.0) throw std::invalid_argument("SmoothingConfig: mu_r must be >= 0");
    if (!all_nonnegative(slack_scale))
      throw std::invalid_argument("SmoothingConfig: slack_scale must be entrywise >= 0");
  }

  Vec slack(int n_constraints, int n_phi) const {
    Vec out = slack_scale.empty() ? zeros(static_cast<std::size_t>(n_constraints)) : slack_scale;
    if (static_cast<int>(out.size()) != n_constraints)
      throw std::invalid_argument("SmoothingConfig: slack_scale length mismatch");
    const double factor = mu_r * std::sqrt(static_cast<double>(n_phi));
    for (double& v : out) v *= factor;
    return out;
  }
};

// (f(x + mu*u) - f(x)) / mu, exactly two evaluations of f.
template <class F>
double finite_diff(F&& f, const Vec& x, double mu, const GaussianDraw& u) {
  if (!(mu > 0.0))
    throw std::invalid_argument("smoothing parameter must be positive for finite differences");
  if (u.dim() != static_cast<int>(x.size()))
    throw std::invalid_argument("finite_diff: draw dimension does not match point");
  const double base = f(x);
  const double shifted = f(add_scaled(x, mu, u.values));
  return (shifted - base) / mu;
}

// Unbiased sample of the smoothed gradient: finite_diff(f, x, mu, u) * u.
template <class F>
Vec zo_grad_sample(F&& f, const Vec& x, double mu, const GaussianDraw& u) {
  const double d = finite_diff(std::forward<F>(f), x, mu, u);
  return scale(u.values, d);
}

// Plain Monte Carlo estimate of the smoothed value f_mu(x). mu == 0 routes
// to a single exact evaluation.
template <class F>
double mc_smoothed_value(F&& f, const Vec& x, double mu, long n, GaussianStream& rng) {
  if (n < 1) throw std::invalid_argument("mc_smoothed_value: sample count must be >= 1");
  if (mu < 0.0) throw std::invalid_argument("mc_smoothed_value: mu must be >= 0");
  if (mu == 0.0) return f(x);
  double acc = 0.0;
  for (long k = 0; k < n; ++k) {
    const GaussianDraw u = rng.draw(static_cast<int>(x.size()));
    acc += f(add_scaled(x, mu, u.values));
  }
  return acc / static_cast<double>(n);
}

// Vector-valued finite difference sharing one pair of evaluations across all
// components. Both raw evaluations are returned so callers that pay for the
// probes (the learning loop) can reuse them.
struct VectorDiffSample {
  Vec base;     // fv(x)
  Vec shifted;  // fv(x + mu*u)
  Vec diff;     // (shifted - base) / mu, componentwise
};

template <class FV>
VectorDiffSample vector_diff_sample(FV&& fv, const Vec& x, double mu, const GaussianDraw& u) {
  if (!(mu > 0.0))
    throw std::invalid_argument("smoothing parameter must be positive for finite differences");
  if (u.dim() != static_cast<int>(x.size()))
    throw std::invalid_argument("vector_diff_sample: draw dimension does not match point");
  VectorDiffSample out;
  out.base = fv(x);
  out.shifted = fv(add_scaled(x, mu, u.values));
  if (out.base.size() != out.shifted.size())
    throw std::invalid_argument("vector_diff_sample: evaluator returned inconsistent sizes");
  out.diff.resize(out.base.size());
  for (std::size_t i = 0; i < out.base.size(); ++i)
    out.diff[i] = (out.shifted[i] - out.base[i]) / mu;
  return out;
}

template <class FV>
Vec vector_finite_diff(FV&& fv, const Vec& x, double mu, const GaussianDraw& u) {
  return vector_diff_sample(std::forward<FV>(fv), x, mu, u).diff;
}

}  // namespace zopd

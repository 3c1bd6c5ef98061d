#pragma once

// Numerical verification of the dual-domain theory on tiny instances:
// Lagrangian evaluation, the two-sided Lagrangian approximation bounds, and
// dual-value gap estimates computed by exhaustive grid search over problems
// small enough to enumerate. Fixtures carry closed-form smoothed values so
// the inequality checks are free of Monte Carlo noise wherever possible.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "zopd/problem.hpp"
#include "zopd/random.hpp"
#include "zopd/smoothing.hpp"
#include "zopd/vec.hpp"

namespace zopd {

// Lipschitz metadata certified by the fixture constructor: l_g_o for the
// objective, c_s per utility constraint, c_r per service constraint.
struct LipschitzMeta {
  double l_g_o = 0.0;
  Vec c_s;
  Vec c_r;

  void validate() const {
    if (!(l_g_o >= 0.0) || !std::isfinite(l_g_o))
      throw std::invalid_argument("LipschitzMeta: l_g_o must be finite and >= 0");
    if (!all_nonnegative(c_s) || !all_nonnegative(c_r))
      throw std::invalid_argument("LipschitzMeta: constants must be >= 0");
  }
};

// Gamma^l and Gamma^r of the Lagrangian approximation at a fixed multiplier:
//   Gamma^l = mu_s L_go sqrt(N_x) + mu_s <lambda_s, c_s> sqrt(N_x)
//           + mu_r <lambda_r, c_r> sqrt(N_phi) + <S(mu_r), lambda_r>
//   Gamma^r = mu_r <lambda_r, c_r> sqrt(N_phi) - <S(mu_r), lambda_r>
inline std::pair<double, double> gamma_bounds(const Vec& lambda_s, const Vec& lambda_r,
                                              const LipschitzMeta& meta,
                                              const SmoothingConfig& smoothing, int n_x,
                                              int n_phi) {
  meta.validate();
  smoothing.validate();
  if (lambda_s.size() != meta.c_s.size() || lambda_r.size() != meta.c_r.size())
    throw std::invalid_argument("gamma_bounds: multiplier lengths do not match metadata");
  const double root_nx = std::sqrt(static_cast<double>(n_x));
  const double root_nphi = std::sqrt(static_cast<double>(n_phi));
  const Vec slack = smoothing.slack(static_cast<int>(meta.c_r.size()), n_phi);
  const double slack_term = dot(slack, lambda_r);
  const double gamma_l = smoothing.mu_s * meta.l_g_o * root_nx +
                         smoothing.mu_s * dot(lambda_s, meta.c_s) * root_nx +
                         smoothing.mu_r * dot(lambda_r, meta.c_r) * root_nphi + slack_term;
  const double gamma_r = smoothing.mu_r * dot(lambda_r, meta.c_r) * root_nphi - slack_term;
  return {gamma_l, gamma_r};
}

// A tiny analytic problem: plain and smoothed values of the objective, the
// utilities and the mean service map are all closed forms, so Lagrangians
// are exact. Boxes double as certification region and grid-search bounds.
struct AnalyticFixture {
  int n_x = 0;
  int n_g = 0;
  int n_service = 0;
  int n_theta = 0;

  std::function<double(const Vec&)> objective;
  std::function<double(const Vec&, double)> objective_smoothed;  // (x, mu_s)
  std::function<Vec(const Vec&)> utility;
  std::function<Vec(const Vec&, double)> utility_smoothed;       // (x, mu_s)
  std::function<Vec(const Vec&)> service_mean;                   // fbar(theta)
  std::function<Vec(const Vec&, double)> service_mean_smoothed;  // (theta, mu_r)

  LipschitzMeta meta;
  Vec x_lo, x_hi;
  Vec th_lo, th_hi;
};

inline double fixture_lagrangian(const AnalyticFixture& fx, const Vec& x, const Vec& theta,
                                 const Vec& lambda_s, const Vec& lambda_r) {
  double val = fx.objective(x);
  if (fx.n_g > 0) val += dot(lambda_s, fx.utility(x));
  const Vec fbar = fx.service_mean(theta);
  for (int i = 0; i < fx.n_service; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double xi = i < fx.n_x ? x[k] : 0.0;
    val += lambda_r[k] * (fbar[k] - xi);
  }
  return val;
}

inline double fixture_lagrangian_smoothed(const AnalyticFixture& fx, const Vec& x,
                                          const Vec& theta, const Vec& lambda_s,
                                          const Vec& lambda_r,
                                          const SmoothingConfig& smoothing) {
  double val = fx.objective_smoothed(x, smoothing.mu_s);
  if (fx.n_g > 0) val += dot(lambda_s, fx.utility_smoothed(x, smoothing.mu_s));
  const Vec fbar = fx.service_mean_smoothed(theta, smoothing.mu_r);
  const Vec slack = smoothing.slack(fx.n_service, fx.n_theta);
  for (int i = 0; i < fx.n_service; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double xi = i < fx.n_x ? x[k] : 0.0;
    val += lambda_r[k] * (fbar[k] - xi - slack[k]);
  }
  return val;
}

// Monte Carlo Lagrangian of a black-box surrogate problem; the smoothed
// variant draws (H, U_S, U_R) jointly and subtracts the feasibility slack.
inline double lagrangian_mc(const SurrogateProblem& s, const Vec& x, const Vec& theta,
                            const Vec& lambda_s, const Vec& lambda_r, int mc_n,
                            std::uint64_t seed, bool smoothed) {
  if (mc_n < 1) throw std::invalid_argument("lagrangian_mc: mc_n must be >= 1");
  if (!all_nonnegative(lambda_s) || !all_nonnegative(lambda_r))
    throw std::invalid_argument("lagrangian_mc: multipliers must be >= 0");
  s.validate();
  const ErgodicProblem& prob = s.base;
  const double mu_s = smoothed ? s.smoothing.mu_s : 0.0;
  const double mu_r = smoothed ? s.smoothing.mu_r : 0.0;

  GaussianStream gauss_s(derive_seed(seed, "lagrangian-gauss-s"));
  GaussianStream gauss_r(derive_seed(seed, "lagrangian-gauss-r"));
  FadingSampler fading = prob.fading;
  fading.reseed(derive_seed(seed, "lagrangian-fading"));

  const Vec xt = prob.extended_x(x);
  const Vec slack = smoothed ? surrogate_slack(s) : zeros(static_cast<std::size_t>(prob.n_service));

  double acc = 0.0;
  for (int k = 0; k < mc_n; ++k) {
    const Vec x_eval = mu_s > 0.0 ? add_scaled(x, mu_s, gauss_s.draw(prob.n_x).values) : x;
    const Vec th_eval =
        mu_r > 0.0 ? add_scaled(theta, mu_r, gauss_r.draw(prob.theta_dim).values) : theta;
    const Vec h = fading.draw();
    double term = prob.objective(x_eval);
    if (prob.n_g > 0) term += dot(lambda_s, prob.utility(x_eval));
    const Vec f = probe_service(prob, th_eval, h);
    for (int i = 0; i < prob.n_service; ++i) {
      const std::size_t j = static_cast<std::size_t>(i);
      term += lambda_r[j] * (f[j] - xt[j] - slack[j]);
    }
    acc += term;
  }
  return acc / mc_n;
}

// Random (x, theta, lambda >= 0) draws checked against
//   -Gamma^l(lambda) <= L_mu - L <= Gamma^r(lambda).
struct SandwichResult {
  bool ok = true;
  int violations = 0;
  double worst_left_margin = std::numeric_limits<double>::infinity();   // diff + Gamma^l
  double worst_right_margin = std::numeric_limits<double>::infinity();  // Gamma^r - diff
  Vec worst_point;  // concatenated (x, theta, lambda) of the tightest sample
};

inline SandwichResult check_sandwich(const AnalyticFixture& fx, const SmoothingConfig& smoothing,
                                     int n_points, std::uint64_t seed, double tolerance = 1e-9) {
  if (n_points < 1) throw std::invalid_argument("check_sandwich: n_points must be >= 1");
  smoothing.validate();
  fx.meta.validate();
  SplitMix64 rng(derive_seed(seed, "sandwich"));

  SandwichResult out;
  for (int k = 0; k < n_points; ++k) {
    Vec x(static_cast<std::size_t>(fx.n_x));
    for (int i = 0; i < fx.n_x; ++i) {
      const std::size_t j = static_cast<std::size_t>(i);
      x[j] = rng.uniform(fx.x_lo[j], fx.x_hi[j]);
    }
    Vec theta(static_cast<std::size_t>(fx.n_theta));
    for (int i = 0; i < fx.n_theta; ++i) {
      const std::size_t j = static_cast<std::size_t>(i);
      theta[j] = rng.uniform(fx.th_lo[j], fx.th_hi[j]);
    }
    Vec lambda_s(static_cast<std::size_t>(fx.n_g));
    for (double& v : lambda_s) v = rng.uniform(0.0, 3.0);
    Vec lambda_r(static_cast<std::size_t>(fx.n_service));
    for (double& v : lambda_r) v = rng.uniform(0.0, 3.0);

    const double plain = fixture_lagrangian(fx, x, theta, lambda_s, lambda_r);
    const double smoothed = fixture_lagrangian_smoothed(fx, x, theta, lambda_s, lambda_r, smoothing);
    const double diff = smoothed - plain;
    const auto [gamma_l, gamma_r] =
        gamma_bounds(lambda_s, lambda_r, fx.meta, smoothing, fx.n_x, fx.n_theta);

    const double left_margin = diff + gamma_l;
    const double right_margin = gamma_r - diff;
    if (left_margin < out.worst_left_margin || right_margin < out.worst_right_margin) {
      if (std::min(left_margin, right_margin) <
          std::min(out.worst_left_margin, out.worst_right_margin)) {
        out.worst_point = x;
        out.worst_point.insert(out.worst_point.end(), theta.begin(), theta.end());
        out.worst_point.insert(out.worst_point.end(), lambda_s.begin(), lambda_s.end());
        out.worst_point.insert(out.worst_point.end(), lambda_r.begin(), lambda_r.end());
      }
    }
    out.worst_left_margin = std::min(out.worst_left_margin, left_margin);
    out.worst_right_margin = std::min(out.worst_right_margin, right_margin);
    if (left_margin < -tolerance || right_margin < -tolerance) {
      out.ok = false;
      ++out.violations;
    }
  }
  return out;
}

// Exhaustive inner maximization of the Lagrangian over a product grid, per
// multiplier in lambda_grid; reports the dual minimum over the grid.
struct DualGridResult {
  double d_star = 0.0;
  Vec lambda_star;          // concatenated (lambda_s, lambda_r) argmin
  bool boundary_warning = false;  // inner argmax hit a truncated grid edge
  std::vector<double> dual_values;  // one per lambda_grid entry
};

struct GridSpec {
  int x_points = 41;
  int theta_points = 41;
  // Set when the grid box truncates an unbounded feasible set, in which case
  // boundary argmaxima are flagged.
  bool x_box_truncates = false;
  bool theta_box_truncates = false;
};

inline DualGridResult dual_value_grid(const AnalyticFixture& fx, const SmoothingConfig& smoothing,
                                      const std::vector<Vec>& lambda_grid, const GridSpec& grid) {
  if (lambda_grid.empty()) throw std::invalid_argument("dual_value_grid: empty multiplier grid");
  if (grid.x_points < 2 || grid.theta_points < 2)
    throw std::invalid_argument("dual_value_grid: need at least 2 grid points per axis");

  // Enumerate the product grids once; cells are reused for every lambda.
  const auto axis_points = [](const Vec& lo, const Vec& hi, int pts) {
    std::vector<Vec> axes(lo.size());
    for (std::size_t d = 0; d < lo.size(); ++d) {
      axes[d].resize(static_cast<std::size_t>(pts));
      for (int k = 0; k < pts; ++k)
        axes[d][static_cast<std::size_t>(k)] = lo[d] + (hi[d] - lo[d]) * k / (pts - 1);
    }
    return axes;
  };
  const auto enumerate = [](const std::vector<Vec>& axes) {
    std::vector<Vec> points;
    Vec cur(axes.size());
    std::function<void(std::size_t)> rec = [&](std::size_t d) {
      if (d == axes.size()) {
        points.push_back(cur);
        return;
      }
      for (double v : axes[d]) {
        cur[d] = v;
        rec(d + 1);
      }
    };
    rec(0);
    return points;
  };

  const std::vector<Vec> x_cells = enumerate(axis_points(fx.x_lo, fx.x_hi, grid.x_points));
  const std::vector<Vec> th_cells = enumerate(axis_points(fx.th_lo, fx.th_hi, grid.theta_points));
  if (x_cells.size() * th_cells.size() > 1000000)
    throw std::invalid_argument("dual_value_grid: grid exceeds 1e6 cells");

  // Precompute the lambda-independent pieces.
  std::vector<double> obj_vals(x_cells.size());
  std::vector<Vec> util_vals(fx.n_g > 0 ? x_cells.size() : 0);
  for (std::size_t i = 0; i < x_cells.size(); ++i) {
    obj_vals[i] = fx.objective_smoothed(x_cells[i], smoothing.mu_s);
    if (fx.n_g > 0) util_vals[i] = fx.utility_smoothed(x_cells[i], smoothing.mu_s);
  }
  std::vector<Vec> svc_vals(th_cells.size());
  for (std::size_t t = 0; t < th_cells.size(); ++t)
    svc_vals[t] = fx.service_mean_smoothed(th_cells[t], smoothing.mu_r);
  const Vec slack = smoothing.slack(fx.n_service, fx.n_theta);

  const auto on_edge = [](const Vec& point, const Vec& lo, const Vec& hi) {
    for (std::size_t d = 0; d < point.size(); ++d)
      if (point[d] == lo[d] || point[d] == hi[d]) return true;
    return false;
  };

  DualGridResult out;
  out.dual_values.reserve(lambda_grid.size());
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& lambda : lambda_grid) {
    if (static_cast<int>(lambda.size()) != fx.n_g + fx.n_service)
      throw std::invalid_argument("dual_value_grid: multiplier has wrong length");
    const Vec lambda_s(lambda.begin(), lambda.begin() + fx.n_g);
    const Vec lambda_r(lambda.begin() + fx.n_g, lambda.end());

    double inner_best = -std::numeric_limits<double>::infinity();
    std::size_t arg_x = 0, arg_t = 0;
    for (std::size_t i = 0; i < x_cells.size(); ++i) {
      double x_part = obj_vals[i];
      if (fx.n_g > 0) x_part += dot(lambda_s, util_vals[i]);
      for (int c = 0; c < fx.n_service; ++c) {
        const std::size_t k = static_cast<std::size_t>(c);
        const double xi = c < fx.n_x ? x_cells[i][k] : 0.0;
        x_part -= lambda_r[k] * (xi + slack[k]);
      }
      for (std::size_t t = 0; t < th_cells.size(); ++t) {
        const double val = x_part + dot(lambda_r, svc_vals[t]);
        if (val > inner_best) {
          inner_best = val;
          arg_x = i;
          arg_t = t;
        }
      }
    }
    if (grid.x_box_truncates && on_edge(x_cells[arg_x], fx.x_lo, fx.x_hi))
      out.boundary_warning = true;
    if (grid.theta_box_truncates && on_edge(th_cells[arg_t], fx.th_lo, fx.th_hi))
      out.boundary_warning = true;

    out.dual_values.push_back(inner_best);
    if (inner_best < best) {
      best = inner_best;
      out.lambda_star = lambda;
    }
  }
  out.d_star = best;
  return out;
}

// One smoothing level of the dual-gap study.
struct GapReport {
  double mu = 0.0;
  double d_mu_star = 0.0;
  double d_star = 0.0;
  double gap = 0.0;        // d_mu_star - d_star
  double gamma_l = 0.0;    // Gamma^l at the maximal multiplier lambda-dagger
  double gamma_r = 0.0;    // Gamma^r at the unsmoothed argmin multiplier
  bool sandwich_ok = false;
};

struct GapStudy {
  double d_star = 0.0;     // unsmoothed dual value
  Vec lambda_star;         // its argmin multiplier
  Vec lambda_dagger;       // elementwise max of argmin multipliers across mu levels
  std::vector<GapReport> reports;
  // Linear-rate constants: with S = C mu_r sqrt(N_phi), the bracket reads
  // -(mu_s sigma_s_l + mu_r sigma_r_l) <= gap <= mu_r sigma_r_r.
  double sigma_s_l = 0.0;  // (L_go + <lambda_dagger_s, c_s>) sqrt(N_x)
  double sigma_r_l = 0.0;  // <lambda_dagger_r, c_r + C> sqrt(N_phi)
  double sigma_r_r = 0.0;  // <lambda_star_r, c_r - C> sqrt(N_phi)
  double fit_slope = 0.0;
  double r_squared = 0.0;
  bool boundary_warning = false;
};

// Sweeps mu_s = mu_r = mu over `mus`, computes dual values on the grid, the
// Theorem-style bracket at each level, and a least-squares fit of |gap|
// against mu through the origin.
inline GapStudy dual_gap_study(const AnalyticFixture& fx, const Vec& slack_scale,
                               const Vec& mus, const std::vector<Vec>& lambda_grid,
                               const GridSpec& grid, double grid_tolerance = 1e-9) {
  GapStudy study;

  SmoothingConfig zero;
  zero.slack_scale = slack_scale;
  const DualGridResult base = dual_value_grid(fx, zero, lambda_grid, grid);
  study.d_star = base.d_star;
  study.lambda_star = base.lambda_star;
  study.boundary_warning = base.boundary_warning;
  study.lambda_dagger = base.lambda_star;

  std::vector<DualGridResult> results;
  for (double mu : mus) {
    SmoothingConfig cfg;
    cfg.mu_s = mu;
    cfg.mu_r = mu;
    cfg.slack_scale = slack_scale;
    results.push_back(dual_value_grid(fx, cfg, lambda_grid, grid));
    study.boundary_warning = study.boundary_warning || results.back().boundary_warning;
    for (std::size_t i = 0; i < study.lambda_dagger.size(); ++i)
      study.lambda_dagger[i] = std::max(study.lambda_dagger[i], results.back().lambda_star[i]);
  }

  const Vec star_s(study.lambda_star.begin(), study.lambda_star.begin() + fx.n_g);
  const Vec star_r(study.lambda_star.begin() + fx.n_g, study.lambda_star.end());
  const Vec dag_s(study.lambda_dagger.begin(), study.lambda_dagger.begin() + fx.n_g);
  const Vec dag_r(study.lambda_dagger.begin() + fx.n_g, study.lambda_dagger.end());

  study.sigma_s_l =
      (fx.meta.l_g_o + dot(dag_s, fx.meta.c_s)) * std::sqrt(static_cast<double>(fx.n_x));
  const double root_nphi = std::sqrt(static_cast<double>(fx.n_theta));
  study.sigma_r_l = (dot(dag_r, fx.meta.c_r) + dot(dag_r, slack_scale)) * root_nphi;
  study.sigma_r_r = (dot(star_r, fx.meta.c_r) - dot(star_r, slack_scale)) * root_nphi;

  double sxx = 0.0, sxy = 0.0;
  Vec gaps;
  for (std::size_t m = 0; m < mus.size(); ++m) {
    SmoothingConfig cfg;
    cfg.mu_s = mus[m];
    cfg.mu_r = mus[m];
    cfg.slack_scale = slack_scale;

    GapReport rep;
    rep.mu = mus[m];
    rep.d_mu_star = results[m].d_star;
    rep.d_star = study.d_star;
    rep.gap = rep.d_mu_star - rep.d_star;
    rep.gamma_l = gamma_bounds(dag_s, dag_r, fx.meta, cfg, fx.n_x, fx.n_theta).first;
    rep.gamma_r = gamma_bounds(star_s, star_r, fx.meta, cfg, fx.n_x, fx.n_theta).second;
    rep.sandwich_ok =
        rep.gap >= -rep.gamma_l - grid_tolerance && rep.gap <= rep.gamma_r + grid_tolerance;
    study.reports.push_back(rep);

    gaps.push_back(std::abs(rep.gap));
    sxx += mus[m] * mus[m];
    sxy += mus[m] * gaps.back();
  }

  study.fit_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double gbar = mean(gaps);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t m = 0; m < mus.size(); ++m) {
    const double pred = study.fit_slope * mus[m];
    ss_res += (gaps[m] - pred) * (gaps[m] - pred);
    ss_tot += (gaps[m] - gbar) * (gaps[m] - gbar);
  }
  study.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return study;
}

// --- analytic fixtures ----------------------------------------------------

// E[clamp(Z, a, b)] for Z ~ N(m, sigma^2), via the Gaussian CDF/pdf.
inline double gaussian_clamp_mean(double m, double sigma, double a, double b) {
  if (sigma <= 0.0) return std::min(std::max(m, a), b);
  const auto Phi = [](double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); };
  const auto phi = [](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
  };
  const double alpha = (a - m) / sigma;
  const double beta = (b - m) / sigma;
  return a * Phi(alpha) + b * (1.0 - Phi(beta)) + m * (Phi(beta) - Phi(alpha)) -
         sigma * (phi(beta) - phi(alpha));
}

// Affine objective/constraints (Gaussian smoothing is exact on them), with
// certified constants equal to the coefficient norms.
inline AnalyticFixture affine_fixture() {
  AnalyticFixture fx;
  fx.n_x = 2;
  fx.n_g = 1;
  fx.n_service = 2;
  fx.n_theta = 3;

  const Vec a{0.7, -0.4};           // objective slope
  const Vec g_row{-0.5, 0.3};       // utility row
  const double g_off = 1.5;
  const std::vector<Vec> f_rows{{0.6, -0.2, 0.1}, {-0.3, 0.4, 0.5}};
  const Vec f_off{0.2, -0.1};

  fx.objective = [a](const Vec& x) { return dot(a, x); };
  fx.objective_smoothed = [a](const Vec& x, double) { return dot(a, x); };
  fx.utility = [g_row, g_off](const Vec& x) { return Vec{g_off + dot(g_row, x)}; };
  fx.utility_smoothed = [g_row, g_off](const Vec& x, double) { return Vec{g_off + dot(g_row, x)}; };
  fx.service_mean = [f_rows, f_off](const Vec& th) {
    Vec out(f_rows.size());
    for (std::size_t i = 0; i < f_rows.size(); ++i) out[i] = f_off[i] + dot(f_rows[i], th);
    return out;
  };
  fx.service_mean_smoothed = [fx_mean = fx.service_mean](const Vec& th, double) {
    return fx_mean(th);
  };

  fx.meta.l_g_o = norm2(a);
  fx.meta.c_s = Vec{norm2(g_row)};
  fx.meta.c_r = Vec{norm2(f_rows[0]), norm2(f_rows[1])};
  fx.x_lo = Vec{-1.0, -1.0};
  fx.x_hi = Vec{1.0, 1.0};
  fx.th_lo = Vec{-1.0, -1.0, -1.0};
  fx.th_hi = Vec{1.0, 1.0, 1.0};
  return fx;
}

// Concave quadratics: smoothing shifts values by exactly -mu^2 * dim. The
// certified constants cover the sampling box inflated by the largest
// smoothing scale in use (|grad| <= 2 * radius).
inline AnalyticFixture quadratic_fixture(double mu_cert = 1.0) {
  AnalyticFixture fx;
  fx.n_x = 2;
  fx.n_g = 1;
  fx.n_service = 2;
  fx.n_theta = 3;

  fx.objective = [](const Vec& x) { return -dot(x, x); };
  fx.objective_smoothed = [](const Vec& x, double mu) {
    return -(dot(x, x) + mu * mu * static_cast<double>(x.size()));
  };
  fx.utility = [](const Vec& x) { return Vec{2.0 - dot(x, x)}; };
  fx.utility_smoothed = [](const Vec& x, double mu) {
    return Vec{2.0 - dot(x, x) - mu * mu * static_cast<double>(x.size())};
  };
  fx.service_mean = [](const Vec& th) {
    return Vec{1.0 - dot(th, th), 0.5 - 0.5 * dot(th, th)};
  };
  fx.service_mean_smoothed = [](const Vec& th, double mu) {
    const double shift = mu * mu * static_cast<double>(th.size());
    return Vec{1.0 - dot(th, th) - shift, 0.5 - 0.5 * (dot(th, th) + shift)};
  };

  const double radius_x = 1.0, radius_th = 1.0;
  // 5-sigma tail margin on top of the box radius
  const double rx = 2.0 * (radius_x * std::sqrt(2.0) + 5.0 * mu_cert);
  const double rt = 2.0 * (radius_th * std::sqrt(3.0) + 5.0 * mu_cert);
  fx.meta.l_g_o = rx;
  fx.meta.c_s = Vec{rx};
  fx.meta.c_r = Vec{rt, 0.5 * rt};
  fx.x_lo = Vec{-radius_x, -radius_x};
  fx.x_hi = Vec{radius_x, radius_x};
  fx.th_lo = Vec{-radius_th, -radius_th, -radius_th};
  fx.th_hi = Vec{radius_th, radius_th, radius_th};
  return fx;
}

// Single-user toy with deterministic unit fading, linear service in the
// allocation and a clamp parameterization: x in [0, 2], theta in [0, 1],
// fbar(theta) = clamp(theta, 0, 1); smoothing of the clamp has an erf closed
// form. Saddle value 1 at lambda = 1.
inline AnalyticFixture clamp_toy_fixture() {
  AnalyticFixture fx;
  fx.n_x = 1;
  fx.n_g = 0;
  fx.n_service = 1;
  fx.n_theta = 1;

  fx.objective = [](const Vec& x) { return x[0]; };
  fx.objective_smoothed = [](const Vec& x, double) { return x[0]; };
  fx.service_mean = [](const Vec& th) { return Vec{std::min(std::max(th[0], 0.0), 1.0)}; };
  fx.service_mean_smoothed = [](const Vec& th, double mu) {
    return Vec{gaussian_clamp_mean(th[0], mu, 0.0, 1.0)};
  };

  fx.meta.l_g_o = 1.0;
  fx.meta.c_s = Vec{};
  fx.meta.c_r = Vec{1.0};
  fx.x_lo = Vec{0.0};
  fx.x_hi = Vec{2.0};
  fx.th_lo = Vec{0.0};
  fx.th_hi = Vec{1.0};
  return fx;
}

}  // namespace zopd

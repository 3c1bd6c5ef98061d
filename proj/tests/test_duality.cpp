#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <memory>

#include "zopd/duality.hpp"
#include "zopd/policy.hpp"

using namespace zopd;

TEST_CASE("gamma bounds arithmetic", "[duality]") {
  LipschitzMeta meta;
  meta.l_g_o = 1.0;
  meta.c_s = Vec{1.0, 1.0};
  meta.c_r = Vec{2.0, 2.0};

  SECTION("no smoothing, no slack") {
    SmoothingConfig sm;
    const auto [gl, gr] = gamma_bounds(Vec{1.0, 1.0}, Vec{1.0, 1.0}, meta, sm, 2, 3);
    REQUIRE(gl == 0.0);
    REQUIRE(gr == 0.0);
  }

  SECTION("zero multipliers leave only the objective term") {
    SmoothingConfig sm;
    sm.mu_s = 0.1;
    sm.mu_r = 0.2;
    const auto [gl, gr] = gamma_bounds(zeros(2), zeros(2), meta, sm, 2, 3);
    REQUIRE(gl == Catch::Approx(0.1 * std::sqrt(2.0)).epsilon(1e-12));
    REQUIRE(gr == 0.0);
  }

  SECTION("direct substitution") {
    SmoothingConfig sm;
    sm.mu_s = 0.1;
    sm.mu_r = 0.2;
    const Vec ls{1.0, 1.0}, lr{1.0, 1.0};
    const auto [gl, gr] = gamma_bounds(ls, lr, meta, sm, 2, 3);
    const double expect_l =
        0.1 * 1.0 * std::sqrt(2.0) + 0.1 * 2.0 * std::sqrt(2.0) + 0.2 * 4.0 * std::sqrt(3.0);
    REQUIRE(gl == Catch::Approx(expect_l).epsilon(1e-12));
    REQUIRE(gr == Catch::Approx(0.2 * 4.0 * std::sqrt(3.0)).epsilon(1e-12));
  }
}

TEST_CASE("gamma bounds are nondecreasing in the smoothing scales", "[duality]") {
  LipschitzMeta meta;
  meta.l_g_o = 0.7;
  meta.c_s = Vec{0.4};
  meta.c_r = Vec{1.2, 0.9};
  const Vec ls{0.8}, lr{1.1, 0.3};
  // Slack coefficients at or below c_r keep both bounds monotone.
  SmoothingConfig sm;
  sm.slack_scale = Vec{0.6, 0.45};

  double prev_l = -1.0, prev_r = -1.0;
  for (double mu : {0.0, 0.01, 0.05, 0.1, 0.5, 1.0}) {
    sm.mu_s = mu;
    sm.mu_r = mu;
    const auto [gl, gr] = gamma_bounds(ls, lr, meta, sm, 1, 2);
    REQUIRE(gl >= prev_l);
    REQUIRE(gr >= prev_r);
    prev_l = gl;
    prev_r = gr;
  }
}

TEST_CASE("fixture lagrangian hand arithmetic", "[duality]") {
  const AnalyticFixture fx = affine_fixture();
  const Vec x{0.5, -0.25};
  const Vec th{0.1, 0.2, -0.3};
  const Vec ls{0.7};
  const Vec lr{1.1, 0.4};

  // Hand evaluation of g0 + <ls, g> + <lr, fbar - x>.
  const double g0 = 0.7 * 0.5 + (-0.4) * (-0.25);
  const double g = 1.5 + (-0.5) * 0.5 + 0.3 * (-0.25);
  const double f0 = 0.2 + 0.6 * 0.1 + (-0.2) * 0.2 + 0.1 * (-0.3);
  const double f1 = -0.1 + (-0.3) * 0.1 + 0.4 * 0.2 + 0.5 * (-0.3);
  const double expect = g0 + 0.7 * g + 1.1 * (f0 - 0.5) + 0.4 * (f1 + 0.25);
  REQUIRE(fixture_lagrangian(fx, x, th, ls, lr) == Catch::Approx(expect).margin(1e-12));

  SECTION("lambda = 0 reduces to the objective") {
    REQUIRE(fixture_lagrangian(fx, x, th, zeros(1), zeros(2)) ==
            Catch::Approx(g0).margin(1e-12));
  }

  SECTION("zero smoothing and zero slack match the plain Lagrangian") {
    SmoothingConfig sm;
    sm.slack_scale = zeros(2);
    REQUIRE(fixture_lagrangian_smoothed(fx, x, th, ls, lr, sm) ==
            Catch::Approx(fixture_lagrangian(fx, x, th, ls, lr)).margin(1e-12));
  }
}

TEST_CASE("monte carlo lagrangian on a deterministic fixture", "[duality]") {
  auto policy = std::make_shared<ClampPolicy>(1, -100.0, 100.0);
  ErgodicProblem prob;
  prob.n_x = 1;
  prob.n_service = 1;
  prob.theta_dim = 1;
  prob.objective = [](const Vec& x) { return 2.0 * x[0]; };
  prob.policy_forward = [policy](const Vec& h, const Vec& th) { return policy->forward(h, th); };
  prob.service = [](const Vec& p, const Vec& h) { return hadamard(h, p); };
  prob.fading = FadingSampler::fixed(Vec{1.0});
  prob.x_lower = Vec{0.0};
  prob.x_upper = Vec{10.0};

  SurrogateProblem s;
  s.base = prob;
  s.smoothing.slack_scale = Vec{0.0};

  // Linear everything and deterministic fading: MC is exact.
  const double val = lagrangian_mc(s, Vec{0.5}, Vec{0.8}, Vec{}, Vec{1.5}, 16, 9, false);
  REQUIRE(val == Catch::Approx(2.0 * 0.5 + 1.5 * (0.8 - 0.5)).margin(1e-12));

  // lambda = 0 reduces to the objective.
  REQUIRE(lagrangian_mc(s, Vec{0.5}, Vec{0.8}, Vec{}, Vec{0.0}, 16, 9, false) ==
          Catch::Approx(1.0).margin(1e-12));

  // mu = 0 with zero slack: smoothed equals unsmoothed.
  REQUIRE(lagrangian_mc(s, Vec{0.5}, Vec{0.8}, Vec{}, Vec{1.5}, 16, 9, true) ==
          Catch::Approx(val).margin(1e-12));

  REQUIRE_THROWS_AS(lagrangian_mc(s, Vec{0.5}, Vec{0.8}, Vec{}, Vec{-1.0}, 16, 9, false),
                    std::invalid_argument);
}

TEST_CASE("sandwich holds on the affine fixture with the exact slack gap", "[duality]") {
  const AnalyticFixture fx = affine_fixture();
  SmoothingConfig sm;
  sm.mu_s = 0.1;
  sm.mu_r = 0.2;
  sm.slack_scale = Vec{0.3, 0.5};

  const SandwichResult res = check_sandwich(fx, sm, 500, 42);
  REQUIRE(res.ok);
  REQUIRE(res.violations == 0);

  // Affine smoothing is exact, so the difference is exactly -<S, lambda_r>.
  const Vec slack = sm.slack(2, fx.n_theta);
  SplitMix64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const Vec x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const Vec th{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const Vec ls{rng.uniform(0.0, 2.0)};
    const Vec lr{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)};
    const double diff = fixture_lagrangian_smoothed(fx, x, th, ls, lr, sm) -
                        fixture_lagrangian(fx, x, th, ls, lr);
    REQUIRE(diff == Catch::Approx(-dot(slack, lr)).margin(1e-12));
  }
}

TEST_CASE("sandwich holds on the quadratic fixture", "[duality]") {
  const AnalyticFixture fx = quadratic_fixture();
  for (double mu : {0.05, 0.2, 0.5}) {
    SmoothingConfig sm;
    sm.mu_s = mu;
    sm.mu_r = mu;
    sm.slack_scale = Vec{0.4, 0.2};
    const SandwichResult res = check_sandwich(fx, sm, 500, 43);
    INFO("mu = " << mu);
    REQUIRE(res.ok);
  }
}

TEST_CASE("smoothing underestimates concave objectives", "[duality]") {
  const AnalyticFixture fx = quadratic_fixture();
  SmoothingConfig sm;
  sm.mu_s = 0.3;
  sm.mu_r = 0.0;
  sm.slack_scale = zeros(2);
  const auto [gl, gr] = gamma_bounds(zeros(1), zeros(2), fx.meta, sm, fx.n_x, fx.n_theta);
  SplitMix64 rng(6);
  for (int k = 0; k < 200; ++k) {
    const Vec x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const double diff = fx.objective_smoothed(x, sm.mu_s) - fx.objective(x);
    REQUIRE(diff <= 0.0);
    REQUIRE(diff >= -gl);
    (void)gr;
  }
}

TEST_CASE("dual grid on the clamp toy finds the saddle value", "[duality]") {
  const AnalyticFixture fx = clamp_toy_fixture();
  std::vector<Vec> lambda_grid;
  for (int k = 0; k <= 200; ++k) lambda_grid.push_back(Vec{k * 0.01});
  GridSpec grid;
  grid.x_points = 201;
  grid.theta_points = 101;

  SmoothingConfig zero;
  zero.slack_scale = Vec{0.0};
  const DualGridResult base = dual_value_grid(fx, zero, lambda_grid, grid);
  REQUIRE(base.d_star == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(base.lambda_star[0] == Catch::Approx(1.0).margin(1e-9));
  REQUIRE_FALSE(base.boundary_warning);

  // |D*_mu - D*| shrinks monotonically with mu (the toy's gap is
  // mu/sqrt(2 pi) exactly, up to clamp tails).
  double prev = 1e9;
  for (double mu : {0.1, 0.01, 0.001}) {
    SmoothingConfig sm;
    sm.mu_s = mu;
    sm.mu_r = mu;
    sm.slack_scale = Vec{0.0};
    const DualGridResult res = dual_value_grid(fx, sm, lambda_grid, grid);
    const double gap = std::abs(res.d_star - base.d_star);
    REQUIRE(gap < prev);
    REQUIRE(gap == Catch::Approx(mu / std::sqrt(2.0 * std::numbers::pi)).epsilon(0.05));
    prev = gap;
  }
}

TEST_CASE("dual function is convex along the multiplier grid", "[duality]") {
  const AnalyticFixture fx = clamp_toy_fixture();
  std::vector<Vec> lambda_grid;
  for (int k = 0; k <= 100; ++k) lambda_grid.push_back(Vec{k * 0.02});
  GridSpec grid;
  grid.x_points = 101;
  grid.theta_points = 51;
  SmoothingConfig sm;
  sm.mu_s = 0.05;
  sm.mu_r = 0.05;
  sm.slack_scale = Vec{0.0};
  const DualGridResult res = dual_value_grid(fx, sm, lambda_grid, grid);
  for (std::size_t k = 1; k + 1 < res.dual_values.size(); ++k) {
    REQUIRE(res.dual_values[k] <=
            0.5 * (res.dual_values[k - 1] + res.dual_values[k + 1]) + 1e-12);
  }
}

TEST_CASE("boundary argmaxima on truncated grids raise the coarseness warning", "[duality]") {
  // An objective increasing in x pushes the inner argmax to the grid edge;
  // when the box is declared a truncation of an unbounded set, that edge
  // hit must be flagged.
  AnalyticFixture fx = clamp_toy_fixture();
  GridSpec grid;
  grid.x_points = 21;
  grid.theta_points = 11;
  grid.x_box_truncates = true;
  SmoothingConfig sm;
  sm.slack_scale = Vec{0.0};
  // lambda < 1 makes (1 - lambda) x maximal at the right edge x = 2.
  const DualGridResult res = dual_value_grid(fx, sm, {Vec{0.5}}, grid);
  REQUIRE(res.boundary_warning);

  grid.x_box_truncates = false;
  REQUIRE_FALSE(dual_value_grid(fx, sm, {Vec{0.5}}, grid).boundary_warning);
}

TEST_CASE("gap study brackets and covering slack", "[duality]") {
  const AnalyticFixture fx = clamp_toy_fixture();
  std::vector<Vec> lambda_grid;
  for (int k = 0; k <= 200; ++k) lambda_grid.push_back(Vec{k * 0.01});
  GridSpec grid;
  grid.x_points = 201;
  grid.theta_points = 101;
  const Vec mus{0.1, 0.01, 0.001};

  const GapStudy zero = dual_gap_study(fx, Vec{0.0}, mus, lambda_grid, grid);
  for (const GapReport& r : zero.reports) REQUIRE(r.sandwich_ok);
  REQUIRE(zero.r_squared >= 0.9);

  // The linear-rate constants refactor the per-mu bounds exactly (with
  // mu_s = mu_r = mu and a linear slack).
  for (const GapReport& r : zero.reports) {
    REQUIRE(r.gamma_l ==
            Catch::Approx(r.mu * (zero.sigma_s_l + zero.sigma_r_l)).margin(1e-12));
    REQUIRE(r.gamma_r == Catch::Approx(r.mu * zero.sigma_r_r).margin(1e-12));
    REQUIRE(r.gap >= -r.mu * (zero.sigma_s_l + zero.sigma_r_l) - 1e-9);
    REQUIRE(r.gap <= r.mu * zero.sigma_r_r + 1e-9);
  }

  // Covering slack C >= c_r: the smoothed dual value cannot exceed the
  // unsmoothed one.
  const GapStudy cover = dual_gap_study(fx, Vec{1.5}, mus, lambda_grid, grid);
  for (const GapReport& r : cover.reports) {
    REQUIRE(r.sandwich_ok);
    REQUIRE(r.gap <= 1e-9);
  }
}

TEST_CASE("gaussian clamp mean closed form", "[duality]") {
  REQUIRE(gaussian_clamp_mean(0.5, 0.0, 0.0, 1.0) == 0.5);
  REQUIRE(gaussian_clamp_mean(-2.0, 0.0, 0.0, 1.0) == 0.0);
  REQUIRE(gaussian_clamp_mean(0.5, 0.01, 0.0, 1.0) == Catch::Approx(0.5).margin(1e-12));
  // At the upper edge the mean drops by sigma/sqrt(2 pi) (one-sided tail).
  const double sigma = 0.05;
  REQUIRE(gaussian_clamp_mean(1.0, sigma, 0.0, 1.0) ==
          Catch::Approx(1.0 - sigma / std::sqrt(2.0 * std::numbers::pi)).margin(1e-6));

  // Against brute-force Monte Carlo.
  GaussianStream g(8);
  double acc = 0.0;
  const long n = 400000;
  for (long k = 0; k < n; ++k)
    acc += std::min(std::max(0.3 + 0.2 * g.next(), 0.0), 1.0);
  REQUIRE(gaussian_clamp_mean(0.3, 0.2, 0.0, 1.0) == Catch::Approx(acc / n).margin(3e-3));
}

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "zopd/smoothing.hpp"

using namespace zopd;

namespace {

double sqnorm(const Vec& x) { return dot(x, x); }

}  // namespace

TEST_CASE("finite_diff on affine functions is the directional slope", "[smoothing]") {
  const Vec a{1.5, -2.0, 0.25};
  const auto f = [&a](const Vec& x) { return dot(a, x) + 3.0; };
  GaussianStream g(3);
  for (int k = 0; k < 50; ++k) {
    const GaussianDraw u = g.draw(3);
    const Vec x = g.draw(3).values;
    for (double mu : {0.01, 0.5, 2.0}) {
      REQUIRE(finite_diff(f, x, mu, u) == Catch::Approx(dot(a, u.values)).margin(1e-9));
    }
  }
}

TEST_CASE("finite_diff of a constant is zero", "[smoothing]") {
  const auto f = [](const Vec&) { return 4.2; };
  GaussianStream g(9);
  const GaussianDraw u = g.draw(5);
  REQUIRE(finite_diff(f, zeros(5), 0.1, u) == 0.0);
}

TEST_CASE("finite_diff matches the direct two-point quotient", "[smoothing]") {
  const auto f = [](const Vec& x) { return sqnorm(x); };
  GaussianStream g(17);
  const Vec x0 = zeros(4);
  for (int k = 0; k < 20; ++k) {
    const GaussianDraw u = g.draw(4);
    const double mu = 1.0;
    // At the origin, (||mu u||^2 - 0) / mu = mu ||u||^2.
    REQUIRE(finite_diff(f, x0, mu, u) == Catch::Approx(mu * sqnorm(u.values)).epsilon(1e-12));
    const Vec shifted = add_scaled(x0, mu, u.values);
    REQUIRE(finite_diff(f, x0, mu, u) == (f(shifted) - f(x0)) / mu);
  }
}

TEST_CASE("finite_diff requires a positive smoothing parameter", "[smoothing]") {
  const auto f = [](const Vec& x) { return x[0]; };
  GaussianStream g(1);
  const GaussianDraw u = g.draw(1);
  REQUIRE_THROWS_WITH(finite_diff(f, Vec{0.0}, 0.0, u),
                      Catch::Matchers::ContainsSubstring("must be positive"));
  REQUIRE_THROWS_AS(finite_diff(f, Vec{0.0}, -0.5, u), std::invalid_argument);
}

TEST_CASE("finite_diff spends exactly two evaluations", "[smoothing]") {
  int calls = 0;
  const auto f = [&calls](const Vec& x) {
    ++calls;
    return dot(x, x);
  };
  GaussianStream g(2);
  const GaussianDraw u = g.draw(3);
  finite_diff(f, zeros(3), 0.3, u);
  REQUIRE(calls == 2);
}

TEST_CASE("zo_grad_sample batch mean recovers affine slopes", "[smoothing]") {
  const Vec a{0.8, -1.2};
  const auto f = [&a](const Vec& x) { return dot(a, x) - 1.0; };
  const Vec x{0.4, 0.7};
  const double mu = 0.3;
  GaussianStream g(23);
  const long n = 100000;
  Vec mean = zeros(2), m2 = zeros(2);
  for (long k = 0; k < n; ++k) {
    const Vec s = zo_grad_sample(f, x, mu, g.draw(2));
    for (int i = 0; i < 2; ++i) {
      const double d = s[i] - mean[i];
      mean[i] += d / (k + 1);
      m2[i] += d * (s[i] - mean[i]);
    }
  }
  for (int i = 0; i < 2; ++i) {
    const double se = std::sqrt(m2[i] / (n - 1) / n);
    REQUIRE(std::abs(mean[i] - a[i]) <= 5.0 * se);
  }
}

TEST_CASE("zo_grad_sample batch mean recovers quadratic gradients", "[smoothing]") {
  const auto f = [](const Vec& x) { return dot(x, x); };
  const Vec x{0.5, -0.25, 1.0};
  const double mu = 0.2;  // smoothing leaves the quadratic gradient 2x unchanged
  GaussianStream g(29);
  const long n = 100000;
  Vec mean = zeros(3), m2 = zeros(3);
  for (long k = 0; k < n; ++k) {
    const Vec s = zo_grad_sample(f, x, mu, g.draw(3));
    for (int i = 0; i < 3; ++i) {
      const double d = s[i] - mean[i];
      mean[i] += d / (k + 1);
      m2[i] += d * (s[i] - mean[i]);
    }
  }
  for (int i = 0; i < 3; ++i) {
    const double se = std::sqrt(m2[i] / (n - 1) / n);
    REQUIRE(std::abs(mean[i] - 2.0 * x[i]) <= 5.0 * se);
  }
}

TEST_CASE("zo_grad_sample with a zero draw is the zero vector", "[smoothing]") {
  const auto f = [](const Vec& x) { return dot(x, x) + x[0]; };
  GaussianDraw u;
  u.values = zeros(4);
  const Vec s = zo_grad_sample(f, Vec{1.0, 2.0, 3.0, 4.0}, 0.5, u);
  for (double v : s) REQUIRE(v == 0.0);
}

TEST_CASE("mc_smoothed_value at mu = 0 is one exact evaluation", "[smoothing]") {
  int calls = 0;
  const auto f = [&calls](const Vec& x) {
    ++calls;
    return dot(x, x) - 2.0;
  };
  GaussianStream g(31);
  const Vec x{1.0, -1.0};
  REQUIRE(mc_smoothed_value(f, x, 0.0, 100, g) == f(x));
  REQUIRE(calls == 2);  // one inside, one in the assertion
}

TEST_CASE("mc_smoothed_value of a quadratic gains mu^2 N", "[smoothing]") {
  const auto f = [](const Vec& x) { return dot(x, x); };
  const Vec x{0.3, -0.6, 0.9, 1.2};
  const double mu = 0.5;
  const long n = 100000;

  // Empirical spread of one sample, for the error bar.
  GaussianStream noise(41);
  double m = 0.0, m2 = 0.0;
  for (long k = 0; k < n; ++k) {
    const double v = f(add_scaled(x, mu, noise.draw(4).values));
    const double d = v - m;
    m += d / (k + 1);
    m2 += d * (v - m);
  }
  const double se = std::sqrt(m2 / (n - 1) / n);

  GaussianStream g(43);
  const double est = mc_smoothed_value(f, x, mu, n, g);
  const double expected = dot(x, x) + mu * mu * 4.0;
  REQUIRE(std::abs(est - expected) <= 3.0 * se);
}

TEST_CASE("mc_smoothed_value of an affine function is unbiased for f(x)", "[smoothing]") {
  const Vec a{2.0, 1.0, -0.5};
  const auto f = [&a](const Vec& x) { return dot(a, x) + 0.7; };
  const Vec x{0.1, 0.2, 0.3};
  const double mu = 0.7;
  const long n = 50000;
  GaussianStream g(47);
  const double est = mc_smoothed_value(f, x, mu, n, g);
  const double se = mu * norm2(a) / std::sqrt(static_cast<double>(n));
  REQUIRE(std::abs(est - f(x)) <= 3.0 * se);
}

TEST_CASE("mc_smoothed_value input validation", "[smoothing]") {
  const auto f = [](const Vec& x) { return x[0]; };
  GaussianStream g(1);
  REQUIRE_THROWS_AS(mc_smoothed_value(f, Vec{0.0}, 0.1, 0, g), std::invalid_argument);
  REQUIRE_THROWS_AS(mc_smoothed_value(f, Vec{0.0}, -0.1, 10, g), std::invalid_argument);
}

TEST_CASE("vector_finite_diff shares evaluations and matches scalar calls", "[smoothing]") {
  int calls = 0;
  const auto fv = [&calls](const Vec& x) {
    ++calls;
    return Vec{x[0] * x[0], x[0] * x[1] - x[2], std::sin(x[2])};
  };
  GaussianStream g(53);
  const Vec x{0.2, -0.4, 0.8};
  const GaussianDraw u = g.draw(3);
  const double mu = 0.37;

  const Vec d = vector_finite_diff(fv, x, mu, u);
  REQUIRE(calls == 2);

  // Componentwise scalar quotients must agree bit-for-bit.
  for (int i = 0; i < 3; ++i) {
    const auto fi = [&fv, i](const Vec& p) { return fv(p)[static_cast<std::size_t>(i)]; };
    REQUIRE(d[static_cast<std::size_t>(i)] == finite_diff(fi, x, mu, u));
  }
}

TEST_CASE("vector_finite_diff of duplicated components is duplicated", "[smoothing]") {
  const auto f = [](const Vec& x) { return x[0] * x[0] - x[1]; };
  const auto fv = [&f](const Vec& x) { return Vec{f(x), f(x)}; };
  GaussianStream g(59);
  const GaussianDraw u = g.draw(2);
  const Vec d = vector_finite_diff(fv, Vec{1.0, 2.0}, 0.5, u);
  REQUIRE(d[0] == d[1]);
}

TEST_CASE("vector_finite_diff of a linear map is A u", "[smoothing]") {
  const std::vector<Vec> rows{{1.0, 2.0}, {-0.5, 0.25}, {3.0, 0.0}};
  const auto fv = [&rows](const Vec& x) {
    Vec out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = dot(rows[i], x);
    return out;
  };
  GaussianStream g(61);
  const GaussianDraw u = g.draw(2);
  const Vec d = vector_finite_diff(fv, Vec{0.7, -0.3}, 0.9, u);
  for (std::size_t i = 0; i < rows.size(); ++i)
    REQUIRE(d[i] == Catch::Approx(dot(rows[i], u.values)).margin(1e-9));
}

TEST_CASE("smoothed value bound for Lipschitz norms", "[smoothing]") {
  // |f_mu(x) - f(x)| <= mu L sqrt(N) + 4 SE for f = L ||.||_2.
  const double L = 2.0;
  const int N = 3;
  const double mu = 0.4;
  const auto f = [L](const Vec& x) { return L * norm2(x); };
  GaussianStream grid_rng(67);
  for (int k = 0; k < 20; ++k) {
    const Vec x = grid_rng.draw(N).values;
    const long n = 20000;
    GaussianStream g(701 + k);
    double m = 0.0, m2 = 0.0;
    for (long s = 0; s < n; ++s) {
      const double v = f(add_scaled(x, mu, g.draw(N).values));
      const double d = v - m;
      m += d / (s + 1);
      m2 += d * (v - m);
    }
    const double se = std::sqrt(m2 / (n - 1) / n);
    REQUIRE(std::abs(m - f(x)) <= mu * L * std::sqrt(static_cast<double>(N)) + 4.0 * se);
  }
}

TEST_CASE("second moment bound for the gradient sample", "[smoothing]") {
  // E ||Delta U||^2 <= L^2 (N + 4)^2 for f = L ||.||_2.
  const double L = 1.5;
  const int N = 4;
  const double mu = 0.3;
  const auto f = [L](const Vec& x) { return L * norm2(x); };
  const Vec x{0.5, -1.0, 0.25, 0.0};
  GaussianStream g(71);
  const long n = 100000;
  double acc = 0.0;
  for (long k = 0; k < n; ++k) {
    const Vec s = zo_grad_sample(f, x, mu, g.draw(N));
    acc += dot(s, s);
  }
  REQUIRE(acc / n <= 1.05 * L * L * (N + 4.0) * (N + 4.0));
}

TEST_CASE("zo gradient agrees with central differences of the smoothed value", "[smoothing]") {
  const auto f = [](const Vec& x) { return dot(x, x) + std::sin(x[0]); };
  const Vec x{0.3, -0.2};
  const double mu = 0.5;
  const long n = 200000;

  Vec grad_mean = zeros(2), grad_m2 = zeros(2);
  GaussianStream g(73);
  for (long k = 0; k < n; ++k) {
    const Vec s = zo_grad_sample(f, x, mu, g.draw(2));
    for (int i = 0; i < 2; ++i) {
      const double d = s[i] - grad_mean[i];
      grad_mean[i] += d / (k + 1);
      grad_m2[i] += d * (s[i] - grad_mean[i]);
    }
  }

  const double h = 1e-4;
  for (int i = 0; i < 2; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    // Common random numbers: the same stream seed on both sides.
    GaussianStream gp(997), gm(997);
    const double fp = mc_smoothed_value(f, xp, mu, 50000, gp);
    const double fm = mc_smoothed_value(f, xm, mu, 50000, gm);
    const double central = (fp - fm) / (2.0 * h);
    const double se = std::sqrt(grad_m2[i] / (n - 1) / n);
    // CRN cancels most of the Monte Carlo error on the central difference;
    // allow it a conservative extra bar.
    REQUIRE(std::abs(grad_mean[i] - central) <= 5.0 * se + 1e-3);
  }
}

TEST_CASE("smoothing determinism: same seed, same estimates", "[smoothing]") {
  const auto f = [](const Vec& x) { return std::exp(-dot(x, x)); };
  const Vec x{0.1, 0.2, 0.3};
  GaussianStream a(81), b(81);
  REQUIRE(mc_smoothed_value(f, x, 0.7, 5000, a) == mc_smoothed_value(f, x, 0.7, 5000, b));

  GaussianStream c(82), d(82);
  const Vec s1 = zo_grad_sample(f, x, 0.7, c.draw(3));
  const Vec s2 = zo_grad_sample(f, x, 0.7, d.draw(3));
  for (int i = 0; i < 3; ++i) REQUIRE(s1[static_cast<std::size_t>(i)] == s2[static_cast<std::size_t>(i)]);
}

TEST_CASE("slack is C mu_r sqrt(n_phi), zero at mu_r = 0", "[smoothing]") {
  SmoothingConfig cfg;
  cfg.mu_r = 1e-2;
  cfg.slack_scale = Vec{1.0, 1.0};
  const Vec s = cfg.slack(2, 100);
  REQUIRE(s[0] == Catch::Approx(0.1));
  REQUIRE(s[1] == Catch::Approx(0.1));

  cfg.mu_r = 0.0;
  for (double v : cfg.slack(2, 100)) REQUIRE(v == 0.0);

  SmoothingConfig zero;
  zero.mu_r = 0.5;
  for (double v : zero.slack(3, 10)) REQUIRE(v == 0.0);  // C = 0

  SmoothingConfig bad;
  bad.mu_s = -1.0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

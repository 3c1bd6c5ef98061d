#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "zopd/channels.hpp"

using namespace zopd;

namespace {

ChannelParams params_n(int n, double p_max = 20.0) {
  ChannelParams p;
  p.noise = constant(static_cast<std::size_t>(n), 1.0);
  p.p_max = p_max;
  p.weights = constant(static_cast<std::size_t>(n), 1.0 / n);
  return p;
}

}  // namespace

TEST_CASE("awgn rate arithmetic", "[channels]") {
  const ChannelParams p = params_n(1);
  REQUIRE(awgn_rates(Vec{1.0}, Vec{10.0}, p)[0] == Catch::Approx(std::log(11.0)).epsilon(1e-12));
  REQUIRE(awgn_rates(Vec{0.0}, Vec{10.0}, p)[0] == 0.0);
  REQUIRE(awgn_rates(Vec{1.0}, Vec{0.0}, p)[0] == 0.0);
}

TEST_CASE("awgn rates are scale invariant in (h p, nu)", "[channels]") {
  ChannelParams a = params_n(1);
  ChannelParams b = params_n(1);
  b.noise[0] = 7.0;
  const double r1 = awgn_rates(Vec{2.0}, Vec{3.0}, a)[0];
  const double r2 = awgn_rates(Vec{2.0 * 7.0}, Vec{3.0}, b)[0];
  REQUIRE(r1 == Catch::Approx(r2).epsilon(1e-12));
}

TEST_CASE("mai rate arithmetic", "[channels]") {
  const ChannelParams p2 = params_n(2);
  const Vec r = mai_rates(Vec{1.0, 1.0}, Vec{1.0, 1.0}, p2);
  REQUIRE(r[0] == Catch::Approx(std::log(1.5)).epsilon(1e-12));
  REQUIRE(r[1] == Catch::Approx(std::log(1.5)).epsilon(1e-12));

  // Single user reduces to AWGN.
  const ChannelParams p1 = params_n(1);
  REQUIRE(mai_rates(Vec{1.3}, Vec{4.0}, p1)[0] ==
          Catch::Approx(awgn_rates(Vec{1.3}, Vec{4.0}, p1)[0]).epsilon(1e-14));

  // Zero interferers reduce to AWGN per user.
  const ChannelParams p3 = params_n(3);
  const Vec h{0.5, 2.0, 1.0};
  const Vec p{3.0, 0.0, 0.0};
  REQUIRE(mai_rates(h, p, p3)[0] == Catch::Approx(awgn_rates(h, p, p3)[0]).epsilon(1e-14));
}

TEST_CASE("interference only hurts", "[channels]") {
  const ChannelParams p = params_n(4);
  SplitMix64 rng(5);
  for (int t = 0; t < 200; ++t) {
    Vec h(4), pw(4);
    for (double& v : h) v = rng.uniform(0.0, 5.0);
    for (double& v : pw) v = rng.uniform(0.1, 5.0);
    const Vec mai = mai_rates(h, pw, p);
    const Vec awgn = awgn_rates(h, pw, p);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(mai[static_cast<std::size_t>(i)] <= awgn[static_cast<std::size_t>(i)] + 1e-15);
      REQUIRE(mai[static_cast<std::size_t>(i)] >= 0.0);
    }
  }
}

TEST_CASE("budget component stacks below the rates", "[channels]") {
  const ChannelParams p = params_n(10);
  const Vec h = constant(10, 1.0);

  const Vec uniform = constant(10, 2.0);  // p_max / n
  Vec svc = service_with_budget(awgn_rates, h, uniform, p);
  REQUIRE(svc.size() == 11);
  REQUIRE(svc[10] == Catch::Approx(0.0).margin(1e-12));

  svc = service_with_budget(awgn_rates, h, zeros(10), p);
  REQUIRE(svc[10] == Catch::Approx(20.0));

  svc = service_with_budget(awgn_rates, h, constant(10, 1.0), p);
  REQUIRE(svc[10] == Catch::Approx(10.0));
}

TEST_CASE("exponential fading has the configured mean", "[channels]") {
  FadingSampler s = FadingSampler::exponential(1, 0.5, 2024);
  const long n = 1000000;
  double acc = 0.0;
  for (long k = 0; k < n; ++k) acc += s.draw()[0];
  REQUIRE(acc / n == Catch::Approx(2.0).margin(0.01));
}

TEST_CASE("fading draws are nonnegative and reseedable", "[channels]") {
  FadingSampler s = FadingSampler::exponential(4, 0.5, 99);
  for (int k = 0; k < 1000; ++k)
    for (double v : s.draw()) REQUIRE(v >= 0.0);

  FadingSampler a = FadingSampler::exponential(3, 0.5, 7);
  FadingSampler b = FadingSampler::exponential(3, 0.5, 8);
  b.reseed(7);
  for (int k = 0; k < 100; ++k) REQUIRE(a.draw() == b.draw());
}

TEST_CASE("fixed fading returns the fixture verbatim", "[channels]") {
  FadingSampler s = FadingSampler::fixed(Vec{1.0, 2.0, 3.0});
  REQUIRE(s.is_fixed());
  for (int k = 0; k < 10; ++k) REQUIRE(s.draw() == Vec{1.0, 2.0, 3.0});
}

TEST_CASE("channel parameter validation", "[channels]") {
  ChannelParams p = params_n(2);
  REQUIRE_NOTHROW(p.validate());
  p.weights[0] += 1e-6;
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
  p = params_n(2);
  p.noise[1] = 0.0;
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
  p = params_n(2);
  p.p_max = 0.0;
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("simplex weights are a seeded distribution on the simplex", "[channels]") {
  const Vec w = simplex_weights(6, 11);
  REQUIRE(sum(w) == Catch::Approx(1.0).margin(1e-12));
  for (double v : w) REQUIRE(v > 0.0);
  REQUIRE(w == simplex_weights(6, 11));
  REQUIRE(w != simplex_weights(6, 12));
}

#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "su11/core.hpp"

using namespace su11;

TEST_CASE("derive_params: no squeezing gives n_s = 0 and eta = 1") {
  for (double nu : {0.0, 1.0, 3 * kPi / 2, 5.0}) {
    for (auto p : {Platform::Spinor3, Platform::Hybrid4}) {
      InterferometerConfig c = with_nu({}, nu);
      c.platform = p;
      c.r = 0;
      c.n_f = 0.3;
      const auto d = derive_params(c);
      CHECK(d.n_s == 0.0);
      CHECK(d.eta == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("derive_params: r = 1, nu = 3pi/2 gives eta = e^2") {
  InterferometerConfig c = with_nu({}, 3 * kPi / 2);
  c.r = 1;
  const auto d = derive_params(c);
  CHECK(d.eta == doctest::Approx(7.38905609893065).epsilon(1e-14));
  CHECK(d.eta == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(d.n_s == doctest::Approx(2 * std::sinh(1.0) * std::sinh(1.0)));
  CHECK(d.nu == doctest::Approx(3 * kPi / 2));
}

TEST_CASE("hybrid at n_f = 1 has the spinor eta") {
  for (double r : {0.3, 1.0, 2.0}) {
    InterferometerConfig s = with_nu({}, 3 * kPi / 2), h = s;
    s.r = h.r = r;
    h.platform = Platform::Hybrid4;
    h.n_f = 1.0;
    CHECK(derive_params(h).eta == doctest::Approx(derive_params(s).eta).epsilon(1e-15));
  }
}

TEST_CASE("canonical phase combines mixer, pump and squeezing phases") {
  InterferometerConfig c;
  c.vartheta = 1.3;
  c.vartheta_pump = 0.2;
  c.vartheta_sq = 0.5;
  CHECK(canonical_nu(c) == doctest::Approx(2 * (1.3 - 0.2) - 0.5));
  c.platform = Platform::Hybrid4;
  CHECK(canonical_nu(c) == doctest::Approx(2 * 1.3 - 0.2 - 0.5));
  c.vartheta = -1.0;
  c.vartheta_pump = 0.0;
  c.vartheta_sq = 0.0;
  CHECK(canonical_nu(c) == doctest::Approx(kTwoPi - 2.0));
}

TEST_CASE("validation rejects bad configs") {
  InterferometerConfig c;
  c.n_total = -1;
  CHECK_THROWS_AS(derive_params(c), ConfigError);
  c = {};
  c.r = NAN;
  CHECK_THROWS_AS(derive_params(c), ConfigError);
  c = {};
  c.platform = Platform::Hybrid4;
  c.n_f = 0;
  CHECK_THROWS_AS(derive_params(c), ConfigError);
  c = {};
  c.n_total = 10;
  c.r = 3;  // n_s ~ 200
  CHECK_THROWS_AS(derive_params(c), ConfigError);
  c.allow_depleted = true;
  CHECK_NOTHROW(derive_params(c));
  NoiseSpec n;
  n.delta_n = -1;
  CHECK_THROWS_AS(validate(n), ConfigError);
}

TEST_CASE("derive_params is pure and eta obeys the hyperbolic bound") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 2000; ++k) {
    InterferometerConfig c;
    c.platform = k % 2 ? Platform::Hybrid4 : Platform::Spinor3;
    c.r = 3 * U(rng);
    c.n_total = 1e6;
    c.vartheta = 7 * U(rng) - 1;
    c.vartheta_pump = U(rng);
    c.vartheta_sq = U(rng);
    c.n_f = std::pow(10.0, 6 * U(rng) - 3);
    const auto a = derive_params(c), b = derive_params(c);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    CHECK(a.eta >= std::exp(-2 * c.r) * (1 - 1e-12));
  }
}

TEST_CASE("side population round trip") {
  for (double ns : {0.0, 0.1, 2.8, 10.0, 500.0}) CHECK(side_population(r_from_side_population(ns)) == doctest::Approx(ns).epsilon(1e-13));
}

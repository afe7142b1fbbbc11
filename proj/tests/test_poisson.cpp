#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "poibin/poisson.hpp"

using namespace poibin;
using Catch::Approx;

TEST_CASE("poisson_log_pmf matches the closed form on small cases") {
  CHECK(poisson_log_pmf(1.0, 0) == -1.0);  // exactly -lambda
  // hand evaluations of lambda^k e^{-lambda} / k!
  CHECK(poisson_log_pmf(0.5, 2) == Approx(-2.5794415416798359).epsilon(1e-15));
  CHECK(std::exp(poisson_log_pmf(2.0, 2)) == Approx(0.27067056647322538).epsilon(1e-14));
  CHECK(std::exp(poisson_log_pmf(7.0, 3)) == Approx(0.052129252364199843).epsilon(1e-14));
}

TEST_CASE("poisson_log_pmf stays accurate far from the origin") {
  // references computed with 40-digit arithmetic
  CHECK(std::exp(poisson_log_pmf(100.0, 120)) == Approx(0.005561064886513001).epsilon(1e-13));
  CHECK(std::exp(poisson_log_pmf(1e6, 1000000)) == Approx(0.00039894224715624403).epsilon(1e-13));
  CHECK(std::exp(poisson_log_pmf(1e6, 1001000)) == Approx(0.00024189010120174142).epsilon(1e-13));
  CHECK(std::exp(poisson_log_pmf(0.1, 40)) == Approx(1.108984519120776e-88).epsilon(1e-13));
  CHECK(std::exp(poisson_log_pmf(5.0, 60)) == Approx(7.0234905311313553e-43).epsilon(1e-13));
}

TEST_CASE("poisson_log_pmf domain errors") {
  CHECK_THROWS_AS(poisson_log_pmf(0.0, 1), std::domain_error);
  CHECK_THROWS_AS(poisson_log_pmf(-1.0, 1), std::domain_error);
  CHECK_THROWS_AS(poisson_log_pmf(std::numeric_limits<double>::quiet_NaN(), 1),
                  std::domain_error);
  CHECK_THROWS_AS(poisson_log_pmf(std::numeric_limits<double>::infinity(), 1),
                  std::domain_error);
  CHECK_THROWS_AS(poisson_log_pmf(1.0, -1), std::domain_error);
}

TEST_CASE("poisson_tail values and consistency") {
  CHECK(poisson_tail(1.0, 2) == Approx(0.080301397071394196).margin(1e-15));
  CHECK(poisson_tail(1.0, 0) == Approx(1.0 - std::exp(-1.0)).margin(1e-15));
  CHECK(poisson_tail(5.0, -1) == 1.0);  // whole line

  // tail(n) = tail(n+1) + f(n+1), and pmf + tail partitions the line
  for (double lambda : {0.05, 0.5, 1.0, 3.7, 20.0, 250.0}) {
    stable_sum mass;
    for (std::int64_t k = 0; k <= 30; ++k) {
      CHECK(poisson_tail(lambda, k) ==
            Approx(poisson_tail(lambda, k + 1) + poisson_pmf(lambda, k + 1)).margin(1e-15));
      mass += poisson_pmf(lambda, k);
    }
    CHECK(mass.get() + poisson_tail(lambda, 30) == Approx(1.0).margin(1e-14));
  }
}

TEST_CASE("poisson_tail at extreme parameters") {
  // head masses underflow entirely: the tail is 1 to double precision
  CHECK(poisson_tail(1000.0, 0) == 1.0);
  CHECK(poisson_tail(1e6, 100) == 1.0);
  // far past the mode the tail underflows to 0
  CHECK(poisson_tail(0.5, 400) == 0.0);
  CHECK_THROWS_AS(poisson_tail(-1.0, 2), std::domain_error);
}

TEST_CASE("poisson_interval") {
  CHECK(poisson_interval(1.0, -2, 0) == Approx(std::exp(-1.0)).margin(1e-16));
  CHECK(poisson_interval(1.0, 0, 2) == Approx(0.9196986029286058).margin(1e-15));
  CHECK(poisson_interval(2.0, 1, 1) == Approx(0.27067056647322538).margin(1e-16));
  CHECK(poisson_interval(1.0, 3, 2) == 0.0);  // empty
}

TEST_CASE("stirling envelope brackets the factorial") {
  const auto b1 = stirling_envelope(1);
  CHECK(b1.lower == Approx(0.9221370088957891).epsilon(1e-14));
  CHECK(b1.upper == Approx(1.0).epsilon(1e-14));  // 1! sits on the upper bound

  const auto b5 = stirling_envelope(5);
  CHECK(b5.lower == Approx(118.01916795759008).epsilon(1e-13));
  CHECK(b5.upper == Approx(127.98441752046354).epsilon(1e-13));
  CHECK(b5.lower <= 120.0);
  CHECK(120.0 <= b5.upper);

  double factorial = 1.0;
  for (std::int64_t k = 1; k <= 170; ++k) {
    factorial *= static_cast<double>(k);
    const auto b = stirling_envelope(k);
    CHECK(b.lower <= factorial * (1 + 1e-12));
    CHECK(factorial <= b.upper * (1 + 1e-12));
  }
  // beyond the double-range factorials: compare in log space
  for (std::int64_t k : {200ll, 1000ll, 100000ll, 1000000ll}) {
    const auto lg = stirling_envelope_log(k);
    const double lf = std::lgamma(static_cast<double>(k) + 1.0);
    CHECK(lg.lower <= lf);
    CHECK(lf <= lg.upper);
  }
  CHECK_THROWS_AS(stirling_envelope(0), std::domain_error);
}

TEST_CASE("gaussian envelope examples") {
  const auto e22 = gaussian_envelope(2.0, 2);
  REQUIRE(e22.lower.has_value());
  REQUIRE(e22.upper.has_value());
  CHECK(*e22.lower == Approx(0.26013004751144445).epsilon(1e-14));
  CHECK(*e22.upper == Approx(0.28209479177387814).epsilon(1e-14));
  const double f22 = poisson_pmf(2.0, 2);
  CHECK(*e22.lower <= f22);
  CHECK(f22 <= std::min(*e22.upper, e22.cap));

  const auto e21 = gaussian_envelope(2.0, 1);
  CHECK(*e21.lower == Approx(0.22313016014842983).epsilon(1e-14));
  CHECK(*e21.upper == Approx(0.33769734964599975).epsilon(1e-14));

  // k = lambda zeroes the exponents
  const auto e44 = gaussian_envelope(4.0, 4);
  CHECK(*e44.lower == Approx(1.0 / (std::numbers::e * 2.0)).epsilon(1e-15));
  CHECK(*e44.upper == Approx(e44.cap).epsilon(1e-15));
  REQUIRE(e44.refined_lower.has_value());
  CHECK(*e44.refined_lower == Approx(*e44.lower).epsilon(1e-15));

  // outside [1, 2 lambda]: only the cap (plus the refined lower, k >= lambda)
  const auto e25 = gaussian_envelope(2.0, 5);
  CHECK_FALSE(e25.lower.has_value());
  CHECK_FALSE(e25.upper.has_value());
  REQUIRE(e25.refined_lower.has_value());
  CHECK(e25.cap == Approx(1.0 / std::sqrt(10.0 * std::numbers::pi)).epsilon(1e-15));

  CHECK_THROWS_AS(gaussian_envelope(2.0, 0), std::domain_error);
}

TEST_CASE("gaussian envelope containment on a grid") {
  for (double lambda : {0.6, 1.0, 2.0, 3.3, 8.0, 50.0, 123.4}) {
    const std::int64_t hi = static_cast<std::int64_t>(2.0 * lambda);
    for (std::int64_t k = 1; k <= hi; ++k) {
      const auto env = gaussian_envelope(lambda, k);
      const double f = poisson_pmf(lambda, k);
      REQUIRE(env.lower.has_value());
      CHECK(*env.lower <= f * (1 + 1e-12));
      CHECK(f <= std::min(*env.upper, env.cap) * (1 + 1e-12));
      if (static_cast<double>(k) >= lambda) {
        REQUIRE(env.refined_lower.has_value());
        CHECK(*env.refined_lower <= f * (1 + 1e-12));
      }
    }
    // refined lower keeps holding past 2 lambda
    const std::int64_t stretch = hi + 1 + static_cast<std::int64_t>(10.0 * std::sqrt(lambda));
    for (std::int64_t k = hi + 1; k <= stretch; ++k) {
      const auto env = gaussian_envelope(lambda, k);
      REQUIRE(env.refined_lower.has_value());
      CHECK(*env.refined_lower <= poisson_pmf(lambda, k) * (1 + 1e-12));
    }
  }
}

TEST_CASE("poisson tail-moment bound") {
  const double b = poisson_tail_moment_bound(1.0, 2, 1);
  CHECK(b == Approx(0.73575888234288464).epsilon(1e-12));
  // exact tail sum_{k>=2} k f(k) = E Z - f(1) = 1 - e^{-1}
  CHECK(b >= 0.63212055882855768);

  CHECK_THROWS_AS(poisson_tail_moment_bound(5.0, 2, 1), inapplicable_error);

  // the [2 lambda]+1, d = 6 regime used for the chi^2 tail split
  const double b6 = poisson_tail_moment_bound(8.0, 17, 6);
  CHECK(b6 == Approx(137162.87470782435).epsilon(1e-10));
  // independent direct summation
  stable_sum direct;
  for (std::int64_t k = 17; k <= 200; ++k) {
    direct += std::pow(static_cast<double>(k), 6.0) * poisson_pmf(8.0, k);
  }
  CHECK(direct.get() == Approx(121872.03589099351).epsilon(1e-10));
  CHECK(b6 >= direct.get());
}

TEST_CASE("poisson moment facts") {
  const auto m12 = poisson_moment_facts(1.0, 2);
  CHECK(m12.rising_bound == Approx(2.0));
  // E Z^2 = lambda + lambda^2 meets the rising bound at m = 2, lambda = 1
  CHECK(m12.rising_bound == Approx(1.0 + 1.0));
  CHECK(poisson_moment_facts(3.0, 1).rising_bound == Approx(3.0));
  const auto m2 = poisson_moment_facts(2.0, 1);
  CHECK(m2.central2 == Approx(2.0));
  CHECK(m2.central4 == Approx(10.0));

  // rising factorial dominates E Z^m (moments summed directly)
  for (double lambda : {0.5, 2.0, 7.0}) {
    for (std::int64_t m = 1; m <= 6; ++m) {
      stable_sum ez;
      for (std::int64_t k = 0; k <= 400; ++k) {
        ez += std::pow(static_cast<double>(k), static_cast<double>(m)) *
              poisson_pmf(lambda, k);
      }
      CHECK(ez.get() <= poisson_moment_facts(lambda, m).rising_bound * (1 + 1e-12));
    }
  }
}

TEST_CASE("PoissonLaw validates its parameter") {
  CHECK_THROWS_AS(PoissonLaw(0.0), std::domain_error);
  CHECK_THROWS_AS(PoissonLaw(-2.0), std::domain_error);
  const PoissonLaw z(1.5);
  CHECK(z.pmf(0) == Approx(std::exp(-1.5)));
  CHECK(z.tail(-1) == 1.0);
  CHECK(z.interval(0, 1000) == Approx(1.0).margin(1e-14));
}

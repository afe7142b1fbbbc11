#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "poibin/instance.hpp"
#include "poibin/pmf.hpp"

using namespace poibin;
using Catch::Approx;

namespace {

std::vector<double> random_p(std::mt19937_64& eng, std::size_t n, double cap = 1.0) {
  std::vector<double> p(n);
  for (auto& x : p) x = cap * ((eng() >> 11) + 0.5) * 0x1.0p-53;
  return p;
}

}  // namespace

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(BernoulliInstance(std::vector<double>{}), std::domain_error);
  CHECK_THROWS_AS(BernoulliInstance({0.5, 1.5}), std::domain_error);
  CHECK_THROWS_AS(BernoulliInstance({-0.1}), std::domain_error);
  CHECK_THROWS_AS(BernoulliInstance({std::numeric_limits<double>::quiet_NaN()}),
                  std::domain_error);
  CHECK(BernoulliInstance({0.0, 1.0}).max_p() == 1.0);
}

TEST_CASE("pb_pmf examples") {
  const Pmf fair = pb_pmf(BernoulliInstance({0.5, 0.5}));
  CHECK(fair[0] == Approx(0.25).margin(1e-16));
  CHECK(fair[1] == Approx(0.5).margin(1e-16));
  CHECK(fair[2] == Approx(0.25).margin(1e-16));

  const Pmf uneven = pb_pmf(BernoulliInstance({0.1, 0.2}));
  CHECK(uneven[0] == Approx(0.72).margin(1e-15));
  CHECK(uneven[1] == Approx(0.26).margin(1e-15));
  CHECK(uneven[2] == Approx(0.02).margin(1e-15));

  const Pmf degenerate = pb_pmf(BernoulliInstance({0.0, 0.0, 0.0}));
  CHECK(degenerate[0] == 1.0);
  CHECK(degenerate[1] == 0.0);
  CHECK(degenerate[3] == 0.0);

  // p_j = 1 shifts the support
  const Pmf shifted = pb_pmf(BernoulliInstance({1.0, 0.5}));
  CHECK(shifted[0] == 0.0);
  CHECK(shifted[1] == Approx(0.5).margin(1e-16));
  CHECK(shifted[2] == Approx(0.5).margin(1e-16));
}

TEST_CASE("brute-force oracle examples") {
  const Pmf w = pb_pmf_bruteforce(BernoulliInstance({0.1, 0.2}));
  CHECK(w[0] == Approx(0.72).margin(1e-15));
  CHECK(w[1] == Approx(0.26).margin(1e-15));
  CHECK(w[2] == Approx(0.02).margin(1e-15));

  const Pmf certain = pb_pmf_bruteforce(BernoulliInstance({1.0}));
  CHECK(certain[0] == 0.0);
  CHECK(certain[1] == 1.0);

  const Pmf single = pb_pmf_bruteforce(BernoulliInstance({0.3}));
  CHECK(single[0] == Approx(0.7).margin(1e-16));
  CHECK(single[1] == Approx(0.3).margin(1e-16));

  CHECK_THROWS_AS(pb_pmf_bruteforce(BernoulliInstance(std::vector<double>(21, 0.5))),
                  std::domain_error);
}

TEST_CASE("oracle equivalence, normalization, moments") {
  std::mt19937_64 eng(20240901);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + eng() % 16;
    const BernoulliInstance inst(random_p(eng, n));
    const Pmf fast = pb_pmf(inst);
    const Pmf slow = pb_pmf_bruteforce(inst);

    double worst = 0.0;
    for (std::size_t k = 0; k <= n; ++k) worst = std::max(worst, std::abs(fast[k] - slow[k]));
    CHECK(worst <= 1e-14);

    CHECK(std::abs(fast.total() - 1.0) <= 1e-12);
    for (double x : fast.weights()) CHECK(x >= 0.0);

    const InstanceStats st = pb_stats(inst);
    stable_sum mean, var;
    for (std::size_t k = 0; k <= n; ++k) {
      mean += static_cast<double>(k) * fast[k];
    }
    for (std::size_t k = 0; k <= n; ++k) {
      const double c = static_cast<double>(k) - st.lambda;
      var += c * c * fast[k];
    }
    CHECK(mean.get() == Approx(st.lambda).epsilon(1e-10));
    CHECK(var.get() == Approx(st.variance).epsilon(1e-10));
  }
}

TEST_CASE("pb_stats examples") {
  const InstanceStats st = pb_stats(BernoulliInstance({0.1, 0.2}));
  CHECK(st.lambda == Approx(0.3).margin(1e-16));
  CHECK(st.lambda2 == Approx(0.05).margin(1e-16));
  CHECK(st.lambda3 == Approx(0.009).margin(1e-17));
  CHECK(st.variance == Approx(0.25).margin(1e-16));
  CHECK(st.max_p == 0.2);
  CHECK(st.F == 1.0);
  REQUIRE(st.kappa_eff.has_value());
  CHECK(*st.kappa_eff == Approx(1.0 / 6.0).epsilon(1e-14));

  const InstanceStats iid = pb_stats(BernoulliInstance(std::vector<double>(10, 0.5)));
  CHECK(iid.lambda == Approx(5.0).margin(1e-14));
  CHECK(iid.lambda2 == Approx(2.5).margin(1e-14));
  CHECK(*iid.kappa_eff == Approx(0.5).epsilon(1e-15));

  // p_j = 1/(2 sqrt j), the heavy-tail comparison example
  std::vector<double> decay(4096);
  for (std::size_t j = 1; j <= decay.size(); ++j) {
    decay[j - 1] = 0.5 / std::sqrt(static_cast<double>(j));
  }
  const InstanceStats sd = pb_stats(BernoulliInstance(decay));
  CHECK(sd.lambda == Approx(63.273728916122347).epsilon(1e-12));
  CHECK(sd.lambda2 == Approx(2.2237759742415807).epsilon(1e-12));

  CHECK_FALSE(pb_stats(BernoulliInstance({0.0, 0.0})).kappa_eff.has_value());

  // F = max(1, lambda)/max(1, lambda - lambda2)
  const InstanceStats big = pb_stats(BernoulliInstance({0.9, 0.9}));
  CHECK(big.F == Approx(1.8 / 1.0).epsilon(1e-14));
}

TEST_CASE("power sums are non-increasing in s") {
  std::mt19937_64 eng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const BernoulliInstance inst(random_p(eng, 1 + eng() % 24));
    double prev = power_sum(inst, 1);
    CHECK(prev == Approx(pb_stats(inst).lambda).epsilon(1e-14));
    for (std::int64_t s = 2; s <= 8; ++s) {
      const double cur = power_sum(inst, s);
      CHECK(cur <= prev * (1 + 1e-14));
      prev = cur;
    }
  }
}

TEST_CASE("taylor_S closed forms and identities") {
  CHECK(taylor_S(BernoulliInstance({0.5})) == Approx(0.19314718055994531).epsilon(1e-12));
  CHECK(taylor_S(BernoulliInstance({0.5, 0.5})) == Approx(0.38629436111989062).epsilon(1e-12));
  // from pb_pmf: w_0 = 0.72 = exp(-0.3 - S)
  CHECK(taylor_S(BernoulliInstance({0.1, 0.2})) == Approx(0.028504066972036057).epsilon(1e-12));

  CHECK_THROWS_AS(taylor_S(BernoulliInstance({1.0, 0.2})), std::domain_error);
  CHECK_THROWS_AS(taylor_S(BernoulliInstance({0.5}), 1), std::domain_error);

  // truncation honours the stated geometric remainder
  const BernoulliInstance inst({0.4, 0.3, 0.25});
  const double full = taylor_S(inst);
  const double truncated = taylor_S(inst, 3);
  const InstanceStats st = pb_stats(inst);
  const double remainder = std::pow(st.max_p, 2.0) * st.lambda2 / (1.0 - st.max_p);
  CHECK(std::abs(full - truncated) <= remainder);

  std::mt19937_64 eng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + eng() % 20;
    const BernoulliInstance rand_inst(random_p(eng, n, 0.9));
    const InstanceStats rst = pb_stats(rand_inst);
    const double s = taylor_S(rand_inst);
    // w_0 identity
    CHECK(std::exp(-rst.lambda - s) == Approx(pb_pmf(rand_inst)[0]).margin(1e-12));
    // the Taylor tail stays below lambda2 whenever max_p <= 1/2
    if (rst.max_p <= 0.5) CHECK(s <= rst.lambda2 * (1 + 1e-12));
  }
}

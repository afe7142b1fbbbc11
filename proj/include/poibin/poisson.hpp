// Poisson probability machinery: log-space pmf, tails, Stirling and
// Gaussian-type envelopes, tail-moment and moment bounds.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "poibin/errors.hpp"
#include "poibin/summation.hpp"

namespace poibin {

namespace detail {

inline void require_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda <= 0.0) {
    throw std::domain_error("poisson: lambda must be finite and > 0");
  }
}

/// stirlerr(n) = log(n!) - [ (n + 1/2) log n - n + log(2 pi)/2 ].
/// Table for n <= 16, asymptotic series beyond; absolute error < 1e-16
/// either way, which keeps log-pmf values accurate to a few ulps even
/// where the naive log-gamma difference would lose seven digits.
inline double stirlerr(std::int64_t n) {
  static constexpr double table[17] = {
      0.0,  // unused
      0.0810614667953272582,
      0.0413406959554092941,
      0.0276779256849983391,
      0.0207906721037650931,
      0.0166446911898211922,
      0.013876128823070748,
      0.0118967099458917701,
      0.0104112652619720965,
      0.00925546218271273292,
      0.00833056343336287126,
      0.00757367548795184079,
      0.00694284010720952987,
      0.00640899418800420707,
      0.00595137011275884774,
      0.00555473355196280137,
      0.00520765591960964044,
  };
  if (n <= 16) return table[n];
  const double nn = static_cast<double>(n);
  const double inv2 = 1.0 / (nn * nn);
  // 1/(12n) - 1/(360n^3) + 1/(1260n^5) - 1/(1680n^7) + 1/(1188n^9)
  return (1.0 / 12 - (1.0 / 360 - (1.0 / 1260 - (1.0 / 1680 - inv2 / 1188) * inv2) * inv2) * inv2) / nn;
}

/// bd0(x, m) = x log(x/m) + m - x, evaluated without cancellation when
/// x is close to m.
inline double bd0(double x, double m) {
  if (std::abs(x - m) < 0.1 * (x + m)) {
    const double v = (x - m) / (x + m);
    double s = (x - m) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1;; ++j) {
      ej *= v2;
      const double term = ej / (2 * j + 1);
      const double s1 = s + term;
      if (s1 == s) return s1;
      s = s1;
    }
  }
  return x * std::log(x / m) + m - x;
}

}  // namespace detail

/// log P{Z = k} for Z ~ Poisson(lambda); equals k log(lambda) - log Gamma(k+1) - lambda.
/// Exponentiating reproduces the mass to a few ulps across the whole
/// representable range (the saddle decomposition avoids the cancellation
/// of the large log-gamma terms).
inline double poisson_log_pmf(double lambda, std::int64_t k) {
  detail::require_lambda(lambda);
  if (k < 0) throw std::domain_error("poisson_log_pmf: k must be >= 0");
  if (k == 0) return -lambda;
  const double kk = static_cast<double>(k);
  return -detail::stirlerr(k) - detail::bd0(kk, lambda) -
         0.5 * std::log(2.0 * std::numbers::pi * kk);
}

/// P{Z = k}.
inline double poisson_pmf(double lambda, std::int64_t k) {
  return std::exp(poisson_log_pmf(lambda, k));
}

/// P{Z > n}, exact to ~1e-16 absolute. Terms are summed upward from
/// f(n+1); once the terms decay geometrically (k+1 > lambda) the loop
/// stops when the remaining geometric envelope is below 1e-18 of the
/// accumulated value.
inline double poisson_tail(double lambda, std::int64_t n) {
  detail::require_lambda(lambda);
  if (n < 0) return 1.0;  // whole line
  std::int64_t k = n + 1;
  double term = poisson_pmf(lambda, k);
  if (term == 0.0) {
    // below the mode every mass up to n underflows as well, so the head
    // carries no representable probability at all
    return static_cast<double>(k) > lambda ? 0.0 : 1.0;
  }
  stable_sum acc;
  while (true) {
    acc += term;
    const double ratio = lambda / static_cast<double>(k + 1);
    if (ratio < 1.0) {
      const double envelope = term * ratio / (1.0 - ratio);
      if (envelope <= 1e-18 * acc.get() || envelope == 0.0) break;
    }
    ++k;
    term *= lambda / static_cast<double>(k);
  }
  return acc.get();
}

/// P{a <= Z <= b}; negative a is clamped to 0, empty intervals give 0.
inline double poisson_interval(double lambda, std::int64_t a, std::int64_t b) {
  detail::require_lambda(lambda);
  if (a > b) return 0.0;
  a = std::max<std::int64_t>(a, 0);
  if (a > b) return 0.0;
  stable_sum acc;
  double term = poisson_pmf(lambda, a);
  acc += term;
  for (std::int64_t k = a + 1; k <= b; ++k) {
    term *= lambda / static_cast<double>(k);
    acc += term;
  }
  return acc.get();
}

struct stirling_bounds {
  double lower;  // sqrt(2 pi) k^{k+1/2} e^{-k}
  double upper;  // e k^{k+1/2} e^{-k}
};

/// Two-sided Stirling bracket of k!, k >= 1.
inline stirling_bounds stirling_envelope_log(std::int64_t k) {
  if (k < 1) throw std::domain_error("stirling_envelope: k must be >= 1");
  const double kk = static_cast<double>(k);
  const double core = (kk + 0.5) * std::log(kk) - kk;
  return {0.5 * std::log(2.0 * std::numbers::pi) + core, 1.0 + core};
}

inline stirling_bounds stirling_envelope(std::int64_t k) {
  const auto lg = stirling_envelope_log(k);
  return {std::exp(lg.lower), std::exp(lg.upper)};
}

/// Gaussian-type envelopes of the Poisson mass f(k).
///   cap           : 1/sqrt(2 pi k), all k >= 1
///   lower, upper  : valid on 1 <= k <= 2 lambda
///   refined_lower : valid for k >= lambda (sharper exponent)
struct gaussian_bounds {
  double cap;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> refined_lower;
};

inline gaussian_bounds gaussian_envelope(double lambda, std::int64_t k) {
  detail::require_lambda(lambda);
  if (k < 1) throw std::domain_error("gaussian_envelope: k must be >= 1");
  const double kk = static_cast<double>(k);
  gaussian_bounds out;
  out.cap = 1.0 / std::sqrt(2.0 * std::numbers::pi * kk);
  const double dev2 = (kk - lambda) * (kk - lambda);
  if (kk <= 2.0 * lambda) {
    out.lower = std::exp(-dev2 / lambda) / (std::numbers::e * std::sqrt(kk));
    out.upper = out.cap * std::exp(-dev2 / (3.0 * lambda));
  }
  if (kk >= lambda) {
    out.refined_lower = std::exp(-dev2 / (2.0 * lambda)) / (std::numbers::e * std::sqrt(kk));
  }
  return out;
}

/// Upper bound on the tail moment sum_{k >= k0} k^d f(k):
///   k0^d f(k0) (1 - (lambda/k0) ((k0+1)/k0)^{d-1})^{-1},
/// valid when k0^d/(k0+1)^{d-1} > lambda.
inline double poisson_tail_moment_bound(double lambda, std::int64_t k0, std::int64_t d) {
  detail::require_lambda(lambda);
  if (k0 < 1 || d < 1) throw std::domain_error("poisson_tail_moment_bound: need k0 >= 1, d >= 1");
  const double kk = static_cast<double>(k0);
  const double log_cond = d * std::log(kk) - (d - 1) * std::log(kk + 1.0);
  if (!(log_cond > std::log(lambda))) {
    throw inapplicable_error("poisson_tail_moment_bound: k0^d/(k0+1)^(d-1) > lambda fails");
  }
  const double theta1 = (lambda / kk) * std::pow((kk + 1.0) / kk, static_cast<double>(d - 1));
  const double lead = std::exp(d * std::log(kk) + poisson_log_pmf(lambda, k0));
  return lead / (1.0 - theta1);
}

struct poisson_moments {
  double rising_bound;  // lambda (lambda+1) ... (lambda+m-1) >= E Z^m
  double central2;      // E (Z - lambda)^2 = lambda
  double central4;      // E (Z - lambda)^4 = lambda (lambda + 3)
};

inline poisson_moments poisson_moment_facts(double lambda, std::int64_t m) {
  detail::require_lambda(lambda);
  if (m < 1) throw std::domain_error("poisson_moment_facts: m must be >= 1");
  double rising = 1.0;
  for (std::int64_t j = 0; j < m; ++j) rising *= lambda + static_cast<double>(j);
  return {rising, lambda, lambda * (lambda + 3.0)};
}

/// Strictly positive Poisson parameter. The degenerate lambda = 0 law is a
/// point mass and is handled separately where it arises.
class PoissonLaw {
 public:
  explicit PoissonLaw(double lambda) : lambda_(lambda) { detail::require_lambda(lambda); }

  double lambda() const { return lambda_; }
  double log_pmf(std::int64_t k) const { return poisson_log_pmf(lambda_, k); }
  double pmf(std::int64_t k) const { return poisson_pmf(lambda_, k); }
  double tail(std::int64_t n) const { return poisson_tail(lambda_, n); }
  double interval(std::int64_t a, std::int64_t b) const { return poisson_interval(lambda_, a, b); }

 private:
  double lambda_;
};

}  // namespace poibin

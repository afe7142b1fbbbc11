// Generating functions, the contour/DFT inversion of the pmf, and the
// parametric density bound with its radius search.
#pragma once

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "poibin/errors.hpp"
#include "poibin/instance.hpp"
#include "poibin/pmf.hpp"

namespace poibin {

/// g(w) = prod_j (q_j + p_j w), the generating polynomial of W.
/// Evaluated in product form; the expanded coefficients are never built.
inline std::complex<double> g_eval(const BernoulliInstance& inst, std::complex<double> w) {
  std::complex<double> acc{1.0, 0.0};
  for (double pj : inst.p()) acc *= std::complex<double>{1.0 - pj, 0.0} + pj * w;
  return acc;
}

/// phi(w) = exp(lambda (w - 1)), the Poisson generating function.
inline std::complex<double> phi_eval(double lambda, std::complex<double> w) {
  if (!(std::isfinite(lambda)) || lambda <= 0.0) {
    throw std::domain_error("phi_eval: lambda must be finite and > 0");
  }
  return std::exp(lambda * (w - std::complex<double>{1.0, 0.0}));
}

/// Contour discretisation: m equispaced points on |w| = r. m > n makes
/// the inversion of the degree-n polynomial exact (no aliasing).
struct ContourConfig {
  double r = 1.0;
  std::size_t m = 0;  // 0: smallest power of two above n
};

inline std::size_t default_contour_points(std::size_t n) {
  std::size_t m = 1;
  while (m <= n) m <<= 1;
  return m;
}

namespace detail {

struct qcomplex {
  __float128 re;
  __float128 im;
};

inline qcomplex qmul(qcomplex a, qcomplex b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

}  // namespace detail

/// Inverts g on the circle of radius r through the m-point DFT:
///   w_k = r^{-k} (1/m) sum_j g(r e^{2 pi i j / m}) e^{-2 pi i j k / m}.
/// The grid evaluation and the coefficient sums run in __float128:
/// for r != 1 the r^{-k} rescaling amplifies any grid rounding by up to
/// r^{-n}, which double precision cannot absorb at n = 64, r = 1/2.
inline Pmf pb_pmf_via_dft(const BernoulliInstance& inst, ContourConfig config = {}) {
  const std::size_t n = inst.n();
  const double r = config.r;
  if (!(std::isfinite(r)) || r <= 0.0) throw std::domain_error("pb_pmf_via_dft: r must be > 0");
  std::size_t m = config.m == 0 ? default_contour_points(n) : config.m;
  if (m <= n) throw std::domain_error("pb_pmf_via_dft: need m > n for an exact inversion");

  const __float128 rq = r;
  // m-th roots of unity, exact angle reduction through the shared table.
  const __float128 two_pi = 2 * acosq(static_cast<__float128>(-1));
  std::vector<detail::qcomplex> root(m);
  for (std::size_t j = 0; j < m; ++j) {
    const __float128 theta = (two_pi * static_cast<__float128>(j)) / static_cast<__float128>(m);
    root[j] = {cosq(theta), sinq(theta)};
  }

  std::vector<detail::qcomplex> grid(m);
  for (std::size_t j = 0; j < m; ++j) {
    detail::qcomplex acc{1, 0};
    const detail::qcomplex w{rq * root[j].re, rq * root[j].im};
    for (double pj : inst.p()) {
      const __float128 pq = pj;
      acc = detail::qmul(acc, {1 - pq + pq * w.re, pq * w.im});
    }
    grid[j] = acc;
  }

  std::vector<double> w(n + 1);
  const __float128 inv_m = 1 / static_cast<__float128>(m);
  __float128 r_pow = 1;  // r^{-k}
  for (std::size_t k = 0; k <= n; ++k) {
    __float128 sre = 0, sim = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t idx = (j * k) % m;  // e^{-2 pi i j k / m} = conj(root[idx])
      sre += grid[j].re * root[idx].re + grid[j].im * root[idx].im;
      sim += grid[j].im * root[idx].re - grid[j].re * root[idx].im;
    }
    const double re = static_cast<double>(sre * inv_m * r_pow);
    const double im = static_cast<double>(sim * inv_m * r_pow);
    if (std::abs(im) > 1e-12) {
      throw numerical_error("pb_pmf_via_dft: imaginary residue above 1e-12");
    }
    if (re < -1e-12) {
      throw numerical_error("pb_pmf_via_dft: negative coefficient below -1e-12");
    }
    w[k] = re < 0.0 ? 0.0 : re;
    r_pow /= rq;
  }
  return Pmf(std::move(w));
}

/// The parametric density bound at contour radius r:
///   lambda2 delta_r e^{lambda (r-1)} r^{-k}
///     ( (sqrt e / 2)(r-1)^2 min{1, psi^{-1/2}}
///       + (sqrt e pi^2 / 6) r min{1, psi^{-3/2}} ),
/// psi(r) = min{r, 1/r} (lambda - lambda2), delta_r = e for r < 1 else 1.
/// Dominates |Delta_k| for every r > 0. psi = 0 uses the continuous
/// limit min{1, psi^{-s}} = 1.
inline double delta_bound_at_radius(const InstanceStats& stats, std::int64_t k, double r) {
  if (!(std::isfinite(r)) || r <= 0.0) throw std::domain_error("delta_bound_at_radius: r must be > 0");
  if (!(stats.lambda > 0.0)) throw std::domain_error("delta_bound_at_radius: lambda must be > 0");
  if (k < 0) throw std::domain_error("delta_bound_at_radius: k must be >= 0");
  const double lambda = stats.lambda;
  const double lambda2 = stats.lambda2;
  const double psi = std::min(r, 1.0 / r) * (lambda - lambda2);
  const double m12 = psi > 1.0 ? 1.0 / std::sqrt(psi) : 1.0;
  const double m32 = psi > 1.0 ? 1.0 / (psi * std::sqrt(psi)) : 1.0;
  const double delta_r = r < 1.0 ? std::numbers::e : 1.0;
  const double sqrt_e = std::sqrt(std::numbers::e);
  // e^{lambda(r-1)} r^{-k} in one exponential; r^{-k} alone overflows.
  const double scale = std::exp(lambda * (r - 1.0) - static_cast<double>(k) * std::log(r));
  const double body = 0.5 * sqrt_e * (r - 1.0) * (r - 1.0) * m12 +
                      (sqrt_e * std::numbers::pi * std::numbers::pi / 6.0) * r * m32;
  return lambda2 * delta_r * scale * body;
}

/// r -> 0 limit of delta_bound_at_radius at k = 0: (e sqrt e / 2) lambda2 e^{-lambda}.
inline double delta_bound_r0_limit(const InstanceStats& stats) {
  if (!(stats.lambda > 0.0)) throw std::domain_error("delta_bound_r0_limit: lambda must be > 0");
  return 0.5 * std::numbers::e * std::sqrt(std::numbers::e) * stats.lambda2 *
         std::exp(-stats.lambda);
}

struct radius_search_result {
  double r_star = 1.0;  // 0 marks the r -> 0 limit (k = 0 only)
  double value = 0.0;
};

/// Minimises delta_bound_at_radius over r: 129-point logarithmic grid on
/// [1e-6, max(4, 4k/lambda)], golden-section refinement of the best
/// bracket to relative width 1e-6, then a final min against the known
/// special radii (r = 1, r = k/lambda for k >= 1, the r -> 0 limit for
/// k = 0) so the result never exceeds any of them.
inline radius_search_result best_r_bound(const InstanceStats& stats, std::int64_t k) {
  if (!(stats.lambda > 0.0)) throw std::domain_error("best_r_bound: lambda must be > 0");
  if (k < 0) throw std::domain_error("best_r_bound: k must be >= 0");
  if (stats.lambda2 == 0.0) return {1.0, 0.0};

  const double lo = 1e-6;
  const double hi = std::max(4.0, 4.0 * static_cast<double>(k) / stats.lambda);
  constexpr int grid_points = 129;
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / (grid_points - 1);

  int best_i = 0;
  double best_v = std::numeric_limits<double>::infinity();
  std::vector<double> rs(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    rs[i] = std::exp(log_lo + i * step);
    const double v = delta_bound_at_radius(stats, k, rs[i]);
    if (v < best_v) {
      best_v = v;
      best_i = i;
    }
  }

  double a = rs[std::max(best_i - 1, 0)];
  double b = rs[std::min(best_i + 1, grid_points - 1)];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = delta_bound_at_radius(stats, k, x1);
  double f2 = delta_bound_at_radius(stats, k, x2);
  while (b - a > 1e-6 * b) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = delta_bound_at_radius(stats, k, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = delta_bound_at_radius(stats, k, x2);
    }
  }

  radius_search_result out{0.5 * (a + b), delta_bound_at_radius(stats, k, 0.5 * (a + b))};
  if (best_v < out.value) out = {rs[best_i], best_v};

  auto consider = [&out, &stats, k](double r) {
    const double v = delta_bound_at_radius(stats, k, r);
    if (v < out.value) out = {r, v};
  };
  consider(1.0);
  if (k >= 1) consider(static_cast<double>(k) / stats.lambda);
  if (k == 0) {
    const double limit = delta_bound_r0_limit(stats);
    if (limit < out.value) out = {0.0, limit};
  }
  return out;
}

}  // namespace poibin

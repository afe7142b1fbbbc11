// The five exact distances between P_W and P_lambda and the deviation
// sequence Delta_k = w_k - f(k).
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "poibin/instance.hpp"
#include "poibin/pmf.hpp"
#include "poibin/poisson.hpp"
#include "poibin/summation.hpp"

namespace poibin {

/// Values below this magnitude sit at the numerical floor of the double
/// pipeline and are flagged rather than asserted to digits.
inline constexpr double numerical_floor = 1e-13;

inline bool at_numerical_floor(double v) { return std::abs(v) < numerical_floor; }

/// FNV-1a over the raw bytes of the probability vector (provenance id).
inline std::uint64_t instance_hash(const BernoulliInstance& inst) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const unsigned char* bytes, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (double pj : inst.p()) {
    mix(reinterpret_cast<const unsigned char*>(&pj), sizeof(pj));
  }
  return h;
}

/// Default cut-off n + ceil(10 sqrt(lambda)) + 10: the residual Poisson
/// mass beyond it is < 1e-16.
inline std::int64_t default_k_max(const BernoulliInstance& inst) {
  stable_sum l1;
  for (double pj : inst.p()) l1 += pj;
  const double lambda = l1.get();
  return static_cast<std::int64_t>(inst.n()) +
         static_cast<std::int64_t>(std::ceil(10.0 * std::sqrt(std::max(lambda, 0.0)))) + 10;
}

struct DivergenceReport {
  double tv = 0.0;           // l1 convention: sum_k |w_k - v_k|
  double kl = 0.0;           // D(W||Z), nats
  double chi2 = 0.0;         // Pearson chi^2
  double kolmogorov = 0.0;   // K, sup over CDF differences
  double sup_density = 0.0;  // M, sup over |Delta_k|
  std::vector<double> deltas;
  std::int64_t k_max = 0;
  double lambda = 0.0;
  std::uint64_t hash = 0;
  std::vector<std::string> floor_flags;
};

namespace detail {

/// chi^2 term w^2/f with log-space fallback when either side leaves the
/// comfortable range of direct division.
inline double chi2_term(double w, double logf) {
  if (w == 0.0) return 0.0;
  const double f = std::exp(logf);
  if (f >= std::numeric_limits<double>::min() && w >= 1e-150) return w * w / f;
  return std::exp(2.0 * std::log(w) - logf);
}

}  // namespace detail

/// Delta_k = w_k - f(k) for 0 <= k <= k_max (w_k = 0 beyond the support).
inline std::vector<double> delta_sequence(const BernoulliInstance& inst, std::int64_t k_max) {
  if (k_max < 0) throw std::domain_error("delta_sequence: k_max must be >= 0");
  const InstanceStats st = pb_stats(inst);
  const Pmf w = pb_pmf(inst);
  std::vector<double> d(static_cast<std::size_t>(k_max) + 1);
  if (st.lambda == 0.0) {
    d[0] = w[0] - 1.0;  // both laws are the point mass at 0
    return d;
  }
  for (std::int64_t k = 0; k <= k_max; ++k) {
    d[static_cast<std::size_t>(k)] =
        w[static_cast<std::size_t>(k)] - poisson_pmf(st.lambda, k);
  }
  return d;
}

/// Full report; every quantity shares the single exact pmf of W.
inline DivergenceReport divergence_report(const BernoulliInstance& inst,
                                          std::int64_t k_max = -1) {
  if (k_max < 0) k_max = default_k_max(inst);
  const InstanceStats st = pb_stats(inst);
  const Pmf pw = pb_pmf(inst);
  const auto& w = pw.weights();
  const std::size_t n = pw.n();

  DivergenceReport rep;
  rep.k_max = k_max;
  rep.lambda = st.lambda;
  rep.hash = instance_hash(inst);

  if (st.lambda == 0.0) {
    rep.deltas.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    rep.floor_flags = {"identical-laws"};
    return rep;
  }

  std::vector<double> logf(std::max<std::size_t>(n + 2, static_cast<std::size_t>(k_max) + 1));
  std::vector<double> f(logf.size());
  for (std::size_t k = 0; k < logf.size(); ++k) {
    logf[k] = poisson_log_pmf(st.lambda, static_cast<std::int64_t>(k));
    f[k] = std::exp(logf[k]);
  }

  rep.deltas.resize(static_cast<std::size_t>(k_max) + 1);
  for (std::size_t k = 0; k <= static_cast<std::size_t>(k_max); ++k) {
    rep.deltas[k] = (k <= n ? w[k] : 0.0) - f[k];
  }

  // Total variation: the support part plus the entire Z-tail beyond n.
  stable_sum tv;
  for (std::size_t k = 0; k <= n; ++k) tv += std::abs(w[k] - f[k]);
  tv += poisson_tail(st.lambda, static_cast<std::int64_t>(n));
  rep.tv = tv.get();

  // Relative entropy and chi^2, normalised by the exact accumulated mass
  // of the computed pmf so that the ~1e-15 convolution drift cannot leak
  // into quantities of order 1e-7.
  stable_sum mass;
  for (std::size_t k = 0; k <= n; ++k) mass += w[k];
  const double total = mass.get();
  stable_sum kl, c2;
  for (std::size_t k = 0; k <= n; ++k) {
    if (w[k] > 0.0) kl += w[k] * (std::log(w[k]) - logf[k]);
    c2 += detail::chi2_term(w[k], logf[k]);
  }
  rep.kl = kl.get() / total - std::log(total);
  rep.chi2 = c2.get() / (total * total) - 1.0;

  // Kolmogorov via the two upper tails: F_W(k) - F_Z(k) = tz(k) - tw(k).
  double best = 0.0;
  {
    std::vector<double> tz(n + 1);
    tz[n] = poisson_tail(st.lambda, static_cast<std::int64_t>(n));
    for (std::size_t k = n; k > 0; --k) tz[k - 1] = tz[k] + f[k];
    stable_sum tw;  // P{W > k}, accumulated from the top
    for (std::size_t k = n + 1; k-- > 0;) {
      best = std::max(best, std::abs(tz[k] - tw.get()));
      if (k > 0) tw += w[k];
    }
  }
  rep.kolmogorov = best;

  // Sup-density: on the support plus the largest Poisson mass beyond n
  // (f decreases there since lambda <= n).
  double m = f[n + 1];
  for (std::size_t k = 0; k <= n; ++k) m = std::max(m, std::abs(w[k] - f[k]));
  rep.sup_density = m;

  for (const auto& [name, value] :
       {std::pair<const char*, double>{"tv", rep.tv},
        {"kl", rep.kl},
        {"chi2", rep.chi2},
        {"kolmogorov", rep.kolmogorov},
        {"sup_density", rep.sup_density}}) {
    if (at_numerical_floor(value)) rep.floor_flags.push_back(std::string("at-floor:") + name);
  }
  return rep;
}

inline double total_variation(const BernoulliInstance& inst) {
  return divergence_report(inst).tv;
}
inline double relative_entropy(const BernoulliInstance& inst) {
  return divergence_report(inst).kl;
}
inline double chi_squared(const BernoulliInstance& inst) {
  return divergence_report(inst).chi2;
}
inline double kolmogorov_distance(const BernoulliInstance& inst) {
  return divergence_report(inst).kolmogorov;
}
inline double sup_density_distance(const BernoulliInstance& inst) {
  return divergence_report(inst).sup_density;
}

}  // namespace poibin

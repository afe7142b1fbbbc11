// Bernoulli success-probability vectors and their derived statistics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "poibin/summation.hpp"

namespace poibin {

/// The probability vector p_1..p_n defining W = X_1 + ... + X_n.
class BernoulliInstance {
 public:
  explicit BernoulliInstance(std::vector<double> p) : p_(std::move(p)) {
    if (p_.empty()) throw std::domain_error("BernoulliInstance: need n >= 1");
    for (double pj : p_) {
      if (!(pj >= 0.0 && pj <= 1.0)) {
        throw std::domain_error("BernoulliInstance: every p_j must lie in [0, 1]");
      }
    }
  }

  const std::vector<double>& p() const { return p_; }
  std::size_t n() const { return p_.size(); }
  double max_p() const { return *std::max_element(p_.begin(), p_.end()); }

 private:
  std::vector<double> p_;
};

/// Power sum lambda_s = sum_j p_j^s, s >= 1, accumulated in descending
/// magnitude with compensation.
inline double power_sum(const BernoulliInstance& inst, std::int64_t s) {
  if (s < 1) throw std::domain_error("power_sum: s must be >= 1");
  std::vector<double> sorted = inst.p();
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  stable_sum acc;
  for (double pj : sorted) acc += std::pow(pj, static_cast<double>(s));
  return acc.get();
}

/// Derived statistics of an instance. kappa_eff = lambda2/lambda is
/// undefined (not fabricated) when lambda = 0.
struct InstanceStats {
  double lambda = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double variance = 0.0;  // lambda - lambda2
  double max_p = 0.0;
  std::optional<double> kappa_eff;
  double F = 1.0;  // max(1, lambda) / max(1, lambda - lambda2)
};

inline InstanceStats pb_stats(const BernoulliInstance& inst) {
  InstanceStats s;
  std::vector<double> sorted = inst.p();
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  stable_sum l1, l2, l3, var;
  for (double pj : sorted) {
    l1 += pj;
    l2 += pj * pj;
    l3 += pj * pj * pj;
    var += pj * (1.0 - pj);
  }
  s.lambda = l1.get();
  s.lambda2 = l2.get();
  s.lambda3 = l3.get();
  s.variance = var.get();
  s.max_p = sorted.front();
  if (s.lambda > 0.0) s.kappa_eff = s.lambda2 / s.lambda;
  s.F = std::max(1.0, s.lambda) / std::max(1.0, s.variance);
  return s;
}

namespace detail {

/// s_max making the geometric remainder max_p^{s-1} lambda2/(1-max_p)
/// fall below ~1e-18 absolute.
inline std::int64_t auto_taylor_terms(const BernoulliInstance& inst) {
  const double mp = inst.max_p();
  std::int64_t s_max = 4;
  if (mp > 0.0) {
    stable_sum l2;
    for (double pj : inst.p()) l2 += pj * pj;
    const double lam2 = l2.get();
    if (lam2 > 0.0) {
      const double need = std::log(1e-18 * (1.0 - mp) / lam2) / std::log(mp);
      if (std::isfinite(need)) {
        s_max = std::max<std::int64_t>(4, static_cast<std::int64_t>(need) + 2);
      }
    }
  }
  return std::min<std::int64_t>(s_max, 1'000'000);
}

}  // namespace detail

/// Truncated Taylor sum S = sum_{s=2}^{s_max} lambda_s / s, so that
/// prod (1 - p_j) = exp(-lambda - S) up to the geometric remainder
/// max_p^{s_max-1} lambda2 / (1 - max_p). Requires max_p < 1.
/// s_max = 0 picks enough terms for a ~1e-18 remainder.
inline double taylor_S(const BernoulliInstance& inst, std::int64_t s_max = 0) {
  if (inst.max_p() >= 1.0) throw std::domain_error("taylor_S: requires max_p < 1");
  if (s_max == 0) s_max = detail::auto_taylor_terms(inst);
  if (s_max < 2) throw std::domain_error("taylor_S: s_max must be >= 2");
  // Powers iterated in place, largest p first.
  std::vector<double> base = inst.p();
  std::sort(base.begin(), base.end(), std::greater<double>());
  std::vector<double> cur(base.size());
  for (std::size_t j = 0; j < base.size(); ++j) cur[j] = base[j] * base[j];
  stable_sum total;
  for (std::int64_t s = 2; s <= s_max; ++s) {
    stable_sum ls;
    for (double v : cur) ls += v;
    const double lam_s = ls.get();
    total += lam_s / static_cast<double>(s);
    if (lam_s == 0.0) break;
    if (s < s_max) {
      for (std::size_t j = 0; j < cur.size(); ++j) cur[j] *= base[j];
    }
  }
  return total.get();
}

}  // namespace poibin

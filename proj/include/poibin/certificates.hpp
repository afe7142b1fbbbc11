// The bound catalogue: every explicit approximation inequality as an
// evaluable certificate with applicability predicate, bound value, the
// exact quantity it dominates, and margin.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poibin/divergence.hpp"
#include "poibin/instance.hpp"
#include "poibin/pmf.hpp"
#include "poibin/poisson.hpp"
#include "poibin/summation.hpp"

namespace poibin {

enum class cert_id {
  bh_lower,
  bh_upper,
  le_cam,
  kerstan,
  chen,
  hr_iid_lower,
  hr_iid_upper,
  khj_upper,
  hjk_lower,
  thm12,
  prop34,
  prop62,
  thm13_k0,
  thm13_unif,
  thm13_nonunif,
  cor61,
  cor61_low,
  cor61_high,
  prop33,
  lemma31,
  lemma32_k1,
  lemma32_k1_small,
  lemma32_unified,
  lower_k0,
  lower_k1,
  lower_k2,
  prop41,
  thm71,
  thm71_simple,
  pinsker,
  chi_ge_kl,
  be_lyapunov,
  lemma21,
  tailmom66,
};

struct cert_info {
  cert_id id;
  std::string_view name;
  bool per_k;
  bool needs_kappa;
};

inline constexpr std::array<cert_info, 34> cert_table{{
    {cert_id::bh_lower, "BH_LOWER", false, false},
    {cert_id::bh_upper, "BH_UPPER", false, false},
    {cert_id::le_cam, "LE_CAM", false, false},
    {cert_id::kerstan, "KERSTAN", false, false},
    {cert_id::chen, "CHEN", false, false},
    {cert_id::hr_iid_lower, "HR_IID_LOWER", false, false},
    {cert_id::hr_iid_upper, "HR_IID_UPPER", false, false},
    {cert_id::khj_upper, "KHJ_UPPER", false, false},
    {cert_id::hjk_lower, "HJK_LOWER", false, false},
    {cert_id::thm12, "THM12", false, false},
    {cert_id::prop34, "PROP34", false, false},
    {cert_id::prop62, "PROP62", false, true},
    {cert_id::thm13_k0, "THM13_K0", false, false},
    {cert_id::thm13_unif, "THM13_UNIF", false, false},
    {cert_id::thm13_nonunif, "THM13_NONUNIF", true, false},
    {cert_id::cor61, "COR61", true, true},
    {cert_id::cor61_low, "COR61_LOW", true, true},
    {cert_id::cor61_high, "COR61_HIGH", true, true},
    {cert_id::prop33, "PROP33", true, false},
    {cert_id::lemma31, "LEMMA31", false, false},
    {cert_id::lemma32_k1, "LEMMA32_K1", false, false},
    {cert_id::lemma32_k1_small, "LEMMA32_K1_SMALL", false, false},
    {cert_id::lemma32_unified, "LEMMA32_UNIFIED", true, false},
    {cert_id::lower_k0, "LOWER_K0", false, false},
    {cert_id::lower_k1, "LOWER_K1", false, false},
    {cert_id::lower_k2, "LOWER_K2", false, false},
    {cert_id::prop41, "PROP41", false, false},
    {cert_id::thm71, "THM71", false, false},
    {cert_id::thm71_simple, "THM71_SIMPLE", false, false},
    {cert_id::pinsker, "PINSKER", false, false},
    {cert_id::chi_ge_kl, "CHI_GE_KL", false, false},
    {cert_id::be_lyapunov, "BE_LYAPUNOV", false, false},
    {cert_id::lemma21, "LEMMA21", true, false},
    {cert_id::tailmom66, "TAILMOM66", true, false},
}};

inline const cert_info& info(cert_id id) {
  for (const auto& e : cert_table) {
    if (e.id == id) return e;
  }
  throw std::logic_error("unknown cert_id");
}

inline std::string_view cert_name(cert_id id) { return info(id).name; }

inline std::optional<cert_id> parse_cert_id(std::string_view name) {
  for (const auto& e : cert_table) {
    if (e.name == name) return e.id;
  }
  return std::nullopt;
}

enum class cert_target {
  tv,
  kl,
  chi2,
  sup_density,
  abs_delta_k,
  signed_delta_k,
  poisson_mass,
  tail_moment,
  diagnostic,
};

enum class cert_direction { upper, lower, two_sided };

inline std::string_view to_string(cert_target t) {
  switch (t) {
    case cert_target::tv: return "tv";
    case cert_target::kl: return "kl";
    case cert_target::chi2: return "chi2";
    case cert_target::sup_density: return "M";
    case cert_target::abs_delta_k: return "|Delta_k|";
    case cert_target::signed_delta_k: return "signed Delta_k";
    case cert_target::poisson_mass: return "f(k)";
    case cert_target::tail_moment: return "tail-moment";
    case cert_target::diagnostic: return "diagnostic";
  }
  return "?";
}

inline std::string_view to_string(cert_direction d) {
  switch (d) {
    case cert_direction::upper: return "upper";
    case cert_direction::lower: return "lower";
    case cert_direction::two_sided: return "two-sided";
  }
  return "?";
}

struct BoundCertificate {
  cert_id id{};
  bool applicable = false;
  double bound_value = std::numeric_limits<double>::quiet_NaN();
  double actual = std::numeric_limits<double>::quiet_NaN();
  double margin = std::numeric_limits<double>::quiet_NaN();
  cert_target target = cert_target::diagnostic;
  cert_direction direction = cert_direction::upper;
  std::optional<std::int64_t> k;
  std::optional<double> kappa;
  std::vector<std::string> flags;
};

/// Certificates carrying one of these flags are reported, never counted
/// as violations (the stated precondition or constant is not establishable).
inline bool cert_reported_only(const BoundCertificate& c) {
  for (const auto& f : c.flags) {
    if (f == "reported-only" || f == "diagnostic") return true;
  }
  return false;
}

/// Violation test with relative slack: margin < -slack * scale,
/// scale = max(|bound|, |actual|, 1e-300).
inline bool is_violation(const BoundCertificate& c, double slack = 1e-9) {
  if (!c.applicable || cert_reported_only(c)) return false;
  if (std::isnan(c.margin)) return false;
  const double scale = std::max({std::abs(c.bound_value), std::abs(c.actual), 1e-300});
  return c.margin < -slack * scale;
}

struct hr_interval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_clamped = false;
};

/// Two-sided bracket of D(W||Z) for the i.i.d. instance with success
/// probability p:
///   (-log(1-p) - p)/2 - 14 p^2/(n (1-p)^3)
///     <= D <= (-log(1-p) - p)/2 + (1+p) p^2/(4 n (1-p)^3).
/// The negative lower endpoint is clamped at 0 (D >= 0 always).
inline hr_interval hr_iid_interval(double p, std::int64_t n) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("hr_iid_interval: need 0 < p < 1");
  if (n < 1) throw std::domain_error("hr_iid_interval: need n >= 1");
  const double q3 = (1.0 - p) * (1.0 - p) * (1.0 - p);
  const double main = 0.5 * (-std::log1p(-p) - p);
  hr_interval out;
  out.lower = main - 14.0 * p * p / (static_cast<double>(n) * q3);
  out.upper = main + (1.0 + p) * p * p / (4.0 * static_cast<double>(n) * q3);
  if (out.lower < 0.0) {
    out.lower = 0.0;
    out.lower_clamped = true;
  }
  return out;
}

/// Precomputed per-instance quantities shared by certificate evaluations.
struct instance_context {
  BernoulliInstance inst;
  InstanceStats stats;
  Pmf pmf;
  DivergenceReport div;

  explicit instance_context(BernoulliInstance i, std::int64_t k_max = -1)
      : inst(std::move(i)),
        stats(pb_stats(inst)),
        pmf(pb_pmf(inst)),
        div(divergence_report(inst, k_max)) {}

  double f(std::int64_t k) const {
    return stats.lambda > 0.0 ? poisson_pmf(stats.lambda, k) : (k == 0 ? 1.0 : 0.0);
  }

  double delta(std::int64_t k) const {
    if (k <= div.k_max) return div.deltas[static_cast<std::size_t>(k)];
    return (k <= static_cast<std::int64_t>(pmf.n()) ? pmf[static_cast<std::size_t>(k)] : 0.0) -
           f(k);
  }

  bool is_iid() const {
    const auto& p = inst.p();
    return std::all_of(p.begin(), p.end(), [&p](double x) { return x == p.front(); });
  }
};

namespace detail {

inline BoundCertificate inapplicable(cert_id id, cert_target target, cert_direction dir,
                                     std::optional<std::int64_t> k = std::nullopt,
                                     std::optional<double> kappa = std::nullopt) {
  BoundCertificate c;
  c.id = id;
  c.applicable = false;
  c.target = target;
  c.direction = dir;
  c.k = k;
  c.kappa = kappa;
  return c;
}

inline BoundCertificate upper(cert_id id, cert_target target, double bound, double actual,
                              std::optional<std::int64_t> k = std::nullopt,
                              std::optional<double> kappa = std::nullopt) {
  BoundCertificate c;
  c.id = id;
  c.applicable = true;
  c.bound_value = bound;
  c.actual = actual;
  c.margin = bound - actual;
  c.target = target;
  c.direction = cert_direction::upper;
  c.k = k;
  c.kappa = kappa;
  return c;
}

inline BoundCertificate lower(cert_id id, cert_target target, double bound, double actual,
                              std::optional<std::int64_t> k = std::nullopt) {
  BoundCertificate c;
  c.id = id;
  c.applicable = true;
  c.bound_value = bound;
  c.actual = actual;
  c.margin = actual - bound;
  c.target = target;
  c.direction = cert_direction::lower;
  c.k = k;
  return c;
}

/// min{1, x^{-s/2}} with the x = 0 continuous limit 1.
inline double min_pow(double x, double exponent_halves) {
  if (x <= 1.0) return 1.0;
  return std::pow(x, -0.5 * exponent_halves);
}

/// sup_{k >= 1} |Delta_k|: the support part plus f(n+1) (the Poisson
/// masses decrease beyond n since lambda <= n).
inline double sup_abs_delta_from_1(const instance_context& ctx) {
  const auto& w = ctx.pmf.weights();
  const std::size_t n = ctx.pmf.n();
  double m = ctx.f(static_cast<std::int64_t>(n) + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    m = std::max(m, std::abs(w[k] - ctx.f(static_cast<std::int64_t>(k))));
  }
  return m;
}

/// Direct summation of sum_{k >= k0} k^d f(k) down to machine-negligible
/// terms (independent check for the tail-moment certificate).
inline double tail_moment_direct(double lambda, std::int64_t k0, std::int64_t d) {
  stable_sum acc;
  std::int64_t k = k0;
  while (true) {
    const double term =
        std::exp(static_cast<double>(d) * std::log(static_cast<double>(k)) +
                 poisson_log_pmf(lambda, k));
    acc += term;
    const double kk = static_cast<double>(k + 1);
    const double ratio = lambda / kk * std::pow(kk / static_cast<double>(k), static_cast<double>(d));
    if (ratio < 1.0 && (term * ratio / (1.0 - ratio) <= 1e-18 * acc.get() || term == 0.0)) break;
    ++k;
  }
  return acc.get();
}

}  // namespace detail

/// Evaluates one certificate on an instance. k must be supplied for
/// per-k certificates, kappa for the kappa-parametrised ones.
inline BoundCertificate evaluate_certificate(cert_id id, const instance_context& ctx,
                                             std::optional<std::int64_t> k = std::nullopt,
                                             std::optional<double> kappa = std::nullopt) {
  const auto& ci = info(id);
  if (ci.per_k && !k.has_value()) {
    throw std::invalid_argument(std::string(ci.name) + ": per-k certificate needs k");
  }
  if (ci.needs_kappa && !kappa.has_value()) {
    throw std::invalid_argument(std::string(ci.name) + ": needs kappa");
  }
  const InstanceStats& st = ctx.stats;
  const DivergenceReport& dv = ctx.div;
  const double lambda = st.lambda;
  const double lambda2 = st.lambda2;
  const double sqrt_e = std::sqrt(std::numbers::e);
  const double pi2 = std::numbers::pi * std::numbers::pi;

  switch (id) {
    case cert_id::bh_lower: {
      if (!(lambda > 0.0)) return detail::inapplicable(id, cert_target::tv, cert_direction::lower);
      const double b = (1.0 / 16.0) * std::min(1.0, 1.0 / lambda) * lambda2;
      return detail::lower(id, cert_target::tv, b, dv.tv);
    }
    case cert_id::bh_upper: {
      if (!(lambda > 0.0)) return detail::inapplicable(id, cert_target::tv, cert_direction::upper);
      const double b = 2.0 * (-std::expm1(-lambda) / lambda) * lambda2;
      return detail::upper(id, cert_target::tv, b, dv.tv);
    }
    case cert_id::le_cam:
      return detail::upper(id, cert_target::tv, 2.0 * lambda2, dv.tv);
    case cert_id::kerstan: {
      if (!(lambda > 0.0) || st.max_p > 0.25) {
        return detail::inapplicable(id, cert_target::tv, cert_direction::upper);
      }
      return detail::upper(id, cert_target::tv, 2.1 * lambda2 / lambda, dv.tv);
    }
    case cert_id::chen: {
      if (!(lambda > 0.0)) return detail::inapplicable(id, cert_target::tv, cert_direction::upper);
      auto c = detail::upper(id, cert_target::tv, 10.0 * lambda2 / lambda, dv.tv);
      c.flags.push_back("unverified-precondition");
      if (lambda < 1.0) c.flags.push_back("reported-only");
      return c;
    }
    case cert_id::hr_iid_lower:
    case cert_id::hr_iid_upper: {
      const bool is_lower = id == cert_id::hr_iid_lower;
      const auto dir = is_lower ? cert_direction::lower : cert_direction::upper;
      if (!(lambda > 0.0) || !ctx.is_iid() || st.max_p >= 1.0) {
        return detail::inapplicable(id, cert_target::kl, dir);
      }
      const auto hr = hr_iid_interval(ctx.inst.p().front(),
                                      static_cast<std::int64_t>(ctx.inst.n()));
      if (is_lower) {
        auto c = detail::lower(id, cert_target::kl, hr.lower, dv.kl);
        if (hr.lower_clamped) c.flags.push_back("clamped-to-zero");
        return c;
      }
      return detail::upper(id, cert_target::kl, hr.upper, dv.kl);
    }
    case cert_id::khj_upper: {
      if (!(lambda > 0.0) || st.max_p >= 1.0) {
        return detail::inapplicable(id, cert_target::kl, cert_direction::upper);
      }
      std::vector<double> sorted = ctx.inst.p();
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      stable_sum acc;
      for (double pj : sorted) acc += pj * pj * pj / (1.0 - pj);
      return detail::upper(id, cert_target::kl, acc.get() / lambda, dv.kl);
    }
    case cert_id::hjk_lower: {
      if (!(lambda > 0.0)) return detail::inapplicable(id, cert_target::kl, cert_direction::lower);
      const double ratio = lambda2 / lambda;
      return detail::lower(id, cert_target::kl, 0.25 * ratio * ratio, dv.kl);
    }
    case cert_id::thm12: {
      if (!(lambda > 0.0) || !(lambda2 <= 0.5 * lambda)) {
        return detail::inapplicable(id, cert_target::chi2, cert_direction::upper);
      }
      const double ratio = lambda2 / lambda;
      const double c_const = lambda <= 0.5 ? 15.0 : 56e6;
      auto c = detail::upper(id, cert_target::chi2, c_const * ratio * ratio, dv.chi2);
      if (lambda <= 0.5) {
        // the supporting C_{1/2} expression evaluates to 15.50, not below
        // 15, so this branch is measured rather than asserted
        c.flags.push_back("reported-only");
        c.flags.push_back("constant-15-unestablished");
      }
      return c;
    }
    case cert_id::prop34: {
      if (!(lambda > 0.0) || st.max_p > 0.5) {
        return detail::inapplicable(id, cert_target::chi2, cert_direction::upper);
      }
      const double el = std::exp(lambda);
      const double b_lambda = lambda * (2.0 - lambda - lambda * lambda) -
                              2.0 * (1.0 + lambda - 2.0 * lambda * lambda) * el +
                              4.0 * (1.0 + lambda) * el * el;
      const double e1 = std::numbers::e - 1.0;
      const double c_lambda =
          lambda * lambda + lambda * (lambda + e1) * (lambda + e1) + b_lambda;
      const double ratio = lambda2 / lambda;
      return detail::upper(id, cert_target::chi2, c_lambda * ratio * ratio, dv.chi2);
    }
    case cert_id::prop62: {
      const double kap = *kappa;
      if (!(lambda >= 0.5) || !(kap > 0.0 && kap < 1.0) || !(lambda2 <= kap * lambda)) {
        return detail::inapplicable(id, cert_target::chi2, cert_direction::upper, std::nullopt,
                                    kappa);
      }
      const double ratio = lambda2 / lambda;
      const double b = 7e6 / ((1.0 - kap) * (1.0 - kap) * (1.0 - kap)) * ratio * ratio;
      return detail::upper(id, cert_target::chi2, b, dv.chi2, std::nullopt, kappa);
    }
    case cert_id::thm13_k0: {
      if (!(lambda > 0.0)) {
        return detail::upper(id, cert_target::abs_delta_k, 0.0, 0.0, 0);
      }
      return detail::upper(id, cert_target::abs_delta_k, 3.0 * lambda2 * std::exp(-lambda),
                           std::abs(ctx.delta(0)), 0);
    }
    case cert_id::thm13_unif: {
      if (!(lambda > 0.0)) {
        return detail::upper(id, cert_target::sup_density, 0.0, 0.0);
      }
      return detail::upper(id, cert_target::sup_density, 3.0 * lambda2,
                           detail::sup_abs_delta_from_1(ctx));
    }
    case cert_id::thm13_nonunif: {
      const std::int64_t kk = *k;
      if (!(lambda > 0.0) || kk < 1) {
        return detail::inapplicable(id, cert_target::abs_delta_k, cert_direction::upper, k);
      }
      const double kd = static_cast<double>(kk);
      const double rho = (lambda - lambda2) * std::min(kd / lambda, lambda / kd);
      const double fk = ctx.f(kk);
      const double dev = (kd - lambda) / lambda;
      const double b = 7.0 * std::sqrt(kd) * dev * dev * lambda2 * detail::min_pow(rho, 1.0) * fk +
                       21.0 * kd * std::sqrt(kd) * (lambda2 / lambda) *
                           detail::min_pow(rho, 3.0) * fk;
      return detail::upper(id, cert_target::abs_delta_k, b, std::abs(ctx.delta(kk)), k);
    }
    case cert_id::cor61:
    case cert_id::cor61_low:
    case cert_id::cor61_high: {
      const std::int64_t kk = *k;
      const double kap = *kappa;
      const bool ok_common =
          lambda > 0.0 && kk >= 0 && kap > 0.0 && kap < 1.0 && lambda2 <= kap * lambda;
      const double kd = static_cast<double>(kk);
      bool ok = ok_common;
      if (id == cert_id::cor61_low) ok = ok && kd <= 2.0 * lambda;
      if (id == cert_id::cor61_high) ok = ok && kd >= lambda && lambda >= 0.5;
      if (!ok) {
        return detail::inapplicable(id, cert_target::abs_delta_k, cert_direction::upper, k, kappa);
      }
      const double fk = ctx.f(kk);
      const double pref = std::pow(1.0 - kap, -1.5);
      double b = 0.0;
      if (id == cert_id::cor61) {
        b = 7.0 * fk * pref * ((kd - lambda) * (kd - lambda) / lambda + 3.0) *
            (lambda2 / lambda) * std::max(std::pow(kd / lambda, 3.0), 1.0);
      } else if (id == cert_id::cor61_low) {
        b = 56.0 * fk * pref * ((kd - lambda) * (kd - lambda) / lambda + 3.0) *
            (lambda2 / lambda);
      } else {
        b = 49.0 * fk * pref * std::pow(kd / lambda, 3.0) * lambda2;
      }
      return detail::upper(id, cert_target::abs_delta_k, b, std::abs(ctx.delta(kk)), k, kappa);
    }
    case cert_id::prop33: {
      const std::int64_t kk = *k;
      if (!(lambda > 0.0) || st.max_p > 0.5 || kk < 0) {
        return detail::inapplicable(id, cert_target::abs_delta_k, cert_direction::upper, k);
      }
      const double b = (std::expm1(lambda) / lambda) * lambda2 *
                       poisson_interval(lambda, kk - 2, kk);
      return detail::upper(id, cert_target::abs_delta_k, b, std::abs(ctx.delta(kk)), k);
    }
    case cert_id::lemma31: {
      if (!(lambda > 0.0) || st.max_p > 0.5) {
        return detail::inapplicable(id, cert_target::signed_delta_k, cert_direction::two_sided, 0);
      }
      const double gap = -ctx.delta(0);  // f(0) - w_0
      const double b = lambda2 * std::exp(-lambda);
      BoundCertificate c;
      c.id = id;
      c.applicable = true;
      c.bound_value = b;
      c.actual = gap;
      c.margin = std::min(gap - 0.0, b - gap);
      c.target = cert_target::signed_delta_k;
      c.direction = cert_direction::two_sided;
      c.k = 0;
      return c;
    }
    case cert_id::lemma32_k1: {
      if (!(lambda > 0.0) || st.max_p > 0.5) {
        return detail::inapplicable(id, cert_target::abs_delta_k, cert_direction::upper, 1);
      }
      const double b = lambda2 * (lambda + std::numbers::e - 1.0) * std::exp(-lambda);
      return detail::upper(id, cert_target::abs_delta_k, b, std::abs(ctx.delta(1)), 1);
    }
    case cert_id::lemma32_k1_small: {
      if (!(lambda > 0.0) || st.max_p > 0.5 || lambda > 0.5) {
        return detail::inapplicable(id, cert_target::abs_delta_k, cert_direction::upper, 1);
      }
      const double b =
          lambda2 * (lambda + 2.0 * (sqrt_e - 1.0)) * std::exp(-lambda);
      return detail::upper(id, cert_target::abs_delta_k, b, std::abs(ctx.delta(1)), 1);
    }
    case cert_id::lemma32_unified: {
      const std::int64_t kk = *k;
      if (!(lambda > 0.0) || st.max_p > 0.5 || kk < 1) {
        return detail::inapplicable(id, cert_target::abs_delta_k, cert_direction::upper, k);
      }
      const double mn = std::min(lambda, static_cast<double>(kk));
      const double c_k_lambda = std::expm1(mn) / mn;
      // lambda^k/k! e^{-lambda} = f(k) keeps the factorials in range
      double b = ctx.f(kk) + c_k_lambda * ctx.f(kk - 1);
      if (kk >= 2) b += ctx.f(kk - 2);
      b *= lambda2;
      return detail::upper(id, cert_target::abs_delta_k, b, std::abs(ctx.delta(kk)), k);
    }
    case cert_id::lower_k0: {
      if (!(lambda > 0.0) || lambda > 0.5 || st.max_p > 0.5) {
        return detail::inapplicable(id, cert_target::signed_delta_k, cert_direction::lower, 0);
      }
      return detail::lower(id, cert_target::signed_delta_k,
                           0.47 * lambda2 * std::exp(-lambda), -ctx.delta(0), 0);
    }
    case cert_id::lower_k1: {
      if (!(lambda > 0.0) || lambda > 0.5 || st.max_p > 0.5) {
        return detail::inapplicable(id, cert_target::signed_delta_k, cert_direction::lower, 1);
      }
      return detail::lower(id, cert_target::signed_delta_k,
                           0.42 * lambda2 * std::exp(-lambda), ctx.delta(1), 1);
    }
    case cert_id::lower_k2: {
      if (!(lambda > 0.0) || lambda > 0.125) {
        return detail::inapplicable(id, cert_target::signed_delta_k, cert_direction::lower, 2);
      }
      return detail::lower(id, cert_target::signed_delta_k,
                           (17.0 / 49.0) * lambda2 * std::exp(-lambda), -ctx.delta(2), 2);
    }
    case cert_id::prop41:
      return detail::upper(id, cert_target::sup_density, lambda2, dv.sup_density);
    case cert_id::thm71: {
      const double psi = lambda - lambda2;
      const double b = sqrt_e * pi2 / 6.0 * lambda2 * detail::min_pow(psi, 3.0);
      return detail::upper(id, cert_target::sup_density, b, dv.sup_density);
    }
    case cert_id::thm71_simple: {
      if (!(lambda > 0.0) || !(lambda2 <= 0.5 * lambda)) {
        return detail::inapplicable(id, cert_target::sup_density, cert_direction::upper);
      }
      const double b = std::sqrt(2.0 * std::numbers::e) * pi2 / 3.0 * lambda2 /
                       (lambda * std::sqrt(lambda));
      return detail::upper(id, cert_target::sup_density, b, dv.sup_density);
    }
    case cert_id::pinsker:
      return detail::lower(id, cert_target::kl, 0.5 * dv.tv * dv.tv, dv.kl);
    case cert_id::chi_ge_kl:
      return detail::lower(id, cert_target::chi2, dv.kl, dv.chi2);
    case cert_id::be_lyapunov: {
      if (!(st.variance > 0.0)) {
        return detail::inapplicable(id, cert_target::diagnostic, cert_direction::upper);
      }
      stable_sum acc;
      for (double pj : ctx.inst.p()) {
        const double qj = 1.0 - pj;
        acc += (pj * pj + qj * qj) * pj * qj;
      }
      const double l3 = acc.get() / (st.variance * std::sqrt(st.variance));
      auto c = detail::upper(id, cert_target::diagnostic, 1.0 / std::sqrt(st.variance), l3);
      c.flags.push_back("diagnostic");
      return c;
    }
    case cert_id::lemma21: {
      const std::int64_t kk = *k;
      if (!(lambda > 0.0) || kk < 1) {
        return detail::inapplicable(id, cert_target::poisson_mass, cert_direction::two_sided, k);
      }
      const auto env = gaussian_envelope(lambda, kk);
      const double fk = ctx.f(kk);
      BoundCertificate c;
      c.id = id;
      c.applicable = true;
      c.target = cert_target::poisson_mass;
      c.direction = cert_direction::two_sided;
      c.k = kk;
      c.actual = fk;
      double upper_b = env.cap;
      if (env.upper) upper_b = std::min(upper_b, *env.upper);
      c.bound_value = upper_b;
      double m = upper_b - fk;
      if (env.lower) m = std::min(m, fk - *env.lower);
      if (env.refined_lower) m = std::min(m, fk - *env.refined_lower);
      c.margin = m;
      return c;
    }
    case cert_id::tailmom66: {
      const std::int64_t k0 = *k;
      if (!(lambda > 0.0) || k0 < 1) {
        return detail::inapplicable(id, cert_target::tail_moment, cert_direction::upper, k);
      }
      const std::int64_t d = (k0 % 3 == 0) ? 6 : (k0 % 3);  // d in {1, 2, 6} keyed on k0
      const double kk = static_cast<double>(k0);
      if (!(d * std::log(kk) - (d - 1) * std::log(kk + 1.0) > std::log(lambda))) {
        return detail::inapplicable(id, cert_target::tail_moment, cert_direction::upper, k);
      }
      const double b = poisson_tail_moment_bound(lambda, k0, d);
      const double direct = detail::tail_moment_direct(lambda, k0, d);
      return detail::upper(id, cert_target::tail_moment, b, direct, k);
    }
  }
  throw std::invalid_argument("evaluate_certificate: unknown id");
}

inline BoundCertificate evaluate_certificate(cert_id id, const BernoulliInstance& inst,
                                             std::optional<std::int64_t> k = std::nullopt,
                                             std::optional<double> kappa = std::nullopt) {
  return evaluate_certificate(id, instance_context(inst), k, kappa);
}

/// Smallest of {0.5, 0.75, 0.9} at or above kappa_eff; disengaged when
/// kappa_eff > 0.9 (the non-degenerate hypothesis has no headroom left).
inline std::optional<double> default_kappa(const InstanceStats& st) {
  if (!st.kappa_eff) return std::nullopt;
  for (double kap : {0.5, 0.75, 0.9}) {
    if (*st.kappa_eff <= kap) return kap;
  }
  return std::nullopt;
}

/// Evaluates every requested certificate on one instance; per-k ids run
/// over k = 0..k_max (default n + ceil(10 sqrt(lambda))). Violations are
/// data for the caller, never exceptions.
inline std::vector<BoundCertificate> verify_instance(
    const instance_context& ctx, const std::vector<cert_id>& ids,
    std::int64_t k_max = -1) {
  if (k_max < 0) {
    k_max = static_cast<std::int64_t>(ctx.inst.n()) +
            static_cast<std::int64_t>(std::ceil(10.0 * std::sqrt(std::max(ctx.stats.lambda, 0.0))));
  }
  const std::optional<double> kappa = default_kappa(ctx.stats);
  std::vector<BoundCertificate> out;
  for (cert_id id : ids) {
    const auto& ci = info(id);
    const std::optional<double> kap = ci.needs_kappa ? kappa : std::nullopt;
    if (ci.needs_kappa && !kap.has_value()) {
      auto c = detail::inapplicable(id, cert_target::diagnostic, cert_direction::upper);
      c.flags.push_back("kappa-eff-above-0.9");
      out.push_back(std::move(c));
      continue;
    }
    if (!ci.per_k) {
      out.push_back(evaluate_certificate(id, ctx, std::nullopt, kap));
      continue;
    }
    for (std::int64_t k = 0; k <= k_max; ++k) {
      out.push_back(evaluate_certificate(id, ctx, k, kap));
    }
  }
  return out;
}

inline std::vector<BoundCertificate> verify_instance(const BernoulliInstance& inst,
                                                     const std::vector<cert_id>& ids,
                                                     std::int64_t k_max = -1) {
  return verify_instance(instance_context(inst), ids, k_max);
}

/// All certificate ids (catalogue order).
inline std::vector<cert_id> all_cert_ids() {
  std::vector<cert_id> out;
  out.reserve(cert_table.size());
  for (const auto& e : cert_table) out.push_back(e.id);
  return out;
}

}  // namespace poibin

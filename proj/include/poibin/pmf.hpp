// Exact law of W: iterated-convolution pmf and the 2^n brute-force oracle.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "poibin/instance.hpp"
#include "poibin/summation.hpp"

namespace poibin {

/// Finite probability sequence over {0, 1, ..., n}. Entries are
/// non-negative by construction; the total stays within 1e-12 of 1
/// because every update below mixes non-negative terms only.
class Pmf {
 public:
  explicit Pmf(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw std::domain_error("Pmf: empty weight vector");
    for (double x : w_) {
      if (!(x >= 0.0)) throw std::domain_error("Pmf: negative weight");
    }
  }

  const std::vector<double>& weights() const { return w_; }
  std::size_t n() const { return w_.size() - 1; }
  double operator[](std::size_t k) const { return k < w_.size() ? w_[k] : 0.0; }

  double total() const {
    stable_sum acc;
    for (double x : w_) acc += x;
    return acc.get();
  }

 private:
  std::vector<double> w_;
};

/// Exact law of W by iterated convolution: w_k <- w_k (1-p_j) + w_{k-1} p_j.
/// All arithmetic is on non-negative terms, so there is no cancellation.
inline Pmf pb_pmf(const BernoulliInstance& inst) {
  const auto& p = inst.p();
  std::vector<double> w(p.size() + 1, 0.0);
  w[0] = 1.0;
  std::size_t top = 0;
  for (double pj : p) {
    const double qj = 1.0 - pj;
    ++top;
    w[top] = w[top - 1] * pj;
    for (std::size_t k = top - 1; k > 0; --k) {
      w[k] = w[k] * qj + w[k - 1] * pj;
    }
    w[0] *= qj;
  }
  return Pmf(std::move(w));
}

/// Literal transcription of the defining sum over all 0-1 sequences,
/// bucketed by the number of successes. Oracle scale only; plain
/// summation on purpose (the oracle stays free of the production
/// accumulation tricks).
inline Pmf pb_pmf_bruteforce(const BernoulliInstance& inst) {
  const std::size_t n = inst.n();
  if (n > 20) throw std::domain_error("pb_pmf_bruteforce: refused for n > 20");
  const auto& p = inst.p();
  std::vector<double> w(n + 1, 0.0);
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    double prod = 1.0;
    int successes = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (std::uint64_t{1} << j)) {
        prod *= p[j];
        ++successes;
      } else {
        prod *= 1.0 - p[j];
      }
    }
    w[successes] += prod;
  }
  return Pmf(std::move(w));
}

}  // namespace poibin

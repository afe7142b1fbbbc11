// Compensated (Neumaier) accumulation for the divergence and tail sums.
#pragma once

#include <cmath>

namespace poibin {

/// Kahan-Neumaier compensated accumulator. Tracks the rounding error of
/// every addition and folds it back on read, so sums of n terms carry an
/// error independent of n (up to second order).
struct stable_sum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  stable_sum& operator+=(double x) {
    add(x);
    return *this;
  }

  double get() const { return sum + comp; }
};

}  // namespace poibin

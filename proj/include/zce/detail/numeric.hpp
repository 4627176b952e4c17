#pragma once

#include <cmath>
#include <span>

namespace zce::detail {

/// log C(a, b) for 0 <= b <= a.
inline double lchoose(double a, double b) {
  return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
}

/// Pairwise (tree) summation: deterministic order, O(log n) error growth.
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace zce::detail

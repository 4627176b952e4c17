#pragma once

#include <cmath>
#include <span>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace zce::detail {

/// 31-point Gauss-Kronrod estimate and error on [a, b].
template <class F>
std::pair<double, double> kronrod_panel(F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  auto mapped = [&](double t) { return f(mid + half * t) * half; };
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(mapped, -1.0, 1.0, 0, 0.0, &error);
  return {value, error};
}

template <class F>
double bisect_panels(F& f, double a, double b, double value, double error, double abs_tol,
                     unsigned depth) {
  if (depth == 0 || error <= abs_tol) return value;
  const double mid = 0.5 * (a + b);
  const auto [left, left_error] = kronrod_panel(f, a, mid);
  const auto [right, right_error] = kronrod_panel(f, mid, b);
  return bisect_panels(f, a, mid, left, left_error, 0.5 * abs_tol, depth - 1) +
         bisect_panels(f, mid, b, right, right_error, 0.5 * abs_tol, depth - 1);
}

/// Adaptive 31-point Gauss-Kronrod on [a, b] by interval bisection.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-13, unsigned max_depth = 18) {
  if (!(b > a)) return 0.0;
  const auto [value, error] = kronrod_panel(f, a, b);
  return bisect_panels(f, a, b, value, error, rel_tol * std::abs(value), max_depth);
}

/// Sum of adaptive integrals over consecutive panels [breaks[i], breaks[i+1]].
template <class F>
double integrate_panels(F&& f, std::span<const double> breaks, double rel_tol = 1e-13,
                        unsigned max_depth = 18) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += integrate(f, breaks[i], breaks[i + 1], rel_tol, max_depth);
  }
  return total;
}

/// Root of a monotone function on [lo, hi] by bisection; `f(lo)` and `f(hi)`
/// must differ in sign.
template <class F>
double bisect(F&& f, double lo, double hi, int iterations = 200) {
  const bool lo_negative = f(lo) < 0.0;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) < 0.0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace zce::detail

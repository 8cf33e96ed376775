#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>

namespace subortrim {

/// Raised when an iterative numerical routine fails to meet its tolerance.
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Neumaier (improved Kahan) running sum.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow or underflow.
inline double log_add(double a, double b) noexcept {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

/// log Σ exp(v_i). Terms are accumulated in the order given, so callers pass
/// them smallest first when they want the compensated sum to be tight.
inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return neg_inf;
  const double top = *std::max_element(values.begin(), values.end());
  if (top == neg_inf) return neg_inf;
  if (top == std::numeric_limits<double>::infinity()) return top;
  CompensatedSum acc;
  for (double v : values) acc.add(std::exp(v - top));
  return top + std::log(acc.value());
}

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a,
                           double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol)
    return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol, int max_depth = 50) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// ∫_{-∞}^{log_hi} g(y) dy for an integrand that decays exponentially as
/// y → -∞ (the log-abscissa form of ∫₀^x h). Panels are marched downward,
/// widening as they go, until three in a row contribute below `rel_tol` of
/// the running total.
inline double integrate_log_abscissa(const std::function<double(double)>& g,
                                     double log_hi, double rel_tol) {
  CompensatedSum total;
  double hi = log_hi;
  int quiet = 0;
  for (int k = 0; k < 4000; ++k) {
    const double width = std::max(1.0, 0.125 * (log_hi - hi));
    const double lo = hi - width;
    const double rough = adaptive_simpson(g, lo, hi, 1e-300, 4);
    const double scale = std::max(std::abs(total.value()), std::abs(rough));
    const double panel = adaptive_simpson(g, lo, hi, std::max(1e-3 * rel_tol * scale, 1e-300));
    total.add(panel);
    hi = lo;
    if (std::abs(panel) <= rel_tol * 1e-2 * std::abs(total.value())) {
      if (++quiet == 3) return total.value();
    } else {
      quiet = 0;
    }
  }
  throw numeric_error("integrate_log_abscissa: integrand does not decay");
}

} // namespace subortrim

#pragma once

// Lévy tail functions Π̄(x) = x^{-α} L(x) of driftless subordinators, their
// generalized inverses, and the small-jump means used to compensate a
// truncated jump series.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "subortrim/numeric.hpp"

namespace subortrim {

enum class TailFamily {
  stable_exact,     // L ≡ 1
  constant,         // L ≡ c
  log_power,        // L(x) = (log 1/x)^p on (0,1), zero beyond
  rational_perturb, // L(x) = 1/(1+x)
  cauchy,           // Π̄(x) = 1/x; index 1, so only usable for jump ladders
};

class TailFunction {
public:
  static TailFunction stable(double alpha) {
    require_index(alpha, true);
    return TailFunction(TailFamily::stable_exact, alpha, 1.0);
  }

  static TailFunction constant(double alpha, double c) {
    require_index(alpha, true);
    if (!(c > 0.0) || !std::isfinite(c))
      throw std::invalid_argument("constant tail needs c > 0");
    return TailFunction(TailFamily::constant, alpha, c);
  }

  static TailFunction log_power(double p, double alpha = 0.0) {
    require_index(alpha, false);
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("log-power tail needs p > 0");
    return TailFunction(TailFamily::log_power, alpha, p);
  }

  static TailFunction rational(double alpha) {
    require_index(alpha, true);
    return TailFunction(TailFamily::rational_perturb, alpha, 1.0);
  }

  static TailFunction cauchy() { return TailFunction(TailFamily::cauchy, 1.0, 1.0); }

  /// Parses "stable(a)", "const(a,c)", "log", "logpow(p)", "rational(a)" or "cauchy".
  static TailFunction parse(std::string_view text);

  /// Canonical config-file spelling; parse(name()) reproduces the tail.
  std::string name() const;

  TailFamily family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  double param() const noexcept { return param_; }
  double support_cap() const noexcept {
    return family_ == TailFamily::log_power ? 1.0 : std::numeric_limits<double>::infinity();
  }
  bool is_cauchy() const noexcept { return family_ == TailFamily::cauchy; }

  /// The slowly varying factor L(x).
  double slowly_varying(double x) const {
    require_level(x);
    switch (family_) {
    case TailFamily::stable_exact: return 1.0;
    case TailFamily::constant: return param_;
    case TailFamily::log_power: return x < 1.0 ? std::pow(-std::log(x), param_) : 0.0;
    case TailFamily::rational_perturb: return 1.0 / (1.0 + x);
    case TailFamily::cauchy: return 1.0;
    }
    return 0.0;
  }

  /// Π̄(x).
  double operator()(double x) const {
    require_level(x);
    return eval_log(std::log(x));
  }

  /// log Π̄(e^y); -inf at and beyond the support cap.
  double log_eval_log(double y) const noexcept {
    switch (family_) {
    case TailFamily::stable_exact: return -alpha_ * y;
    case TailFamily::constant: return std::log(param_) - alpha_ * y;
    case TailFamily::log_power:
      return y < 0.0 ? -alpha_ * y + param_ * std::log(-y) : neg_inf;
    case TailFamily::rational_perturb: return -alpha_ * y - log1pexp(y);
    case TailFamily::cauchy: return -y;
    }
    return neg_inf;
  }

  /// Π̄(e^y), usable when e^y itself would underflow.
  double eval_log(double y) const noexcept {
    if (family_ == TailFamily::log_power && alpha_ == 0.0)
      return y < 0.0 ? std::pow(-y, param_) : 0.0;
    return std::exp(log_eval_log(y));
  }

  /// log Π̄^←(u), where g^←(u) = inf{x > 0 : g(x) ≤ u}. The result y always
  /// satisfies Π̄(e^y) ≤ u.
  double log_inverse(double u) const;

  /// Π̄^←(u). Underflows to 0 for very large u on slowly varying tails; use
  /// log_inverse there.
  double inverse(double u) const {
    const double x = std::exp(log_inverse(u));
    return settle_up(x, u);
  }

  /// ∫_{(0,ε]} x Π(dx) = ∫₀^ε Π̄(x) dx − ε Π̄(ε).
  double small_jump_mean(double eps) const;

  /// log of small_jump_mean(e^{log_eps}), accurate where e^{log_eps} underflows.
  double log_small_jump_mean(double log_eps) const;

private:
  TailFunction(TailFamily f, double alpha, double param) : family_(f), alpha_(alpha), param_(param) {
    if (f != TailFamily::cauchy) {
      const double m = small_jump_mean(1.0);
      if (!std::isfinite(m))
        throw std::invalid_argument("Lévy measure fails ∫₀¹ x Π(dx) < ∞");
    }
  }

  static void require_index(double alpha, bool positive) {
    const bool ok = positive ? (alpha > 0.0 && alpha < 1.0) : (alpha >= 0.0 && alpha < 1.0);
    if (!ok) throw std::invalid_argument("tail index alpha out of range");
  }

  static void require_level(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("tail evaluated at non-positive or NaN level");
  }

  static double log1pexp(double y) noexcept {
    return y > 35.0 ? y + std::exp(-y) : std::log1p(std::exp(y));
  }

  // Moves x up by geometrically growing steps until Π̄(x) ≤ u. A flat tail
  // (log-power at tiny x) can need many ulps of x per ulp of Π̄.
  double settle_up(double x, double u) const {
    if (x <= 0.0 || (*this)(x) <= u) return x;
    const double base = x;
    for (double step = 0x1.0p-53; step < 1.0; step *= 2.0) {
      x = std::max(std::nextafter(x, std::numeric_limits<double>::infinity()), base * (1.0 + step));
      if ((*this)(x) <= u) return x;
    }
    throw numeric_error("tail inverse: cannot settle onto the generalized inverse");
  }

  double settle_up_log(double y, double log_u) const {
    if (log_eval_log(y) <= log_u) return y;
    const double base = y;
    for (double step = 0x1.0p-53; step < 1.0; step *= 2.0) {
      y = std::max(std::nextafter(y, std::numeric_limits<double>::infinity()),
                   base + step * std::max(1.0, std::abs(base)));
      if (log_eval_log(y) <= log_u) return y;
    }
    throw numeric_error("tail inverse: cannot settle onto the generalized inverse");
  }

  double solve_log_inverse(double log_u) const;

  TailFamily family_;
  double alpha_;
  double param_;
};

inline std::string TailFunction::name() const {
  auto num = [](double x) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, x).ptr);
  };
  switch (family_) {
  case TailFamily::stable_exact: return "stable(" + num(alpha_) + ")";
  case TailFamily::constant: return "const(" + num(alpha_) + "," + num(param_) + ")";
  case TailFamily::log_power:
    if (alpha_ == 0.0 && param_ == 1.0) return "log";
    if (alpha_ == 0.0) return "logpow(" + num(param_) + ")";
    return "logpow(" + num(param_) + "," + num(alpha_) + ")";
  case TailFamily::rational_perturb: return "rational(" + num(alpha_) + ")";
  case TailFamily::cauchy: return "cauchy";
  }
  return {};
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_real(std::string_view s) {
  s = trim(s);
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw std::invalid_argument("expected a number, got '" + tmp + "'");
  return v;
}

} // namespace detail

inline TailFunction TailFunction::parse(std::string_view text) {
  const auto s = detail::trim(text);
  if (s == "log") return log_power(1.0);
  if (s == "cauchy") return cauchy();
  const auto open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')')
    throw std::invalid_argument("unknown tail family '" + std::string(s) + "'");
  const auto head = detail::trim(s.substr(0, open));
  const auto args = s.substr(open + 1, s.size() - open - 2);
  const auto comma = args.find(',');
  const double a0 = detail::parse_real(args.substr(0, comma));
  const bool two = comma != std::string_view::npos;
  const double a1 = two ? detail::parse_real(args.substr(comma + 1)) : 0.0;
  if (head == "stable" && !two) return stable(a0);
  if (head == "const" && two) return constant(a0, a1);
  if (head == "logpow") return log_power(a0, a1);
  if (head == "rational" && !two) return rational(a0);
  throw std::invalid_argument("unknown tail family '" + std::string(s) + "'");
}

inline double TailFunction::log_inverse(double u) const {
  if (!(u > 0.0) || std::isnan(u))
    throw std::invalid_argument("tail inverse needs u > 0");
  const double log_u = std::log(u);
  double y = 0.0;
  switch (family_) {
  case TailFamily::stable_exact: y = -log_u / alpha_; break;
  case TailFamily::constant: y = (std::log(param_) - log_u) / alpha_; break;
  case TailFamily::cauchy: y = -log_u; break;
  case TailFamily::log_power:
    if (alpha_ == 0.0) {
      y = param_ == 1.0 ? -u : -std::pow(u, 1.0 / param_);
      break;
    }
    y = solve_log_inverse(log_u);
    break;
  case TailFamily::rational_perturb: y = solve_log_inverse(log_u); break;
  }
  return settle_up_log(y, log_u);
}

// Illinois-modified regula falsi on h(y) = log Π̄(e^y) − log u, which is
// strictly decreasing on the support. Returns the upper bracket end.
inline double TailFunction::solve_log_inverse(double log_u) const {
  auto h = [&](double y) { return log_eval_log(y) - log_u; };
  const double cap = std::log(support_cap());
  double guess = alpha_ > 0.0 ? -log_u / alpha_ : -1.0;
  if (guess >= cap) guess = cap - 1.0;

  double hi = guess, lo = guess;
  double h_hi = h(hi);
  double h_lo = h_hi;
  double step = 1.0;
  for (int k = 0; h_hi > 0.0; ++k) {
    if (k > 200) throw numeric_error("tail inverse: cannot bracket from above");
    lo = hi; h_lo = h_hi;
    hi = std::min(hi + step, cap);
    h_hi = h(hi);
    step *= 2.0;
  }
  step = 1.0;
  for (int k = 0; h_lo <= 0.0; ++k) {
    if (k > 200) throw numeric_error("tail inverse: cannot bracket from below");
    hi = lo; h_hi = h_lo;
    lo -= step;
    h_lo = h(lo);
    step *= 2.0;
  }
  // h(lo) > 0 ≥ h(hi). A -inf at the cap is replaced by a finite proxy.
  constexpr double tol = 0x1.0p-40;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= tol * std::max(1.0, std::abs(hi))) return hi;
    double mid;
    if (std::isfinite(h_hi) && std::isfinite(h_lo)) {
      mid = hi - h_hi * (hi - lo) / (h_hi - h_lo);
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    const double h_mid = h(mid);
    if (h_mid > 0.0) {
      lo = mid; h_lo = h_mid;
      if (side == -1) h_hi *= 0.5;
      side = -1;
    } else {
      hi = mid; h_hi = h_mid;
      if (side == 1) h_lo *= 0.5;
      side = 1;
    }
  }
  throw numeric_error("tail inverse did not converge");
}

inline double TailFunction::small_jump_mean(double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("small_jump_mean needs eps > 0");
  switch (family_) {
  case TailFamily::stable_exact:
  case TailFamily::constant:
    return param_ * alpha_ * std::pow(eps, 1.0 - alpha_) / (1.0 - alpha_);
  case TailFamily::cauchy:
    return std::numeric_limits<double>::infinity();
  case TailFamily::log_power:
    if (alpha_ == 0.0) {
      const double e = std::min(eps, 1.0);
      if (param_ == 1.0) return e;
      // x = e^{-v}: ∫_V^∞ v^p e^{-v} dv − e^{-V} V^p with V = log 1/e.
      const double v = -std::log(e);
      return boost::math::tgamma(param_ + 1.0, v) - std::exp(-v) * std::pow(v, param_);
    }
    break;
  case TailFamily::rational_perturb: {
    // w = x/(1+x) turns ∫₀^ε x^{-α}/(1+x) dx into B(ε/(1+ε); 1-α, α).
    const double w = eps / (1.0 + eps);
    const double integral = alpha_ == 0.0 ? std::log1p(eps) : boost::math::beta(1.0 - alpha_, alpha_, w);
    return integral - eps * (*this)(eps);
  }
  }
  {
    const double e = std::min(eps, support_cap());
    const double at_e = e < support_cap() ? (*this)(e) : 0.0;
    auto g = [&](double y) { return (eval_log(y) - at_e) * std::exp(y); };
    const double log_e = e < support_cap() ? std::log(e) : std::log(std::nextafter(e, 0.0));
    return integrate_log_abscissa(g, log_e, 1e-12);
  }
}

inline double TailFunction::log_small_jump_mean(double log_eps) const {
  switch (family_) {
  case TailFamily::stable_exact:
  case TailFamily::constant:
    return std::log(param_ * alpha_ / (1.0 - alpha_)) + (1.0 - alpha_) * log_eps;
  case TailFamily::log_power:
    if (alpha_ == 0.0) {
      const double le = std::min(log_eps, 0.0);
      if (param_ == 1.0) return le;
      const double v = -le;
      if (v < 50.0) return std::log(small_jump_mean(std::exp(le)));
      // Γ(p+1,V) e^V − V^p = p V^{p-1} (1 + (p-1)/V + (p-1)(p-2)/V² + ...)
      double series = 1.0, term = 1.0;
      for (int k = 1; k < 8; ++k) {
        term *= (param_ - k) / v;
        series += term;
      }
      return le + std::log(param_) + (param_ - 1.0) * std::log(v) + std::log(series);
    }
    [[fallthrough]];
  default: {
    const double eps = std::exp(log_eps);
    if (eps > 0.0) return std::log(small_jump_mean(eps));
    // Deep below any practical scale L is flat; use the pure-power form.
    const double c = family_ == TailFamily::log_power ? std::pow(-log_eps, param_) : 1.0;
    return std::log(c * alpha_ / (1.0 - alpha_)) + (1.0 - alpha_) * log_eps;
  }
  }
}

// Free-function spellings of the tail operations.

inline double tail_eval(const TailFunction& tail, double x) { return tail(x); }
inline double tail_inverse(const TailFunction& tail, double u) { return tail.inverse(u); }
inline double log_tail_inverse(const TailFunction& tail, double u) { return tail.log_inverse(u); }
inline double small_jump_mean(const TailFunction& tail, double eps) { return tail.small_jump_mean(eps); }

} // namespace subortrim

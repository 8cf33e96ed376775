#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "subortrim/numeric.hpp"

namespace subortrim {

/// Right-continuous empirical distribution function; samples are sorted once.
class EmpiricalCdf {
public:
  explicit EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw std::invalid_argument("empirical cdf needs at least one sample");
    for (double x : sorted_)
      if (std::isnan(x)) throw std::invalid_argument("empirical cdf got a NaN sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  std::span<const double> sorted() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }

  double quantile(double p) const {
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sorted_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted_.size() - 1);
    return sorted_[lo] + (pos - static_cast<double>(lo)) * (sorted_[hi] - sorted_[lo]);
  }
  double median() const { return quantile(0.5); }

private:
  std::vector<double> sorted_;
};

struct KsResult {
  double statistic;
  double p_value;
};

/// P(K > x) for the Kolmogorov distribution, K(x) = 1 − 2Σ_{k≥1} (−1)^{k−1} e^{−2k²x²}.
/// Below x = 1 the alternating series converges slowly, so the equivalent
/// theta-function form √(2π)/x Σ e^{−(2k−1)²π²/(8x²)} is summed instead.
inline double kolmogorov_sf(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.0) {
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double term = std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * c);
      cdf += term;
      if (term < 1e-12 * cdf) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// sup_x |F̂(x) − F(x)| over both one-sided gaps, with the asymptotic p-value.
inline KsResult ks_one_sample(const EmpiricalCdf& samples, const std::function<double(double)>& cdf) {
  const std::size_t n = samples.size();
  if (n < 10) throw std::invalid_argument("ks_one_sample needs at least 10 samples");
  const auto xs = samples.sorted();
  const double nd = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(xs[i]);
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("ks_one_sample: cdf left [0,1]");
    d = std::max({d, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
  }
  return {d, kolmogorov_sf(std::sqrt(nd) * d)};
}

inline KsResult ks_two_sample(const EmpiricalCdf& a, const EmpiricalCdf& b) {
  if (a.size() < 10 || b.size() < 10) throw std::invalid_argument("ks_two_sample needs at least 10 samples per side");
  const auto xa = a.sorted();
  const auto xb = b.sorted();
  const double na = static_cast<double>(xa.size()), nb = static_cast<double>(xb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double x = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = na * nb / (na + nb);
  return {d, kolmogorov_sf(std::sqrt(en) * d)};
}

struct MeanWithError {
  double mean;
  double standard_error;
};

/// Sample mean and standard error of e^{−sX}.
inline MeanWithError empirical_laplace(std::span<const double> samples, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("empirical_laplace needs s > 0");
  if (samples.empty()) throw std::invalid_argument("empirical_laplace needs samples");
  CompensatedSum sum, sum_sq;
  for (double x : samples) {
    const double v = std::exp(-s * x);
    sum.add(v);
    sum_sq.add(v * v);
  }
  const double n = static_cast<double>(samples.size());
  const double mean = sum.value() / n;
  const double var = samples.size() > 1 ? std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

inline double mc_standard_error(double p_hat, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("mc_standard_error needs n >= 1");
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw std::invalid_argument("mc_standard_error needs p in [0,1]");
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
}

struct ChiSquareResult {
  double statistic;
  unsigned dof;
  double p_value;
};

/// Pearson χ² goodness of fit of nonnegative counts to Poisson(mean). Cells
/// are pooled from both ends until every expected count is at least 5; the
/// upper cell is open.
inline ChiSquareResult chi_square_poisson_fit(std::span<const std::uint64_t> counts, double mean) {
  if (counts.empty() || !(mean > 0.0)) throw std::invalid_argument("chi_square_poisson_fit needs counts and mean > 0");
  const double n = static_cast<double>(counts.size());
  const std::uint64_t top = *std::max_element(counts.begin(), counts.end());
  std::vector<double> observed(top + 2, 0.0);
  for (auto c : counts) observed[c] += 1.0;

  std::vector<double> expected(top + 2);
  double cum = 0.0;
  for (std::uint64_t k = 0; k <= top; ++k) {
    const double pk = std::exp(-mean + static_cast<double>(k) * std::log(mean) - std::lgamma(k + 1.0));
    expected[k] = n * pk;
    cum += pk;
  }
  expected[top + 1] = n * std::max(0.0, 1.0 - cum);

  // Pool into cells with expectation ≥ 5.
  std::vector<double> obs_cells, exp_cells;
  double o = 0.0, e = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    o += observed[k];
    e += expected[k];
    if (e >= 5.0) {
      obs_cells.push_back(o);
      exp_cells.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp_cells.empty()) {
      obs_cells.push_back(o);
      exp_cells.push_back(e);
    } else {
      obs_cells.back() += o;
      exp_cells.back() += e;
    }
  }
  if (exp_cells.size() < 2) throw std::invalid_argument("chi_square_poisson_fit: too few cells after pooling");
  double stat = 0.0;
  for (std::size_t k = 0; k < exp_cells.size(); ++k) {
    const double diff = obs_cells[k] - exp_cells[k];
    stat += diff * diff / exp_cells[k];
  }
  const unsigned dof = static_cast<unsigned>(exp_cells.size() - 1);
  return {stat, dof, boost::math::gamma_q(0.5 * dof, 0.5 * stat)};
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  return EmpiricalCdf(std::move(v)).median();
}

} // namespace subortrim

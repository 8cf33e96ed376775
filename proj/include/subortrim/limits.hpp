#pragma once

// Limit laws reached along the edges of the convergence diagram: stable
// marginals, the α-power coupling of trimmed stable sums to Cauchy jumps,
// ordered Cauchy-jump laws, and finite-dimensional distributions of the
// largest and second-largest jump processes.

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "subortrim/levy.hpp"
#include "subortrim/numeric.hpp"
#include "subortrim/pointproc.hpp"

namespace subortrim {

/// Time points 0 < λ₁ < ⋯ < λₙ ≤ 1 paired with levels y₁, …, yₙ > 0.
struct FidiQuery {
  std::vector<double> lambdas;
  std::vector<double> levels;

  void validate() const {
    if (lambdas.empty() || lambdas.size() != levels.size())
      throw std::invalid_argument("fidi query needs equally many lambdas and levels (at least one)");
    double prev = 0.0;
    for (double l : lambdas) {
      if (!(l > prev && l <= 1.0)) throw std::invalid_argument("fidi lambdas must increase strictly within (0,1]");
      prev = l;
    }
    for (double y : levels)
      if (!(y > 0.0) || std::isnan(y)) throw std::invalid_argument("fidi levels must be positive");
  }

  bool strictly_increasing_levels() const {
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (!(levels[i] > levels[i - 1])) return false;
    return true;
  }

  std::size_t size() const noexcept { return lambdas.size(); }
};

/// Jump count V_{ℓ,j} in time cell (λ_{ℓ-1}, λ_ℓ] and level band [y_j, y_{j+1}).
struct CountCell {
  std::size_t ell;
  std::size_t j;
  double time_mass;
  double level_mass;

  double mean() const noexcept { return time_mass * level_mass; }
};

/// P(Δξ_λ^{(r)} ≤ x) = e^{-λ/x} Σ_{j<r} (λ/x)^j / j!
inline double cauchy_rth_jump_cdf(unsigned r, double lambda, double x) {
  if (r == 0 || !(lambda > 0.0) || !(x > 0.0))
    throw std::invalid_argument("cauchy_rth_jump_cdf needs r >= 1, lambda > 0, x > 0");
  if (std::isinf(x)) return 1.0;
  const double m = lambda / x;
  double term = 1.0, sum = 0.0;
  for (unsigned j = 0; j < r; ++j) {
    sum += term;
    term *= m / static_cast<double>(j + 1);
  }
  return std::exp(-m) * sum;
}

/// P(ΔY^{(1)}_{λ_i} ≤ y_i ∀i) for a driftless subordinator whose Lévy tail
/// is `measure`. Levels are first replaced by their suffix minima, since
/// {ΔY_{λ_i} ≤ y_i} contains {ΔY_{λ_j} ≤ y_j} whenever i < j and y_i ≥ y_j.
inline double first_jump_fidi(const TailFunction& measure, const FidiQuery& q) {
  q.validate();
  const std::size_t n = q.size();
  std::vector<double> y(q.levels);
  for (std::size_t i = n - 1; i-- > 0;) y[i] = std::min(y[i], y[i + 1]);
  double log_p = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    log_p -= (q.lambdas[i] - prev) * measure(y[i]);
    prev = q.lambdas[i];
  }
  return std::exp(log_p);
}

/// Joint law of the extremal process: the running largest Cauchy jump.
inline double extremal_fidi_cdf(const FidiQuery& q) { return first_jump_fidi(TailFunction::cauchy(), q); }

/// Poisson pmf of a count cell with mean time_mass × level_mass.
inline double poisson_count_prob(const CountCell& cell, unsigned k) {
  const double mean = cell.mean();
  if (!(mean >= 0.0)) throw std::invalid_argument("count cell masses must be nonnegative");
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

/// Level band [y_j, y_{j+1}) mass of the measure; the top band is unbounded.
inline double level_band_mass(const TailFunction& measure, std::span<const double> levels, std::size_t j) {
  const double lower = measure(levels[j]);
  const double upper = j + 1 < levels.size() ? measure(levels[j + 1]) : 0.0;
  return lower - upper;
}

/// Cell (ℓ, j) of a query, 0-based.
inline CountCell count_cell(const TailFunction& measure, const FidiQuery& q, std::size_t ell, std::size_t j) {
  const double prev = ell == 0 ? 0.0 : q.lambdas[ell - 1];
  return {ell, j, q.lambdas[ell] - prev, level_band_mass(measure, q.levels, j)};
}

/// P(ΔY^{(2)}_{λ_i} < y_i ∀i) by the recursion over the events
/// D_m = {the constraints k ≥ m hold using only cells with ℓ ≥ m}:
///
///   D_m = ∏_{j≥m} P(V_{m,j}=0) · D_{m+1}
///       + Σ_{i≥m} P(V_{m,i}=1) ∏_{j≥m, j≠i} P(V_{m,j}=0)
///                 · ∏_{ℓ=m+1}^{i} ∏_{j≥ℓ} P(V_{ℓ,j}=0) · D_{i+1},
///
/// with D_{n+1} = 1. Levels must increase strictly.
inline double second_jump_fidi(const TailFunction& measure, const FidiQuery& q) {
  q.validate();
  if (!q.strictly_increasing_levels())
    throw std::invalid_argument("second_jump_fidi needs strictly increasing levels");
  const std::size_t n = q.size();

  std::vector<std::vector<double>> p0(n, std::vector<double>(n, 1.0)), p1(n, std::vector<double>(n, 0.0));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = l; j < n; ++j) {
      const CountCell cell = count_cell(measure, q, l, j);
      p0[l][j] = poisson_count_prob(cell, 0);
      p1[l][j] = poisson_count_prob(cell, 1);
    }
  // Row products ∏_{j≥ℓ} P(V_{ℓ,j}=0).
  std::vector<double> row_empty(n, 1.0);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = l; j < n; ++j) row_empty[l] *= p0[l][j];

  std::vector<double> d(n + 1, 1.0);
  for (std::size_t m = n; m-- > 0;) {
    double total = row_empty[m] * d[m + 1];
    double rows_between = 1.0; // ∏_{ℓ=m+1}^{i} row_empty[ℓ]
    for (std::size_t i = m; i < n; ++i) {
      if (i > m) rows_between *= row_empty[i];
      double others = 1.0;
      for (std::size_t j = m; j < n; ++j)
        if (j != i) others *= p0[m][j];
      total += p1[m][i] * others * rows_between * d[i + 1];
    }
    d[m] = total;
  }
  return std::min(1.0, std::max(0.0, d[0]));
}

/// (^{(r)}S_α(λ))^α = (Σ_{i≥r+1} (Δξ_λ^{(i)})^{1/α})^α on the Cauchy ladder
/// 1/Γ_i restricted to marks ≤ λ, computed as α·logsumexp((1/α) log Δξ).
/// With `compensate`, the mean of the unsimulated part of the 1/α-power sum,
/// λ α ε^{(1-α)/α} / (1-α) at cutoff ε = 1/Γ_N, is added.
inline double trimmed_stable_power_sample(const ArrivalSeries& arr, double alpha, std::size_t r, double lambda,
                                          bool compensate = false) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("trimmed_stable_power_sample needs alpha in (0,1)");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("trimmed_stable_power_sample needs lambda in (0,1]");
  const auto g = arr.arrivals();
  const auto marks = arr.marks();
  const double inv = 1.0 / alpha;
  std::size_t seen = 0, lead = g.size();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (marks[i] > lambda) continue;
    if (seen == r) { lead = i; break; }
    ++seen;
  }
  if (lead == g.size()) throw std::out_of_range("arrival series too short for the requested trimming");
  // Powered log-jumps are -(1/α) log Γ_i; the lead one is the largest.
  const double top = -inv * std::log(g[lead]);
  const double log_rem = compensate
      ? std::log(lambda * alpha / (1.0 - alpha)) - (1.0 - alpha) * inv * std::log(g.back())
      : neg_inf;
  const double ref = std::max(top, log_rem);
  CompensatedSum acc;
  if (compensate) acc.add(std::exp(log_rem - ref));
  for (std::size_t i = g.size(); i-- > lead;)
    if (marks[i] <= lambda) acc.add(std::exp(-inv * std::log(g[i]) - ref));
  return std::exp(alpha * (ref + std::log(acc.value())));
}

/// Δξ_λ^{(r+1)}: the (r+1)-th largest of 1/Γ_i over marks ≤ λ.
inline double cauchy_ordered_jump_sample(const ArrivalSeries& arr, std::size_t r, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("cauchy_ordered_jump_sample needs lambda in (0,1]");
  const auto g = arr.arrivals();
  const auto marks = arr.marks();
  std::size_t seen = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (marks[i] > lambda) continue;
    if (seen++ == r) return 1.0 / g[i];
  }
  throw std::out_of_range("arrival series too short for the requested jump rank");
}

/// E e^{-s S_α(t)} = e^{-t Γ(1-α) s^α} for the stable subordinator with Lévy
/// tail x^{-α}.
inline double stable_marginal_laplace(double alpha, double t, double s) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("stable_marginal_laplace needs alpha in (0,1)");
  if (!(t > 0.0) || !(s >= 0.0)) throw std::invalid_argument("stable_marginal_laplace needs t > 0, s >= 0");
  return std::exp(-t * std::tgamma(1.0 - alpha) * std::pow(s, alpha));
}

/// A fidi probability request as accepted on the wire:
/// {"lambdas":[...], "levels":[...], "r":1|2, "measure":"cauchy"|tail-family}.
struct FidiRequest {
  FidiQuery query;
  unsigned r = 1;
  TailFunction measure = TailFunction::cauchy();
};

inline FidiRequest parse_fidi_request(const nlohmann::json& j) {
  static const char* const known[] = {"lambdas", "levels", "r", "measure"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument("unknown fidi request key '" + it.key() + "'");
  }
  FidiRequest req;
  req.query.lambdas = j.at("lambdas").get<std::vector<double>>();
  req.query.levels = j.at("levels").get<std::vector<double>>();
  req.r = j.value("r", 1u);
  if (req.r != 1 && req.r != 2) throw std::invalid_argument("fidi requests support r = 1 or r = 2 only");
  req.measure = TailFunction::parse(j.value("measure", std::string("cauchy")));
  req.query.validate();
  return req;
}

inline double evaluate_fidi(const FidiRequest& req) {
  return req.r == 1 ? first_jump_fidi(req.measure, req.query) : second_jump_fidi(req.measure, req.query);
}

} // namespace subortrim

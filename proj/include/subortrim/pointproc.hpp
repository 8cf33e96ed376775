#pragma once

// Poisson arrival series and the inverse-Lévy-measure (Ferguson–Klass)
// realization of a subordinator's ordered jumps. Jumps are held as logs so
// slowly varying tails at small horizons never underflow.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "subortrim/levy.hpp"
#include "subortrim/numeric.hpp"
#include "subortrim/rng.hpp"

namespace subortrim {

/// Unit-rate Poisson arrival times Γ₁ < Γ₂ < ⋯ with independent uniform
/// marks in (0,1] that place each jump in time.
class ArrivalSeries {
public:
  ArrivalSeries(std::vector<double> arrivals, std::vector<double> marks, std::uint64_t seed = 0)
      : arrivals_(std::move(arrivals)), marks_(std::move(marks)), seed_(seed) {
    if (arrivals_.empty()) throw std::invalid_argument("arrival series needs at least one term");
    if (arrivals_.size() != marks_.size())
      throw std::invalid_argument("arrivals and marks differ in length");
    double prev = 0.0;
    for (std::size_t i = 0; i < arrivals_.size(); ++i) {
      if (!(arrivals_[i] > prev)) throw std::invalid_argument("arrivals must be positive and strictly increasing");
      if (!(marks_[i] > 0.0 && marks_[i] <= 1.0)) throw std::invalid_argument("marks must lie in (0,1]");
      prev = arrivals_[i];
    }
  }

  /// Series whose marks are all 1, i.e. every jump lies in the full horizon.
  static ArrivalSeries unmarked(std::vector<double> arrivals) {
    std::vector<double> marks(arrivals.size(), 1.0);
    return ArrivalSeries(std::move(arrivals), std::move(marks));
  }

  std::span<const double> arrivals() const noexcept { return arrivals_; }
  std::span<const double> marks() const noexcept { return marks_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return arrivals_.size(); }

private:
  std::vector<double> arrivals_;
  std::vector<double> marks_;
  std::uint64_t seed_;
};

/// Deterministic in `seed`: Γ_k is a cumulative sum of unit exponentials.
inline ArrivalSeries sample_arrivals(std::uint64_t seed, std::size_t n_terms) {
  if (n_terms == 0) throw std::invalid_argument("sample_arrivals needs n_terms >= 1");
  Rng rng(seed);
  std::vector<double> arrivals(n_terms), marks(n_terms);
  double gamma = 0.0;
  for (std::size_t i = 0; i < n_terms; ++i) {
    const double next = gamma + rng.exponential();
    gamma = next > gamma ? next : std::nextafter(gamma, std::numeric_limits<double>::infinity());
    arrivals[i] = gamma;
    marks[i] = rng.uniform_open0();
  }
  return ArrivalSeries(std::move(arrivals), std::move(marks), seed);
}

/// Ordered jumps J₁ ≥ J₂ ≥ ⋯ of a subordinator over [0, t·coverage], stored
/// as log J_i together with their time marks.
class JumpLadder {
public:
  JumpLadder(TailFunction tail, double horizon, std::vector<double> log_jumps,
             std::vector<double> marks, double cutoff_log_jump, double coverage = 1.0)
      : tail_(std::move(tail)), horizon_(horizon), coverage_(coverage),
        cutoff_log_jump_(cutoff_log_jump), log_jumps_(std::move(log_jumps)),
        marks_(std::move(marks)) {
    if (!(horizon_ > 0.0)) throw std::invalid_argument("ladder horizon must be positive");
    if (log_jumps_.size() != marks_.size()) throw std::invalid_argument("ladder arrays differ in length");
  }

  const TailFunction& tail() const noexcept { return tail_; }
  double horizon() const noexcept { return horizon_; }
  /// Fraction λ of the horizon whose jumps the ladder holds.
  double coverage() const noexcept { return coverage_; }
  /// log of the smallest simulated jump of the generating series; every
  /// unsimulated jump lies below it.
  double cutoff_log_jump() const noexcept { return cutoff_log_jump_; }
  std::span<const double> log_jumps() const noexcept { return log_jumps_; }
  std::span<const double> marks() const noexcept { return marks_; }
  std::size_t size() const noexcept { return log_jumps_.size(); }
  bool empty() const noexcept { return log_jumps_.empty(); }
  double jump(std::size_t i) const { return std::exp(log_jumps_.at(i)); }

private:
  TailFunction tail_;
  double horizon_;
  double coverage_;
  double cutoff_log_jump_;
  std::vector<double> log_jumps_;
  std::vector<double> marks_;
};

/// J_i = Π̄^←(Γ_i / t), computed as log J_i.
inline JumpLadder ordered_jumps(const TailFunction& tail, double t, const ArrivalSeries& arr) {
  if (!(t > 0.0)) throw std::invalid_argument("ordered_jumps needs t > 0");
  const auto gammas = arr.arrivals();
  std::vector<double> log_jumps(gammas.size());
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    // Rounding in a numeric inverse may not respect the order; ties keep arrival order.
    prev = std::min(prev, tail.log_inverse(gammas[i] / t));
    log_jumps[i] = prev;
  }
  const auto marks = arr.marks();
  const double cutoff = log_jumps.back();
  return JumpLadder(tail, t, std::move(log_jumps), std::vector<double>(marks.begin(), marks.end()), cutoff);
}

/// Ordered jumps over [0, t·λ]: the entries with mark ≤ λ.
inline JumpLadder restrict_to(const JumpLadder& ladder, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("restrict_to needs lambda in (0,1]");
  std::vector<double> lj, mk;
  const auto src = ladder.log_jumps();
  const auto marks = ladder.marks();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (marks[i] <= lambda) {
      lj.push_back(src[i]);
      mk.push_back(marks[i]);
    }
  }
  return JumpLadder(ladder.tail(), ladder.horizon(), std::move(lj), std::move(mk),
                    ladder.cutoff_log_jump(), std::min(ladder.coverage(), lambda));
}

struct TrimmedValue {
  double value;     ///< may underflow to 0; log_value stays exact
  double log_value;
};

namespace detail {

// log of the expected sum of the unsimulated jumps of a ladder covering
// [0, t·coverage].
inline double log_remainder_mean(const JumpLadder& ladder, double coverage) {
  if (ladder.tail().is_cauchy())
    throw std::invalid_argument("truncation compensation is undefined for the Cauchy tail");
  return std::log(ladder.horizon() * coverage) + ladder.tail().log_small_jump_mean(ladder.cutoff_log_jump());
}

// log Σ of the jumps with mark ≤ lambda after skipping the first `skip` of
// them, plus the remainder mean when `compensate` is set. Sums smallest first.
inline double log_trimmed_sum(const JumpLadder& ladder, double lambda, std::size_t skip, bool compensate) {
  const auto lj = ladder.log_jumps();
  const auto marks = ladder.marks();
  std::size_t seen = 0, lead = lj.size();
  for (std::size_t i = 0; i < lj.size(); ++i) {
    if (marks[i] > lambda) continue;
    if (seen == skip) { lead = i; break; }
    ++seen;
  }
  if (lead == lj.size())
    throw std::out_of_range("ladder too shallow for the requested trimming; deepen the truncation");
  const double top = lj[lead];
  const double coverage = std::min(ladder.coverage(), lambda);
  const double log_rem = compensate ? log_remainder_mean(ladder, coverage) : neg_inf;
  const double ref = std::max(top, log_rem);
  CompensatedSum acc;
  if (compensate) acc.add(std::exp(log_rem - ref));
  for (std::size_t i = lj.size(); i-- > lead;)
    if (marks[i] <= lambda) acc.add(std::exp(lj[i] - ref));
  return ref + std::log(acc.value());
}

} // namespace detail

/// ^{(r)}X = X minus its r largest jumps, optionally plus the mean of the
/// unsimulated tail of the series.
inline TrimmedValue trimmed_value(const JumpLadder& ladder, std::size_t r, bool compensate) {
  if (ladder.size() <= r)
    throw std::out_of_range("trimmed_value: ladder needs more than r entries");
  const double lv = detail::log_trimmed_sum(ladder, 1.0, r, compensate);
  return {std::exp(lv), lv};
}

/// Z_{r,t,λ} = 1 / (t Π̄(ΔX^{(r)}_{tλ})), r ≥ 1.
inline double z_statistic(const JumpLadder& ladder, double lambda, std::size_t r) {
  if (r == 0) throw std::invalid_argument("z_statistic needs r >= 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("z_statistic needs lambda in (0,1]");
  const auto lj = ladder.log_jumps();
  const auto marks = ladder.marks();
  std::size_t seen = 0;
  for (std::size_t i = 0; i < lj.size(); ++i) {
    if (marks[i] > lambda) continue;
    if (++seen == r) return 1.0 / (ladder.horizon() * ladder.tail().eval_log(lj[i]));
  }
  throw std::out_of_range("z_statistic: fewer than r jumps; deepen the truncation");
}

/// 1 / (t Π̄(^{(r)}X_{tλ})) with the compensated trimmed sum, evaluated in
/// the log domain.
inline double z_statistic_trimmed(const JumpLadder& ladder, double lambda, std::size_t r) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("z_statistic_trimmed needs lambda in (0,1]");
  const double lx = detail::log_trimmed_sum(ladder, lambda, r, true);
  return 1.0 / (ladder.horizon() * ladder.tail().eval_log(lx));
}

/// W = ^{(r)}X / ΔX^{(r+1)} = 1 + Σ_{i>r+1} J_i / J_{r+1}.
inline double ratio_diagnostic(const JumpLadder& ladder, std::size_t r) {
  if (ladder.size() < r + 2)
    throw std::out_of_range("ratio_diagnostic: ladder needs at least r+2 entries");
  const auto lj = ladder.log_jumps();
  CompensatedSum acc;
  for (std::size_t i = lj.size(); i-- > r + 1;) acc.add(std::exp(lj[i] - lj[r]));
  return 1.0 + acc.value();
}

// Debug dump: "SBTR", u32 version, u64 N, f64 t, then N × (f64 log_jump, f64 mark),
// all little-endian.

inline constexpr std::uint32_t ladder_dump_version = 1;

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw std::runtime_error("truncated ladder dump");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

} // namespace detail

inline void write_ladder(std::ostream& os, const JumpLadder& ladder) {
  os.write("SBTR", 4);
  detail::put_le<std::uint32_t>(os, ladder_dump_version);
  detail::put_le<std::uint64_t>(os, ladder.size());
  detail::put_le<double>(os, ladder.horizon());
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    detail::put_le<double>(os, ladder.log_jumps()[i]);
    detail::put_le<double>(os, ladder.marks()[i]);
  }
}

/// The dump carries no tail; the caller supplies it. The cutoff is taken as
/// the last stored jump.
inline JumpLadder read_ladder(std::istream& is, const TailFunction& tail) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "SBTR", 4) != 0) throw std::runtime_error("not a ladder dump");
  if (detail::get_le<std::uint32_t>(is) != ladder_dump_version) throw std::runtime_error("unsupported ladder dump version");
  const auto n = detail::get_le<std::uint64_t>(is);
  const double t = detail::get_le<double>(is);
  std::vector<double> lj(n), mk(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    lj[i] = detail::get_le<double>(is);
    mk[i] = detail::get_le<double>(is);
  }
  const double cutoff = n ? lj.back() : neg_inf;
  return JumpLadder(tail, t, std::move(lj), std::move(mk), cutoff);
}

} // namespace subortrim

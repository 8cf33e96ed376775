#pragma once

// Seeded experiment runners for the three edges of the convergence diagram,
// the fidi validation and the diagnostic suite, plus their CSV/JSON reports.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "subortrim/levy.hpp"
#include "subortrim/limits.hpp"
#include "subortrim/pointproc.hpp"
#include "subortrim/rng.hpp"
#include "subortrim/stats.hpp"

namespace subortrim {

enum class Edge { left, right, bottom, fidi, diagnostics };

inline std::string_view edge_name(Edge e) {
  switch (e) {
  case Edge::left: return "left";
  case Edge::right: return "right";
  case Edge::bottom: return "bottom";
  case Edge::fidi: return "fidi";
  case Edge::diagnostics: return "diagnostics";
  }
  return "?";
}

inline Edge parse_edge(std::string_view s) {
  for (Edge e : {Edge::left, Edge::right, Edge::bottom, Edge::fidi, Edge::diagnostics})
    if (s == edge_name(e)) return e;
  throw std::invalid_argument("unknown edge '" + std::string(s) + "'");
}

struct ExperimentConfig {
  Edge edge = Edge::left;
  /// Family string; the bare names "stable" and "rational" are instantiated
  /// once per entry of alpha_grid.
  std::string tail = "stable";
  std::vector<double> alpha_grid{0.4, 0.2, 0.1, 0.05, 0.02, 0.01};
  std::vector<double> t_grid{1e-2, 1e-4, 1e-6, 1e-8};
  std::vector<double> lambda_grid{0.25, 0.5, 0.75, 1.0};
  std::vector<unsigned> r_grid{0, 1, 2};
  std::vector<double> level_grid{0.5, 1.0, 2.0, 4.0};
  std::size_t replicates = 10000;
  std::size_t n_terms = 2000;
  /// Independent repetitions of the whole sweep; trend verdicts use medians across them.
  std::size_t seeds = 1;
  std::uint64_t master_seed = 20160601;
  std::string output;
  unsigned jobs = 1;
  bool timing = false;
  bool keep_plots = false;
  double ks_level = 0.01;
  /// KS acceptance bound for edge-right at the smallest t; 0 selects 1.63/√n.
  double ks_threshold = 0.0;
  double terminal_error = 0.02;
  double terminal_fraction = 0.95;
  unsigned max_inversions = 1;

  static ExperimentConfig defaults(Edge e) {
    ExperimentConfig c;
    c.edge = e;
    switch (e) {
    case Edge::left:
      c.tail = "stable";
      c.alpha_grid = {0.3, 0.5, 0.8};
      c.t_grid = {1.0, 1e-6};
      c.r_grid = {0, 1};
      break;
    case Edge::right:
      c.tail = "log";
      c.r_grid = {0, 1};
      c.n_terms = 1000;
      break;
    case Edge::bottom:
      c.tail = "cauchy";
      c.lambda_grid = {1.0};
      c.replicates = 100;
      c.n_terms = 100000;
      break;
    case Edge::fidi:
      c.tail = "cauchy";
      c.replicates = 100000;
      break;
    case Edge::diagnostics:
      c.tail = "log";
      c.t_grid = {1.0, 1e-1, 1e-2, 1e-4, 1e-6, 1e-8};
      c.r_grid = {0, 1};
      c.replicates = 2000;
      c.n_terms = 1000;
      break;
    }
    return c;
  }

  void validate() const {
    auto positive = [](const std::vector<double>& v, const char* what) {
      if (v.empty()) throw std::invalid_argument(std::string(what) + " grid is empty");
      for (double x : v)
        if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + " grid needs positive finite values");
    };
    positive(t_grid, "t");
    positive(level_grid, "level");
    if (alpha_grid.empty()) throw std::invalid_argument("alpha grid is empty");
    for (double a : alpha_grid)
      if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha grid values must lie in (0,1)");
    if (lambda_grid.empty()) throw std::invalid_argument("lambda grid is empty");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
      const double l = lambda_grid[i];
      if (!(l > 0.0 && l <= 1.0)) throw std::invalid_argument("lambda grid values must lie in (0,1]");
      if (i > 0 && !(l > lambda_grid[i - 1])) throw std::invalid_argument("lambda grid must be increasing");
    }
    if (r_grid.empty()) throw std::invalid_argument("r grid is empty");
    if (replicates == 0 || seeds == 0) throw std::invalid_argument("replicates and seeds must be positive");
    if ((edge == Edge::left || edge == Edge::right) && replicates < 1000)
      throw std::invalid_argument("KS-based edges need replicates >= 1000");
    if (edge == Edge::bottom && replicates < 10) throw std::invalid_argument("edge-bottom needs replicates >= 10");
    if (edge != Edge::fidi && n_terms < 1000) throw std::invalid_argument("n_terms must be >= 1000");
    if (jobs == 0) throw std::invalid_argument("jobs must be >= 1");
    if (!(ks_level > 0.0 && ks_level < 1.0)) throw std::invalid_argument("ks_level must lie in (0,1)");
    if (edge == Edge::right && lambda_grid.size() != level_grid.size())
      throw std::invalid_argument("edge-right pairs lambda and level grids; they need equal lengths");
  }
};

struct ReportRow {
  std::string edge;
  std::string tail;
  std::optional<double> alpha, t, lambda;
  std::optional<unsigned> r;
  std::optional<std::size_t> n;
  std::optional<double> ks_stat, p_value, aux1, aux2;
  std::uint64_t seed = 0;
  double ms_elapsed = 0.0;
};

/// Empirical sample plus a comparison curve, for one report row.
struct PlotSlice {
  std::size_t row = 0;
  std::string title;
  std::vector<double> samples;
  std::vector<double> curve_x, curve_y;
  std::string curve_label;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport {
  Edge edge = Edge::left;
  std::vector<ReportRow> rows;
  std::vector<Verdict> verdicts;
  std::vector<PlotSlice> plots;

  bool all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }
};

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Each index writes
/// only its own slots, so results do not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace detail {

inline std::uint64_t edge_tag(Edge e) { return static_cast<std::uint64_t>(e) + 1; }

inline std::vector<TailFunction> tails_for(const ExperimentConfig& cfg) {
  if (cfg.tail == "stable" || cfg.tail == "rational") {
    std::vector<TailFunction> out;
    for (double a : cfg.alpha_grid)
      out.push_back(cfg.tail == "stable" ? TailFunction::stable(a) : TailFunction::rational(a));
    return out;
  }
  return {TailFunction::parse(cfg.tail)};
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

inline std::vector<double> descending(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

inline std::size_t index_of(const std::vector<double>& grid, double x) {
  return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), x) - grid.begin());
}

inline std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

// 200-point curve over the central 99% of the samples.
inline void fill_curve(PlotSlice& slice, const EmpiricalCdf& ecdf, const std::function<double(double)>& cdf) {
  const double lo = ecdf.quantile(0.005), hi = ecdf.quantile(0.995);
  for (int i = 0; i < 200; ++i) {
    const double x = lo + (hi - lo) * i / 199.0;
    slice.curve_x.push_back(x);
    slice.curve_y.push_back(cdf(x));
  }
}

inline bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return true;
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

inline std::string label(double alpha, double lambda, unsigned r) {
  return "alpha=" + fmt(alpha) + " lambda=" + fmt(lambda) + " r=" + std::to_string(r);
}

} // namespace detail

/// Z_{r,t,λ} of a regularly varying tail against (^{(r)}S_α(λ))^α, sampled on
/// independent arrivals. Arrivals are shared across t, so trends in t are
/// read off one coupled path per replicate.
inline ExperimentReport run_edge_left(const ExperimentConfig& cfg) {
  if (cfg.edge != Edge::left) throw std::invalid_argument("run_edge_left needs edge = left");
  cfg.validate();
  ExperimentReport report{Edge::left, {}, {}, {}};
  const auto& ts = cfg.t_grid;
  const auto& ls = cfg.lambda_grid;
  const auto& rs = cfg.r_grid;
  const std::size_t n = cfg.replicates, nt = ts.size(), nl = ls.size(), nr = rs.size();
  const double t_min = *std::min_element(ts.begin(), ts.end());
  const double t_max = *std::max_element(ts.begin(), ts.end());
  const auto t_desc = detail::descending(ts);

  for (const auto& tail : detail::tails_for(cfg)) {
    if (!(tail.alpha() > 0.0 && tail.alpha() < 1.0) || tail.is_cauchy())
      throw std::invalid_argument("edge-left needs a tail with index alpha in (0,1)");
    const double alpha = tail.alpha();
    const bool exact = tail.family() == TailFamily::stable_exact && nt >= 2;
    // ks[s][t][l][r]; selfsim p-values psim[s][l][r]
    std::vector<double> ks(cfg.seeds * nt * nl * nr), psim(cfg.seeds * nl * nr);
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      const auto start = std::chrono::steady_clock::now();
      const std::uint64_t rep_seed = derive_seed(cfg.master_seed, {detail::edge_tag(Edge::left), s});
      std::vector<double> z(nt * nl * nr * n), ref(nl * nr * n), z2(exact ? nl * nr * n : 0);
      parallel_for(n, cfg.jobs, [&](std::size_t k) {
        const auto arr = sample_arrivals(derive_seed(rep_seed, {0, k}), cfg.n_terms);
        for (std::size_t ti = 0; ti < nt; ++ti) {
          const auto ladder = ordered_jumps(tail, ts[ti], arr);
          for (std::size_t li = 0; li < nl; ++li)
            for (std::size_t ri = 0; ri < nr; ++ri)
              z[((ti * nl + li) * nr + ri) * n + k] = z_statistic_trimmed(ladder, ls[li], rs[ri]);
        }
        const auto other = sample_arrivals(derive_seed(rep_seed, {1, k}), cfg.n_terms);
        for (std::size_t li = 0; li < nl; ++li)
          for (std::size_t ri = 0; ri < nr; ++ri)
            ref[(li * nr + ri) * n + k] = trimmed_stable_power_sample(other, alpha, rs[ri], ls[li], true);
        if (exact) {
          const auto third = sample_arrivals(derive_seed(rep_seed, {2, k}), cfg.n_terms);
          const auto ladder = ordered_jumps(tail, t_min, third);
          for (std::size_t li = 0; li < nl; ++li)
            for (std::size_t ri = 0; ri < nr; ++ri)
              z2[(li * nr + ri) * n + k] = z_statistic_trimmed(ladder, ls[li], rs[ri]);
        }
      });
      const double ms = cfg.timing ? detail::elapsed_ms(start) : 0.0;
      auto slice = [n](const std::vector<double>& v, std::size_t block) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(block * n),
                                   v.begin() + static_cast<std::ptrdiff_t>((block + 1) * n));
      };
      for (std::size_t li = 0; li < nl; ++li) {
        for (std::size_t ri = 0; ri < nr; ++ri) {
          const EmpiricalCdf ref_cdf(slice(ref, li * nr + ri));
          for (std::size_t ti = 0; ti < nt; ++ti) {
            const EmpiricalCdf z_cdf(slice(z, (ti * nl + li) * nr + ri));
            const auto res = ks_two_sample(z_cdf, ref_cdf);
            ks[((s * nt + ti) * nl + li) * nr + ri] = res.statistic;
            report.rows.push_back({"left", tail.name(), alpha, ts[ti], ls[li], rs[ri], n, res.statistic,
                                   res.p_value, z_cdf.median(), ref_cdf.median(), rep_seed, ms});
            if (cfg.keep_plots) {
              PlotSlice p{report.rows.size() - 1, "left " + tail.name() + " t=" + detail::fmt(ts[ti]) + " " +
                                                      detail::label(alpha, ls[li], rs[ri]),
                          {z_cdf.sorted().begin(), z_cdf.sorted().end()}, {}, {}, "reference"};
              detail::fill_curve(p, z_cdf, [&](double x) { return ref_cdf(x); });
              report.plots.push_back(std::move(p));
            }
          }
          if (exact) {
            const EmpiricalCdf a(slice(z, (detail::index_of(ts, t_max) * nl + li) * nr + ri));
            const EmpiricalCdf b(slice(z2, li * nr + ri));
            const auto res = ks_two_sample(a, b);
            psim[(s * nl + li) * nr + ri] = res.p_value;
            report.rows.push_back({"left:selfsim", tail.name(), alpha, t_min, ls[li], rs[ri], n, res.statistic,
                                   res.p_value, t_max, std::nullopt, rep_seed, ms});
          }
        }
      }
    }
    for (std::size_t li = 0; li < nl; ++li) {
      for (std::size_t ri = 0; ri < nr; ++ri) {
        const std::string where = tail.name() + " " + detail::label(alpha, ls[li], rs[ri]);
        if (exact) {
          std::vector<double> ps;
          for (std::size_t s = 0; s < cfg.seeds; ++s) ps.push_back(psim[(s * nl + li) * nr + ri]);
          const double p = median_of(ps);
          report.verdicts.push_back({"left:selfsim " + where, p > cfg.ks_level,
                                     "median two-sample p=" + detail::fmt(p) + " between t=" + detail::fmt(t_max) +
                                         " and t=" + detail::fmt(t_min)});
        } else if (tail.family() != TailFamily::stable_exact) {
          std::vector<double> med;
          for (double t : t_desc) {
            std::vector<double> v;
            for (std::size_t s = 0; s < cfg.seeds; ++s)
              v.push_back(ks[((s * nt + detail::index_of(ts, t)) * nl + li) * nr + ri]);
            med.push_back(median_of(v));
          }
          report.verdicts.push_back({"left:trend " + where, detail::nonincreasing(med),
                                     "median KS over decreasing t: " + detail::join(med)});
        }
      }
    }
  }
  return report;
}

/// Z_{r,t,λ} of a slowly varying tail against the (r+1)-th Cauchy jump law,
/// with a joint-fidi check at the smallest t and the ratio diagnostic.
inline ExperimentReport run_edge_right(const ExperimentConfig& cfg) {
  if (cfg.edge != Edge::right) throw std::invalid_argument("run_edge_right needs edge = right");
  cfg.validate();
  const auto tail = TailFunction::parse(cfg.tail);
  if (tail.alpha() != 0.0 || tail.is_cauchy()) throw std::invalid_argument("edge-right needs a slowly varying tail (alpha = 0)");
  ExperimentReport report{Edge::right, {}, {}, {}};
  const auto& ts = cfg.t_grid;
  const auto& ls = cfg.lambda_grid;
  const auto& rs = cfg.r_grid;
  const std::size_t n = cfg.replicates, nt = ts.size(), nl = ls.size(), nr = rs.size();
  const auto t_desc = detail::descending(ts);
  const std::size_t t_min_i = detail::index_of(ts, t_desc.back());
  const double theta = cfg.ks_threshold > 0.0 ? cfg.ks_threshold : 1.63 / std::sqrt(static_cast<double>(n));
  const FidiQuery query{ls, cfg.level_grid};

  std::vector<double> ks(cfg.seeds * nt * nl * nr), ratio_med(cfg.seeds * nt * nr);
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t rep_seed = derive_seed(cfg.master_seed, {detail::edge_tag(Edge::right), s});
    std::vector<double> z(nt * nl * nr * n), ratio(nt * nr * n);
    parallel_for(n, cfg.jobs, [&](std::size_t k) {
      const auto arr = sample_arrivals(derive_seed(rep_seed, {0, k}), cfg.n_terms);
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const auto ladder = ordered_jumps(tail, ts[ti], arr);
        for (std::size_t ri = 0; ri < nr; ++ri) {
          ratio[(ti * nr + ri) * n + k] = ratio_diagnostic(ladder, rs[ri]);
          for (std::size_t li = 0; li < nl; ++li)
            z[((ti * nl + li) * nr + ri) * n + k] = z_statistic_trimmed(ladder, ls[li], rs[ri]);
        }
      }
    });
    const double ms = cfg.timing ? detail::elapsed_ms(start) : 0.0;
    auto block = [&](std::size_t ti, std::size_t li, std::size_t ri) {
      const auto first = z.begin() + static_cast<std::ptrdiff_t>(((ti * nl + li) * nr + ri) * n);
      return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n));
    };
    for (std::size_t ti = 0; ti < nt; ++ti) {
      for (std::size_t li = 0; li < nl; ++li) {
        for (std::size_t ri = 0; ri < nr; ++ri) {
          const unsigned rank = rs[ri] + 1;
          const double lambda = ls[li];
          auto cdf = [rank, lambda](double x) { return cauchy_rth_jump_cdf(rank, lambda, x); };
          const EmpiricalCdf z_cdf(block(ti, li, ri));
          const auto res = ks_one_sample(z_cdf, cdf);
          ks[((s * nt + ti) * nl + li) * nr + ri] = res.statistic;
          report.rows.push_back({"right", tail.name(), 0.0, ts[ti], lambda, rs[ri], n, res.statistic, res.p_value,
                                 z_cdf.median(), theta, rep_seed, ms});
          if (cfg.keep_plots) {
            PlotSlice p{report.rows.size() - 1,
                        "right " + tail.name() + " t=" + detail::fmt(ts[ti]) + " " + detail::label(0.0, lambda, rs[ri]),
                        {z_cdf.sorted().begin(), z_cdf.sorted().end()}, {}, {}, "Cauchy jump law"};
            detail::fill_curve(p, z_cdf, cdf);
            report.plots.push_back(std::move(p));
          }
        }
      }
      for (std::size_t ri = 0; ri < nr; ++ri) {
        const auto first = ratio.begin() + static_cast<std::ptrdiff_t>((ti * nr + ri) * n);
        const EmpiricalCdf w(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
        ratio_med[(s * nt + ti) * nr + ri] = w.median();
        report.rows.push_back({"right:ratio", tail.name(), 0.0, ts[ti], std::nullopt, rs[ri], n, std::nullopt,
                               std::nullopt, w.median(), w.quantile(0.9), rep_seed, ms});
      }
    }
    // Joint law of (Z_{r,t,λ_i})_i at the smallest t.
    for (std::size_t ri = 0; ri < nr; ++ri) {
      if (rs[ri] > 1) continue;
      const double analytic = rs[ri] == 0 ? extremal_fidi_cdf(query) : second_jump_fidi(TailFunction::cauchy(), query);
      std::size_t hits = 0;
      for (std::size_t k = 0; k < n; ++k) {
        bool inside = true;
        for (std::size_t li = 0; li < nl && inside; ++li)
          inside = z[((t_min_i * nl + li) * nr + ri) * n + k] <= cfg.level_grid[li];
        hits += inside;
      }
      const double mc = static_cast<double>(hits) / static_cast<double>(n);
      const double se = mc_standard_error(mc, n);
      const double diff = std::abs(analytic - mc);
      report.rows.push_back({"right:fidi", tail.name(), 0.0, ts[t_min_i], std::nullopt, rs[ri], n, diff, std::nullopt,
                             analytic, mc, rep_seed, ms});
      report.verdicts.push_back({"right:fidi r=" + std::to_string(rs[ri]) + " seed#" + std::to_string(s),
                                 diff <= 3.0 * se + 1e-3,
                                 "|analytic-MC|=" + detail::fmt(diff) + " bound=" + detail::fmt(3.0 * se + 1e-3)});
    }
  }
  for (std::size_t li = 0; li < nl; ++li) {
    for (std::size_t ri = 0; ri < nr; ++ri) {
      std::vector<double> med;
      for (double t : t_desc) {
        std::vector<double> v;
        for (std::size_t s = 0; s < cfg.seeds; ++s) v.push_back(ks[((s * nt + detail::index_of(ts, t)) * nl + li) * nr + ri]);
        med.push_back(median_of(v));
      }
      const std::string where = tail.name() + " " + detail::label(0.0, ls[li], rs[ri]);
      report.verdicts.push_back({"right:trend " + where, detail::strictly_decreasing(med),
                                 "median KS over decreasing t: " + detail::join(med)});
      report.verdicts.push_back({"right:pilot " + where, med.back() < theta,
                                 "median KS at t=" + detail::fmt(t_desc.back()) + " is " + detail::fmt(med.back()) +
                                     ", threshold " + detail::fmt(theta)});
    }
  }
  for (std::size_t ri = 0; ri < nr; ++ri) {
    std::vector<double> med;
    for (double t : t_desc) {
      std::vector<double> v;
      for (std::size_t s = 0; s < cfg.seeds; ++s) v.push_back(ratio_med[(s * nt + detail::index_of(ts, t)) * nr + ri]);
      med.push_back(median_of(v));
    }
    report.verdicts.push_back({"right:ratio r=" + std::to_string(rs[ri]), detail::nonincreasing(med),
                               "median ratio over decreasing t: " + detail::join(med)});
  }
  return report;
}

/// Pathwise comparison of (^{(r)}S_α(λ))^α with Δξ_λ^{(r+1)} on one arrival
/// series per replicate, as α decreases.
inline ExperimentReport run_edge_bottom(const ExperimentConfig& cfg) {
  if (cfg.edge != Edge::bottom) throw std::invalid_argument("run_edge_bottom needs edge = bottom");
  cfg.validate();
  ExperimentReport report{Edge::bottom, {}, {}, {}};
  const auto alphas = detail::descending(cfg.alpha_grid);
  const auto& ls = cfg.lambda_grid;
  const auto& rs = cfg.r_grid;
  const std::size_t n = cfg.replicates, na = alphas.size(), nl = ls.size(), nr = rs.size();
  const std::string tail_name = "cauchy";

  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t rep_seed = derive_seed(cfg.master_seed, {detail::edge_tag(Edge::bottom), s});
    // err / power sample, indexed [l][r][a][k]
    std::vector<double> err(nl * nr * na * n), power(nl * nr * na * n);
    parallel_for(n, cfg.jobs, [&](std::size_t k) {
      const auto arr = sample_arrivals(derive_seed(rep_seed, {0, k}), cfg.n_terms);
      for (std::size_t li = 0; li < nl; ++li)
        for (std::size_t ri = 0; ri < nr; ++ri) {
          const double jump = cauchy_ordered_jump_sample(arr, rs[ri], ls[li]);
          for (std::size_t ai = 0; ai < na; ++ai) {
            const double v = trimmed_stable_power_sample(arr, alphas[ai], rs[ri], ls[li], false);
            const std::size_t idx = ((li * nr + ri) * na + ai) * n + k;
            power[idx] = v;
            err[idx] = std::abs(v / jump - 1.0);
          }
        }
    });
    const double ms = cfg.timing ? detail::elapsed_ms(start) : 0.0;
    for (std::size_t li = 0; li < nl; ++li) {
      for (std::size_t ri = 0; ri < nr; ++ri) {
        const unsigned rank = rs[ri] + 1;
        const double lambda = ls[li];
        auto cdf = [rank, lambda](double x) { return cauchy_rth_jump_cdf(rank, lambda, x); };
        std::size_t monotone = 0, terminal_ok = 0;
        for (std::size_t k = 0; k < n; ++k) {
          unsigned inversions = 0;
          for (std::size_t ai = 1; ai < na; ++ai)
            inversions += err[((li * nr + ri) * na + ai) * n + k] > err[((li * nr + ri) * na + ai - 1) * n + k];
          monotone += inversions <= cfg.max_inversions;
          terminal_ok += err[((li * nr + ri) * na + na - 1) * n + k] <= cfg.terminal_error;
        }
        for (std::size_t ai = 0; ai < na; ++ai) {
          const auto first = static_cast<std::ptrdiff_t>(((li * nr + ri) * na + ai) * n);
          std::vector<double> e(err.begin() + first, err.begin() + first + static_cast<std::ptrdiff_t>(n));
          const EmpiricalCdf p_cdf(std::vector<double>(power.begin() + first, power.begin() + first + static_cast<std::ptrdiff_t>(n)));
          const auto res = ks_one_sample(p_cdf, cdf);
          const double within = static_cast<double>(std::count_if(e.begin(), e.end(), [&](double x) { return x <= cfg.terminal_error; })) /
                                static_cast<double>(n);
          report.rows.push_back({"bottom", tail_name, alphas[ai], std::nullopt, lambda, rs[ri], n, res.statistic,
                                 res.p_value, median_of(e), within, rep_seed, ms});
          if (cfg.keep_plots) {
            PlotSlice p{report.rows.size() - 1, "bottom " + detail::label(alphas[ai], lambda, rs[ri]),
                        {p_cdf.sorted().begin(), p_cdf.sorted().end()}, {}, {}, "Cauchy jump law"};
            detail::fill_curve(p, p_cdf, cdf);
            report.plots.push_back(std::move(p));
          }
          for (std::size_t k = 0; k < n; ++k)
            report.rows.push_back({"bottom:replicate", tail_name, alphas[ai], std::nullopt, lambda, rs[ri],
                                   cfg.n_terms, std::nullopt, std::nullopt, e[k], std::nullopt,
                                   derive_seed(rep_seed, {0, k}), ms});
        }
        const std::string where = "lambda=" + detail::fmt(lambda) + " r=" + std::to_string(rs[ri]) + " seed#" + std::to_string(s);
        report.verdicts.push_back({"bottom:monotone " + where, monotone == n,
                                   std::to_string(monotone) + "/" + std::to_string(n) + " replicates with <= " +
                                       std::to_string(cfg.max_inversions) + " inversion(s)"});
        const double frac = static_cast<double>(terminal_ok) / static_cast<double>(n);
        report.verdicts.push_back({"bottom:terminal " + where, frac >= cfg.terminal_fraction,
                                   std::to_string(terminal_ok) + "/" + std::to_string(n) + " replicates with error <= " +
                                       detail::fmt(cfg.terminal_error) + " at alpha=" + detail::fmt(alphas.back())});
      }
    }
  }
  return report;
}

/// The fixed query grid of the fidi validation.
inline const std::vector<FidiQuery>& fidi_query_grid() {
  static const std::vector<FidiQuery> grid = {
      {{1.0}, {1.0}},
      {{0.5}, {2.0}},
      {{0.5, 1.0}, {1.0, 2.0}},
      {{0.25, 1.0}, {0.5, 1.0}},
      {{0.3, 0.7}, {0.8, 1.5}},
      {{0.5, 1.0}, {0.5, 3.0}},
      {{0.25, 0.5, 1.0}, {0.5, 1.0, 2.0}},
      {{0.2, 0.6, 0.9}, {0.4, 0.9, 1.6}},
      {{0.1, 0.4, 0.7, 1.0}, {0.25, 0.5, 1.0, 2.0}},
      {{0.25, 0.5, 0.75, 1.0}, {0.3, 0.6, 1.2, 2.4}},
      {{0.25, 0.5, 0.75, 1.0}, {1.0, 1.5, 2.0, 4.0}},
      {{0.1, 0.3, 0.5, 0.7, 0.9}, {0.2, 0.4, 0.6, 0.8, 1.0}},
  };
  return grid;
}

/// Analytic fidi probabilities of the largest and second-largest Cauchy
/// jump processes against indicator frequencies. Every jump above the
/// smallest level is simulated, so the MC side carries no truncation.
inline ExperimentReport run_fidi_validation(const ExperimentConfig& cfg) {
  if (cfg.edge != Edge::fidi) throw std::invalid_argument("run_fidi_validation needs edge = fidi");
  cfg.validate();
  ExperimentReport report{Edge::fidi, {}, {}, {}};
  const auto& grid = fidi_query_grid();
  double y_min = std::numeric_limits<double>::infinity();
  for (const auto& q : grid) y_min = std::min(y_min, *std::min_element(q.levels.begin(), q.levels.end()));
  const std::size_t n = cfg.replicates, nq = grid.size();

  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t rep_seed = derive_seed(cfg.master_seed, {detail::edge_tag(Edge::fidi), s});
    // hit[(q * 2 + rank-1) * n + k]
    std::vector<unsigned char> hit(nq * 2 * n);
    parallel_for(n, cfg.jobs, [&](std::size_t k) {
      Rng rng(derive_seed(rep_seed, {0, k}));
      std::vector<double> jumps, marks;
      for (double gamma = rng.exponential(); gamma < 1.0 / y_min; gamma += rng.exponential()) {
        jumps.push_back(1.0 / gamma);
        marks.push_back(rng.uniform_open0());
      }
      for (std::size_t qi = 0; qi < nq; ++qi) {
        const auto& q = grid[qi];
        for (unsigned rank = 1; rank <= 2; ++rank) {
          bool inside = true;
          for (std::size_t i = 0; i < q.size() && inside; ++i) {
            unsigned above = 0;
            for (std::size_t j = 0; j < jumps.size(); ++j) above += marks[j] <= q.lambdas[i] && jumps[j] > q.levels[i];
            inside = above < rank;
          }
          hit[(qi * 2 + rank - 1) * n + k] = inside;
        }
      }
    });
    const double ms = cfg.timing ? detail::elapsed_ms(start) : 0.0;
    for (std::size_t qi = 0; qi < nq; ++qi) {
      const auto& q = grid[qi];
      for (unsigned rank = 1; rank <= 2; ++rank) {
        const double analytic = rank == 1 ? first_jump_fidi(TailFunction::cauchy(), q) : second_jump_fidi(TailFunction::cauchy(), q);
        const auto first = hit.begin() + static_cast<std::ptrdiff_t>((qi * 2 + rank - 1) * n);
        const double mc = static_cast<double>(std::count(first, first + static_cast<std::ptrdiff_t>(n), 1)) / static_cast<double>(n);
        const double se = mc_standard_error(mc, n);
        const double diff = std::abs(analytic - mc);
        const std::string tag = "fidi:q" + std::to_string(qi + 1);
        report.rows.push_back({tag, "cauchy", std::nullopt, std::nullopt, std::nullopt, rank, n, diff, std::nullopt,
                               analytic, mc, rep_seed, ms});
        report.verdicts.push_back({tag + " r=" + std::to_string(rank) + " seed#" + std::to_string(s),
                                   diff <= 3.0 * se + 1e-3,
                                   "analytic=" + detail::fmt(analytic) + " MC=" + detail::fmt(mc) +
                                       " bound=" + detail::fmt(3.0 * se + 1e-3)});
      }
    }
  }
  // One-point queries reduce to the closed-form ordered-jump CDF.
  double worst = 0.0;
  for (const auto& q : grid) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      const FidiQuery one{{q.lambdas[i]}, {q.levels[i]}};
      for (unsigned rank = 1; rank <= 2; ++rank) {
        const double formula = rank == 1 ? first_jump_fidi(TailFunction::cauchy(), one) : second_jump_fidi(TailFunction::cauchy(), one);
        const double closed = cauchy_rth_jump_cdf(rank, one.lambdas[0], one.levels[0]);
        worst = std::max(worst, std::abs(formula - closed));
        report.rows.push_back({"fidi:reduction", "cauchy", std::nullopt, std::nullopt, one.lambdas[0], rank, 1,
                               std::abs(formula - closed), std::nullopt, formula, closed, 0, 0.0});
      }
    }
  }
  report.verdicts.push_back({"fidi:reduction n=1", worst <= 1e-12, "max |formula - closed form| = " + detail::fmt(worst)});
  return report;
}

/// Property suites on the tail functions and the ratio-diagnostic trend.
inline ExperimentReport run_diagnostics(const ExperimentConfig& cfg) {
  if (cfg.edge != Edge::diagnostics) throw std::invalid_argument("run_diagnostics needs edge = diagnostics");
  cfg.validate();
  ExperimentReport report{Edge::diagnostics, {}, {}, {}};
  const std::uint64_t base = derive_seed(cfg.master_seed, {detail::edge_tag(Edge::diagnostics)});

  struct Family {
    TailFunction tail;
    double potter_cap;
  };
  const std::vector<Family> families = {{TailFunction::stable(0.5), 10.0},
                                        {TailFunction::constant(0.3, 2.5), 10.0},
                                        {TailFunction::log_power(1.0), std::exp(-1.5)},
                                        {TailFunction::log_power(2.0), std::exp(-3.0)},
                                        {TailFunction::rational(0.5), 10.0}};
  const int points = 10000;
  for (std::size_t f = 0; f < families.size(); ++f) {
    const auto& tail = families[f].tail;
    const std::uint64_t seed = derive_seed(base, {1, f});
    Rng rng(seed);
    const double lo = std::log(1e-6), hi = std::log(1e12);
    int violations = 0;
    for (int k = 0; k < points; ++k) {
      const double u = std::exp(lo + (hi - lo) * rng.uniform_open0());
      const double x = tail.inverse(u);
      violations += x > 0.0 && !(tail(x) <= u);
    }
    report.rows.push_back({"diagnostics:sandwich", tail.name(), tail.alpha(), std::nullopt, std::nullopt, std::nullopt,
                           static_cast<std::size_t>(points), std::nullopt, std::nullopt, static_cast<double>(violations),
                           std::nullopt, seed, 0.0});
    report.verdicts.push_back({"diagnostics:sandwich " + tail.name(), violations == 0,
                               std::to_string(violations) + " violations over " + std::to_string(points) + " levels"});

    const std::uint64_t pseed = derive_seed(base, {2, f});
    Rng prng(pseed);
    const double cap = std::log(families[f].potter_cap);
    int pviol = 0;
    for (int k = 0; k < points; ++k) {
      const double u = std::exp(cap - 30.0 * prng.uniform_open0()), v = std::exp(cap - 30.0 * prng.uniform_open0());
      if (u == v) continue;
      const double ratio = tail.slowly_varying(u) / tail.slowly_varying(v);
      pviol += !(std::min(u / v, v / u) < ratio && ratio < std::max(u / v, v / u));
    }
    report.rows.push_back({"diagnostics:potter", tail.name(), tail.alpha(), std::nullopt, std::nullopt, std::nullopt,
                           static_cast<std::size_t>(points), std::nullopt, std::nullopt, static_cast<double>(pviol),
                           families[f].potter_cap, pseed, 0.0});
    report.verdicts.push_back({"diagnostics:potter " + tail.name(), pviol == 0,
                               std::to_string(pviol) + " violations below x=" + detail::fmt(families[f].potter_cap)});
  }

  const auto rational = TailFunction::rational(0.5);
  for (double c : {0.5, 1.0, 2.0, 5.0}) {
    const double x = 1e-8;
    const double ratio = rational(x) / rational(c * x);
    const double target = std::pow(c, rational.alpha());
    const double rel = std::abs(ratio / target - 1.0);
    report.rows.push_back({"diagnostics:regvar", rational.name(), rational.alpha(), std::nullopt, std::nullopt,
                           std::nullopt, std::nullopt, rel, std::nullopt, ratio, target, 0, 0.0});
    report.verdicts.push_back({"diagnostics:regvar c=" + detail::fmt(c), rel < 1e-3,
                               "ratio " + detail::fmt(ratio) + " vs c^alpha " + detail::fmt(target)});
  }

  const auto log_tail = TailFunction::log_power(1.0);
  std::vector<double> gaps;
  for (double lx : {-2.0, -8.0, -16.0, -40.0, -100.0}) {
    const double y = lx * std::log(10.0);
    const double gap = std::abs(log_tail.eval_log(y + std::log(2.0)) / log_tail.eval_log(y) - 1.0);
    gaps.push_back(gap);
    report.rows.push_back({"diagnostics:slowvar", log_tail.name(), 0.0, std::nullopt, std::nullopt, std::nullopt,
                           std::nullopt, std::nullopt, std::nullopt, gap, lx, 0, 0.0});
  }
  report.verdicts.push_back({"diagnostics:slowvar", detail::strictly_decreasing(gaps) && gaps[3] < 1e-2,
                             "|L(2x)/L(x) - 1| at x=1e-2..1e-100: " + detail::join(gaps)});

  // W_t^{(r)} = ^{(r)}X(t)/ΔX^{(r+1)}(t) across t decades.
  const auto tail = TailFunction::parse(cfg.tail);
  const auto t_desc = detail::descending(cfg.t_grid);
  const std::size_t n = cfg.replicates, nt = t_desc.size(), nr = cfg.r_grid.size();
  const std::uint64_t rseed = derive_seed(base, {3});
  std::vector<double> w(nt * nr * n);
  parallel_for(n, cfg.jobs, [&](std::size_t k) {
    const auto arr = sample_arrivals(derive_seed(rseed, {0, k}), cfg.n_terms);
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const auto ladder = ordered_jumps(tail, t_desc[ti], arr);
      for (std::size_t ri = 0; ri < nr; ++ri) w[(ti * nr + ri) * n + k] = ratio_diagnostic(ladder, cfg.r_grid[ri]);
    }
  });
  for (std::size_t ri = 0; ri < nr; ++ri) {
    std::vector<double> med;
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const auto first = w.begin() + static_cast<std::ptrdiff_t>((ti * nr + ri) * n);
      const EmpiricalCdf e(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
      med.push_back(e.median());
      report.rows.push_back({"diagnostics:ratio", tail.name(), tail.alpha(), t_desc[ti], std::nullopt, cfg.r_grid[ri], n,
                             std::nullopt, std::nullopt, e.median(), e.quantile(0.9), rseed, 0.0});
    }
    report.verdicts.push_back({"diagnostics:ratio r=" + std::to_string(cfg.r_grid[ri]),
                               detail::nonincreasing(med) && std::abs(med.back() - 1.0) <= 1e-6,
                               "median ratio over decreasing t: " + detail::join(med)});
  }
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.edge) {
  case Edge::left: return run_edge_left(cfg);
  case Edge::right: return run_edge_right(cfg);
  case Edge::bottom: return run_edge_bottom(cfg);
  case Edge::fidi: return run_fidi_validation(cfg);
  case Edge::diagnostics: return run_diagnostics(cfg);
  }
  throw std::invalid_argument("unknown edge");
}

inline constexpr std::string_view csv_header =
    "edge,tail,alpha,t,lambda,r,n,ks_stat,p_value,aux1,aux2,seed,ms_elapsed";

/// One line per row under the fixed header; absent fields are empty and
/// reals use the shortest round-trip form.
inline std::string to_csv(const ExperimentReport& report) {
  auto real = [](const std::optional<double>& v) { return v ? detail::fmt(*v) : std::string(); };
  auto text = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out(csv_header);
  out += '\n';
  for (const auto& row : report.rows) {
    out += text(row.edge) + ',' + text(row.tail) + ',' + real(row.alpha) + ',' + real(row.t) + ',' + real(row.lambda) + ',' +
           (row.r ? std::to_string(*row.r) : "") + ',' + (row.n ? std::to_string(*row.n) : "") + ',' +
           real(row.ks_stat) + ',' + real(row.p_value) + ',' + real(row.aux1) + ',' + real(row.aux2) + ',' +
           std::to_string(row.seed) + ',' + (row.ms_elapsed > 0.0 ? detail::fmt(std::round(row.ms_elapsed)) : "0") + '\n';
  }
  return out;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  return {{"edge", edge_name(cfg.edge)},
          {"tail", cfg.tail},
          {"alpha_grid", cfg.alpha_grid},
          {"t_grid", cfg.t_grid},
          {"lambda_grid", cfg.lambda_grid},
          {"r_grid", cfg.r_grid},
          {"level_grid", cfg.level_grid},
          {"replicates", cfg.replicates},
          {"n_terms", cfg.n_terms},
          {"seeds", cfg.seeds},
          {"seed", cfg.master_seed},
          {"output", cfg.output},
          {"jobs", cfg.jobs},
          {"ks_level", cfg.ks_level},
          {"ks_threshold", cfg.ks_threshold},
          {"terminal_error", cfg.terminal_error},
          {"terminal_fraction", cfg.terminal_fraction},
          {"max_inversions", cfg.max_inversions}};
}

inline nlohmann::json to_json(const ExperimentReport& report, const ExperimentConfig& cfg) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : report.verdicts) verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  return {{"edge", edge_name(report.edge)}, {"pass", report.all_pass()}, {"verdicts", verdicts}, {"config", config_to_json(cfg)}};
}

} // namespace subortrim

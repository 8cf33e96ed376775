// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "subortrim/cli.hpp"
#include "subortrim/experiments.hpp"
#include "subortrim/levy.hpp"
#include "subortrim/limits.hpp"
#include "subortrim/pointproc.hpp"
#include "subortrim/rng.hpp"
#include "subortrim/stats.hpp"

using namespace subortrim;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20160601;

struct Outcome {
  bool pass;
  std::string detail;
};

struct CliRun {
  std::string name;
  std::string config;
  std::string command;
  fs::path dir;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "subortrim_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int invoke(const CliRun& run, unsigned jobs, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto ini = out_dir / "config.ini";
  std::ofstream(ini) << run.config;
  const std::string jobs_s = std::to_string(jobs), seed_s = std::to_string(kSeed);
  std::vector<std::string> args = {"subortrim", run.command, "--config", ini.string(), "--seed", seed_s,
                                   "--jobs", jobs_s, "--output", out_dir.string()};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code == 1) std::fprintf(stderr, "%s: %s", run.name.c_str(), err.str().c_str());
  return code;
}

std::string edge_stem(const std::string& command) {
  if (command.starts_with("edge-")) return "subortrim_" + command.substr(5);
  return "subortrim_" + command;
}

/// Verdicts of a finished CLI run whose names start with one of `prefixes`.
Outcome verdicts_of(const CliRun& run, const std::vector<std::string>& prefixes) {
  const auto j = nlohmann::json::parse(slurp(run.dir / (edge_stem(run.command) + ".json")));
  std::size_t total = 0, passed = 0;
  std::string failures;
  for (const auto& v : j.at("verdicts")) {
    const auto name = v.at("name").get<std::string>();
    bool selected = false;
    for (const auto& p : prefixes) selected = selected || name.starts_with(p);
    if (!selected) continue;
    ++total;
    if (v.at("pass").get<bool>()) {
      ++passed;
    } else if (failures.size() < 600) {
      failures += "; FAIL " + name + " (" + v.at("detail").get<std::string>() + ")";
    }
  }
  return {total > 0 && passed == total, std::to_string(passed) + "/" + std::to_string(total) + " verdicts" + failures};
}

int failures = 0;

void report(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = limit_s <= 0.0 || secs < limit_s;
  const bool pass = o.pass && in_time;
  failures += !pass;
  std::printf("[%s] criterion %d: %s | %s | %.1f s%s\n", pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs,
              limit_s > 0.0 ? (" (limit " + std::to_string(static_cast<int>(limit_s)) + " s" + (in_time ? ")" : ", exceeded)")).c_str()
                            : "");
  std::fflush(stdout);
}

} // namespace

int main() {
  const auto root = work_dir();

  report(1, "inverse sandwich, 10^4 log-uniform levels per family", 1.0, [] {
    const std::vector<TailFunction> tails = {TailFunction::stable(0.5), TailFunction::constant(0.3, 2.5),
                                             TailFunction::log_power(1.0), TailFunction::log_power(2.0),
                                             TailFunction::rational(0.5)};
    std::string detail;
    int total = 0;
    for (std::size_t f = 0; f < tails.size(); ++f) {
      Rng rng(derive_seed(kSeed, {1, f}));
      int violations = 0;
      for (int k = 0; k < 10000; ++k) {
        const double u = std::exp(std::log(1e-6) + std::log(1e18) * rng.uniform_open0());
        const double x = tails[f].inverse(u);
        violations += x > 0.0 && !(tails[f](x) <= u);
      }
      total += violations;
      detail += (f ? ", " : "") + tails[f].name() + ": " + std::to_string(violations);
    }
    return Outcome{total == 0, "violations " + detail};
  });

  report(2, "jump counts above x are Poisson(t tail(x)), chi-square at 1%", 30.0, [] {
    const double t = 1.0;
    const std::vector<TailFunction> tails = {TailFunction::cauchy(), TailFunction::stable(0.5), TailFunction::log_power(1.0)};
    const std::size_t reps = 10000, depth = 200;
    std::string detail;
    bool ok = true;
    for (std::size_t f = 0; f < tails.size(); ++f) {
      for (double mean : {0.5, 2.0, 5.0}) {
        const double x = tails[f].inverse(mean / t);
        std::vector<std::uint64_t> counts(reps);
        for (std::size_t k = 0; k < reps; ++k) {
          const auto arr = sample_arrivals(derive_seed(kSeed, {2, f, k}), depth);
          if (arr.arrivals().back() <= mean) throw std::runtime_error("arrival depth too small");
          const auto ladder = ordered_jumps(tails[f], t, arr);
          std::uint64_t c = 0;
          for (double lj : ladder.log_jumps()) c += std::exp(lj) > x;
          counts[k] = c;
        }
        const auto fit = chi_square_poisson_fit(counts, t * tails[f](x));
        ok = ok && fit.p_value > 0.01;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s x=%.3g p=%.3f", tails[f].name().c_str(), x, fit.p_value);
        detail += (detail.empty() ? "" : ", ") + std::string(buf);
      }
    }
    return Outcome{ok, detail};
  });

  report(3, "stable Laplace transform from 10^5 compensated series samples", 60.0, [] {
    const auto tail = TailFunction::stable(0.5);
    const std::size_t n = 100000, depth = 2000;
    std::vector<double> xs(n);
    parallel_for(n, 1, [&](std::size_t k) {
      xs[k] = trimmed_value(ordered_jumps(tail, 1.0, sample_arrivals(derive_seed(kSeed, {3, k}), depth)), 0, true).value;
    });
    std::string detail;
    bool ok = true;
    for (double s : {0.5, 1.0, 2.0}) {
      const double got = empirical_laplace(xs, s).mean, want = stable_marginal_laplace(0.5, 1.0, s);
      const double rel = std::abs(got / want - 1.0);
      ok = ok && rel < 0.01;
      char buf[96];
      std::snprintf(buf, sizeof buf, "s=%g rel.err=%.2e", s, rel);
      detail += (detail.empty() ? "" : ", ") + std::string(buf);
    }
    return Outcome{ok, detail};
  });

  report(4, "largest Cauchy-ladder jump at lambda=1 vs exp(-1/x), KS at 1%", 10.0, [] {
    const std::size_t n = 100000;
    std::vector<double> xs(n);
    for (std::size_t k = 0; k < n; ++k)
      xs[k] = cauchy_ordered_jump_sample(sample_arrivals(derive_seed(kSeed, {4, k}), 8), 0, 1.0);
    const auto ks = ks_one_sample(EmpiricalCdf(xs), [](double x) { return cauchy_rth_jump_cdf(1, 1.0, x); });
    char buf[96];
    std::snprintf(buf, sizeof buf, "D=%.5f p=%.3f", ks.statistic, ks.p_value);
    return Outcome{ks.p_value > 0.01, buf};
  });

  std::vector<CliRun> runs = {
      {"bottom", "[grids]\nalpha = 0.4, 0.2, 0.1, 0.05, 0.02, 0.01\nr = 0, 1, 2\nlambda = 1\n"
                 "[run]\nreplicates = 100\nn_terms = 1000000\n", "edge-bottom", {}},
      {"left-stable", "[tail]\nfamily = stable\n[grids]\nalpha = 0.3, 0.5, 0.8\nt = 1, 1e-6\nr = 0, 1\nlambda = 1\n"
                      "[run]\nreplicates = 10000\nn_terms = 2000\n", "edge-left", {}},
      {"left-rational", "[tail]\nfamily = rational\n[grids]\nalpha = 0.5\nt = 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6\n"
                        "r = 0, 1\nlambda = 1\n[run]\nreplicates = 10000\nn_terms = 1000\nseeds = 5\n", "edge-left", {}},
      {"right", "[tail]\nfamily = log\n[grids]\nt = 1e-2, 1e-4, 1e-6, 1e-8\nr = 0, 1\nlambda = 0.5, 1\nlevels = 1, 2\n"
                "[run]\nreplicates = 10000\nn_terms = 1000\nseeds = 5\n", "edge-right", {}},
      {"fidi", "[run]\nreplicates = 100000\n", "fidi", {}},
      {"diagnostics", "[grids]\nt = 1, 1e-1, 1e-2, 1e-4, 1e-6, 1e-8\nr = 0, 1\n[run]\nreplicates = 2000\nn_terms = 1000\n",
       "diagnostics", {}},
  };
  for (auto& run : runs) run.dir = root / (run.name + "_jobs1");
  auto find = [&](const std::string& name) -> CliRun& {
    for (auto& r : runs)
      if (r.name == name) return r;
    throw std::logic_error("no run " + name);
  };

  report(5, "edge-bottom sure convergence, r in {0,1,2}, N=10^6, 100 seeds", 300.0, [&] {
    invoke(find("bottom"), 1, find("bottom").dir);
    return verdicts_of(find("bottom"), {"bottom:"});
  });

  report(6, "edge-left: stable self-similarity and rational trend", 600.0, [&] {
    invoke(find("left-stable"), 1, find("left-stable").dir);
    invoke(find("left-rational"), 1, find("left-rational").dir);
    const auto a = verdicts_of(find("left-stable"), {"left:selfsim"});
    const auto b = verdicts_of(find("left-rational"), {"left:trend"});
    return Outcome{a.pass && b.pass, "self-similarity " + a.detail + " | rational trend " + b.detail};
  });

  report(7, "edge-right: KS trend in t and pilot bound at t=1e-8", 600.0, [&] {
    invoke(find("right"), 1, find("right").dir);
    const auto trend = verdicts_of(find("right"), {"right:trend"});
    const auto pilot = verdicts_of(find("right"), {"right:pilot"});
    return Outcome{trend.pass && pilot.pass, "strict decrease " + trend.detail + " | pilot " + pilot.detail};
  });

  report(8, "fidi formulas vs MC(10^5) on the 12-query grid; n=1 reductions", 120.0, [&] {
    invoke(find("fidi"), 1, find("fidi").dir);
    return verdicts_of(find("fidi"), {"fidi:"});
  });

  report(9, "regular-variation ratios at x=1e-8 and ratio-diagnostic medians", 60.0, [&] {
    invoke(find("diagnostics"), 1, find("diagnostics").dir);
    return verdicts_of(find("diagnostics"),
                       {"diagnostics:regvar c=0.5", "diagnostics:regvar c=2", "diagnostics:regvar c=5", "diagnostics:ratio"});
  });

  report(10, "byte-identical CSV for --jobs 1 and --jobs 4", 0.0, [&] {
    std::string detail;
    bool ok = true;
    for (const auto& run : runs) {
      const auto other = root / (run.name + "_jobs4");
      invoke(run, 4, other);
      const auto file = edge_stem(run.command) + ".csv";
      const auto a = slurp(run.dir / file), b = slurp(other / file);
      const bool same = !a.empty() && a == b;
      ok = ok && same;
      detail += (detail.empty() ? "" : ", ") + run.name + (same ? " identical" : " DIFFERS");
    }
    return Outcome{ok, detail};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

#pragma once

// Command-line front end: subcommand per edge, INI config, overrides, and
// atomic CSV/JSON/SVG output.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subortrim/config.hpp"
#include "subortrim/experiments.hpp"
#include "subortrim/plot.hpp"

namespace subortrim {

namespace detail {

inline void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                         std::optional<std::size_t> line = std::nullopt, std::optional<std::size_t> column = std::nullopt) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  if (line) j["line"] = *line;
  if (column) j["column"] = *column;
  err << j.dump() << '\n';
}

/// Writes through a sibling temporary and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

} // namespace detail

/// Runs the CLI with the given arguments. Returns 0 when every verdict
/// passes, 2 on a failed verdict, 1 on usage or configuration errors.
inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Small-time and small-index limits of trimmed subordinators", "subortrim"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path, output_dir, format = "both";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<unsigned> jobs;
  bool plot = false, timing = false;
  app.add_option("--config", config_path, "INI config with [edge], [tail], [grids], [run] sections");
  app.add_option("--seed", seed, "master seed (overrides config and SUBORTRIM_SEED)");
  app.add_option("--replicates", replicates, "replicates per grid point");
  app.add_option("--output", output_dir, "existing output directory (default: current directory)");
  app.add_option("--jobs", jobs, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
  app.add_flag("--plot", plot, "write one SVG per tested grid point");
  app.add_flag("--timing", timing, "record wall time in ms_elapsed (otherwise 0)");

  const std::vector<std::pair<std::string, std::optional<Edge>>> commands = {
      {"edge-left", Edge::left},  {"edge-right", Edge::right},       {"edge-bottom", Edge::bottom},
      {"fidi", Edge::fidi},       {"diagnostics", Edge::diagnostics}, {"all", std::nullopt}};
  for (const auto& [name, edge] : commands) app.add_subcommand(name, "run " + name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    out << app.help();
    detail::report_error(err, "usage", e.what());
    return 1;
  }
  if (app.get_subcommands().empty()) {
    out << app.help();
    detail::report_error(err, "usage", "a subcommand is required: edge-left, edge-right, edge-bottom, fidi, diagnostics or all");
    return 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  std::vector<Edge> edges;
  for (const auto& [name, edge] : commands)
    if (name == command) {
      if (edge) edges.push_back(*edge);
      else edges = {Edge::left, Edge::right, Edge::bottom, Edge::fidi, Edge::diagnostics};
    }

  std::vector<ExperimentConfig> configs;
  try {
    std::optional<ConfigTable> table;
    if (!config_path.empty()) table = load_config_file(config_path);
    for (Edge e : edges) {
      auto cfg = ExperimentConfig::defaults(e);
      if (const char* env = std::getenv("SUBORTRIM_SEED"); env && *env) {
        const std::string_view s(env);
        std::uint64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
          throw std::invalid_argument("SUBORTRIM_SEED is not an unsigned integer: '" + std::string(s) + "'");
        cfg.master_seed = v;
      }
      if (table) apply_config(*table, cfg, edges.size() > 1);
      if (seed) cfg.master_seed = *seed;
      if (replicates) cfg.replicates = *replicates;
      if (jobs) cfg.jobs = *jobs;
      if (!output_dir.empty()) cfg.output = output_dir;
      cfg.timing = timing;
      cfg.keep_plots = plot;
      cfg.validate();
      configs.push_back(std::move(cfg));
    }
  } catch (const ConfigError& e) {
    detail::report_error(err, "config", e.message(), e.line(), e.column());
    return 1;
  } catch (const std::exception& e) {
    detail::report_error(err, "config", e.what());
    return 1;
  }

  bool all_pass = true;
  for (const auto& cfg : configs) {
    const std::filesystem::path dir = cfg.output.empty() ? std::filesystem::path(".") : std::filesystem::path(cfg.output);
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
      detail::report_error(err, "output", "output directory does not exist: '" + dir.string() + "'");
      return 1;
    }
    ExperimentReport report;
    try {
      report = run_experiment(cfg);
    } catch (const std::invalid_argument& e) {
      detail::report_error(err, "config", e.what());
      return 1;
    } catch (const std::exception& e) {
      detail::report_error(err, "runtime", e.what());
      return 1;
    }
    const std::string stem = "subortrim_" + std::string(edge_name(cfg.edge));
    try {
      if (format != "json") detail::write_atomic(dir / (stem + ".csv"), to_csv(report));
      if (format != "csv") detail::write_atomic(dir / (stem + ".json"), to_json(report, cfg).dump(2) + "\n");
      for (const auto& slice : report.plots)
        detail::write_atomic(dir / (stem + "_plot_" + std::to_string(slice.row) + ".svg"), emit_plot(slice));
    } catch (const std::exception& e) {
      detail::report_error(err, "output", e.what());
      return 1;
    }
    std::size_t passed = 0;
    for (const auto& v : report.verdicts) passed += v.pass;
    out << stem << ": " << report.rows.size() << " rows, " << passed << "/" << report.verdicts.size()
        << " verdicts pass\n";
    for (const auto& v : report.verdicts)
      if (!v.pass) out << "  FAIL " << v.name << ": " << v.detail << '\n';
    all_pass = all_pass && report.all_pass();
  }
  return all_pass ? 0 : 2;
}

} // namespace subortrim

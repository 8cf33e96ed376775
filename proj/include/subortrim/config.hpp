#pragma once

// Sectioned key = value experiment configs:
//
//   [edge]   name = left
//   [tail]   family = rational
//   [grids]  alpha = 0.5, 0.3   t = 1e-1, 1e-2   lambda = 1   r = 0, 1   levels = 0.5, 1
//   [run]    replicates = 10000   n_terms = 1000   seeds = 5   seed = 7   jobs = 4   output = out
//
// '#' and ';' start comments. Unknown sections and keys are errors.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "subortrim/experiments.hpp"

namespace subortrim {

class ConfigError : public std::runtime_error {
public:
  ConfigError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line), column_(column), message_(message) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

private:
  std::size_t line_, column_;
  std::string message_;
};

struct ConfigEntry {
  std::string value;
  std::size_t line = 0;
  std::size_t column = 0; ///< 1-based column of the value
};

/// section -> key -> entry
using ConfigTable = std::map<std::string, std::map<std::string, ConfigEntry>>;

namespace detail {

inline const std::map<std::string, std::vector<std::string>>& config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"edge", {"name"}},
      {"tail", {"family"}},
      {"grids", {"alpha", "t", "lambda", "r", "levels"}},
      {"run", {"replicates", "n_terms", "seeds", "seed", "jobs", "output", "ks_level", "ks_threshold",
               "terminal_error", "terminal_fraction", "max_inversions"}},
  };
  return schema;
}

inline std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return i;
}

inline std::size_t trim_end(std::string_view s, std::size_t end) {
  while (end > 0 && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
  return end;
}

} // namespace detail

inline ConfigTable parse_config_table(std::string_view text) {
  ConfigTable table;
  const auto& schema = detail::config_schema();
  std::string section;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    // Comments end the line unless inside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (!quoted && (line[i] == '#' || line[i] == ';')) {
        line = line.substr(0, i);
        break;
      }
    }
    const std::size_t b = detail::skip_space(line, 0);
    const std::size_t e = detail::trim_end(line, line.size());
    if (b >= e) {
      if (eol == text.size()) break;
      continue;
    }
    if (line[b] == '[') {
      if (line[e - 1] != ']') throw ConfigError(line_no, e, "section header must end with ']'");
      section = std::string(line.substr(b + 1, e - b - 2));
      if (!schema.count(section)) throw ConfigError(line_no, b + 2, "unknown section '" + section + "'");
      table[section];
    } else {
      const std::size_t eq = line.find('=', b);
      if (eq == std::string_view::npos) throw ConfigError(line_no, b + 1, "expected 'key = value'");
      const std::string key(line.substr(b, detail::trim_end(line, eq) - b));
      if (key.empty()) throw ConfigError(line_no, b + 1, "missing key before '='");
      if (section.empty()) throw ConfigError(line_no, b + 1, "key '" + key + "' appears before any section");
      const auto& keys = schema.at(section);
      if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw ConfigError(line_no, b + 1, "unknown key '" + key + "' in section [" + section + "]");
      std::size_t vb = detail::skip_space(line, eq + 1);
      std::size_t ve = e;
      if (vb >= ve) throw ConfigError(line_no, eq + 2, "missing value for '" + key + "'");
      if (line[vb] == '"') {
        if (ve - vb < 2 || line[ve - 1] != '"') throw ConfigError(line_no, vb + 1, "unterminated quoted value");
        ++vb;
        --ve;
      }
      if (table[section].count(key)) throw ConfigError(line_no, b + 1, "duplicate key '" + key + "'");
      table[section][key] = {std::string(line.substr(vb, ve - vb)), line_no, vb + 1};
    }
    if (eol == text.size()) break;
  }
  return table;
}

namespace detail {

template <class T>
T parse_config_number(const ConfigEntry& entry, std::string_view token, std::size_t offset) {
  T value{};
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw ConfigError(entry.line, entry.column + offset, "not a valid number: '" + std::string(token) + "'");
  return value;
}

template <class T>
std::vector<T> parse_config_list(const ConfigEntry& entry) {
  std::vector<T> out;
  std::string_view s = entry.value;
  std::size_t i = 0;
  while (true) {
    const std::size_t b = skip_space(s, i);
    const std::size_t comma = std::min(s.find(',', b), s.size());
    const std::size_t e = trim_end(s, comma);
    if (b >= e) throw ConfigError(entry.line, entry.column + b, "empty list element");
    out.push_back(parse_config_number<T>(entry, s.substr(b, e - b), b));
    if (comma == s.size()) break;
    i = comma + 1;
  }
  return out;
}

} // namespace detail

/// Overlays the table onto `cfg`. The [edge] name, when present, must agree
/// with cfg.edge; `only_run` rejects everything outside [run].
inline void apply_config(const ConfigTable& table, ExperimentConfig& cfg, bool only_run = false) {
  for (const auto& [section, keys] : table) {
    if (only_run && section != "run" && !keys.empty()) {
      const auto& first = keys.begin()->second;
      throw ConfigError(first.line, 1, "section [" + section + "] is not allowed here; only [run] applies to every edge");
    }
    for (const auto& [key, entry] : keys) {
      using detail::parse_config_list;
      using detail::parse_config_number;
      auto scalar_u64 = [&] { return parse_config_number<std::uint64_t>(entry, entry.value, 0); };
      auto scalar_real = [&] { return parse_config_number<double>(entry, entry.value, 0); };
      if (section == "edge") {
        Edge e;
        try {
          e = parse_edge(entry.value);
        } catch (const std::invalid_argument& ex) {
          throw ConfigError(entry.line, entry.column, ex.what());
        }
        if (e != cfg.edge)
          throw ConfigError(entry.line, entry.column,
                            "config is for edge '" + entry.value + "' but '" + std::string(edge_name(cfg.edge)) + "' was requested");
      } else if (section == "tail") {
        if (entry.value != "stable" && entry.value != "rational") {
          try {
            TailFunction::parse(entry.value);
          } catch (const std::invalid_argument& ex) {
            throw ConfigError(entry.line, entry.column, ex.what());
          }
        }
        cfg.tail = entry.value;
      } else if (section == "grids") {
        if (key == "alpha") cfg.alpha_grid = parse_config_list<double>(entry);
        else if (key == "t") cfg.t_grid = parse_config_list<double>(entry);
        else if (key == "lambda") cfg.lambda_grid = parse_config_list<double>(entry);
        else if (key == "levels") cfg.level_grid = parse_config_list<double>(entry);
        else if (key == "r") cfg.r_grid = parse_config_list<unsigned>(entry);
      } else if (section == "run") {
        if (key == "replicates") cfg.replicates = scalar_u64();
        else if (key == "n_terms") cfg.n_terms = scalar_u64();
        else if (key == "seeds") cfg.seeds = scalar_u64();
        else if (key == "seed") cfg.master_seed = scalar_u64();
        else if (key == "jobs") cfg.jobs = static_cast<unsigned>(scalar_u64());
        else if (key == "output") cfg.output = entry.value;
        else if (key == "ks_level") cfg.ks_level = scalar_real();
        else if (key == "ks_threshold") cfg.ks_threshold = scalar_real();
        else if (key == "terminal_error") cfg.terminal_error = scalar_real();
        else if (key == "terminal_fraction") cfg.terminal_fraction = scalar_real();
        else if (key == "max_inversions") cfg.max_inversions = static_cast<unsigned>(scalar_u64());
      }
    }
  }
}

inline ConfigTable load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_table(buf.str());
}

} // namespace subortrim

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "subortrim/cli.hpp"

using namespace subortrim;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "subortrim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("subortrim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

} // namespace

TEST(ConfigParser, SectionsListsCommentsAndQuotes) {
  const auto t = parse_config_table("# header\n[tail]\nfamily = \"rational\" ; trailing\n\n[grids]\nt = 1e-1, 1e-2 ,1e-3\n");
  EXPECT_EQ(t.at("tail").at("family").value, "rational");
  auto cfg = ExperimentConfig::defaults(Edge::left);
  apply_config(t, cfg);
  EXPECT_EQ(cfg.tail, "rational");
  EXPECT_EQ(cfg.t_grid, (std::vector<double>{1e-1, 1e-2, 1e-3}));
}

TEST(ConfigParser, ErrorsCarryLineAndColumn) {
  try {
    parse_config_table("[run]\nreplicates = 10\n  nope = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 3u);
  }
  try {
    auto cfg = ExperimentConfig::defaults(Edge::left);
    apply_config(parse_config_table("[grids]\nalpha = 0.5, 0.x\n"), cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 14u);
  }
  EXPECT_THROW(parse_config_table("[model]\n"), ConfigError);
  EXPECT_THROW(parse_config_table("replicates = 3\n"), ConfigError);
  EXPECT_THROW(parse_config_table("[run]\nseed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_table("[run\n"), ConfigError);
  EXPECT_THROW(parse_config_table("[run]\nseed\n"), ConfigError);
}

TEST(ConfigParser, EdgeMismatchAndRunOnlyMode) {
  auto cfg = ExperimentConfig::defaults(Edge::left);
  EXPECT_THROW(apply_config(parse_config_table("[edge]\nname = right\n"), cfg), ConfigError);
  EXPECT_NO_THROW(apply_config(parse_config_table("[edge]\nname = left\n"), cfg));
  EXPECT_THROW(apply_config(parse_config_table("[grids]\nr = 0\n"), cfg, true), ConfigError);
  EXPECT_THROW(apply_config(parse_config_table("[tail]\nfamily = gauss(1)\n"), cfg), ConfigError);
}

TEST(Cli, MissingSubcommandPrintsUsage) {
  const auto r = run({});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("Usage"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(r.err).at("error"), "usage");
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"fidi", "--bogus"}).code, 1);
  EXPECT_EQ(run({"fidi", "--format", "xml"}).code, 1);
}

TEST(Cli, EdgeBottomWritesReportsAndExitsZero) {
  const auto dir = scratch("bottom");
  const auto r = run({"edge-bottom", "--seed", "7", "--replicates", "100", "--output", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const auto csv = slurp(dir / "subortrim_bottom.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), csv_header);
  const auto j = nlohmann::json::parse(slurp(dir / "subortrim_bottom.json"));
  EXPECT_EQ(j.at("config").at("seed"), 7u);
  EXPECT_EQ(j.at("config").at("replicates"), 100u);
  EXPECT_TRUE(j.at("pass"));
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Cli, ConfigErrorsAreJsonOnStderr) {
  const auto dir = scratch("cfgerr");
  write(dir / "bad.ini", "[run]\nreplicates = 100\nbogus = 1\n");
  const auto r = run({"edge-bottom", "--config", (dir / "bad.ini").string(), "--output", dir.string()});
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j.at("error"), "config");
  EXPECT_EQ(j.at("line"), 3);
  EXPECT_EQ(j.at("column"), 1);
  EXPECT_EQ(run({"edge-bottom", "--config", (dir / "missing.ini").string()}).code, 1);
}

TEST(Cli, NonexistentOutputDirectoryIsAnError) {
  const auto r = run({"fidi", "--replicates", "1000", "--output", "/nonexistent/subortrim"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(nlohmann::json::parse(r.err).at("error"), "output");
}

TEST(Cli, OverridesWinOverConfigWhichWinsOverEnvironment) {
  const auto dir = scratch("prio");
  write(dir / "c.ini", "[run]\nseed = 11\nreplicates = 1500\n");
  ::setenv("SUBORTRIM_SEED", "5", 1);
  auto seed_of = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"fidi", "--output", dir.string(), "--format", "json"};
    args.insert(args.end(), extra.begin(), extra.end());
    EXPECT_EQ(run(args).code, 0);
    const auto j = nlohmann::json::parse(slurp(dir / "subortrim_fidi.json"));
    return j.at("config").at("seed").get<std::uint64_t>();
  };
  EXPECT_EQ(seed_of({"--replicates", "1000"}), 5u);
  EXPECT_EQ(seed_of({"--config", (dir / "c.ini").string()}), 11u);
  EXPECT_EQ(seed_of({"--config", (dir / "c.ini").string(), "--seed", "3"}), 3u);
  ::unsetenv("SUBORTRIM_SEED");
  EXPECT_FALSE(fs::exists(dir / "subortrim_fidi.csv"));
}

TEST(Cli, FailedVerdictExitsTwo) {
  const auto dir = scratch("fail");
  write(dir / "strict.ini", "[run]\nterminal_error = 1e-15\n");
  const auto r = run({"edge-bottom", "--config", (dir / "strict.ini").string(), "--replicates", "20", "--output",
                      dir.string(), "--format", "csv"});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, CsvBytesDoNotDependOnJobs) {
  const auto a = scratch("jobs1"), b = scratch("jobs4");
  ASSERT_EQ(run({"fidi", "--replicates", "5000", "--jobs", "1", "--output", a.string()}).code, 0);
  ASSERT_EQ(run({"fidi", "--replicates", "5000", "--jobs", "4", "--output", b.string()}).code, 0);
  EXPECT_EQ(slurp(a / "subortrim_fidi.csv"), slurp(b / "subortrim_fidi.csv"));
}

TEST(Cli, PlotFlagWritesOneSvgPerTestedPoint) {
  const auto dir = scratch("plot");
  ASSERT_EQ(run({"edge-bottom", "--replicates", "20", "--plot", "--output", dir.string()}).code, 0);
  std::size_t svgs = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".svg") continue;
    ++svgs;
    const auto text = slurp(e.path());
    EXPECT_NE(text.find("width=\"640\" height=\"480\""), std::string::npos);
    EXPECT_NE(text.find(">CDF</text>"), std::string::npos);
  }
  // 6 alphas × 3 ranks × 1 lambda
  EXPECT_EQ(svgs, 18u);
}

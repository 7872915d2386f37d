#include "fixtures.hpp"

#include "geoptics/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace geoptics;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  // comments are allowed
  "system": {"kind": "euler2d", "sound_speed": 1.0, "u": [0.5, -0.4], "B0": [[0, 0, 1]]},
  "beta": [2.0, 1.0],
  "grid": {"nt": 32, "dt": 0.2, "nx": 21, "dx": 0.05, "K": 2, "P": 8},
  "epsilons": [0.2, 0.1]
})";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("geoptics_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config_pipeline") {
  TEST_CASE("a minimal configuration parses with defaults") {
    const RunConfig c = parse_config(kMinimal);
    CHECK(c.grid.nt == 32);
    CHECK(c.resonance_bound == 8);
    CHECK(c.epsilons.size() == 2);
    CHECK(build_system(c).N == 3);
  }

  TEST_CASE("invalid configurations raise ConfigError") {
    auto kind = [](const std::string& text) { return fixtures::error_kind([&] { parse_config(text); }); };
    CHECK(kind(with("\"dt\": 0.2", "\"dt\": -0.2")) == ErrorKind::ConfigError);
    CHECK(kind(with("\"epsilons\": [0.2, 0.1]", "\"epsilons\": [0.1, 0.2]")) == ErrorKind::ConfigError);
    CHECK(kind(with("\"beta\"", "\"betta\"")) == ErrorKind::ConfigError);
    CHECK(kind(with("\"P\": 8", "\"P\": 4")) == ErrorKind::ConfigError);
    CHECK(kind("{not json") == ErrorKind::ConfigError);
    CHECK(fixtures::error_kind([] { load_config(fixtures::config_path("malformed.json")); }) ==
          ErrorKind::ConfigError);
  }

  TEST_CASE("the configuration hash is stable and sensitive") {
    const RunConfig a = parse_config(kMinimal), b = parse_config(kMinimal);
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) != config_hash(parse_config(with("\"dt\": 0.2", "\"dt\": 0.25"))));
  }

  TEST_CASE("stage names and exit codes") {
    CHECK(parse_stage("solve-profiles") == Stage::SolveProfiles);
    CHECK(std::string(to_string(Stage::ConvergenceStudy)) == "convergence-study");
    CHECK(expand(Stage::Run).size() == 6);
    CHECK(fixtures::error_kind([] { parse_stage("bogus"); }) == ErrorKind::ConfigError);
    CHECK(exit_code(ErrorKind::ConfigError) == 2);
    CHECK(exit_code(ErrorKind::StabilityFail) == 2);
    CHECK(exit_code(ErrorKind::MissingUpstream) == 2);
    CHECK(exit_code(ErrorKind::NoConvergence) == 3);
    CHECK(exit_code(ErrorKind::BlowUp) == 3);
  }

  TEST_CASE("a later stage without its upstream cache fails") {
    const RunConfig c = parse_config(kMinimal);
    PipelineOptions o;
    o.out_dir = scratch("upstream").string();
    CHECK(fixtures::error_kind([&] { run_pipeline(c, Stage::SolveSingular, o); }) == ErrorKind::MissingUpstream);
    fs::remove_all(o.out_dir);
  }

  TEST_CASE("zero boundary data runs end to end with zero errors") {
    const RunConfig c = load_config(fixtures::config_path("zero_data.json"));
    PipelineOptions o;
    o.out_dir = scratch("zero").string();
    run_pipeline(c, Stage::Run, o);
    for (const char* f : {"assumptions.json", "modes.json", "resonances.json", "convergence.csv", "summary.txt",
                          "manifest.json"})
      CHECK(fs::exists(fs::path(o.out_dir) / f));
    std::istringstream csv(slurp(fs::path(o.out_dir) / "convergence.csv"));
    auto cells = [](const std::string& line) {
      std::vector<std::string> out;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) out.push_back(cell);
      return out;
    };
    std::string line;
    std::getline(csv, line);
    const std::vector<std::string> header = cells(line);
    int rows = 0;
    while (std::getline(csv, line)) {
      ++rows;
      const std::vector<std::string> row = cells(line);
      REQUIRE(row.size() == header.size());
      for (size_t i = 0; i < row.size(); ++i)
        if (header[i] == "error_es" || header[i] == "error_linf" || header[i] == "norm_U")
          CHECK(std::stod(row[i]) == 0.0);
    }
    CHECK(rows == static_cast<int>(c.epsilons.size()));
    fs::remove_all(o.out_dir);
  }
}

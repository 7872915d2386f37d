#pragma once

#include "geoptics/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace geoptics {

enum class Stage {
  Run,
  CheckAssumptions,
  AnalyzeModes,
  FindResonances,
  SolveProfiles,
  SolveSingular,
  ConvergenceStudy,
};

const char* to_string(Stage s);
// Throws ConfigError for an unknown name.
Stage parse_stage(const std::string& name);
// Stages executed by `s`, in order.
std::vector<Stage> expand(Stage s);

// 0 success, 2 assumption or input failure, 3 solver failure.
int exit_code(ErrorKind k);

struct PipelineOptions {
  std::string out_dir = "out";
  std::string cache_dir;  // empty: GEOPTICS_CACHE_DIR, else <out_dir>/.cache
  int threads = 0;        // 0 keeps the OpenMP default
  bool verbose = false;
  std::ostream* log = nullptr;  // progress lines when verbose; timings never reach the artifacts
};

std::string resolve_cache_dir(const PipelineOptions& opt);

// Runs the stage (all stages for Stage::Run) and writes its artifacts.  Each
// stage other than the first requires the cache entry of its predecessor and
// raises MissingUpstream otherwise.
void run_pipeline(const RunConfig& cfg, Stage stage, const PipelineOptions& opt);

void set_threads(int n);

}  // namespace geoptics

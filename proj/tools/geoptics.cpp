#include "geoptics/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Weakly nonlinear boundary geometric optics pipeline"};
  std::string config, stage = "run", out = "out";
  geoptics::PipelineOptions opt;
  app.add_option("--config", config, "run configuration (JSON)")->required();
  app.add_option("--stage", stage,
                 "run, check-assumptions, analyze-modes, find-resonances, solve-profiles, solve-singular, "
                 "convergence-study");
  app.add_option("--out", out, "artifact directory");
  app.add_option("--threads", opt.threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--verbose", opt.verbose, "progress on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  opt.out_dir = out;
  try {
    const geoptics::RunConfig cfg = geoptics::load_config(config);
    geoptics::run_pipeline(cfg, geoptics::parse_stage(stage), opt);
  } catch (const geoptics::Error& e) {
    std::cerr << "geoptics: " << e.what() << "\n";
    return geoptics::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "geoptics: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

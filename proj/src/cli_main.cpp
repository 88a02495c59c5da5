// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <CLI11.hpp>
#include <string>

#include "swbss/cli.hpp"

namespace swbss::cli {

int run_main(int argc, char** argv) {
  CLI::App app{"swbss: switching blind source separation and dereverberation"};
  app.require_subcommand(1);

  std::string spec_path, in_dir, out_dir, config_path, est_dir, truth_dir,
      report_path, grid_path, out_csv;

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic scene bundle");
  simulate->add_option("--spec", spec_path, "scene spec file (key=value)")->required();
  simulate->add_option("--out", out_dir, "output directory")->required();

  CLI::App* enhance = app.add_subcommand("enhance", "run enhancement on a scene bundle");
  enhance->add_option("--in", in_dir, "input directory with mixture.wav")->required();
  enhance->add_option("--config", config_path, "run config file (key=value)")->required();
  enhance->add_option("--out", out_dir, "output directory")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "score estimates against scene truth");
  evaluate->add_option("--est", est_dir, "directory with est_*.wav")->required();
  evaluate->add_option("--truth", truth_dir, "scene bundle directory")->required();
  evaluate->add_option("--report", report_path, "report file path")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "run a method grid over simulated scenes");
  sweep->add_option("--grid", grid_path, "grid file (key=value)")->required();
  sweep->add_option("--out", out_csv, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  if (simulate->parsed()) return cmd_simulate(spec_path, out_dir);
  if (enhance->parsed()) return cmd_enhance(in_dir, config_path, out_dir);
  if (evaluate->parsed()) return cmd_evaluate(est_dir, truth_dir, report_path);
  if (sweep->parsed()) return cmd_sweep(grid_path, out_csv);
  return kExitConfig;
}

}  // namespace swbss::cli

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "mvfund/pipeline.hpp"

using namespace mvfund;

int main(int argc, char** argv) {
  CLI::App app{"Global projective camera recovery from pairwise fundamental "
               "matrices"};
  app.require_subcommand(1);

  PipelineOptions options;
  SceneSpec spec;
  std::string input, output, layout = "ring";
  std::vector<double> sigmas{0.0, 0.5, 1.0, 2.0};
  int seeds = 5;
  bool paper_parity = false;

  CLI::App* solve = app.add_subcommand("solve", "Recover cameras and points");
  solve->add_option("input", input, "problem file")->required();
  solve->add_option("--output", output, "reconstruction file")->required();
  solve->add_option("--alpha", options.admm.alpha, "data-fit weight");
  solve->add_option("--iters", options.admm.iterations, "solver iterations");
  solve->add_option("--early-stop", options.admm.early_stop_residual,
                    "relative primal residual stop, 0 disables");
  solve->add_option("--trees", options.cover.n_trees,
                    "edge-disjoint spanning trees");
  solve->add_option("--delta1", options.cover.delta1,
                    "collinearity threshold");
  solve->add_option("--score-iters", options.cover.score_iterations,
                    "iterations of the per-triplet scorer");
  solve->add_flag("--paper-parity", paper_parity,
                  "pin the published parameters");

  CLI::App* check = app.add_subcommand("check", "Consistency report");
  check->add_option("input", input, "problem file with all blocks")->required();
  check->add_flag("--paper-parity", paper_parity,
                  "pin the published parameters");

  CLI::App* synth = app.add_subcommand("synth", "Synthesize a problem file");
  synth->add_option("--output", output, "problem file to write")->required();
  synth->add_option("--cameras", spec.n_cameras, "camera count");
  synth->add_option("--points", spec.n_points, "point count");
  synth->add_option("--layout", layout, "ring|sphere|line");
  synth->add_option("--noise", spec.noise_sigma, "pixel noise sigma");
  synth->add_option("--seed", spec.seed, "random seed");
  synth->add_option("--width", spec.width, "image width");
  synth->add_option("--height", spec.height, "image height");
  synth->add_flag("--paper-parity", paper_parity,
                  "pin the published parameters");

  CLI::App* simulate = app.add_subcommand("simulate", "Consistency sweep");
  simulate->add_option("--sigma", sigmas, "noise levels in pixels");
  simulate->add_option("--seeds", seeds, "number of seeds to average");
  simulate->add_option("--seed", spec.seed, "base random seed");
  simulate->add_option("--cameras", spec.n_cameras, "camera count");
  simulate->add_option("--points", spec.n_points, "point count");
  simulate->add_option("--output", output, "CSV path, stdout when omitted");
  simulate->add_flag("--paper-parity", paper_parity,
                     "pin the published parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return exit_code::kUsage;
  }

  if (paper_parity) options = options.with_parity();

  try {
    if (solve->parsed())
      return cmd_solve(input, output, options, std::cout, std::cerr);
    if (check->parsed()) return cmd_check(input, std::cout, std::cerr);
    if (synth->parsed()) {
      spec.layout = layout_from_string(layout);
      return cmd_synth(spec, output, std::cerr);
    }
    if (simulate->parsed())
      return cmd_simulate(spec, sigmas, seeds, output, std::cout, std::cerr);
  } catch (const InvalidLayout& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::kFailure;
  }
  return exit_code::kUsage;
}

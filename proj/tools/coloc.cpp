#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coloc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Co-localization of a common object across image sets"};
  app.require_subcommand(1);

  const std::map<std::string, coloc::ReportFormat> formats{{"json", coloc::ReportFormat::Json},
                                                           {"csv", coloc::ReportFormat::Csv}};

  // run
  coloc::RunConfig run;
  double clamp_delta = 0.0;
  std::string run_provenance;
  auto* run_cmd = app.add_subcommand("run", "Localize every image of a dataset");
  run_cmd->add_option("--root", run.root, "Dataset root")->required()->check(CLI::ExistingDirectory);
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--epsilon", run.solver.epsilon, "Squared-step convergence tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--max-iters", run.solver.max_iters, "Forced break after this many rounds")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000000));
  run_cmd->add_option("--edge-threshold", run.solver.edge_threshold,
                      "Normalized Sobel magnitude counted as an edge")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--clamp-delta", clamp_delta,
                      "Lower clamp of deviation ratios (default 1/(2*max side))")
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--iou-threshold", run.iou_threshold, "CorLoc IoU threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--jobs", run.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  run_cmd->add_flag("--render", run.render, "Write overlays with ground truth and prediction");
  run_cmd->add_option("--format", run.format, "Report format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  run_cmd->add_option("--provenance", run_provenance, "Map provenance tag for the report");

  // eval
  coloc::EvalConfig eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score stored predictions (CorLoc)");
  eval_cmd->add_option("--predictions", eval.predictions, "predictions.csv from `run`")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--root", eval.root, "Dataset root")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--out", eval.out, "Report directory");
  eval_cmd->add_option("--iou-threshold", eval.iou_threshold, "CorLoc IoU threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--format", eval.format, "Report format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  // baseline
  std::string baseline_root;
  unsigned baseline_jobs = 0;
  auto* baseline_cmd =
      app.add_subcommand("baseline", "Generate saliency and co-saliency maps from the images");
  baseline_cmd->add_option("--root", baseline_root, "Dataset root")
      ->required()
      ->check(CLI::ExistingDirectory);
  baseline_cmd->add_option("--jobs", baseline_jobs, "Worker threads (0 = all cores)");

  // synth
  coloc::SynthConfig synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic dataset");
  synth_cmd->add_option("--out,--root", synth.out, "Dataset root to create")->required();
  synth_cmd->add_option("--n", synth.per_class, "Images per class")->capture_default_str();
  synth_cmd->add_option("--size", synth.size, "Image side in pixels")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--classes", synth.classes, "Number of classes")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      if (run_cmd->count("--clamp-delta") > 0) run.solver.clamp_delta = clamp_delta;
      if (!run_provenance.empty()) run.provenance = run_provenance;
      return coloc::cmd_run(run, std::cout, std::cerr);
    }
    if (*eval_cmd) return coloc::cmd_eval(eval, std::cout, std::cerr);
    if (*baseline_cmd) return coloc::cmd_baseline(baseline_root, baseline_jobs, std::cout, std::cerr);
    if (*synth_cmd) return coloc::cmd_synth(synth, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

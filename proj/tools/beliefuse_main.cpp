// beliefuse: trust-model building, belief fusion, baselines, and evaluation
// for object-detector outputs.

#include <iostream>

#include "CLI11.hpp"

#include "beliefuse/commands.hpp"

namespace {

using beliefuse::cli::RunConfig;

void add_common(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--match-iou", c.match_iou, "IoU threshold for ground-truth matching")
      ->capture_default_str();
  cmd->add_option("--duplicate-policy", c.duplicate_policy,
                  "Label of a second hit on a claimed object: undecided | false_positive")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Seed for every randomized step")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads")
      ->envname("BELIEFUSE_JOBS")
      ->capture_default_str();
}

void add_fusion(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--vector-iou", c.vector_iou, "IoU threshold for detection-vector association")
      ->capture_default_str();
  cmd->add_option("--nms-iou", c.nms_iou, "IoU threshold for non-maximum suppression")
      ->capture_default_str();
  cmd->add_option("--absent-policy", c.absent_policy,
                  "Contribution of a detector with no overlapping window: vacuous | recall_one")
      ->capture_default_str();
}

void add_trust(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--n", c.n, "Best-possible-detector exponent (positive number or 'inf')")
      ->capture_default_str();
  cmd->add_option("--interpolation", c.interpolation, "Score-to-recall mapping: step | linear")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = beliefuse::cli;
  RunConfig c;
  CLI::App app{"beliefuse - belief-function late fusion of object detectors"};
  app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Write a seeded synthetic dataset");
  generate->add_option("--out", c.out, "Output directory")->required();
  generate->add_option("--images", c.num_images, "Number of images")->capture_default_str();
  generate->add_option("--preset", c.preset, "complementary | biased")->capture_default_str();
  add_common(generate, c);

  auto* build_trust = app.add_subcommand("build-trust", "Build per-detector trust models");
  build_trust->add_option("--detections-dir", c.detections_dir, "Validation detections")->required();
  build_trust->add_option("--annotations", c.annotations, "Validation annotations")->required();
  build_trust->add_option("--models-dir", c.models_dir, "Model output directory")->required();
  add_common(build_trust, c);
  add_trust(build_trust, c);

  auto* build_baselines =
      app.add_subcommand("build-baselines", "Fit Platt, weighted-sum, and naive Bayes baselines");
  build_baselines->add_option("--detections-dir", c.detections_dir, "Validation detections")
      ->required();
  build_baselines->add_option("--annotations", c.annotations, "Validation annotations")->required();
  build_baselines->add_option("--models-dir", c.models_dir, "Model output directory")->required();
  add_common(build_baselines, c);
  add_fusion(build_baselines, c);

  auto* fuse = app.add_subcommand("fuse", "Fuse test detections");
  fuse->add_option("--detections-dir", c.detections_dir, "Test detections")->required();
  fuse->add_option("--models-dir", c.models_dir, "Directory with trained models")->required();
  fuse->add_option("--out", c.out, "Fused detections (JSON lines)")->required();
  fuse->add_option("--method", c.method, "dbf | static-dst | platt | ws | bayes")
      ->capture_default_str();
  add_common(fuse, c);
  add_fusion(fuse, c);

  auto* eval = app.add_subcommand("eval", "Average precision of detection files");
  eval->add_option("--annotations", c.annotations, "Ground truth")->required();
  eval->add_option("--input", c.inputs, "Detection or fused file (repeatable)")->required();
  eval->add_option("--out", c.out, "Report directory")->required();
  eval->add_option("--ap-interp", c.ap_interp, "all-points | voc11")->capture_default_str();
  add_common(eval, c);

  auto* sweep = app.add_subcommand("sweep-n", "DBF mAP across best-possible-detector exponents");
  sweep->add_option("--detections-dir", c.detections_dir, "Validation detections")->required();
  sweep->add_option("--annotations", c.annotations, "Validation annotations")->required();
  sweep->add_option("--test-detections-dir", c.test_detections_dir, "Test detections")->required();
  sweep->add_option("--test-annotations", c.test_annotations, "Test annotations")->required();
  sweep->add_option("--n-values", c.n_values, "Exponents to try")->delimiter(',')->capture_default_str();
  sweep->add_option("--out", c.out, "CSV output")->required();
  sweep->add_option("--ap-interp", c.ap_interp, "all-points | voc11")->capture_default_str();
  add_common(sweep, c);
  add_fusion(sweep, c);
  add_trust(sweep, c);

  auto* experiment =
      app.add_subcommand("experiment", "Run every method on a generated fixture and print mAP");
  experiment->add_option("--images", c.num_images, "Number of images")->capture_default_str();
  experiment->add_option("--preset", c.preset, "complementary | biased")->capture_default_str();
  experiment->add_option("--n-values", c.n_values, "Exponents for the sweep")
      ->delimiter(',')
      ->capture_default_str();
  experiment->add_option("--out", c.out, "Optional CSV output");
  experiment->add_option("--ap-interp", c.ap_interp, "all-points | voc11")->capture_default_str();
  add_common(experiment, c);
  add_fusion(experiment, c);
  add_trust(experiment, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(beliefuse::ExitCode::kConfigError);
  }

  auto dispatch = [&] {
    if (*generate) return cli::cmd_generate(c, std::cout);
    if (*build_trust) return cli::cmd_build_trust(c, std::cout);
    if (*build_baselines) return cli::cmd_build_baselines(c, std::cout);
    if (*fuse) return cli::cmd_fuse(c, std::cout);
    if (*eval) return cli::cmd_eval(c, std::cout);
    if (*sweep) return cli::cmd_sweep_n(c, std::cout);
    if (*experiment) return cli::cmd_experiment(c, std::cout);
  };
  return cli::run_guarded(dispatch, std::cerr);
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "beliefuse/datagen.hpp"
#include "beliefuse/errors.hpp"
#include "beliefuse/eval.hpp"
#include "beliefuse/io.hpp"
#include "beliefuse/pipeline.hpp"

namespace beliefuse::cli {

struct RunConfig {
  std::filesystem::path detections_dir;
  std::filesystem::path annotations;
  std::filesystem::path models_dir;
  std::filesystem::path out;
  // Held-out split for sweep-n; build-trust/fuse/eval use the fields above.
  std::filesystem::path test_detections_dir;
  std::filesystem::path test_annotations;
  std::vector<std::filesystem::path> inputs;

  std::string method = "dbf";
  std::string n = "2";
  std::vector<std::string> n_values{"1", "2", "4", "8", "inf"};
  double match_iou = 0.5;
  double vector_iou = 0.5;
  double nms_iou = 0.5;
  std::string absent_policy = "vacuous";       // vacuous | recall_one
  std::string duplicate_policy = "undecided";  // undecided | false_positive
  std::string ap_interp = "all-points";        // all-points | voc11
  std::string interpolation = "step";          // step | linear
  std::uint64_t seed = 42;
  unsigned jobs = 1;

  // generate only
  std::size_t num_images = 300;
  std::string preset = "complementary";  // complementary | biased
};

// Validates thresholds and enumerations; throws ConfigError.
PipelineOptions pipeline_options(const RunConfig& config);
EvalOptions eval_options(const RunConfig& config);

// Resolved configuration embedded in every output file.
io::Json provenance(const RunConfig& config, const std::string& command);

// Each command writes its artifacts and a short summary to `log`. Errors are
// reported by exception; see run_guarded().
void cmd_generate(const RunConfig& config, std::ostream& log);
void cmd_build_trust(const RunConfig& config, std::ostream& log);
void cmd_build_baselines(const RunConfig& config, std::ostream& log);
void cmd_fuse(const RunConfig& config, std::ostream& log);
void cmd_eval(const RunConfig& config, std::ostream& log);
void cmd_sweep_n(const RunConfig& config, std::ostream& log);
// Generates the preset fixture in memory and prints mAP for every detector
// and fusion method.
void cmd_experiment(const RunConfig& config, std::ostream& log);

// Runs a command, mapping exceptions to exit codes: 2 config, 3 data,
// 4 missing model. Messages go to `err`.
int run_guarded(const std::function<void()>& command, std::ostream& err);

// Loaders shared by the commands.
TrustModelSet load_trust_models(const std::filesystem::path& models_dir);
BaselineSet load_baselines(const std::filesystem::path& models_dir, Method method);
DataSplit load_split(const std::filesystem::path& detections_dir,
                     const std::filesystem::path& annotations);

// Writes datagen output: <out>/{validation,test}/annotations.jsonl and
// <out>/{validation,test}/detections/<detector>.jsonl.
void write_dataset(const std::filesystem::path& out, const SyntheticDataset& data,
                   const io::Json& provenance);

}  // namespace beliefuse::cli

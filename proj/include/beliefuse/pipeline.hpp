#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "beliefuse/baselines.hpp"
#include "beliefuse/fusion.hpp"
#include "beliefuse/geometry.hpp"
#include "beliefuse/trust_model.hpp"

namespace beliefuse {

struct DataSplit {
  std::vector<GroundTruthObject> annotations;
  std::vector<Detection> detections;
};

enum class Method { kDbf, kStaticDst, kPlatt, kWeightedSum, kBayes };

const char* method_name(Method m) noexcept;
// Accepts dbf, static-dst, platt, ws, bayes. Throws ConfigError otherwise.
Method parse_method(const std::string& name);

struct PipelineOptions {
  MatchOptions match;  // validation labeling for trust models and baselines
  FusionOptions fusion;
  BpdExponent n{kDefaultBpdExponent};
  ScoreInterpolation interpolation = ScoreInterpolation::kStep;
  SvmOptions svm;
  unsigned jobs = 1;
};

struct TrustModelSet {
  std::map<std::string, TrustModelMap, std::less<>> by_class;
  std::vector<std::string> warnings;  // one per uninformative (class, detector)

  TrustModelSet with_exponent(BpdExponent n) const;
};

struct BaselineSet {
  std::map<std::string, PlattModelMap, std::less<>> platt;
  std::map<std::string, WeightVector, std::less<>> weighted_sum;
  std::map<std::string, NaiveBayesModel, std::less<>> bayes;
  std::vector<std::string> warnings;
};

std::vector<std::string> detector_ids(std::span<const Detection> dets);
std::vector<std::string> class_labels(std::span<const GroundTruthObject> gts,
                                      std::span<const Detection> dets);

struct ImageClassGroup {
  std::string class_label;
  std::string image_id;
  DetectorDetections per_detector;  // every detector in `detectors` registered
};

// Sorted by (class, image).
std::vector<ImageClassGroup> group_detections(std::span<const Detection> dets,
                                              std::span<const std::string> detectors);

// One model per (class, detector) seen in the validation split. Pairs whose
// data cannot support a PR table get an uninformative model and a warning.
TrustModelSet build_trust_models(const DataSplit& validation, const PipelineOptions& options);

BaselineSet train_baselines(const DataSplit& validation, const PipelineOptions& options);

// Fuses every (image, class) group of the split. Output is ordered by class,
// then image, then fused rank. Throws ModelMissing if a required model is
// absent from the given sets.
std::vector<FusedDetection> fuse_split(std::span<const Detection> dets, Method method,
                                       const TrustModelSet* trust, const BaselineSet* baselines,
                                       const PipelineOptions& options,
                                       FusionStats* stats = nullptr);

std::vector<Detection> as_detections(std::span<const FusedDetection> fused,
                                     const std::string& method);

std::vector<Detection> filter_detectors(std::span<const Detection> dets,
                                        std::span<const std::string> keep);

}  // namespace beliefuse

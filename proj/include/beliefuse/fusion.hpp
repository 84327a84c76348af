#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beliefuse/dst.hpp"
#include "beliefuse/geometry.hpp"
#include "beliefuse/trust_model.hpp"

namespace beliefuse {

// Detections of one image and class, keyed by detector. Every key is a
// registered detector and gets a slot in each detection vector, even when
// its list is empty.
using DetectorDetections = std::map<std::string, std::vector<Detection>, std::less<>>;

// Trust models of one class, keyed by detector.
using TrustModelMap = std::map<std::string, TrustModel, std::less<>>;

struct DetectionVector {
  Detection subject;
  std::map<std::string, std::optional<double>, std::less<>> slots;
};

// One vector per input detection. A slot holds the maximum score among that
// detector's windows overlapping the subject by IoU > overlap_threshold, or
// nothing. The subject's own slot is its own score.
std::vector<DetectionVector> build_detection_vectors(const DetectorDetections& per_detector,
                                                     double overlap_threshold = 0.5);

enum class AbsentPolicy {
  kVacuous,    // absent slots contribute total ignorance
  kRecallOne,  // absent slots are scored as -inf, i.e. the recall-1 assignment
};

enum class FusionMethod { kDbf, kStaticDst };

struct FusionOptions {
  AbsentPolicy absent_policy = AbsentPolicy::kVacuous;
  double vector_iou = 0.5;
  double nms_iou = 0.5;
  double static_recall = 0.2;
};

// Per-slot assignments in slot order. Throws ModelMissing when a slot that
// needs a model has none.
std::vector<Bpa> slot_bpas(const DetectionVector& vector, const TrustModelMap& models,
                           FusionMethod method, const FusionOptions& options = {});

// Both throw TotalConflict when the sources cannot be combined.
FusedVerdict dbf_fuse(const DetectionVector& vector, const TrustModelMap& models,
                      const FusionOptions& options = {});
FusedVerdict static_dst_fuse(const DetectionVector& vector, const TrustModelMap& models,
                             const FusionOptions& options = {});

inline constexpr double kConflictSmoothing = 1e-6;

// Pulls every mass into [epsilon, 1 - epsilon] and renormalizes.
Bpa smooth(const Bpa& bpa, double epsilon = kConflictSmoothing);

// Left fold of Dempster's rule that, when a step hits total conflict, smooths
// both operands and retries. *conflicts is incremented once per such step.
Bpa combine_all_resolving(std::span<const Bpa> bpas, std::size_t* conflicts);

struct FusedDetection {
  std::string image_id;
  std::string class_label;
  std::string subject_detector;
  BoundingBox box;
  double score;
  std::optional<FusedVerdict> verdict;  // set by the belief-fusion methods

  // Fused output is ranked as one detector named after the fusion method, the
  // same convention as the fused JSON-lines files.
  Detection as_detection(const std::string& method) const;
};

struct FusionStats {
  std::size_t vectors = 0;
  std::size_t conflicts_resolved = 0;
};

using VectorScorer = std::function<double(const DetectionVector&)>;

// Builds vectors, rescores each subject, and applies NMS. Survivors are
// returned in rank order of the fused score.
std::vector<FusedDetection> fuse_with_scorer(const DetectorDetections& per_detector,
                                             const VectorScorer& scorer,
                                             const FusionOptions& options = {},
                                             FusionStats* stats = nullptr);

std::vector<FusedDetection> fuse_image(const DetectorDetections& per_detector,
                                       const TrustModelMap& models, FusionMethod method,
                                       const FusionOptions& options = {},
                                       FusionStats* stats = nullptr);

}  // namespace beliefuse

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "beliefuse/geometry.hpp"

namespace beliefuse {

enum class ApInterpolation {
  kAllPoints,  // exact area under the interpolated precision envelope
  kVoc11,      // mean interpolated precision at recall 0, 0.1, ..., 1
};

struct EvalOptions {
  double iou_threshold = 0.5;
  ApInterpolation interpolation = ApInterpolation::kAllPoints;
  bool ignore_difficult = true;
};

struct PrSample {
  double recall;
  double precision;
};

struct ClassEval {
  std::string class_label;
  double ap = 0.0;
  std::vector<PrSample> curve;  // one sample per ranked, non-ignored detection
  std::size_t num_gt = 0;
  std::size_t num_detections = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
};

// Area under a raw PR curve (samples in rank order; precision need not be
// monotone). An empty curve has AP 0.
double ap_from_curve(std::span<const PrSample> curve, ApInterpolation interpolation);

// Single-class evaluation. Duplicate hits on a claimed object count as false
// positives; hits on difficult objects are ignored. Throws NoGroundTruth when
// there is no non-difficult ground truth.
ClassEval evaluate_class(std::span<const Detection> dets, std::span<const GroundTruthObject> gts,
                         const EvalOptions& options = {});

double average_precision(std::span<const Detection> dets, std::span<const GroundTruthObject> gts,
                         const EvalOptions& options = {});

struct EvalReport {
  std::string method;
  std::map<std::string, ClassEval> classes;
  double mean_ap = 0.0;
};

// Class universe: every class with at least one non-difficult ground truth.
// Detections of other classes are ignored; a method without detections for a
// class scores AP 0 there.
EvalReport evaluate(std::string method, std::span<const Detection> dets,
                    std::span<const GroundTruthObject> gts, const EvalOptions& options = {});

std::map<std::string, EvalReport> evaluate_methods(
    const std::map<std::string, std::vector<Detection>>& methods,
    std::span<const GroundTruthObject> gts, const EvalOptions& options = {});

}  // namespace beliefuse

#pragma once

#include <span>
#include <string>
#include <vector>

namespace beliefuse {

// Axis-aligned rectangle in continuous image coordinates. Construction
// enforces finite coordinates and strictly positive area.
class BoundingBox {
 public:
  BoundingBox(double x_min, double y_min, double x_max, double y_max);

  double x_min() const noexcept { return x_min_; }
  double y_min() const noexcept { return y_min_; }
  double x_max() const noexcept { return x_max_; }
  double y_max() const noexcept { return y_max_; }
  double width() const noexcept { return x_max_ - x_min_; }
  double height() const noexcept { return y_max_ - y_min_; }
  double area() const noexcept { return width() * height(); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
  friend auto operator<=>(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_min_;
  double y_min_;
  double x_max_;
  double y_max_;
};

// One candidate window emitted by one detector. The score is on the
// detector's native (unbounded) scale.
struct Detection {
  std::string image_id;
  std::string detector_id;
  std::string class_label;
  BoundingBox box;
  double score;

  Detection(std::string image, std::string detector, std::string label,
            BoundingBox b, double s);

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruthObject {
  std::string image_id;
  std::string class_label;
  BoundingBox box;
  bool difficult = false;

  friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};

enum class MatchLabel { kTruePositive, kFalsePositive, kUndecided };

const char* to_string(MatchLabel label) noexcept;

// How a second detection exceeding the IoU threshold on an already-claimed
// ground-truth box is labeled when building trust models.
enum class DuplicatePolicy { kUndecided, kFalsePositive };

struct MatchOptions {
  double iou_threshold = 0.5;
  DuplicatePolicy duplicate_policy = DuplicatePolicy::kUndecided;
  // Detections whose best match is a difficult object are labeled Undecided.
  bool ignore_difficult = true;
};

struct LabeledDetection {
  Detection detection;
  MatchLabel label;
};

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

// Raw outcome of greedy matching, before a labeling convention is applied.
enum class MatchOutcome {
  kClaimed,    // IoU > threshold with an unclaimed ground truth, now claimed
  kDuplicate,  // IoU > threshold only with already-claimed ground truths
  kDifficult,  // IoU > threshold only with difficult (ignored) ground truths
  kPartial,    // overlaps some ground truth, never above the threshold
  kNoOverlap,  // IoU == 0 with every ground truth of the image
};

struct AssignedDetection {
  Detection detection;
  MatchOutcome outcome;
};

// Shared greedy matcher. Detections are visited in rank order; each one claims
// the highest-IoU unclaimed, non-difficult ground truth above the threshold.
// When ignore_difficult is false, difficult objects are matched like any other.
std::vector<AssignedDetection> assign_matches(std::span<const Detection> dets,
                                              std::span<const GroundTruthObject> gts,
                                              double iou_threshold, bool ignore_difficult);

// Strict weak ordering: descending score, then (detector_id, image_id, box)
// ascending. Every ranking in the library goes through this comparator.
bool ranks_before(const Detection& a, const Detection& b) noexcept;

void sort_by_rank(std::vector<Detection>& dets);

// Greedy, score-ordered labeling for trust-model construction:
//  - IoU > threshold with an unclaimed ground truth: TruePositive (claims it)
//  - IoU == 0 with every ground truth in the image: FalsePositive
//  - everything else: Undecided (duplicates follow options.duplicate_policy)
// Output follows the ranking order of the input detections. Detections and
// ground truths are grouped by image_id; all must share one class.
std::vector<LabeledDetection> match_detections(std::span<const Detection> dets,
                                               std::span<const GroundTruthObject> gts,
                                               const MatchOptions& options = {});

// Greedy non-maximum suppression. Output sorted by rank.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold = 0.5);

// Same as nms(), returning indices into dets of the survivors in rank order.
std::vector<std::size_t> nms_indices(std::span<const Detection> dets, double iou_threshold = 0.5);

void require_unit_interval_open(double value, const char* what);

}  // namespace beliefuse

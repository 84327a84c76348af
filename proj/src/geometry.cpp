#include "beliefuse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace beliefuse {

BoundingBox::BoundingBox(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_max)) {
    throw std::invalid_argument("BoundingBox: coordinates must be finite");
  }
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw std::invalid_argument("BoundingBox: box must have positive area");
  }
}

Detection::Detection(std::string image, std::string detector, std::string label,
                     BoundingBox b, double s)
    : image_id(std::move(image)),
      detector_id(std::move(detector)),
      class_label(std::move(label)),
      box(b),
      score(s) {
  if (!std::isfinite(score)) {
    throw std::invalid_argument("Detection: score must be finite");
  }
}

const char* to_string(MatchLabel label) noexcept {
  switch (label) {
    case MatchLabel::kTruePositive:
      return "tp";
    case MatchLabel::kFalsePositive:
      return "fp";
    case MatchLabel::kUndecided:
      return "undecided";
  }
  return "?";
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double ih = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  // a.area() + b.area() is commutative, so iou(a, b) == iou(b, a) bit for bit.
  return inter / (a.area() + b.area() - inter);
}

bool ranks_before(const Detection& a, const Detection& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.detector_id, a.image_id, a.box) < std::tie(b.detector_id, b.image_id, b.box);
}

void sort_by_rank(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), ranks_before);
}

std::vector<AssignedDetection> assign_matches(std::span<const Detection> dets,
                                              std::span<const GroundTruthObject> gts,
                                              double iou_threshold, bool ignore_difficult) {
  std::map<std::string, std::vector<std::size_t>, std::less<>> gts_by_image;
  for (std::size_t i = 0; i < gts.size(); ++i) gts_by_image[gts[i].image_id].push_back(i);
  std::vector<bool> claimed(gts.size(), false);

  std::vector<Detection> ranked(dets.begin(), dets.end());
  sort_by_rank(ranked);

  std::vector<AssignedDetection> out;
  out.reserve(ranked.size());
  for (auto& det : ranked) {
    double best_overlap = 0.0;
    double best_unclaimed = iou_threshold;
    std::ptrdiff_t best_index = -1;
    bool any_duplicate = false;
    bool any_difficult = false;
    if (auto it = gts_by_image.find(det.image_id); it != gts_by_image.end()) {
      for (std::size_t gi : it->second) {
        const double overlap = iou(det.box, gts[gi].box);
        best_overlap = std::max(best_overlap, overlap);
        if (!(overlap > iou_threshold)) continue;
        if (ignore_difficult && gts[gi].difficult) {
          any_difficult = true;
        } else if (claimed[gi]) {
          any_duplicate = true;
        } else if (overlap > best_unclaimed) {
          best_unclaimed = overlap;
          best_index = static_cast<std::ptrdiff_t>(gi);
        }
      }
    }
    MatchOutcome outcome;
    if (best_index >= 0) {
      claimed[static_cast<std::size_t>(best_index)] = true;
      outcome = MatchOutcome::kClaimed;
    } else if (any_difficult) {
      outcome = MatchOutcome::kDifficult;
    } else if (any_duplicate) {
      outcome = MatchOutcome::kDuplicate;
    } else if (best_overlap > 0.0) {
      outcome = MatchOutcome::kPartial;
    } else {
      outcome = MatchOutcome::kNoOverlap;
    }
    out.push_back({std::move(det), outcome});
  }
  return out;
}

std::vector<LabeledDetection> match_detections(std::span<const Detection> dets,
                                               std::span<const GroundTruthObject> gts,
                                               const MatchOptions& options) {
  require_unit_interval_open(options.iou_threshold, "match iou_threshold");
  auto assigned = assign_matches(dets, gts, options.iou_threshold, options.ignore_difficult);
  std::vector<LabeledDetection> out;
  out.reserve(assigned.size());
  for (auto& a : assigned) {
    MatchLabel label = MatchLabel::kUndecided;
    switch (a.outcome) {
      case MatchOutcome::kClaimed:
        label = MatchLabel::kTruePositive;
        break;
      case MatchOutcome::kNoOverlap:
        label = MatchLabel::kFalsePositive;
        break;
      case MatchOutcome::kDuplicate:
        label = options.duplicate_policy == DuplicatePolicy::kFalsePositive
                    ? MatchLabel::kFalsePositive
                    : MatchLabel::kUndecided;
        break;
      case MatchOutcome::kDifficult:
      case MatchOutcome::kPartial:
        label = MatchLabel::kUndecided;
        break;
    }
    out.push_back({std::move(a.detection), label});
  }
  return out;
}

std::vector<std::size_t> nms_indices(std::span<const Detection> dets, double iou_threshold) {
  require_unit_interval_open(iou_threshold, "nms iou_threshold");
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks_before(dets[a], dets[b]); });
  std::vector<bool> suppressed(order.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(order[i]);
    const BoundingBox& box = dets[order[i]].box;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (!suppressed[j] && iou(box, dets[order[j]].box) > iou_threshold) suppressed[j] = true;
    }
  }
  return kept;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
  std::vector<Detection> kept;
  for (std::size_t i : nms_indices(dets, iou_threshold)) kept.push_back(dets[i]);
  return kept;
}

void require_unit_interval_open(double value, const char* what) {
  if (!(value > 0.0 && value < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in (0, 1)");
  }
}

}  // namespace beliefuse

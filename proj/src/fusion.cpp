#include "beliefuse/fusion.hpp"

#include <algorithm>
#include <limits>

#include "beliefuse/errors.hpp"

namespace beliefuse {
namespace {

struct Rescored {
  double score;
  std::optional<FusedVerdict> verdict;
};

std::vector<FusedDetection> suppress(const std::vector<DetectionVector>& vectors,
                                     std::vector<Rescored> rescored, double nms_iou) {
  std::vector<Detection> dets;
  dets.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const Detection& s = vectors[i].subject;
    dets.emplace_back(s.image_id, s.detector_id, s.class_label, s.box, rescored[i].score);
  }
  std::vector<FusedDetection> out;
  for (std::size_t i : nms_indices(dets, nms_iou)) {
    out.push_back({dets[i].image_id, dets[i].class_label, dets[i].detector_id, dets[i].box,
                   dets[i].score, std::move(rescored[i].verdict)});
  }
  return out;
}

const TrustModel& find_model(const TrustModelMap& models, const std::string& detector_id) {
  auto it = models.find(detector_id);
  if (it == models.end()) throw ModelMissing("no trust model for detector '" + detector_id + "'");
  return it->second;
}

}  // namespace

std::vector<DetectionVector> build_detection_vectors(const DetectorDetections& per_detector,
                                                     double overlap_threshold) {
  require_unit_interval_open(overlap_threshold, "vector overlap threshold");
  std::vector<DetectionVector> vectors;
  for (const auto& [subject_detector, subjects] : per_detector) {
    for (const Detection& subject : subjects) {
      DetectionVector v{subject, {}};
      for (const auto& [other_detector, others] : per_detector) {
        if (other_detector == subject_detector) {
          v.slots.emplace(other_detector, subject.score);
          continue;
        }
        std::optional<double> best;
        for (const Detection& other : others) {
          if (iou(subject.box, other.box) > overlap_threshold &&
              (!best || other.score > *best)) {
            best = other.score;
          }
        }
        v.slots.emplace(other_detector, best);
      }
      vectors.push_back(std::move(v));
    }
  }
  return vectors;
}

std::vector<Bpa> slot_bpas(const DetectionVector& vector, const TrustModelMap& models,
                           FusionMethod method, const FusionOptions& options) {
  std::vector<Bpa> bpas;
  bpas.reserve(vector.slots.size());
  for (const auto& [detector_id, score] : vector.slots) {
    if (!score) {
      if (options.absent_policy == AbsentPolicy::kVacuous) {
        bpas.push_back(Bpa::vacuous());
      } else {
        bpas.push_back(find_model(models, detector_id)
                           .score_to_bpa(-std::numeric_limits<double>::infinity()));
      }
      continue;
    }
    const TrustModel& model = find_model(models, detector_id);
    bpas.push_back(method == FusionMethod::kDbf ? model.score_to_bpa(*score)
                                                : model.static_bpa(options.static_recall));
  }
  return bpas;
}

FusedVerdict dbf_fuse(const DetectionVector& vector, const TrustModelMap& models,
                      const FusionOptions& options) {
  const auto bpas = slot_bpas(vector, models, FusionMethod::kDbf, options);
  return FusedVerdict::from_joint(bpas.empty() ? Bpa::vacuous() : combine_all(bpas));
}

FusedVerdict static_dst_fuse(const DetectionVector& vector, const TrustModelMap& models,
                             const FusionOptions& options) {
  const auto bpas = slot_bpas(vector, models, FusionMethod::kStaticDst, options);
  return FusedVerdict::from_joint(bpas.empty() ? Bpa::vacuous() : combine_all(bpas));
}

Bpa smooth(const Bpa& bpa, double epsilon) {
  auto pull = [epsilon](double m) { return std::clamp(m, epsilon, 1.0 - epsilon); };
  return Bpa::from_masses(pull(bpa.target()), pull(bpa.non_target()), pull(bpa.intermediate()));
}

Bpa combine_all_resolving(std::span<const Bpa> bpas, std::size_t* conflicts) {
  if (bpas.empty()) return Bpa::vacuous();
  Bpa acc = bpas.front();
  for (std::size_t k = 1; k < bpas.size(); ++k) {
    try {
      acc = combine(acc, bpas[k]);
    } catch (const TotalConflict&) {
      acc = combine(smooth(acc), smooth(bpas[k]));
      if (conflicts) ++*conflicts;
    }
  }
  return acc;
}

Detection FusedDetection::as_detection(const std::string& method) const {
  return Detection(image_id, method, class_label, box, score);
}

std::vector<FusedDetection> fuse_with_scorer(const DetectorDetections& per_detector,
                                             const VectorScorer& scorer,
                                             const FusionOptions& options, FusionStats* stats) {
  const auto vectors = build_detection_vectors(per_detector, options.vector_iou);
  std::vector<Rescored> rescored;
  rescored.reserve(vectors.size());
  for (const auto& v : vectors) rescored.push_back({scorer(v), std::nullopt});
  if (stats) stats->vectors += vectors.size();
  return suppress(vectors, std::move(rescored), options.nms_iou);
}

std::vector<FusedDetection> fuse_image(const DetectorDetections& per_detector,
                                       const TrustModelMap& models, FusionMethod method,
                                       const FusionOptions& options, FusionStats* stats) {
  const auto vectors = build_detection_vectors(per_detector, options.vector_iou);
  std::size_t conflicts = 0;
  std::vector<Rescored> rescored;
  rescored.reserve(vectors.size());
  for (const auto& v : vectors) {
    const auto bpas = slot_bpas(v, models, method, options);
    const FusedVerdict verdict = FusedVerdict::from_joint(combine_all_resolving(bpas, &conflicts));
    rescored.push_back({verdict.score, verdict});
  }
  if (stats) {
    stats->vectors += vectors.size();
    stats->conflicts_resolved += conflicts;
  }
  return suppress(vectors, std::move(rescored), options.nms_iou);
}

}  // namespace beliefuse

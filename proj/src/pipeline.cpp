#include "beliefuse/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "beliefuse/errors.hpp"

namespace beliefuse {
namespace {

// Runs body(i) for i in [0, n) on up to `jobs` threads. Results must be
// written to per-index slots; the first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    for (unsigned w = 0; w < count; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

using DetectionKey = std::tuple<std::string, std::string, BoundingBox, double>;

DetectionKey key_of(const Detection& d) { return {d.detector_id, d.image_id, d.box, d.score}; }

std::vector<GroundTruthObject> of_class(std::span<const GroundTruthObject> gts,
                                        const std::string& label) {
  std::vector<GroundTruthObject> out;
  for (const auto& g : gts) {
    if (g.class_label == label) out.push_back(g);
  }
  return out;
}

std::vector<Detection> of_class_detector(std::span<const Detection> dets, const std::string& label,
                                         const std::string& detector) {
  std::vector<Detection> out;
  for (const auto& d : dets) {
    if (d.class_label == label && d.detector_id == detector) out.push_back(d);
  }
  return out;
}

std::size_t count_positives(std::span<const GroundTruthObject> gts, const MatchOptions& m) {
  return static_cast<std::size_t>(std::count_if(
      gts.begin(), gts.end(), [&](const auto& g) { return !(m.ignore_difficult && g.difficult); }));
}

// Drops slots of detectors without a calibration model; unusable detectors
// then take no part in the calibrated baselines.
DetectionVector restrict_to(const DetectionVector& v, const PlattModelMap& platt) {
  DetectionVector out{v.subject, {}};
  for (const auto& [id, score] : v.slots) {
    if (platt.contains(id)) out.slots.emplace(id, score);
  }
  return out;
}

bool any_present(const DetectionVector& v) {
  return std::any_of(v.slots.begin(), v.slots.end(), [](const auto& s) { return s.second.has_value(); });
}

template <typename Map>
const typename Map::mapped_type& class_model(const Map& models, const std::string& label,
                                             const char* what) {
  auto it = models.find(label);
  if (it == models.end()) throw ModelMissing(std::string("no ") + what + " for class '" + label + "'");
  return it->second;
}

}  // namespace

const char* method_name(Method m) noexcept {
  switch (m) {
    case Method::kDbf:
      return "dbf";
    case Method::kStaticDst:
      return "static-dst";
    case Method::kPlatt:
      return "platt";
    case Method::kWeightedSum:
      return "ws";
    case Method::kBayes:
      return "bayes";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::kDbf, Method::kStaticDst, Method::kPlatt, Method::kWeightedSum,
                   Method::kBayes}) {
    if (name == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + name + "' (expected dbf, static-dst, platt, ws, bayes)");
}

TrustModelSet TrustModelSet::with_exponent(BpdExponent n) const {
  TrustModelSet out;
  out.warnings = warnings;
  for (const auto& [label, models] : by_class) {
    auto& dst = out.by_class[label];
    for (const auto& [id, m] : models) dst.emplace(id, m.with_exponent(n));
  }
  return out;
}

std::vector<std::string> detector_ids(std::span<const Detection> dets) {
  std::set<std::string> ids;
  for (const auto& d : dets) ids.insert(d.detector_id);
  return {ids.begin(), ids.end()};
}

std::vector<std::string> class_labels(std::span<const GroundTruthObject> gts,
                                      std::span<const Detection> dets) {
  std::set<std::string> labels;
  for (const auto& g : gts) labels.insert(g.class_label);
  for (const auto& d : dets) labels.insert(d.class_label);
  return {labels.begin(), labels.end()};
}

std::vector<ImageClassGroup> group_detections(std::span<const Detection> dets,
                                              std::span<const std::string> detectors) {
  std::map<std::pair<std::string, std::string>, DetectorDetections> groups;
  for (const auto& d : dets) {
    auto& per_detector = groups[{d.class_label, d.image_id}];
    if (per_detector.empty()) {
      for (const auto& id : detectors) per_detector[id];
    }
    per_detector[d.detector_id].push_back(d);
  }
  std::vector<ImageClassGroup> out;
  out.reserve(groups.size());
  for (auto& [key, per_detector] : groups) {
    out.push_back({key.first, key.second, std::move(per_detector)});
  }
  return out;
}

TrustModelSet build_trust_models(const DataSplit& validation, const PipelineOptions& options) {
  const auto detectors = detector_ids(validation.detections);
  const auto labels = class_labels(validation.annotations, validation.detections);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& label : labels) {
    for (const auto& id : detectors) pairs.emplace_back(label, id);
  }

  std::vector<std::optional<TrustModel>> models(pairs.size());
  std::vector<std::string> warnings(pairs.size());
  parallel_for(pairs.size(), options.jobs, [&](std::size_t i) {
    const auto& [label, id] = pairs[i];
    const auto gts = of_class(validation.annotations, label);
    const auto dets = of_class_detector(validation.detections, label, id);
    const std::size_t positives = count_positives(gts, options.match);
    try {
      const auto labeled = match_detections(dets, gts, options.match);
      models[i] = TrustModel::build(labeled, positives, id, label, options.n, options.interpolation);
    } catch (const InsufficientData& e) {
      models[i] = TrustModel::uninformative(id, label, options.n, positives);
      warnings[i] = "detector '" + id + "' class '" + label + "': " + e.what();
    }
  });

  TrustModelSet set;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    set.by_class[pairs[i].first].emplace(pairs[i].second, std::move(*models[i]));
    if (!warnings[i].empty()) set.warnings.push_back(std::move(warnings[i]));
  }
  return set;
}

BaselineSet train_baselines(const DataSplit& validation, const PipelineOptions& options) {
  const auto detectors = detector_ids(validation.detections);
  const auto labels = class_labels(validation.annotations, validation.detections);
  const auto groups = group_detections(validation.detections, detectors);

  BaselineSet set;
  for (const auto& label : labels) {
    const auto gts = of_class(validation.annotations, label);
    std::map<DetectionKey, MatchLabel> label_of;
    PlattModelMap platt;
    std::map<std::string, std::vector<LabeledDetection>> labeled_by_detector;
    for (const auto& id : detectors) {
      auto labeled = match_detections(of_class_detector(validation.detections, label, id), gts,
                                      options.match);
      std::vector<ScoredLabel> scored;
      for (const auto& l : labeled) {
        label_of[key_of(l.detection)] = l.label;
        scored.push_back({l.detection.score, l.label});
      }
      try {
        platt.emplace(id, fit_platt(scored, id, label));
      } catch (const InsufficientData& e) {
        set.warnings.push_back("platt: detector '" + id + "' class '" + label + "': " + e.what());
      }
      labeled_by_detector[id] = std::move(labeled);
    }

    NaiveBayesModel bayes;
    bayes.class_label = label;
    for (const auto& [id, model] : platt) {
      std::vector<ProbabilityLabel> samples;
      for (const auto& l : labeled_by_detector[id]) {
        if (l.label == MatchLabel::kUndecided) continue;
        samples.push_back({model.probability(l.detection.score), l.label == MatchLabel::kTruePositive});
      }
      bayes.likelihoods.emplace(id, fit_likelihood(samples, id));
    }

    std::vector<LabeledVector> training;
    for (const auto& group : groups) {
      if (group.class_label != label) continue;
      for (auto& v : build_detection_vectors(group.per_detector, options.fusion.vector_iou)) {
        const MatchLabel l = label_of.at(key_of(v.subject));
        if (l == MatchLabel::kUndecided || !platt.contains(v.subject.detector_id)) continue;
        training.push_back({restrict_to(v, platt), l == MatchLabel::kTruePositive});
      }
    }
    const auto targets = static_cast<double>(
        std::count_if(training.begin(), training.end(), [](const auto& t) { return t.target; }));
    if (!training.empty()) {
      bayes.prior_target =
          std::clamp(targets / static_cast<double>(training.size()), 1e-6, 1.0 - 1e-6);
    }
    try {
      WeightVector ws = fit_weighted_sum(training, platt, options.svm);
      ws.class_label = label;
      set.weighted_sum.emplace(label, std::move(ws));
    } catch (const InsufficientData& e) {
      set.warnings.push_back("ws: class '" + label + "': " + e.what());
    }
    set.bayes.emplace(label, std::move(bayes));
    set.platt.emplace(label, std::move(platt));
  }
  return set;
}

std::vector<FusedDetection> fuse_split(std::span<const Detection> dets, Method method,
                                       const TrustModelSet* trust, const BaselineSet* baselines,
                                       const PipelineOptions& options, FusionStats* stats) {
  const bool belief = method == Method::kDbf || method == Method::kStaticDst;
  if (belief && !trust) throw ModelMissing("trust models are required for this method");
  if (!belief && !baselines) throw ModelMissing("baseline models are required for this method");

  const auto detectors = detector_ids(dets);
  const auto groups = group_detections(dets, detectors);
  std::vector<std::vector<FusedDetection>> results(groups.size());
  std::vector<FusionStats> group_stats(groups.size());

  parallel_for(groups.size(), options.jobs, [&](std::size_t i) {
    const ImageClassGroup& g = groups[i];
    FusionStats* s = &group_stats[i];
    switch (method) {
      case Method::kDbf:
      case Method::kStaticDst: {
        const auto& models = class_model(trust->by_class, g.class_label, "trust models");
        results[i] = fuse_image(g.per_detector, models,
                                method == Method::kDbf ? FusionMethod::kDbf : FusionMethod::kStaticDst,
                                options.fusion, s);
        break;
      }
      case Method::kPlatt: {
        const auto& platt = class_model(baselines->platt, g.class_label, "Platt models");
        results[i] = fuse_with_scorer(
            g.per_detector,
            [&](const DetectionVector& v) {
              const auto r = restrict_to(v, platt);
              return any_present(r) ? platt_fuse(r, platt) : 0.0;
            },
            options.fusion, s);
        break;
      }
      case Method::kWeightedSum: {
        const auto& platt = class_model(baselines->platt, g.class_label, "Platt models");
        const auto& ws = class_model(baselines->weighted_sum, g.class_label, "weighted-sum model");
        results[i] = fuse_with_scorer(
            g.per_detector,
            [&](const DetectionVector& v) { return ws.score(restrict_to(v, platt), platt); },
            options.fusion, s);
        break;
      }
      case Method::kBayes: {
        const auto& platt = class_model(baselines->platt, g.class_label, "Platt models");
        const auto& nb = class_model(baselines->bayes, g.class_label, "naive Bayes model");
        results[i] = fuse_with_scorer(
            g.per_detector,
            [&](const DetectionVector& v) {
              return bayes_fuse(restrict_to(v, platt), platt, nb.likelihoods, nb.prior_target);
            },
            options.fusion, s);
        break;
      }
    }
  });

  std::vector<FusedDetection> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (stats) {
      stats->vectors += group_stats[i].vectors;
      stats->conflicts_resolved += group_stats[i].conflicts_resolved;
    }
    out.insert(out.end(), std::make_move_iterator(results[i].begin()),
               std::make_move_iterator(results[i].end()));
  }
  return out;
}

std::vector<Detection> as_detections(std::span<const FusedDetection> fused,
                                     const std::string& method) {
  std::vector<Detection> out;
  out.reserve(fused.size());
  for (const auto& f : fused) out.push_back(f.as_detection(method));
  return out;
}

std::vector<Detection> filter_detectors(std::span<const Detection> dets,
                                        std::span<const std::string> keep) {
  std::vector<Detection> out;
  for (const auto& d : dets) {
    if (std::find(keep.begin(), keep.end(), d.detector_id) != keep.end()) out.push_back(d);
  }
  return out;
}

}  // namespace beliefuse

#include "beliefuse/eval.hpp"

#include <algorithm>
#include <set>

#include "beliefuse/errors.hpp"

namespace beliefuse {

double ap_from_curve(std::span<const PrSample> curve, ApInterpolation interpolation) {
  if (curve.empty()) return 0.0;
  if (interpolation == ApInterpolation::kVoc11) {
    double sum = 0.0;
    for (int k = 0; k <= 10; ++k) {
      const double t = k / 10.0;
      double best = 0.0;
      for (const auto& s : curve) {
        if (s.recall >= t) best = std::max(best, s.precision);
      }
      sum += best;
    }
    return sum / 11.0;
  }

  // Sentinels at recall 0 and precision 0 close the curve on both ends.
  std::vector<double> recall{0.0};
  std::vector<double> precision{0.0};
  for (const auto& s : curve) {
    recall.push_back(s.recall);
    precision.push_back(s.precision);
  }
  recall.push_back(recall.back());
  precision.push_back(0.0);
  for (std::size_t i = precision.size() - 1; i-- > 0;) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double ap = 0.0;
  for (std::size_t i = 1; i < recall.size(); ++i) {
    if (recall[i] != recall[i - 1]) ap += (recall[i] - recall[i - 1]) * precision[i];
  }
  return ap;
}

ClassEval evaluate_class(std::span<const Detection> dets, std::span<const GroundTruthObject> gts,
                         const EvalOptions& options) {
  require_unit_interval_open(options.iou_threshold, "eval iou_threshold");
  ClassEval result;
  if (!gts.empty()) result.class_label = gts.front().class_label;
  for (const auto& g : gts) {
    if (!(options.ignore_difficult && g.difficult)) ++result.num_gt;
  }
  if (result.num_gt == 0) throw NoGroundTruth("no non-difficult ground truth");

  result.num_detections = dets.size();
  const auto assigned = assign_matches(dets, gts, options.iou_threshold, options.ignore_difficult);
  for (const auto& a : assigned) {
    if (a.outcome == MatchOutcome::kDifficult) continue;
    (a.outcome == MatchOutcome::kClaimed ? result.tp : result.fp) += 1;
    result.curve.push_back(
        {static_cast<double>(result.tp) / static_cast<double>(result.num_gt),
         static_cast<double>(result.tp) / static_cast<double>(result.tp + result.fp)});
  }
  result.ap = ap_from_curve(result.curve, options.interpolation);
  return result;
}

double average_precision(std::span<const Detection> dets, std::span<const GroundTruthObject> gts,
                         const EvalOptions& options) {
  return evaluate_class(dets, gts, options).ap;
}

EvalReport evaluate(std::string method, std::span<const Detection> dets,
                    std::span<const GroundTruthObject> gts, const EvalOptions& options) {
  std::map<std::string, std::vector<GroundTruthObject>> gts_by_class;
  for (const auto& g : gts) gts_by_class[g.class_label].push_back(g);
  std::map<std::string, std::vector<Detection>> dets_by_class;
  for (const auto& d : dets) dets_by_class[d.class_label].push_back(d);

  EvalReport report;
  report.method = std::move(method);
  for (const auto& [label, class_gts] : gts_by_class) {
    const bool any_counted = std::any_of(class_gts.begin(), class_gts.end(), [&](const auto& g) {
      return !(options.ignore_difficult && g.difficult);
    });
    if (!any_counted) continue;
    static const std::vector<Detection> kNone;
    auto it = dets_by_class.find(label);
    ClassEval ce = evaluate_class(it == dets_by_class.end() ? kNone : it->second, class_gts, options);
    ce.class_label = label;
    report.classes.emplace(label, std::move(ce));
  }
  if (!report.classes.empty()) {
    double sum = 0.0;
    for (const auto& [_, ce] : report.classes) sum += ce.ap;
    report.mean_ap = sum / static_cast<double>(report.classes.size());
  }
  return report;
}

std::map<std::string, EvalReport> evaluate_methods(
    const std::map<std::string, std::vector<Detection>>& methods,
    std::span<const GroundTruthObject> gts, const EvalOptions& options) {
  std::map<std::string, EvalReport> out;
  for (const auto& [name, dets] : methods) out.emplace(name, evaluate(name, dets, gts, options));
  return out;
}

}  // namespace beliefuse

#include "beliefuse/trust_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "beliefuse/errors.hpp"

namespace beliefuse {

BpdExponent::BpdExponent(double n) : n_(n) {
  if (std::isnan(n) || !(n > 0.0)) {
    throw std::invalid_argument("best-possible-detector exponent must be > 0 or inf");
  }
}

BpdExponent BpdExponent::parse(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF") return infinite();
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value) || !(value > 0.0)) {
    throw ConfigError("invalid exponent '" + text + "': expected a positive number or 'inf'");
  }
  return BpdExponent(value);
}

std::string BpdExponent::to_string() const {
  if (is_infinite()) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << n_;
  return os.str();
}

double bpd_precision(double recall, BpdExponent n) {
  if (!(recall >= 0.0 && recall <= 1.0)) {
    throw std::invalid_argument("bpd_precision: recall must lie in [0, 1]");
  }
  if (n.is_infinite()) return recall < 1.0 ? 1.0 : 0.0;
  return 1.0 - std::pow(recall, n.value());
}

std::vector<PrPoint> build_pr_table(std::span<const LabeledDetection> labeled,
                                    std::size_t num_gt_positives) {
  if (num_gt_positives == 0) throw InsufficientData("no ground-truth positives");

  std::vector<const LabeledDetection*> decided;
  for (const auto& l : labeled) {
    if (l.label != MatchLabel::kUndecided) decided.push_back(&l);
  }
  std::stable_sort(decided.begin(), decided.end(), [](const auto* a, const auto* b) {
    return ranks_before(a->detection, b->detection);
  });

  std::vector<PrPoint> table;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < decided.size();) {
    const double threshold = decided[i]->detection.score;
    for (; i < decided.size() && decided[i]->detection.score == threshold; ++i) {
      if (decided[i]->label == MatchLabel::kTruePositive) {
        ++tp;
      } else {
        ++fp;
      }
    }
    const double recall =
        std::min(1.0, static_cast<double>(tp) / static_cast<double>(num_gt_positives));
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    table.push_back({threshold, recall, precision, precision});
  }
  if (tp == 0) throw InsufficientData("no true positives among validation detections");

  for (std::size_t i = table.size() - 1; i-- > 0;) {
    table[i].precision = std::max(table[i].precision, table[i + 1].precision);
  }
  return table;
}

Bpa assign_bpa(double recall, double precision, BpdExponent n) {
  const double best = bpd_precision(recall, n);
  return Bpa::from_masses(precision, 1.0 - std::max(best, precision),
                          std::max(best - precision, 0.0));
}

TrustModel::TrustModel(std::string detector_id, std::string class_label,
                       std::vector<PrPoint> table, BpdExponent n,
                       std::size_t num_validation_positives, ScoreInterpolation interpolation)
    : detector_id_(std::move(detector_id)),
      class_label_(std::move(class_label)),
      table_(std::move(table)),
      n_(n),
      num_validation_positives_(num_validation_positives),
      interpolation_(interpolation) {
  if (table_.empty()) throw std::invalid_argument("TrustModel: empty table");
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const PrPoint& row = table_[i];
    if (!std::isfinite(row.score_threshold) || !in_unit(row.recall) ||
        !in_unit(row.precision_raw) || !in_unit(row.precision)) {
      throw std::invalid_argument("TrustModel: table values out of range");
    }
    if (i > 0) {
      const PrPoint& prev = table_[i - 1];
      if (!(row.score_threshold < prev.score_threshold) || row.recall < prev.recall ||
          row.precision > prev.precision) {
        throw std::invalid_argument("TrustModel: table is not monotone");
      }
    }
  }
}

TrustModel TrustModel::uninformative(std::string detector_id, std::string class_label,
                                     BpdExponent n, std::size_t num_validation_positives) {
  TrustModel m;
  m.detector_id_ = std::move(detector_id);
  m.class_label_ = std::move(class_label);
  m.n_ = n;
  m.num_validation_positives_ = num_validation_positives;
  return m;
}

TrustModel TrustModel::build(std::span<const LabeledDetection> labeled,
                             std::size_t num_gt_positives, std::string detector_id,
                             std::string class_label, BpdExponent n,
                             ScoreInterpolation interpolation) {
  return TrustModel(std::move(detector_id), std::move(class_label),
                    build_pr_table(labeled, num_gt_positives), n, num_gt_positives,
                    interpolation);
}

TrustModel TrustModel::with_exponent(BpdExponent n) const {
  TrustModel copy = *this;
  copy.n_ = n;
  return copy;
}

OperatingPoint TrustModel::operating_point(double score) const {
  if (table_.empty()) throw std::logic_error("operating_point on an uninformative model");
  // Number of rows whose threshold exceeds the score.
  const auto above = static_cast<std::size_t>(
      std::partition_point(table_.begin(), table_.end(),
                           [score](const PrPoint& row) { return row.score_threshold > score; }) -
      table_.begin());
  if (above == table_.size()) return {1.0, table_.back().precision};
  const PrPoint& row = table_[above];
  if (interpolation_ == ScoreInterpolation::kStep || above == 0 ||
      row.score_threshold == score) {
    return {row.recall, row.precision};
  }
  const PrPoint& upper = table_[above - 1];
  const double frac = (upper.score_threshold - score) / (upper.score_threshold - row.score_threshold);
  return {upper.recall + frac * (row.recall - upper.recall),
          upper.precision + frac * (row.precision - upper.precision)};
}

Bpa TrustModel::score_to_bpa(double score) const {
  if (!informative()) return Bpa::vacuous();
  const OperatingPoint op = operating_point(score);
  return assign_bpa(op.recall, op.precision, n_);
}

Bpa TrustModel::static_bpa(double target_recall) const {
  if (!informative()) return Bpa::vacuous();
  const PrPoint* nearest = &table_.front();
  for (const PrPoint& row : table_) {
    if (std::abs(row.recall - target_recall) < std::abs(nearest->recall - target_recall)) {
      nearest = &row;
    }
  }
  return assign_bpa(nearest->recall, nearest->precision, n_);
}

}  // namespace beliefuse

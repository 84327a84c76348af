#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "beliefuse/dst.hpp"
#include "beliefuse/geometry.hpp"

namespace beliefuse {

// Exponent n of the best-possible-detector curve p(r) = 1 - r^n. Either a
// finite positive real or +infinity (the perfect detector).
class BpdExponent {
 public:
  explicit BpdExponent(double n);
  static BpdExponent infinite() { return BpdExponent(std::numeric_limits<double>::infinity()); }
  // Accepts a positive decimal number or the literal "inf".
  static BpdExponent parse(const std::string& text);

  double value() const noexcept { return n_; }
  bool is_infinite() const noexcept { return n_ == std::numeric_limits<double>::infinity(); }
  std::string to_string() const;

  friend bool operator==(const BpdExponent&, const BpdExponent&) = default;

 private:
  double n_;
};

inline constexpr double kDefaultBpdExponent = 2.0;

double bpd_precision(double recall, BpdExponent n);

struct PrPoint {
  double score_threshold;
  double recall;
  double precision_raw;
  double precision;  // interpolated envelope, non-increasing down the table

  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

// One row per distinct score among the TruePositive/FalsePositive detections,
// in descending score order. Undecided detections are dropped. Throws
// InsufficientData if num_gt_positives is zero or no TruePositive is present.
std::vector<PrPoint> build_pr_table(std::span<const LabeledDetection> labeled,
                                    std::size_t num_gt_positives);

// Assignment rule at a (recall, precision) operating point:
// m(T) = p, m(I) = max(bpd - p, 0), m(notT) = 1 - max(bpd, p).
Bpa assign_bpa(double recall, double precision, BpdExponent n);

enum class ScoreInterpolation { kStep, kLinear };

struct OperatingPoint {
  double recall;
  double precision;
};

class TrustModel {
 public:
  // Validates the table: nonempty, strictly descending thresholds,
  // non-decreasing recall, non-increasing envelope, all values in [0, 1].
  TrustModel(std::string detector_id, std::string class_label, std::vector<PrPoint> table,
             BpdExponent n, std::size_t num_validation_positives,
             ScoreInterpolation interpolation = ScoreInterpolation::kStep);

  // Stand-in for a detector whose validation data could not support a table;
  // every score maps to the vacuous assignment.
  static TrustModel uninformative(std::string detector_id, std::string class_label, BpdExponent n,
                                  std::size_t num_validation_positives);

  static TrustModel build(std::span<const LabeledDetection> labeled, std::size_t num_gt_positives,
                          std::string detector_id, std::string class_label, BpdExponent n,
                          ScoreInterpolation interpolation = ScoreInterpolation::kStep);

  const std::string& detector_id() const noexcept { return detector_id_; }
  const std::string& class_label() const noexcept { return class_label_; }
  const std::vector<PrPoint>& table() const noexcept { return table_; }
  BpdExponent exponent() const noexcept { return n_; }
  std::size_t num_validation_positives() const noexcept { return num_validation_positives_; }
  ScoreInterpolation interpolation() const noexcept { return interpolation_; }
  bool informative() const noexcept { return !table_.empty(); }

  TrustModel with_exponent(BpdExponent n) const;

  // Scores at or above the top threshold clamp to the first row; scores below
  // the lowest threshold map to recall 1 at the last row's precision.
  OperatingPoint operating_point(double score) const;

  Bpa score_to_bpa(double score) const;

  // Assignment evaluated at the table row whose recall is closest to
  // target_recall (first such row on ties), independent of any score.
  Bpa static_bpa(double target_recall = 0.2) const;

 private:
  TrustModel() = default;

  std::string detector_id_;
  std::string class_label_;
  std::vector<PrPoint> table_;
  BpdExponent n_{kDefaultBpdExponent};
  std::size_t num_validation_positives_ = 0;
  ScoreInterpolation interpolation_ = ScoreInterpolation::kStep;
};

}  // namespace beliefuse

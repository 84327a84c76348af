#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "beliefuse/fusion.hpp"
#include "beliefuse/geometry.hpp"

namespace beliefuse {

struct ScoredLabel {
  double score;
  MatchLabel label;
};

// Sigmoid calibration: P(target | score) = 1 / (1 + exp(a * score + b)).
struct PlattModel {
  std::string detector_id;
  std::string class_label;
  double a = 0.0;
  double b = 0.0;
  bool converged = false;
  int iterations = 0;

  double probability(double score) const noexcept;
};

using PlattModelMap = std::map<std::string, PlattModel, std::less<>>;

// Regularized maximum-likelihood fit with smoothed targets, solved by Newton's
// method with backtracking (at most 100 iterations, stopping once both
// gradient components fall below 1e-10). Undecided entries are ignored.
// Throws InsufficientData without at least one TP and one FP.
PlattModel fit_platt(std::span<const ScoredLabel> labeled, std::string detector_id = {},
                     std::string class_label = {});

// Max-fusion: the largest calibrated probability over the present slots.
double platt_fuse(const DetectionVector& vector, const PlattModelMap& platt);

// Calibrated probabilities for the given detector order; absent slots are 0.
std::vector<double> platt_features(const DetectionVector& vector,
                                   std::span<const std::string> detector_ids,
                                   const PlattModelMap& platt);

struct LabeledVector {
  DetectionVector vector;
  bool target;
};

struct SvmOptions {
  double c = 1.0;
  int max_epochs = 1000;
  double tolerance = 1e-4;
  std::uint32_t seed = 1;
};

// Linear score w . x + bias over calibrated slot probabilities.
struct WeightVector {
  std::string class_label;
  std::vector<std::string> detector_ids;
  std::vector<double> weights;
  double bias = 0.0;
  double c = 1.0;
  int epochs = 0;

  double score(std::span<const double> features) const;
  double score(const DetectionVector& vector, const PlattModelMap& platt) const;
};

// L2-regularized hinge-loss SVM trained by dual coordinate descent with a
// seeded visiting order. The bias is an extra constant feature. Detector
// columns are the sorted union of slot keys. Throws InsufficientData if a
// label is missing or every feature vector is zero.
WeightVector fit_weighted_sum(std::span<const LabeledVector> vectors, const PlattModelMap& platt,
                              const SvmOptions& options = {});

inline constexpr std::size_t kLikelihoodBins = 32;

// Per-detector class-conditional histograms over calibrated probability.
struct ScoreLikelihood {
  std::string detector_id;
  double smoothing = 1.0;
  std::vector<double> target;      // sums to 1
  std::vector<double> non_target;  // sums to 1

  std::size_t bin_count() const noexcept { return target.size(); }
  std::size_t bin(double probability) const noexcept;
  double log_ratio(double probability) const;
};

struct ProbabilityLabel {
  double probability;
  bool target;
};

// Laplace-smoothed histograms (smoothing added to every bin).
ScoreLikelihood fit_likelihood(std::span<const ProbabilityLabel> samples, std::string detector_id,
                               std::size_t bins = kLikelihoodBins, double smoothing = 1.0);

using LikelihoodMap = std::map<std::string, ScoreLikelihood, std::less<>>;

struct NaiveBayesModel {
  std::string class_label;
  double prior_target = 0.5;
  LikelihoodMap likelihoods;
};

// Log posterior odds: log prior odds plus the per-slot log likelihood ratios of
// the present slots. Throws ModelMissing for a present slot lacking a model.
double bayes_fuse(const DetectionVector& vector, const PlattModelMap& platt,
                  const LikelihoodMap& likelihoods, double prior_target);

}  // namespace beliefuse

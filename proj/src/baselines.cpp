#include "beliefuse/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "beliefuse/errors.hpp"

namespace beliefuse {
namespace {

constexpr int kPlattMaxIterations = 100;
constexpr double kPlattGradientTolerance = 1e-10;
constexpr double kPlattMinStep = 1e-10;
constexpr double kPlattHessianRidge = 1e-12;

// Negative log-likelihood term of one sample, stable for either sign of z.
double nll_term(double target, double z) {
  return z >= 0.0 ? target * z + std::log1p(std::exp(-z))
                  : (target - 1.0) * z + std::log1p(std::exp(z));
}

template <typename Map>
const typename Map::mapped_type& find_or_throw(const Map& models, const std::string& key,
                                               const char* what) {
  auto it = models.find(key);
  if (it == models.end()) {
    throw ModelMissing(std::string("no ") + what + " for detector '" + key + "'");
  }
  return it->second;
}

}  // namespace

double PlattModel::probability(double score) const noexcept {
  const double z = a * score + b;
  return z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

PlattModel fit_platt(std::span<const ScoredLabel> labeled, std::string detector_id,
                     std::string class_label) {
  std::vector<double> scores;
  std::vector<bool> positive;
  double num_pos = 0.0;
  double num_neg = 0.0;
  for (const auto& s : labeled) {
    if (s.label == MatchLabel::kUndecided) continue;
    const bool pos = s.label == MatchLabel::kTruePositive;
    scores.push_back(s.score);
    positive.push_back(pos);
    (pos ? num_pos : num_neg) += 1.0;
  }
  if (num_pos == 0.0 || num_neg == 0.0) {
    throw InsufficientData("Platt scaling needs both true and false positives");
  }

  const double hi_target = (num_pos + 1.0) / (num_pos + 2.0);
  const double lo_target = 1.0 / (num_neg + 2.0);
  std::vector<double> targets(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) targets[i] = positive[i] ? hi_target : lo_target;

  auto objective = [&](double a, double b) {
    double value = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) value += nll_term(targets[i], scores[i] * a + b);
    return value;
  };

  PlattModel model{std::move(detector_id), std::move(class_label), 0.0,
                   std::log((num_neg + 1.0) / (num_pos + 1.0)), false, 0};
  double value = objective(model.a, model.b);
  for (int it = 0; it < kPlattMaxIterations; ++it) {
    model.iterations = it + 1;
    double h11 = kPlattHessianRidge;
    double h22 = kPlattHessianRidge;
    double h21 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double z = scores[i] * model.a + model.b;
      double p;
      double q;
      if (z >= 0.0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = targets[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kPlattGradientTolerance && std::abs(g2) < kPlattGradientTolerance) {
      model.converged = true;
      break;
    }
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double descent = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= kPlattMinStep) {
      const double na = model.a + step * da;
      const double nb = model.b + step * db;
      const double nv = objective(na, nb);
      if (nv < value + 1e-4 * step * descent) {
        model.a = na;
        model.b = nb;
        value = nv;
        break;
      }
      step /= 2.0;
    }
    // Line search can no longer make progress: the iterate is at the optimum
    // to machine precision.
    if (step < kPlattMinStep) {
      model.converged = std::abs(g1) + std::abs(g2) < 1e-6 * static_cast<double>(scores.size());
      break;
    }
  }
  return model;
}

double platt_fuse(const DetectionVector& vector, const PlattModelMap& platt) {
  double best = -1.0;
  for (const auto& [detector_id, score] : vector.slots) {
    if (!score) continue;
    best = std::max(best, find_or_throw(platt, detector_id, "Platt model").probability(*score));
  }
  if (best < 0.0) throw std::invalid_argument("platt_fuse: no present slot");
  return best;
}

std::vector<double> platt_features(const DetectionVector& vector,
                                   std::span<const std::string> detector_ids,
                                   const PlattModelMap& platt) {
  std::vector<double> features;
  features.reserve(detector_ids.size());
  for (const auto& id : detector_ids) {
    auto it = vector.slots.find(id);
    if (it == vector.slots.end() || !it->second) {
      features.push_back(0.0);
    } else {
      features.push_back(find_or_throw(platt, id, "Platt model").probability(*it->second));
    }
  }
  return features;
}

double WeightVector::score(std::span<const double> features) const {
  if (features.size() != weights.size()) {
    throw std::invalid_argument("WeightVector: feature dimension mismatch");
  }
  double s = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * features[j];
  return s;
}

double WeightVector::score(const DetectionVector& vector, const PlattModelMap& platt) const {
  return score(platt_features(vector, detector_ids, platt));
}

WeightVector fit_weighted_sum(std::span<const LabeledVector> vectors, const PlattModelMap& platt,
                              const SvmOptions& options) {
  std::set<std::string> ids;
  bool any_pos = false;
  bool any_neg = false;
  for (const auto& lv : vectors) {
    for (const auto& [id, _] : lv.vector.slots) ids.insert(id);
    (lv.target ? any_pos : any_neg) = true;
  }
  if (!any_pos || !any_neg) throw InsufficientData("weighted sum needs both labels");

  WeightVector model;
  model.detector_ids.assign(ids.begin(), ids.end());
  model.c = options.c;
  const std::size_t dim = model.detector_ids.size();

  // Rows are [features..., 1] with the trailing constant carrying the bias.
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  bool any_nonzero = false;
  for (const auto& lv : vectors) {
    auto x = platt_features(lv.vector, model.detector_ids, platt);
    any_nonzero = any_nonzero || std::any_of(x.begin(), x.end(), [](double v) { return v != 0.0; });
    x.push_back(1.0);
    rows.push_back(std::move(x));
    labels.push_back(lv.target ? 1.0 : -1.0);
  }
  if (!any_nonzero) throw InsufficientData("weighted sum: every feature vector is zero");

  const std::size_t n = rows.size();
  std::vector<double> w(dim + 1, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> diag(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : rows[i]) diag[i] += v * v;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937 rng(options.seed);

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    model.epochs = epoch + 1;
    // Fisher-Yates with an explicit modulus keeps the order identical across
    // standard library implementations.
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
      double margin = 0.0;
      for (std::size_t j = 0; j <= dim; ++j) margin += w[j] * rows[i][j];
      const double g = labels[i] * margin - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] == options.c) {
        pg = std::max(g, 0.0);
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / diag[i], 0.0, options.c);
      const double delta = (alpha[i] - old) * labels[i];
      for (std::size_t j = 0; j <= dim; ++j) w[j] += delta * rows[i][j];
    }
    if (pg_max - pg_min < options.tolerance) break;
  }
  model.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(dim));
  model.bias = w[dim];
  return model;
}

std::size_t ScoreLikelihood::bin(double probability) const noexcept {
  const std::size_t bins = bin_count();
  const double clamped = std::clamp(probability, 0.0, 1.0);
  return std::min(bins - 1, static_cast<std::size_t>(clamped * static_cast<double>(bins)));
}

double ScoreLikelihood::log_ratio(double probability) const {
  if (target.empty() || target.size() != non_target.size()) {
    throw std::logic_error("ScoreLikelihood: histograms not initialized");
  }
  const std::size_t k = bin(probability);
  return std::log(target[k]) - std::log(non_target[k]);
}

ScoreLikelihood fit_likelihood(std::span<const ProbabilityLabel> samples, std::string detector_id,
                               std::size_t bins, double smoothing) {
  if (bins == 0 || !(smoothing > 0.0)) {
    throw std::invalid_argument("fit_likelihood: need bins > 0 and smoothing > 0");
  }
  ScoreLikelihood model{std::move(detector_id), smoothing, std::vector<double>(bins, smoothing),
                        std::vector<double>(bins, smoothing)};
  for (const auto& s : samples) {
    (s.target ? model.target : model.non_target)[model.bin(s.probability)] += 1.0;
  }
  for (auto* hist : {&model.target, &model.non_target}) {
    double total = 0.0;
    for (double v : *hist) total += v;
    for (double& v : *hist) v /= total;
  }
  return model;
}

double bayes_fuse(const DetectionVector& vector, const PlattModelMap& platt,
                  const LikelihoodMap& likelihoods, double prior_target) {
  if (!(prior_target > 0.0 && prior_target < 1.0)) {
    throw std::invalid_argument("bayes_fuse: prior must lie in (0, 1)");
  }
  double log_odds = std::log(prior_target / (1.0 - prior_target));
  for (const auto& [detector_id, score] : vector.slots) {
    if (!score) continue;
    const double p = find_or_throw(platt, detector_id, "Platt model").probability(*score);
    log_odds += find_or_throw(likelihoods, detector_id, "likelihood model").log_ratio(p);
  }
  return log_odds;
}

}  // namespace beliefuse

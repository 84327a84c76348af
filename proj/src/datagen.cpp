#include "beliefuse/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "beliefuse/errors.hpp"

namespace beliefuse {
namespace {

using Engine = std::mt19937_64;

Engine stream(std::uint64_t seed, std::uint64_t image, std::uint64_t channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(image), static_cast<std::uint32_t>(channel)};
  return Engine(seq);
}

double uniform(Engine& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double sample_score(Engine& rng, const ScoreDistribution& d) {
  const double s = std::normal_distribution<double>(d.mean, d.stddev)(rng);
  return std::clamp(s, kScoreMin, kScoreMax);
}

BoundingBox random_box(Engine& rng, const GeneratorConfig& c) {
  const double w = uniform(rng, c.min_box_side, c.max_box_side);
  const double h = uniform(rng, c.min_box_side, c.max_box_side);
  const double x = uniform(rng, 0.0, c.canvas_width - w);
  const double y = uniform(rng, 0.0, c.canvas_height - h);
  return BoundingBox(x, y, x + w, y + h);
}

BoundingBox jitter_box(Engine& rng, const BoundingBox& b, double sigma) {
  if (sigma <= 0.0) return b;
  std::normal_distribution<double> noise(0.0, sigma);
  double x0 = b.x_min() + noise(rng);
  double y0 = b.y_min() + noise(rng);
  double x1 = b.x_max() + noise(rng);
  double y1 = b.y_max() + noise(rng);
  if (x1 - x0 < 1.0) x1 = x0 + 1.0;
  if (y1 - y0 < 1.0) y1 = y0 + 1.0;
  return BoundingBox(x0, y0, x1, y1);
}

void validate(const GeneratorConfig& c) {
  if (c.profiles.empty()) throw ConfigError("generate: at least one detector profile is required");
  if (c.num_images < 2) throw ConfigError("generate: need at least 2 images");
  if (c.classes.empty()) throw ConfigError("generate: need at least one class");
  if (c.min_objects > c.max_objects) throw ConfigError("generate: min_objects > max_objects");
  if (c.min_distractors > c.max_distractors) {
    throw ConfigError("generate: min_distractors > max_distractors");
  }
  if (!(c.min_box_side > 0.0) || c.min_box_side > c.max_box_side ||
      c.max_box_side >= std::min(c.canvas_width, c.canvas_height)) {
    throw ConfigError("generate: box side range does not fit the canvas");
  }
  if (static_cast<double>(c.max_objects + c.max_distractors) * c.min_box_side * c.min_box_side >
      c.canvas_width * c.canvas_height) {
    throw ConfigError("generate: too many objects for the canvas");
  }
  if (c.num_validation_images >= c.num_images) {
    throw ConfigError("generate: validation split must leave test images");
  }
  for (const auto& p : c.profiles) {
    auto bad_rate = [](double r) { return !(r >= 0.0 && r <= 1.0); };
    if (p.detector_id.empty()) throw ConfigError("generate: profile without detector_id");
    if (bad_rate(p.detection_rate) || !(p.fp_rate >= 0.0) || !(p.localization_jitter >= 0.0) ||
        !(p.validation_rate_scale > 0.0) || !(p.tp_score.stddev >= 0.0) ||
        !(p.fp_score.stddev >= 0.0) ||
        bad_rate(p.distractor_rate) || !(p.distractor_score.stddev >= 0.0) ||
        (p.easy && (p.easy->modulus == 0 || bad_rate(p.easy->detection_rate)))) {
      throw ConfigError("generate: invalid profile '" + p.detector_id + "'");
    }
  }
}

}  // namespace

SyntheticDataset generate(const GeneratorConfig& config) {
  validate(config);
  constexpr int kPlacementAttempts = 500;
  const std::size_t num_validation =
      config.num_validation_images == 0 ? config.num_images / 2 : config.num_validation_images;

  SyntheticDataset data;
  data.seed = config.seed;
  std::size_t object_index = 0;
  for (std::size_t img = 0; img < config.num_images; ++img) {
    const bool is_validation = img < num_validation;
    SyntheticSplit& split = is_validation ? data.validation : data.test;
    char name[32];
    std::snprintf(name, sizeof(name), "img_%05zu", img);
    const std::string image_id = name;
    split.image_ids.push_back(image_id);

    Engine scene = stream(config.seed, img, 0);
    const auto count = std::uniform_int_distribution<std::size_t>(config.min_objects,
                                                                  config.max_objects)(scene);
    std::vector<GroundTruthObject> objects;
    std::vector<BoundingBox> placed_boxes;
    auto place = [&]() -> BoundingBox {
      for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
        BoundingBox box = random_box(scene, config);
        const bool disjoint = std::all_of(placed_boxes.begin(), placed_boxes.end(),
                                          [&](const auto& b) { return iou(b, box) == 0.0; });
        if (!disjoint) continue;
        placed_boxes.push_back(box);
        return box;
      }
      throw ConfigError("generate: could not place disjoint boxes on " + image_id);
    };
    for (std::size_t k = 0; k < count; ++k) {
      const BoundingBox box = place();
      const auto cls =
          std::uniform_int_distribution<std::size_t>(0, config.classes.size() - 1)(scene);
      objects.push_back({image_id, config.classes[cls], box, false});
    }
    const auto num_distractors = std::uniform_int_distribution<std::size_t>(
        config.min_distractors, config.max_distractors)(scene);
    std::vector<std::pair<BoundingBox, std::string>> distractors;
    for (std::size_t k = 0; k < num_distractors; ++k) {
      const BoundingBox box = place();
      const auto cls =
          std::uniform_int_distribution<std::size_t>(0, config.classes.size() - 1)(scene);
      distractors.emplace_back(box, config.classes[cls]);
    }

    for (std::size_t d = 0; d < config.profiles.size(); ++d) {
      const SyntheticDetectorProfile& p = config.profiles[d];
      Engine rng = stream(config.seed, img, d + 1);
      const double scale = is_validation ? p.validation_rate_scale : 1.0;
      for (std::size_t k = 0; k < objects.size(); ++k) {
        const bool easy = p.easy && (object_index + k) % p.easy->modulus == p.easy->residue;
        const double rate = std::min(1.0, scale * (easy ? p.easy->detection_rate : p.detection_rate));
        if (!std::bernoulli_distribution(rate)(rng)) continue;
        const BoundingBox box = jitter_box(rng, objects[k].box, p.localization_jitter);
        const double score = sample_score(rng, easy ? p.easy->tp_score : p.tp_score);
        split.detections.emplace_back(image_id, p.detector_id, objects[k].class_label, box, score);
      }
      for (const auto& [dbox, dclass] : distractors) {
        if (!std::bernoulli_distribution(p.distractor_rate)(rng)) continue;
        const BoundingBox box = jitter_box(rng, dbox, p.localization_jitter);
        split.detections.emplace_back(image_id, p.detector_id, dclass, box,
                                      sample_score(rng, p.distractor_score));
      }
      const int false_positives =
          p.fp_rate > 0.0 ? std::poisson_distribution<int>(p.fp_rate)(rng) : 0;
      for (int f = 0; f < false_positives; ++f) {
        const BoundingBox box = random_box(rng, config);
        const auto cls =
            std::uniform_int_distribution<std::size_t>(0, config.classes.size() - 1)(rng);
        split.detections.emplace_back(image_id, p.detector_id, config.classes[cls], box,
                                      sample_score(rng, p.fp_score));
      }
    }
    object_index += objects.size();
    split.annotations.insert(split.annotations.end(), objects.begin(), objects.end());
  }
  return data;
}

GeneratorConfig complementary_fixture(std::uint64_t seed, std::size_t num_images) {
  GeneratorConfig c;
  c.seed = seed;
  c.num_images = num_images;
  c.min_objects = 1;
  c.max_objects = 4;
  c.classes = {"car", "person"};
  c.min_distractors = 0;
  c.max_distractors = 3;
  const char* ids[] = {"det_a", "det_b", "det_c"};
  for (std::size_t d = 0; d < 3; ++d) {
    SyntheticDetectorProfile p;
    p.detector_id = ids[d];
    p.tp_score = {4.5, 1.5};
    p.fp_score = {3.5, 1.5};
    p.detection_rate = 0.55;
    p.fp_rate = 1.5;
    p.localization_jitter = 3.0;
    p.easy = EasySubset{3, d, 0.95, {7.0, 1.2}};
    p.distractor_rate = 0.6;
    p.distractor_score = {5.0, 1.2};
    c.profiles.push_back(p);
  }
  return c;
}

GeneratorConfig biased_fixture(std::uint64_t seed, std::size_t num_images) {
  GeneratorConfig c = complementary_fixture(seed, num_images);
  c.profiles[0].validation_rate_scale = 1.2;
  return c;
}

}  // namespace beliefuse

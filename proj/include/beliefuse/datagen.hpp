#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beliefuse/geometry.hpp"

namespace beliefuse {

// Normal distribution clipped to [kScoreMin, kScoreMax].
struct ScoreDistribution {
  double mean;
  double stddev;
};

inline constexpr double kScoreMin = 0.0;
inline constexpr double kScoreMax = 10.0;

// Objects whose running index i satisfies i % modulus == residue are "easy"
// for a detector: detected more often and with higher scores.
struct EasySubset {
  std::size_t modulus = 2;
  std::size_t residue = 0;
  double detection_rate = 1.0;
  ScoreDistribution tp_score{7.0, 1.0};
};

struct SyntheticDetectorProfile {
  std::string detector_id;
  ScoreDistribution tp_score{6.0, 1.5};
  ScoreDistribution fp_score{3.0, 1.5};
  double detection_rate = 0.8;       // P(a ground-truth object is detected)
  double fp_rate = 1.0;              // expected false positives per image
  double localization_jitter = 0.0;  // stddev of each box coordinate, pixels
  std::optional<EasySubset> easy;
  // Distractors are non-target regions that detectors confuse with targets;
  // hits on them are false positives correlated across detectors.
  double distractor_rate = 0.0;
  ScoreDistribution distractor_score{4.0, 1.5};
  // Multiplies every detection rate on validation images (result clipped to
  // 1). Values above 1 make the validation split look better than the test.
  double validation_rate_scale = 1.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 42;
  std::size_t num_images = 300;
  std::size_t min_objects = 1;
  std::size_t max_objects = 4;
  std::size_t min_distractors = 0;
  std::size_t max_distractors = 0;
  std::vector<std::string> classes{"object"};
  double canvas_width = 640.0;
  double canvas_height = 480.0;
  double min_box_side = 32.0;
  double max_box_side = 128.0;
  std::size_t num_validation_images = 0;  // 0 means half of num_images
  std::vector<SyntheticDetectorProfile> profiles;
};

struct SyntheticSplit {
  std::vector<std::string> image_ids;
  std::vector<GroundTruthObject> annotations;
  std::vector<Detection> detections;  // all detectors, generation order
};

struct SyntheticDataset {
  std::uint64_t seed = 0;
  SyntheticSplit validation;
  SyntheticSplit test;
};

// Places disjoint ground-truth boxes uniformly on the canvas, then samples
// every profile's detections. Each (image, detector) pair draws from its own
// seeded stream, so a detector's output does not depend on the other profiles.
// Throws ConfigError for invalid settings or infeasible placement.
SyntheticDataset generate(const GeneratorConfig& config);

// Three detectors, each strong on a disjoint third of the objects, sharing
// distractors that all of them fire on with mid-range scores.
GeneratorConfig complementary_fixture(std::uint64_t seed = 42, std::size_t num_images = 300);

// The complementary fixture with detector "det_a" detecting 1.2x as often on
// validation images as on test images.
GeneratorConfig biased_fixture(std::uint64_t seed = 42, std::size_t num_images = 300);

}  // namespace beliefuse

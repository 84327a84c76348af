#include "beliefuse/datagen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "beliefuse/commands.hpp"
#include "beliefuse/errors.hpp"
#include "beliefuse/trust_model.hpp"

namespace beliefuse {
namespace {

namespace fs = std::filesystem;

GeneratorConfig single_profile(SyntheticDetectorProfile p, std::size_t images = 100) {
  GeneratorConfig c;
  c.seed = 5;
  c.num_images = images;
  c.profiles = {std::move(p)};
  return c;
}

TEST(Generate, DegenerateProfileIsPerfect) {
  SyntheticDetectorProfile p;
  p.detector_id = "perfect";
  p.detection_rate = 1.0;
  p.fp_rate = 0.0;
  p.localization_jitter = 0.0;
  const SyntheticDataset data = generate(single_profile(p));
  for (const SyntheticSplit* split : {&data.validation, &data.test}) {
    ASSERT_EQ(split->detections.size(), split->annotations.size());
    const auto labeled = match_detections(split->detections, split->annotations);
    for (const auto& l : labeled) EXPECT_EQ(l.label, MatchLabel::kTruePositive);
    for (const auto& d : split->detections) {
      const bool exact = std::any_of(split->annotations.begin(), split->annotations.end(),
                                     [&](const auto& g) { return iou(g.box, d.box) == 1.0; });
      EXPECT_TRUE(exact);
    }
  }
}

TEST(Generate, NoFalsePositivesMeansPrecisionOne) {
  SyntheticDetectorProfile p;
  p.detector_id = "clean";
  p.detection_rate = 0.7;
  p.fp_rate = 0.0;
  p.localization_jitter = 2.0;
  const SyntheticDataset data = generate(single_profile(p));
  const auto& v = data.validation;
  const auto labeled = match_detections(v.detections, v.annotations);
  const auto table = build_pr_table(labeled, v.annotations.size());
  for (const auto& row : table) {
    EXPECT_EQ(row.precision, 1.0);
    EXPECT_EQ(row.precision_raw, 1.0);
  }
}

TEST(Generate, DetectionRateConverges) {
  SyntheticDetectorProfile p;
  p.detector_id = "d";
  p.detection_rate = 0.7;
  p.fp_rate = 0.0;
  const SyntheticDataset data = generate(single_profile(p, 1000));
  const double objects = static_cast<double>(data.validation.annotations.size() +
                                             data.test.annotations.size());
  const double hits = static_cast<double>(data.validation.detections.size() +
                                          data.test.detections.size());
  const double se = std::sqrt(0.7 * 0.3 / objects);
  EXPECT_NEAR(hits / objects, 0.7, 3.0 * se);
}

TEST(Generate, SplitsAndLayout) {
  const SyntheticDataset data = generate(complementary_fixture(42, 300));
  EXPECT_EQ(data.validation.image_ids.size(), 150u);
  EXPECT_EQ(data.test.image_ids.size(), 150u);
  EXPECT_EQ(data.validation.image_ids.front(), "img_00000");
  EXPECT_EQ(data.test.image_ids.front(), "img_00150");
  std::set<std::string> detectors;
  for (const auto& d : data.test.detections) {
    detectors.insert(d.detector_id);
    EXPECT_GE(d.score, kScoreMin);
    EXPECT_LE(d.score, kScoreMax);
  }
  EXPECT_EQ(detectors, (std::set<std::string>{"det_a", "det_b", "det_c"}));
  // Objects within an image never overlap.
  for (std::size_t i = 0; i < data.test.annotations.size(); ++i) {
    for (std::size_t j = i + 1; j < data.test.annotations.size(); ++j) {
      const auto& a = data.test.annotations[i];
      const auto& b = data.test.annotations[j];
      if (a.image_id == b.image_id) {
        EXPECT_EQ(iou(a.box, b.box), 0.0);
      }
    }
  }
}

TEST(Generate, DeterministicAndStreamIsolated) {
  const GeneratorConfig c = complementary_fixture(7, 40);
  const SyntheticDataset a = generate(c);
  const SyntheticDataset b = generate(c);
  EXPECT_EQ(a.test.detections, b.test.detections);
  EXPECT_EQ(a.validation.annotations, b.validation.annotations);

  // Removing a profile leaves the remaining detectors' outputs untouched.
  GeneratorConfig fewer = c;
  fewer.profiles.pop_back();
  const SyntheticDataset f = generate(fewer);
  std::vector<Detection> kept;
  for (const auto& d : a.test.detections) {
    if (d.detector_id != "det_c") kept.push_back(d);
  }
  EXPECT_EQ(f.test.detections, kept);

  GeneratorConfig other = c;
  other.seed = 8;
  EXPECT_NE(generate(other).test.detections, a.test.detections);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Generate, FilesAreByteIdentical) {
  const fs::path root = fs::temp_directory_path() / "beliefuse_datagen_test";
  fs::remove_all(root);
  const io::Json prov = {{"seed", 3}};
  cli::write_dataset(root / "a", generate(complementary_fixture(3, 20)), prov);
  cli::write_dataset(root / "b", generate(complementary_fixture(3, 20)), prov);
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    EXPECT_EQ(slurp(entry.path()), slurp(root / "b" / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 8u);  // two splits x (annotations + three detectors)
  fs::remove_all(root);
}

// Complementary detectors: the union of their true positives recalls clearly
// more objects than any single detector does.
TEST(Generate, ComplementaryDetectorsCoverMoreTogether) {
  const SyntheticDataset data = generate(complementary_fixture(42, 300));
  const auto& split = data.test;
  std::set<std::pair<std::string, BoundingBox>> any_detector;
  for (const char* id : {"det_a", "det_b", "det_c"}) {
    for (const auto& cls : {"car", "person"}) {
      std::vector<Detection> dets;
      for (const auto& d : split.detections) {
        if (d.detector_id == id && d.class_label == cls) dets.push_back(d);
      }
      std::vector<GroundTruthObject> gts;
      for (const auto& g : split.annotations) {
        if (g.class_label == cls) gts.push_back(g);
      }
      std::size_t found = 0;
      for (const auto& g : gts) {
        const bool hit = std::any_of(dets.begin(), dets.end(), [&](const auto& d) {
          return d.image_id == g.image_id && iou(d.box, g.box) > 0.5;
        });
        if (hit) {
          ++found;
          any_detector.insert({g.image_id, g.box});
        }
      }
      EXPECT_LT(static_cast<double>(found) / static_cast<double>(gts.size()), 0.8) << id;
    }
  }
  EXPECT_GT(static_cast<double>(any_detector.size()) /
                static_cast<double>(split.annotations.size()),
            0.9);
}

TEST(Generate, RejectsInvalidConfigs) {
  GeneratorConfig c = complementary_fixture(1, 10);
  c.profiles.clear();
  EXPECT_THROW(generate(c), ConfigError);
  c = complementary_fixture(1, 10);
  c.profiles[0].detection_rate = 1.5;
  EXPECT_THROW(generate(c), ConfigError);
  c = complementary_fixture(1, 10);
  c.min_objects = 5;
  c.max_objects = 2;
  EXPECT_THROW(generate(c), ConfigError);
  c = complementary_fixture(1, 10);
  c.min_objects = c.max_objects = 200;
  EXPECT_THROW(generate(c), ConfigError);
  c = complementary_fixture(1, 10);
  c.min_box_side = 100.0;
  c.max_box_side = 120.0;
  c.min_objects = c.max_objects = 25;  // fits by area, not by packing
  EXPECT_THROW(generate(c), ConfigError);
}

}  // namespace
}  // namespace beliefuse

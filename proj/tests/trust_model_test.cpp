#include "beliefuse/trust_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "beliefuse/errors.hpp"
#include "beliefuse/io.hpp"
#include "test_util.hpp"

namespace beliefuse {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<LabeledDetection> labeled(std::initializer_list<std::pair<double, MatchLabel>> rows) {
  std::vector<LabeledDetection> out;
  for (const auto& [score, label] : rows) {
    out.push_back({testing::det(0, 0, 10, 10, score), label});
  }
  return out;
}

constexpr auto TP = MatchLabel::kTruePositive;
constexpr auto FP = MatchLabel::kFalsePositive;
constexpr auto UD = MatchLabel::kUndecided;

// Rows at thresholds 5, 3, 1 with recalls .2/.4/.6 and precisions .8/.6/.5.
TrustModel three_row_model(ScoreInterpolation interp = ScoreInterpolation::kStep) {
  std::vector<PrPoint> table{{5.0, 0.2, 0.8, 0.8}, {3.0, 0.4, 0.6, 0.6}, {1.0, 0.6, 0.5, 0.5}};
  return TrustModel("d", "obj", table, BpdExponent(2.0), 10, interp);
}

TEST(BpdExponent, ParseAndValidate) {
  EXPECT_EQ(BpdExponent::parse("inf"), BpdExponent::infinite());
  EXPECT_EQ(BpdExponent::parse("2.5").value(), 2.5);
  EXPECT_THROW(BpdExponent::parse("0"), ConfigError);
  EXPECT_THROW(BpdExponent::parse("-1"), ConfigError);
  EXPECT_THROW(BpdExponent::parse("two"), ConfigError);
  EXPECT_THROW(BpdExponent(std::nan("")), std::invalid_argument);
  EXPECT_EQ(BpdExponent::infinite().to_string(), "inf");
}

TEST(BpdPrecision, Endpoints) {
  for (double n : {0.25, 1.0, 2.0, 3.7, 8.0, 100.0}) {
    EXPECT_EQ(bpd_precision(0.0, BpdExponent(n)), 1.0);
    EXPECT_EQ(bpd_precision(1.0, BpdExponent(n)), 0.0);
  }
  EXPECT_EQ(bpd_precision(0.5, BpdExponent(2.0)), 0.75);
  for (double r : {0.0, 0.1, 0.5, 0.999999}) {
    EXPECT_EQ(bpd_precision(r, BpdExponent::infinite()), 1.0);
  }
  EXPECT_EQ(bpd_precision(1.0, BpdExponent::infinite()), 0.0);
}

TEST(BpdPrecision, MonotoneInRecallAndExponent) {
  double prev = 1.0;
  for (int k = 0; k <= 100; ++k) {
    const double v = bpd_precision(k / 100.0, BpdExponent(3.0));
    EXPECT_LE(v, prev);
    prev = v;
    EXPECT_LE(bpd_precision(k / 100.0, BpdExponent(2.0)), v);
  }
}

TEST(BuildPrTable, MixedLabels) {
  const auto table = build_pr_table(labeled({{4, TP}, {3, TP}, {2, FP}, {1, TP}}), 4);
  ASSERT_EQ(table.size(), 4u);
  const double recall[] = {0.25, 0.5, 0.5, 0.75};
  const double raw[] = {1.0, 1.0, 2.0 / 3.0, 0.75};
  const double env[] = {1.0, 1.0, 0.75, 0.75};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(table[k].score_threshold, 4.0 - static_cast<double>(k));
    EXPECT_DOUBLE_EQ(table[k].recall, recall[k]);
    EXPECT_DOUBLE_EQ(table[k].precision_raw, raw[k]);
    EXPECT_DOUBLE_EQ(table[k].precision, env[k]);
  }
}

TEST(BuildPrTable, AllTruePositives) {
  const auto table = build_pr_table(labeled({{3, TP}, {2, TP}, {1, TP}}), 3);
  ASSERT_EQ(table.size(), 3u);
  for (const auto& row : table) EXPECT_EQ(row.precision, 1.0);
  EXPECT_EQ(table.back().recall, 1.0);
}

TEST(BuildPrTable, FalsePositiveFirst) {
  const auto table = build_pr_table(labeled({{2, FP}, {1, TP}}), 1);
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table[0].recall, 0.0);
  EXPECT_EQ(table[0].precision_raw, 0.0);
  EXPECT_EQ(table[1].recall, 1.0);
  EXPECT_EQ(table[1].precision_raw, 0.5);
  EXPECT_EQ(table[0].precision, 0.5);
}

TEST(BuildPrTable, UndecidedDroppedAndTiesGrouped) {
  const auto table =
      build_pr_table(labeled({{5, UD}, {4, TP}, {4, FP}, {3, UD}, {2, TP}}), 2);
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table[0].score_threshold, 4.0);
  EXPECT_EQ(table[0].recall, 0.5);
  EXPECT_EQ(table[0].precision_raw, 0.5);
  EXPECT_EQ(table[1].recall, 1.0);
}

TEST(BuildPrTable, InsufficientData) {
  EXPECT_THROW(build_pr_table(labeled({{1, FP}, {0, UD}}), 3), InsufficientData);
  EXPECT_THROW(build_pr_table(labeled({{1, TP}}), 0), InsufficientData);
  EXPECT_THROW(build_pr_table({}, 2), InsufficientData);
}

TEST(BuildPrTable, RandomTableInvariants) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<LabeledDetection> rows;
    std::size_t tps = 0;
    for (int k = 0; k < 40; ++k) {
      const auto label = static_cast<MatchLabel>(rng() % 3);
      tps += label == TP;
      rows.push_back({testing::det(0, 0, 1, 1, static_cast<double>(rng() % 15)), label});
    }
    if (tps == 0) continue;
    const auto table = build_pr_table(rows, tps + rng() % 5);
    for (std::size_t k = 0; k < table.size(); ++k) {
      EXPECT_GE(table[k].precision, table[k].precision_raw);
      if (k == 0) continue;
      EXPECT_LT(table[k].score_threshold, table[k - 1].score_threshold);
      EXPECT_GE(table[k].recall, table[k - 1].recall);
      EXPECT_LE(table[k].precision, table[k - 1].precision);
    }
    EXPECT_NO_THROW(TrustModel("d", "obj", table, BpdExponent(2.0), tps));
  }
}

TEST(AssignBpa, Rule) {
  const Bpa b = assign_bpa(0.4, 0.6, BpdExponent(2.0));
  EXPECT_EQ(b.target(), 0.6);
  EXPECT_NEAR(b.intermediate(), 0.24, 1e-15);
  EXPECT_NEAR(b.non_target(), 0.16, 1e-15);
  // Precision above the best-possible curve: no ignorance left.
  const Bpa over = assign_bpa(0.9, 0.5, BpdExponent(2.0));
  EXPECT_EQ(over.intermediate(), 0.0);
  EXPECT_EQ(over.target(), 0.5);
  EXPECT_EQ(over.non_target(), 0.5);
  const Bpa perfect = assign_bpa(0.7, 0.6, BpdExponent::infinite());
  EXPECT_EQ(perfect.non_target(), 0.0);
  EXPECT_NEAR(perfect.intermediate(), 0.4, 1e-15);
}

TEST(TrustModel, ValidatesTable) {
  std::vector<PrPoint> bad_order{{1.0, 0.2, 1, 1}, {2.0, 0.4, 1, 1}};
  EXPECT_THROW(TrustModel("d", "c", bad_order, BpdExponent(2), 2), std::invalid_argument);
  std::vector<PrPoint> bad_env{{2.0, 0.2, 0.5, 0.5}, {1.0, 0.4, 0.9, 0.9}};
  EXPECT_THROW(TrustModel("d", "c", bad_env, BpdExponent(2), 2), std::invalid_argument);
  EXPECT_THROW(TrustModel("d", "c", {}, BpdExponent(2), 2), std::invalid_argument);
}

TEST(ScoreToBpa, StepMappingAndBoundaries) {
  const TrustModel m = three_row_model();
  const Bpa mid = m.score_to_bpa(4.0);
  EXPECT_EQ(mid.target(), 0.6);
  EXPECT_NEAR(mid.intermediate(), 0.24, 1e-15);
  EXPECT_NEAR(mid.non_target(), 0.16, 1e-15);
  EXPECT_EQ(m.score_to_bpa(3.0), mid);

  // Above the top threshold: first row (r=.2, p=.8), bpd = .96.
  const Bpa top = m.score_to_bpa(50.0);
  EXPECT_EQ(top, m.score_to_bpa(5.0));
  EXPECT_EQ(top.target(), 0.8);
  EXPECT_NEAR(top.intermediate(), 0.16, 1e-15);
  EXPECT_NEAR(top.non_target(), 0.04, 1e-15);

  // Below the lowest threshold: recall 1 at the last row's precision.
  const Bpa floor = m.score_to_bpa(-3.0);
  EXPECT_EQ(floor.target(), 0.5);
  EXPECT_EQ(floor.intermediate(), 0.0);
  EXPECT_EQ(floor.non_target(), 0.5);
  EXPECT_EQ(m.score_to_bpa(-kInf), floor);
}

TEST(ScoreToBpa, LinearInterpolation) {
  const TrustModel m = three_row_model(ScoreInterpolation::kLinear);
  const OperatingPoint op = m.operating_point(4.0);
  EXPECT_NEAR(op.recall, 0.3, 1e-15);
  EXPECT_NEAR(op.precision, 0.7, 1e-15);
  const Bpa b = m.score_to_bpa(4.0);
  EXPECT_NEAR(b.target(), 0.7, 1e-15);
  EXPECT_NEAR(b.intermediate(), 0.91 - 0.7, 1e-15);
  EXPECT_NEAR(b.non_target(), 0.09, 1e-15);
  EXPECT_EQ(m.score_to_bpa(9.0), three_row_model().score_to_bpa(9.0));
}

// Higher scores never produce less target support or more non-target mass.
TEST(ScoreToBpa, MonotoneInScore) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LabeledDetection> rows;
    std::size_t tps = 0;
    for (int k = 0; k < 30; ++k) {
      const bool tp = rng() % 2;
      tps += tp;
      rows.push_back({testing::det(0, 0, 1, 1, std::uniform_real_distribution<double>(0, 10)(rng)),
                      tp ? TP : FP});
    }
    if (tps == 0) continue;
    for (auto interp : {ScoreInterpolation::kStep, ScoreInterpolation::kLinear}) {
      const TrustModel m = TrustModel::build(rows, tps, "d", "obj", BpdExponent(2.0), interp);
      Bpa prev = m.score_to_bpa(-1.0);
      for (double s = -1.0; s <= 11.0; s += 0.05) {
        const Bpa b = m.score_to_bpa(s);
        EXPECT_GE(b.target() - b.non_target(), prev.target() - prev.non_target() - 1e-12);
        EXPECT_NEAR(b.target() + b.non_target() + b.intermediate(), 1.0, 1e-12);
        prev = b;
      }
    }
  }
}

TEST(TrustModel, StaticBpaUsesNearestRecallRow) {
  const TrustModel m = three_row_model();
  EXPECT_EQ(m.static_bpa(0.2), m.score_to_bpa(5.0));
  EXPECT_EQ(m.static_bpa(0.5), m.score_to_bpa(3.0));  // tie between .4 and .6
  EXPECT_EQ(m.static_bpa(0.9), m.score_to_bpa(1.0));
}

TEST(TrustModel, UninformativeIsVacuous) {
  const TrustModel m = TrustModel::uninformative("d", "obj", BpdExponent(2), 0);
  EXPECT_FALSE(m.informative());
  EXPECT_EQ(m.score_to_bpa(3.0), Bpa::vacuous());
  EXPECT_EQ(m.static_bpa(), Bpa::vacuous());
}

TEST(TrustModel, WithExponentKeepsTable) {
  const TrustModel m = three_row_model();
  const TrustModel inf = m.with_exponent(BpdExponent::infinite());
  EXPECT_EQ(inf.table(), m.table());
  EXPECT_EQ(inf.score_to_bpa(4.0).non_target(), 0.0);
  EXPECT_NEAR(inf.score_to_bpa(4.0).intermediate(), 0.4, 1e-15);
}

TEST(TrustModel, JsonRoundTripIsBitIdentical) {
  std::mt19937_64 rng(9);
  std::vector<LabeledDetection> rows;
  for (int k = 0; k < 60; ++k) {
    rows.push_back({testing::det(0, 0, 1, 1, std::normal_distribution<double>(0, 3)(rng)),
                    k % 3 ? TP : FP});
  }
  for (BpdExponent n : {BpdExponent(2.0), BpdExponent(1.0 / 3.0), BpdExponent::infinite()}) {
    const TrustModel m = TrustModel::build(rows, 50, "d", "obj", n);
    const std::string text = io::to_json(m).dump();
    const TrustModel back = io::trust_model_from_json(io::Json::parse(text));
    EXPECT_EQ(back.table(), m.table());
    EXPECT_EQ(back.exponent(), m.exponent());
    for (double s = -8.0; s < 8.0; s += 0.37) EXPECT_EQ(back.score_to_bpa(s), m.score_to_bpa(s));
  }
}

}  // namespace
}  // namespace beliefuse

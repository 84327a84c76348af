#include "beliefuse/dst.hpp"

#include <gtest/gtest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "beliefuse/errors.hpp"
#include "test_util.hpp"

namespace beliefuse {
namespace {

using H = Hypothesis;

// Reference combination written out as the nine product terms of two masses.
Bpa nine_terms(const Bpa& a, const Bpa& b) {
  const double t = a.target() * b.target() + a.target() * b.intermediate() +
                   a.intermediate() * b.target();
  const double nt = a.non_target() * b.non_target() + a.non_target() * b.intermediate() +
                    a.intermediate() * b.non_target();
  const double i = a.intermediate() * b.intermediate();
  const double conflict = a.target() * b.non_target() + a.non_target() * b.target();
  const double n = 1.0 - conflict;
  return Bpa::from_masses(t / n, nt / n, i / n);
}

void expect_near(const Bpa& a, const Bpa& b, double tol) {
  EXPECT_NEAR(a.target(), b.target(), tol);
  EXPECT_NEAR(a.non_target(), b.non_target(), tol);
  EXPECT_NEAR(a.intermediate(), b.intermediate(), tol);
}

TEST(Bpa, ValidatesAndNormalizes) {
  EXPECT_THROW(Bpa::from_masses(-0.1, 0.5, 0.6), std::invalid_argument);
  EXPECT_THROW(Bpa::from_masses(0, 0, 0), std::invalid_argument);
  EXPECT_THROW(Bpa::from_masses(std::nan(""), 0, 1), std::invalid_argument);
  const Bpa noisy = Bpa::from_masses(-1e-12, 0.5, 0.5);
  EXPECT_EQ(noisy.target(), 0.0);
  const Bpa scaled = Bpa::from_masses(2, 1, 1);
  EXPECT_DOUBLE_EQ(scaled.target(), 0.5);
  EXPECT_DOUBLE_EQ(scaled.non_target() + scaled.intermediate(), 0.5);
}

TEST(Belief, HandCases) {
  const Bpa sure = Bpa::certain(H::kTarget);
  EXPECT_EQ(belief(sure, H::kTarget), 1.0);
  const Bpa vac = Bpa::vacuous();
  EXPECT_EQ(belief(vac, H::kTarget), 0.0);
  EXPECT_EQ(belief(vac, H::kIntermediate), 1.0);
  const Bpa m = Bpa::from_masses(0.6, 0.1, 0.3);
  EXPECT_NEAR(belief(m, H::kIntermediate), 1.0, 1e-15);
  EXPECT_EQ(belief(m, H::kTarget), 0.6);
  EXPECT_EQ(belief(m, H::kNonTarget), 0.1);
}

TEST(Combine, HandExample) {
  const Bpa a = Bpa::from_masses(0.6, 0.1, 0.3);
  const Bpa b = Bpa::from_masses(0.5, 0.2, 0.3);
  const Bpa c = combine(a, b);
  EXPECT_NEAR(c.target(), 0.63 / 0.83, 1e-12);
  EXPECT_NEAR(c.non_target(), 0.11 / 0.83, 1e-12);
  EXPECT_NEAR(c.intermediate(), 0.09 / 0.83, 1e-12);
  EXPECT_NEAR(c.target(), 0.7590, 5e-5);
  EXPECT_NEAR(c.non_target(), 0.1325, 5e-5);
  EXPECT_NEAR(c.intermediate(), 0.1084, 5e-5);
}

TEST(Combine, TotalConflictThrows) {
  try {
    combine(Bpa::certain(H::kTarget), Bpa::certain(H::kNonTarget));
    FAIL() << "expected TotalConflict";
  } catch (const TotalConflict& e) {
    EXPECT_EQ(e.normalizer(), 0.0);
  }
}

TEST(Combine, VacuousIsIdentity) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Bpa a = testing::random_bpa(rng);
    EXPECT_EQ(combine(a, Bpa::vacuous()), a);
    EXPECT_EQ(combine(Bpa::vacuous(), a), a);
  }
}

TEST(Combine, MatchesNineTermReference) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    const Bpa a = testing::random_bpa(rng);
    const Bpa b = testing::random_bpa(rng);
    expect_near(combine(a, b), nine_terms(a, b), 1e-13);
  }
}

TEST(Combine, AlgebraicProperties) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5000; ++i) {
    const Bpa a = testing::random_bpa(rng);
    const Bpa b = testing::random_bpa(rng);
    const Bpa c = testing::random_bpa(rng);
    const Bpa ab = combine(a, b);
    EXPECT_EQ(ab, combine(b, a));
    expect_near(combine(ab, c), combine(a, combine(b, c)), 1e-12);
    EXPECT_GE(ab.target(), 0.0);
    EXPECT_GE(ab.non_target(), 0.0);
    EXPECT_GE(ab.intermediate(), 0.0);
    EXPECT_NEAR(ab.target() + ab.non_target() + ab.intermediate(), 1.0, 1e-9);
  }
}

TEST(CombineAll, FoldBaseCases) {
  const std::vector<Bpa> vacuous(3, Bpa::vacuous());
  EXPECT_EQ(combine_all(vacuous), Bpa::vacuous());
  const Bpa a = Bpa::from_masses(0.2, 0.3, 0.5);
  EXPECT_EQ(combine_all(std::vector<Bpa>{a}), a);
  EXPECT_THROW(combine_all(std::vector<Bpa>{}), std::invalid_argument);
  EXPECT_THROW(combine_all_direct(std::vector<Bpa>{}), std::invalid_argument);
}

TEST(CombineAll, FoldEqualsDirectEnumeration) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + trial % 5;
    std::vector<Bpa> bpas;
    for (std::size_t j = 0; j < k; ++j) bpas.push_back(testing::random_bpa(rng));
    Bpa fold = Bpa::vacuous();
    try {
      fold = combine_all(bpas);
    } catch (const TotalConflict&) {
      EXPECT_THROW(combine_all_direct(bpas), TotalConflict);
      continue;
    }
    expect_near(fold, combine_all_direct(bpas), 1e-12);
  }
}

TEST(CombineAll, DirectDetectsConflict) {
  const std::vector<Bpa> bpas{Bpa::certain(H::kTarget), Bpa::vacuous(),
                              Bpa::certain(H::kNonTarget)};
  EXPECT_THROW(combine_all_direct(bpas), TotalConflict);
  EXPECT_THROW(combine_all(bpas), TotalConflict);
}

TEST(FusedVerdict, ScoreIsBeliefDifference) {
  const FusedVerdict v = FusedVerdict::from_joint(Bpa::from_masses(0.6, 0.16, 0.24));
  EXPECT_NEAR(v.score, 0.44, 1e-15);
  EXPECT_EQ(FusedVerdict::from_joint(Bpa::vacuous()).score, 0.0);
  EXPECT_EQ(FusedVerdict::from_joint(Bpa::certain(H::kNonTarget)).score, -1.0);
}

}  // namespace
}  // namespace beliefuse

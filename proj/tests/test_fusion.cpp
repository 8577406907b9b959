#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "wilddistort/error.hpp"
#include "wilddistort/fusion.hpp"
#include "wilddistort/rng.hpp"

using namespace wilddistort;
using namespace wilddistort::fusion;

namespace {

IntsigScores from_diffs(std::array<double, 5> d) {
  IntsigScores s{};
  for (std::size_t k = 0; k < 5; ++k) s[k] = {0.0, d[k]};
  return s;
}

IntsigScores random_scores(SeededRng& rng, double spread) {
  IntsigScores s{};
  for (auto& m : s) m = {rng.normal(0, spread), rng.normal(0, spread)};
  return s;
}

}  // namespace

TEST(Logit, ClampSymmetryAndRoundTrip) {
  EXPECT_EQ(logit(0.5), 0.0);
  EXPECT_NEAR(sigmoid(logit(0.9)), 0.9, 1e-12);
  EXPECT_NEAR(logit(0.73), 0.9946225751440620549, 1e-15);
  EXPECT_TRUE(std::isfinite(logit(0.0)));
  EXPECT_TRUE(std::isfinite(logit(1.0)));
  EXPECT_DOUBLE_EQ(Probability(0.0).value(), kProbabilityEpsilon);
  EXPECT_DOUBLE_EQ(Probability(1.0).value(), 1.0 - kProbabilityEpsilon);
  EXPECT_NEAR(logit(0.0), -logit(1.0), 1e-9);
  EXPECT_THROW(Probability(std::nan("")), DomainError);
  for (double p = 0.001; p < 1.0; p += 0.0137) EXPECT_NEAR(sigmoid(logit(p)), p, 1e-12);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(Rapid, StageWeightsSumToOne) {
  const RapidCoefficients c;
  EXPECT_DOUBLE_EQ(c.stage1[0] + c.stage1[1] + c.stage1[2], 1.0);
  EXPECT_DOUBLE_EQ(c.stage2[0] + c.stage2[1], 1.0);
  EXPECT_DOUBLE_EQ(c.stage3[0] + c.stage3[1], 1.0);
  EXPECT_DOUBLE_EQ(c.stage4[0] + c.stage4[1], 1.0);
}

TEST(Rapid, HalfIsAFixedPointAtEveryStage) {
  const auto st = rapid_cascade_stages({0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  EXPECT_EQ(st.s1a, 0.5);
  EXPECT_EQ(st.b, 0.5);
  EXPECT_EQ(st.s2, 0.5);
  EXPECT_EQ(st.f, 0.5);
}

// Frozen from a 50-digit evaluation of the four stages.
TEST(Rapid, ReferenceInputMatchesHighPrecisionValues) {
  const auto st = rapid_cascade_stages({0.9, 0.8, 0.7, 0.6, 0.55, 0.65});
  EXPECT_NEAR(st.s1a, 0.8469542774016496358, 1e-14);
  EXPECT_NEAR(st.b, 0.8099708867859353361, 1e-14);
  EXPECT_NEAR(st.s2, 0.7794473100608758224, 1e-14);
  EXPECT_NEAR(st.f, 0.7670402258329375256, 1e-14);
}

TEST(Rapid, MatchesLongDoubleOracle) {
  SeededRng rng(8);
  for (int i = 0; i < 300; ++i) {
    RapidScores s{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    const auto o = oracle::rapid_long(s.g4, s.siglip, s.srm, s.eva02, s.eva02_fixed, s.g4v2);
    EXPECT_NEAR(rapid_cascade(s), static_cast<double>(o.f), 1e-10);
  }
}

TEST(Rapid, AllEqualInputsAreFixedPoints) {
  SeededRng rng(9);
  for (int i = 0; i < 100; ++i) {
    const double v = rng.uniform(0.01, 0.99);
    EXPECT_NEAR(rapid_cascade({v, v, v, v, v, v}), v, 1e-12);
  }
}

TEST(Rapid, MonotoneInEachBranch) {
  SeededRng rng(10);
  for (int i = 0; i < 200; ++i) {
    std::array<double, 6> v;
    for (auto& x : v) x = rng.uniform(0.01, 0.98);
    auto f = [](const std::array<double, 6>& a) { return rapid_cascade({a[0], a[1], a[2], a[3], a[4], a[5]}); };
    const double base = f(v);
    for (std::size_t k = 0; k < 6; ++k) {
      auto up = v;
      up[k] += 0.01;
      EXPECT_GE(f(up), base);
    }
  }
}

TEST(Intsig, FlattenedWeights) {
  const auto w = intsig_flat_weights();
  const std::array<double, 5> expected{0.3675, 0.0735, 0.0490, 0.2100, 0.3000};
  double sum = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(w[k], expected[k], 1e-12);
    sum += w[k];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Intsig, IdenticalModelsAreAFixedPoint) {
  SeededRng rng(11);
  for (int i = 0; i < 100; ++i) {
    const TwoClassLogits l{rng.normal(0, 5), rng.normal(0, 5)};
    const IntsigScores s{l, l, l, l, l};
    for (bool gates : {false, true}) {
      const auto r = intsig_fuse(s, {.gates_enabled = gates});
      EXPECT_NEAR(r.logits.logit0, l.logit0, 1e-12);
      EXPECT_NEAR(r.logits.logit1, l.logit1, 1e-12);
      EXPECT_FALSE(r.gate1_fired || r.gate2_fired);
    }
  }
}

TEST(Intsig, UngatedFusionIsLinear) {
  SeededRng rng(12);
  for (int i = 0; i < 100; ++i) {
    const auto s1 = random_scores(rng, 4);
    const auto s2 = random_scores(rng, 4);
    const double a = rng.normal(), b = rng.normal();
    IntsigScores mix{};
    for (std::size_t k = 0; k < 5; ++k) {
      mix[k] = {a * s1[k].logit0 + b * s2[k].logit0, a * s1[k].logit1 + b * s2[k].logit1};
    }
    const IntsigOptions off{.gates_enabled = false};
    const auto f1 = intsig_fuse(s1, off).logits, f2 = intsig_fuse(s2, off).logits, fm = intsig_fuse(mix, off).logits;
    EXPECT_NEAR(fm.logit0, a * f1.logit0 + b * f2.logit0, 1e-9);
    EXPECT_NEAR(fm.logit1, a * f1.logit1 + b * f2.logit1, 1e-9);
  }
}

TEST(Intsig, ConsensusGateShiftsTowardStrongModels) {
  const auto s = from_diffs({-9.0, -1.0, 0.041 / 0.049, 9.0, 3.5});
  const auto off = intsig_fuse(s, {.gates_enabled = false});
  EXPECT_NEAR(off.diff(), -0.4, 1e-12);
  const auto on = intsig_fuse(s);
  EXPECT_TRUE(on.gate1_fired);
  EXPECT_FALSE(on.gate2_fired);
  EXPECT_NEAR(on.diff(), 2.1, 1e-12);
  EXPECT_EQ(on.logits.logit0, off.logits.logit0);
}

TEST(Intsig, ExclusionGateDropsDissentingM4) {
  const auto s = from_diffs({2.0, 2.0, 2.0, -1.0, 1.0});
  const auto r = intsig_fuse(s);
  EXPECT_TRUE(r.gate2_fired);
  EXPECT_FALSE(r.gate1_fired);
  EXPECT_NEAR(r.diff(), 0.7 * 2.0 + 0.3 * 1.0, 1e-12);
  const auto g = intsig_fuse(s, {.gate2_policy = Gate2Policy::kGlobal});
  EXPECT_NEAR(g.diff(), ((0.3675 + 0.0735 + 0.049) * 2.0 + 0.3 * 1.0) / 0.79, 1e-12);
}

TEST(Intsig, BothGatesApplyExclusionFirst) {
  const auto s = from_diffs({2.0, 2.0, 2.0, -9.0, -3.5});
  const auto r = intsig_fuse(s);
  EXPECT_TRUE(r.gate2_fired);
  EXPECT_TRUE(r.gate1_fired);
  // exclusion: 0.7 * 2 + 0.3 * (-3.5) = 0.35; consensus then shifts by -2.5
  EXPECT_NEAR(r.diff(), 0.35 - 2.5, 1e-12);
}

TEST(Intsig, NeitherGateLeavesFusionUnchanged) {
  const auto s = from_diffs({1.0, 0.5, 2.0, 3.0, 1.5});
  const auto on = intsig_fuse(s);
  EXPECT_FALSE(on.gate1_fired || on.gate2_fired);
  EXPECT_EQ(on.logits, intsig_fuse(s, {.gates_enabled = false}).logits);
}

TEST(Intsig, GatesChangeOutputOnlyWhenPredicatesHold) {
  SeededRng rng(13);
  int fired = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto s = random_scores(rng, 6);
    const auto off = intsig_fuse(s, {.gates_enabled = false});
    const auto on = intsig_fuse(s);
    const bool g2 = intsig_gate2_triggered(s);
    EXPECT_EQ(on.gate2_fired, g2);
    if (!on.gate1_fired && !on.gate2_fired) {
      EXPECT_EQ(on.logits, off.logits);
    } else {
      ++fired;
    }
    if (on.gate1_fired) {
      const double pre = on.diff() - 2.5 * (s[3].diff() > 0 ? 1 : -1);
      EXPECT_TRUE(intsig_gate1_triggered(s, pre));
      EXPECT_NE(pre > 0, s[3].diff() > 0);
    }
  }
  EXPECT_GT(fired, 100);
}

TEST(Intsig, ConsensusGateSilentWhenFusedAgrees) {
  const auto s = from_diffs({1.0, 1.0, 1.0, 9.0, 4.0});
  EXPECT_FALSE(intsig_gate1_triggered(s, 0.5));
  EXPECT_TRUE(intsig_gate1_triggered(s, -0.5));
  EXPECT_FALSE(intsig_gate1_triggered(from_diffs({0, 0, 0, 9.0, -4.0}), -0.5));
  EXPECT_FALSE(intsig_gate1_triggered(from_diffs({0, 0, 0, 7.9, 4.0}), -0.5));
  EXPECT_THROW(intsig_fuse(from_diffs({std::nan(""), 0, 0, 0, 0})), DomainError);
}

TEST(Prism, WeightsNormalizeAndAreScaleInvariant) {
  const std::vector<double> a{0.9, 0.8, 0.7};
  const auto w = prism_weights(a);
  EXPECT_NEAR(w[0], 0.375, 1e-15);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(w[2], 0.7 / 2.4, 1e-15);
  EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-12);
  const std::vector<double> scaled{0.09, 0.08, 0.07};
  const auto w2 = prism_weights(scaled);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(w[k], w2[k], 1e-15);
  EXPECT_THROW(prism_weights(std::vector<double>{}), DomainError);
  EXPECT_THROW(prism_weights(std::vector<double>{0.5, 0.0}), DomainError);
}

TEST(Prism, FlipAveragedProbabilities) {
  const std::vector<PrismModel> same{{0.6, 0.6, 0.9}, {0.6, 0.6, 0.5}};
  EXPECT_NEAR(prism_predict(same), 0.6, 1e-15);
  const std::vector<PrismModel> m{{0.8, 0.6, 0.9}, {0.2, 0.4, 0.6}};
  const double w0 = 0.9 / 1.5, w1 = 0.6 / 1.5;
  EXPECT_NEAR(prism_predict(m), 0.5 * (w0 * 0.8 + w1 * 0.2 + w0 * 0.6 + w1 * 0.4), 1e-15);
  EXPECT_THROW(prism_predict(std::vector<PrismModel>{{0.5, 0.5, 1.2}}), DomainError);
}

TEST(Averaging, MeansAndTta) {
  EXPECT_DOUBLE_EQ(average_probs(std::vector<double>{0.2, 0.8}), 0.5);
  EXPECT_DOUBLE_EQ(average_probs(std::vector<double>{0.37}), 0.37);
  EXPECT_NEAR(average_probs(std::vector<double>{0.1, 0.2, 0.7}), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(average_probs(std::vector<double>{}), DomainError);

  EXPECT_NEAR(aggregate_tta({{0.9, 0.1}, HeadType::kSigmoid}), 0.5, 1e-12);
  EXPECT_NEAR(aggregate_tta({{0.9, 0.1, 0.2}, HeadType::kSoftmax}), 0.4, 1e-15);
  for (double v : {0.05, 0.3, 0.77}) {
    EXPECT_NEAR(aggregate_tta({{v, v, v, v}, HeadType::kSigmoid}), v, 1e-12);
    EXPECT_NEAR(aggregate_tta({{v, v, v, v}, HeadType::kSoftmax}), v, 1e-15);
  }
  EXPECT_NEAR(aggregate_tta({{0.9, 0.6}, HeadType::kSigmoid}), sigmoid((logit(0.9) + logit(0.6)) / 2), 1e-15);
  EXPECT_THROW(aggregate_tta({{}, HeadType::kSigmoid}), DomainError);

  EXPECT_NEAR(weighted_expert_average(std::vector<double>{0.9, 0.3}, std::vector<double>{2, 1}), 0.7, 1e-15);
  EXPECT_THROW(weighted_expert_average(std::vector<double>{0.9}, std::vector<double>{0}), DomainError);
  EXPECT_THROW(weighted_expert_average(std::vector<double>{0.9}, std::vector<double>{-1}), DomainError);
  EXPECT_THROW(weighted_expert_average(std::vector<double>{0.9, 0.1}, std::vector<double>{1}), DomainError);
}

TEST(Averaging, AllEqualInputsAreFixedPoints) {
  SeededRng rng(14);
  for (int i = 0; i < 100; ++i) {
    const double v = rng.uniform(0.01, 0.99);
    const std::vector<double> vs(4, v);
    EXPECT_NEAR(average_probs(vs), v, 1e-15);
    EXPECT_NEAR(weighted_expert_average(vs, std::vector<double>{1, 2, 3, 4}), v, 1e-15);
    EXPECT_NEAR(prism_predict(std::vector<PrismModel>{{v, v, 0.9}, {v, v, 0.7}}), v, 1e-15);
  }
}

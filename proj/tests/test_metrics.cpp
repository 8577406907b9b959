#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support/oracles.hpp"
#include "wilddistort/metrics.hpp"

using namespace wilddistort;

TEST(RocAuc, SmallHandComputedCases) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> l{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s, l), 0.75);
  const std::vector<double> tied{0.5, 0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(roc_auc(tied, l), 0.5);
  const std::vector<double> perfect{0.0, 0.1, 0.9, 1.0};
  EXPECT_DOUBLE_EQ(roc_auc(perfect, l), 1.0);
  const std::vector<double> inverted{1.0, 0.9, 0.1, 0.0};
  EXPECT_DOUBLE_EQ(roc_auc(inverted, l), 0.0);
}

TEST(RocAuc, MatchesPairwiseOracleWithTies) {
  SeededRng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(2, 120);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (int i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_int(0, 12)) / 4.0;
      l[i] = static_cast<int>(rng.below(2));
    }
    l[0] = 0;
    l[1] = 1;
    EXPECT_NEAR(roc_auc(s, l), oracle::pairwise_auc(s, l), 1e-12);
  }
}

TEST(RocAuc, InvariantToStrictlyMonotoneTransform) {
  SeededRng rng(3);
  std::vector<double> s(300), t(300);
  std::vector<int> l(300);
  for (int i = 0; i < 300; ++i) {
    s[i] = rng.normal();
    t[i] = std::exp(3 * s[i]) + 1;
    l[i] = static_cast<int>(rng.below(2));
  }
  EXPECT_EQ(roc_auc(s, l), roc_auc(t, l));
}

TEST(RocAuc, UndefinedForSingleClassAndRejectsBadInput) {
  const std::vector<double> s{0.1, 0.2};
  EXPECT_THROW(roc_auc(s, std::vector<int>{1, 1}), UndefinedMetricError);
  EXPECT_THROW(roc_auc(s, std::vector<int>{0, 2}), DomainError);
  EXPECT_THROW(roc_auc(s, std::vector<int>{0}), DomainError);
  const std::vector<double> nan{std::nan(""), 0.2};
  EXPECT_THROW(roc_auc(nan, std::vector<int>{0, 1}), DomainError);
}

TEST(CombinedScore, WeightsRobustOverClean) {
  EXPECT_NEAR(combined_score(0.9723, 0.9974), 0.97983, 1e-12);
  EXPECT_DOUBLE_EQ(combined_score(1.0, 1.0), 1.0);
}

namespace {

ManifestRecord record(const std::string& id, Track t, int label) {
  ManifestRecord r;
  r.image_id = id;
  r.track = t;
  r.label = label;
  return r;
}

}  // namespace

TEST(Evaluate, SplitsByTrackAndIsOrderIndependent) {
  std::vector<ManifestRecord> m{record("a", Track::kClean, 0), record("b", Track::kClean, 1),
                                record("c", Track::kRobust, 0), record("d", Track::kRobust, 1),
                                record("e", Track::kRobust, 1)};
  std::vector<Prediction> p{{"a", 0.1}, {"b", 0.9}, {"c", 0.6}, {"d", 0.5}, {"e", 0.7}};
  const auto r = evaluate(m, p);
  EXPECT_DOUBLE_EQ(*r.clean_auc, 1.0);
  EXPECT_DOUBLE_EQ(*r.robust_auc, 0.5);
  EXPECT_DOUBLE_EQ(*r.combined, 0.7 * 0.5 + 0.3);
  EXPECT_EQ(r.robust.total, 3u);
  EXPECT_EQ(r.robust.positives, 2u);
  std::reverse(p.begin(), p.end());
  EXPECT_EQ(evaluate(m, p).to_json(), r.to_json());
  EXPECT_EQ(evaluate(m, p).to_csv(), r.to_csv());
}

TEST(Evaluate, SingleClassTrackIsUndefinedNotZero) {
  std::vector<ManifestRecord> m{record("a", Track::kClean, 1), record("b", Track::kRobust, 0),
                                record("c", Track::kRobust, 1)};
  const auto r = evaluate(m, {{"a", 0.3}, {"b", 0.1}, {"c", 0.2}});
  EXPECT_FALSE(r.clean_auc);
  EXPECT_FALSE(r.combined);
  EXPECT_TRUE(r.to_json()["clean_auc"].is_null());
}

TEST(Evaluate, MismatchListsEveryProblem) {
  std::vector<ManifestRecord> m{record("a", Track::kClean, 0), record("b", Track::kClean, 1)};
  auto failed = record("f", Track::kRobust, 1);
  failed.error = "boom";
  m.push_back(failed);
  try {
    (void)evaluate(m, {{"a", 0.1}, {"a", 0.2}, {"x", 0.3}});
    FAIL();
  } catch (const PredictionMismatch& e) {
    EXPECT_EQ(e.missing(), std::vector<std::string>{"b"});
    EXPECT_EQ(e.duplicate(), std::vector<std::string>{"a"});
    EXPECT_EQ(e.unexpected(), std::vector<std::string>{"x"});
  }
  const auto r = evaluate(m, {{"a", 0.1}, {"b", 0.2}});
  EXPECT_EQ(r.skipped_failed, 1u);
}

TEST(Predictions, ParseCsv) {
  const auto p = parse_predictions("image_id,score\na,0.25\nb,1e-3\n");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p[1].score, 0.001);
  EXPECT_THROW(parse_predictions("image_id,score\na,abc\n"), ConfigError);
  EXPECT_THROW(parse_predictions("id,score\na,1\n"), ConfigError);
}

TEST(Losses, ComponentsAndLpt) {
  const std::vector<double> p{0.7, 0.2, 0.1};
  const std::vector<double> q{0.5, 0.3, 0.2};
  EXPECT_DOUBLE_EQ(cross_entropy(p, 0), -std::log(0.7));
  const double kl = 0.7 * std::log(0.7 / 0.5) + 0.2 * std::log(0.2 / 0.3) + 0.1 * std::log(0.1 / 0.2);
  EXPECT_NEAR(kl_divergence(p, q), kl, 1e-15);
  EXPECT_GT(kl_divergence(p, q), 0.0);
  EXPECT_NEAR(kl_divergence(p, p), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(mean_squared_error(p, q), (0.04 + 0.01 + 0.01) / 3);
  EXPECT_EQ(lpt_loss(1.5, 0.25, 0.5), 1.5 + 0.5 * 0.25 + 0.25 * 0.5);
  EXPECT_EQ(lpt_loss(1.0, 2.0, 4.0, {1.0, 0.0}), 3.0);
  const std::vector<double> zero_q{1.0, 0.0, 0.0};
  EXPECT_THROW(kl_divergence(p, zero_q), DomainError);
  EXPECT_NO_THROW(kl_divergence(zero_q, p));
  EXPECT_THROW(cross_entropy(std::vector<double>{0.5, 0.6}, 0), DomainError);
}

TEST(Psnr, IdenticalIsInfiniteAndKnownValue) {
  ImageBuffer a(4, 4, 100);
  EXPECT_TRUE(psnr(a, a).identical());
  ImageBuffer b(4, 4, 110);
  EXPECT_NEAR(psnr(a, b).db, 10 * std::log10(255.0 * 255.0 / 100.0), 1e-12);
  EXPECT_THROW(psnr(a, ImageBuffer(2, 2)), SizingError);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support/corpus.hpp"
#include "support/oracles.hpp"
#include "wilddistort/filters.hpp"

using namespace wilddistort;
using namespace wilddistort::filters;

namespace {

FloatPlane random_plane(int w, int h, std::uint64_t seed) {
  SeededRng rng(seed);
  FloatPlane p(w, h);
  for (auto& v : p.data) v = static_cast<float>(rng.uniform(0, 255));
  return p;
}

}  // namespace

TEST(Filters, Reflect101) {
  EXPECT_EQ(reflect101(-1, 5), 1);
  EXPECT_EQ(reflect101(-2, 5), 2);
  EXPECT_EQ(reflect101(5, 5), 3);
  EXPECT_EQ(reflect101(6, 5), 2);
  EXPECT_EQ(reflect101(-7, 3), 1);
  EXPECT_EQ(reflect101(4, 1), 0);
}

TEST(Filters, GaussianKernelShape) {
  const auto k = gaussian_kernel(1.5);
  EXPECT_EQ(k.size(), 2u * 5 + 1);  // radius ceil(4.5)
  EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-6);
  for (std::size_t i = 0; i < k.size() / 2; ++i) EXPECT_FLOAT_EQ(k[i], k[k.size() - 1 - i]);
  EXPECT_EQ(gaussian_kernel(0.0), std::vector<float>{1.0f});
}

TEST(Filters, SeparableMatchesDenseOracle) {
  const auto p = random_plane(23, 17, 1);
  const auto k = gaussian_kernel(1.2);
  const int r = static_cast<int>(k.size() / 2);
  std::vector<double> k2d(k.size() * k.size());
  for (std::size_t y = 0; y < k.size(); ++y) {
    for (std::size_t x = 0; x < k.size(); ++x) k2d[y * k.size() + x] = static_cast<double>(k[y]) * k[x];
  }
  const auto expected = oracle::dense_correlate(p, k2d, r);
  const auto got = convolve_separable(p, k);
  for (std::size_t i = 0; i < expected.size(); ++i) ASSERT_NEAR(got.data[i], expected[i], 1e-3) << i;
}

TEST(Filters, TapsMatchDenseOracle) {
  const auto p = random_plane(19, 21, 2);
  const auto taps = disk_kernel(2.5);
  const int r = 3;
  std::vector<double> k2d((2 * r + 1) * (2 * r + 1), 0.0);
  double sum = 0;
  for (const auto& t : taps) {
    EXPECT_LE(t.dx * t.dx + t.dy * t.dy, 6.25);
    k2d[(t.dy + r) * (2 * r + 1) + t.dx + r] += t.weight;
    sum += t.weight;
  }
  EXPECT_NEAR(sum, 1.0, 1e-6);
  const auto expected = oracle::dense_correlate(p, k2d, r);
  const auto got = convolve_taps(p, taps);
  for (std::size_t i = 0; i < expected.size(); ++i) ASSERT_NEAR(got.data[i], expected[i], 1e-3) << i;
}

TEST(Filters, LineKernelFollowsAngle) {
  const auto horizontal = line_kernel(7, 0);
  double sum = 0;
  for (const auto& t : horizontal) {
    EXPECT_EQ(t.dy, 0);
    EXPECT_LE(std::abs(t.dx), 3);
    sum += t.weight;
  }
  EXPECT_NEAR(sum, 1.0, 1e-6);
  for (const auto& t : line_kernel(7, 90)) EXPECT_EQ(t.dx, 0);
}

TEST(Filters, BlurPreservesConstantImage) {
  const ImageBuffer flat(16, 9, 77);
  EXPECT_EQ(blur(flat, gaussian_kernel(2.0)), flat);
  EXPECT_EQ(blur(flat, disk_kernel(3)), flat);
  EXPECT_EQ(blur(flat, line_kernel(9, 33)), flat);
}

TEST(Filters, ResizeIdentityAndAreaAverage) {
  const auto img = testsupport::natural_image(20, 14, 3);
  EXPECT_EQ(resize(img, 20, 14), img);
  ImageBuffer checker(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      for (int c = 0; c < 3; ++c) checker.at(x, y, c) = (x + y) % 2 ? 200 : 0;
    }
  }
  const auto half = resize(checker, 2, 2);
  for (auto v : half.data()) EXPECT_EQ(v, 100);
  const ImageBuffer flat(5, 3, 42);
  EXPECT_EQ(resize(flat, 13, 8), ImageBuffer(13, 8, 42));
}

TEST(Filters, BilinearSampleInterpolates) {
  FloatPlane p(2, 1);
  p.data = {0.0f, 10.0f};
  EXPECT_FLOAT_EQ(sample_bilinear(p, 0.5, 0.0), 5.0f);
  EXPECT_FLOAT_EQ(sample_bilinear(p, 1.0, 0.0), 10.0f);
}

TEST(Clahe, BinLimitAndClipConservesMass) {
  EXPECT_EQ(clahe_bin_limit(2.0, 256), 2u);
  EXPECT_EQ(clahe_bin_limit(0.1, 100), 1u);
  EXPECT_EQ(clahe_bin_limit(4.0, 1000), 15u);

  SeededRng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Histogram h{};
    std::uint64_t total = 0;
    for (int i = 0; i < 2000; ++i) {
      const auto bin = static_cast<std::size_t>(std::min(255.0, std::abs(rng.normal(128, 10 + trial))));
      ++h[bin];
      ++total;
    }
    const auto limit = static_cast<std::uint32_t>(1 + trial);
    const auto clipped = clip_histogram(h, limit);
    std::uint64_t kept = 0, after = 0;
    for (int i = 0; i < 256; ++i) {
      EXPECT_LE(clipped.clipped[i], limit);
      kept += clipped.clipped[i];
      after += clipped.redistributed[i];
    }
    EXPECT_EQ(kept + clipped.excess, total);
    EXPECT_EQ(after, total);
  }
}

TEST(Clahe, TileBoundsPartitionExtent) {
  const auto b = tile_bounds(100, 8);
  ASSERT_EQ(b.size(), 9u);
  EXPECT_EQ(b.front(), 0);
  EXPECT_EQ(b.back(), 100);
  for (std::size_t i = 1; i < b.size(); ++i) EXPECT_GT(b[i], b[i - 1]);
}

TEST(Clahe, ConstantPlaneStaysConstantAndOutputIsDeterministic) {
  const std::vector<std::uint8_t> flat(64 * 48, 90);
  const auto out = clahe(flat, 64, 48, 2.0, 8, 8);
  for (auto v : out) EXPECT_EQ(v, out[0]);
  std::vector<std::uint8_t> ramp(64 * 48);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<std::uint8_t>(i % 64 * 2 + 30);
  EXPECT_EQ(clahe(ramp, 64, 48, 3.0, 8, 8), clahe(ramp, 64, 48, 3.0, 8, 8));
}

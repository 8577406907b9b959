#include <gtest/gtest.h>

#include <cmath>

#include "support/corpus.hpp"
#include "wilddistort/codec.hpp"
#include "wilddistort/error.hpp"
#include "wilddistort/image.hpp"
#include "wilddistort/metrics.hpp"

using namespace wilddistort;

TEST(Image, RejectsEmptyAndMismatchedBuffers) {
  EXPECT_THROW(ImageBuffer(0, 5), SizingError);
  EXPECT_THROW(ImageBuffer(2, 2, std::vector<std::uint8_t>(5)), SizingError);
  ImageBuffer img(3, 2, 7);
  EXPECT_EQ(img.sample_count(), 18u);
  EXPECT_EQ(img.at(2, 1, 2), 7);
}

TEST(Image, RoundingIsHalfAwayFromZeroAndSaturating) {
  EXPECT_EQ(round_to_u8(0.5), 1);
  EXPECT_EQ(round_to_u8(1.49), 1);
  EXPECT_EQ(round_to_u8(254.5), 255);
  EXPECT_EQ(round_to_u8(300.0), 255);
  EXPECT_EQ(round_to_u8(-4.0), 0);
  EXPECT_EQ(unit_to_u8(0.5), 128);
  EXPECT_EQ(unit_to_u8(1.7), 255);
}

TEST(Image, FloatRoundTripIsExact) {
  const auto img = testsupport::natural_image(31, 17, 3);
  EXPECT_EQ(from_float(to_float(img)), img);
}

TEST(Image, HsvRoundTripWithinOneLevel) {
  const auto img = testsupport::natural_image(40, 40, 4);
  EXPECT_LE(max_abs_diff(rgb_hsv_roundtrip(img), img), 1);
  const Hsv red = rgb_to_hsv({1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(red.h, 0.0);
  EXPECT_DOUBLE_EQ(red.s, 1.0);
  const Hsv grey = rgb_to_hsv({0.4, 0.4, 0.4});
  EXPECT_DOUBLE_EQ(grey.s, 0.0);
}

TEST(Image, YCbCrRoundTripAndGreyHasNeutralChroma) {
  for (double r : {0.0, 0.3, 1.0}) {
    for (double b : {0.0, 0.6, 1.0}) {
      const Rgb c{r, 0.5, b};
      const Rgb back = ycbcr_to_rgb(rgb_to_ycbcr(c));
      // JFIF coefficients are rounded to six digits.
      EXPECT_NEAR(back.r, c.r, 1e-6);
      EXPECT_NEAR(back.g, c.g, 1e-6);
      EXPECT_NEAR(back.b, c.b, 1e-6);
    }
  }
  const YCbCr g = rgb_to_ycbcr({0.25, 0.25, 0.25});
  EXPECT_NEAR(g.y, 0.25, 1e-12);
  EXPECT_NEAR(g.cb, 0.5, 1e-12);
  EXPECT_NEAR(g.cr, 0.5, 1e-12);
}

TEST(Codec, PngRoundTripIsLossless) {
  const auto img = testsupport::natural_image(53, 29, 5);
  const auto png = encode_png(img);
  EXPECT_EQ(sniff_format(png), ImageFormat::kPng);
  EXPECT_EQ(decode_image(png), img);
  EXPECT_EQ(encode_png(img), png);
}

TEST(Codec, JpegQualityHundredIsNearLossless) {
  const auto img = testsupport::natural_image(96, 64, 6);
  const auto jpg = encode_jpeg(img, 100);
  EXPECT_EQ(sniff_format(jpg), ImageFormat::kJpeg);
  const auto back = decode_image(jpg);
  ASSERT_TRUE(back.same_size(img));
  EXPECT_GE(psnr(img, back).db, 45.0);
}

TEST(Codec, JpegIsDeterministicAndQualityOrdered) {
  const auto img = testsupport::natural_image(64, 64, 7);
  EXPECT_EQ(encode_jpeg(img, 50), encode_jpeg(img, 50));
  EXPECT_LT(encode_jpeg(img, 20).size(), encode_jpeg(img, 90).size());
  EXPECT_THROW(encode_jpeg(img, 0), ParameterError);
  EXPECT_THROW(encode_jpeg(img, 101), ParameterError);
}

TEST(Codec, RejectsGarbage) {
  const Bytes junk{1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(sniff_format(junk), ImageFormat::kUnknown);
  EXPECT_THROW(decode_image(junk), CodecError);
  Bytes truncated = encode_png(testsupport::natural_image(20, 20, 1));
  truncated.resize(truncated.size() / 2);
  EXPECT_THROW(decode_image(truncated), CodecError);
}

TEST(Codec, AlphaIsCompositedOverWhite) {
  const Bytes rgba{0x89,0x50,0x4e,0x47,0x0d,0x0a,0x1a,0x0a,0x00,0x00,0x00,0x0d,0x49,0x48,0x44,0x52,0x00,0x00,0x00,
                   0x02,0x00,0x00,0x00,0x01,0x08,0x06,0x00,0x00,0x00,0xf4,0x22,0x7f,0x8a,0x00,0x00,0x00,0x11,0x49,
                   0x44,0x41,0x54,0x78,0x9c,0x63,0xf8,0xcf,0xc0,0xc0,0xc0,0xc0,0xf0,0xbf,0x01,0x00,0x0a,0x7f,0x02,
                   0x7f,0xcc,0x9a,0x93,0x17,0x00,0x00,0x00,0x00,0x49,0x45,0x4e,0x44,0xae,0x42,0x60,0x82};
  const auto img = decode_image(rgba);
  ASSERT_EQ(img.width(), 2);
  // (255,0,0,a=0) -> white; (0,0,255,a=128) -> (127,127,255)
  EXPECT_EQ(img.at(0, 0, 0), 255);
  EXPECT_EQ(img.at(0, 0, 1), 255);
  EXPECT_EQ(img.at(1, 0, 0), 127);
  EXPECT_EQ(img.at(1, 0, 1), 127);
  EXPECT_EQ(img.at(1, 0, 2), 255);
}

TEST(Codec, GreyscalePngExpandsToRgb) {
  const Bytes grey{0x89,0x50,0x4e,0x47,0x0d,0x0a,0x1a,0x0a,0x00,0x00,0x00,0x0d,0x49,0x48,0x44,0x52,0x00,0x00,0x00,
                   0x02,0x00,0x00,0x00,0x02,0x08,0x00,0x00,0x00,0x00,0x57,0xdd,0x52,0xf8,0x00,0x00,0x00,0x0e,0x49,
                   0x44,0x41,0x54,0x78,0x9c,0x63,0x60,0x70,0x60,0x68,0xf8,0x0f,0x00,0x03,0x05,0x01,0xc0,0x4e,0x33,
                   0x5b,0xe9,0x00,0x00,0x00,0x00,0x49,0x45,0x4e,0x44,0xae,0x42,0x60,0x82};
  const auto img = decode_image(grey);
  const int expected[4] = {0, 64, 128, 255};
  for (int i = 0; i < 4; ++i) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(img.at(i % 2, i / 2, c), expected[i]);
  }
}

TEST(Codec, FileHelpers) {
  const auto dir = testsupport::temp_dir("codec_files");
  const auto img = testsupport::natural_image(10, 12, 2);
  write_file(dir / "a.png", encode_png(img));
  EXPECT_EQ(load_image(dir / "a.png"), img);
  EXPECT_THROW(read_file(dir / "missing.png"), Error);
}

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wilddistort {

/// Owned 8-bit interleaved RGB raster, row-major.
///
/// The buffer always holds exactly width * height * 3 samples and both
/// dimensions are at least one pixel.
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer(int width, int height);
  ImageBuffer(int width, int height, std::uint8_t fill);
  ImageBuffer(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  std::size_t sample_count() const { return data_.size(); }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  std::uint8_t at(int x, int y, int c) const { return data_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c) { return data_[index(x, y, c)]; }

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  bool same_size(const ImageBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

/// Single-channel real-valued plane used as an intermediate by the float
/// paths of the transforms.
struct FloatPlane {
  FloatPlane() = default;
  FloatPlane(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

  int width = 0;
  int height = 0;
  std::vector<float> data;
};

using RgbPlanes = std::array<FloatPlane, 3>;

/// The one rounding rule used wherever a float meets 8-bit data:
/// clamp to [0, 255] and round half away from zero.
std::uint8_t round_to_u8(double v);

/// Unit-scale value in [0, 1] to 8-bit: round(clamp(v, 0, 1) * 255).
std::uint8_t unit_to_u8(double v);

RgbPlanes to_float(const ImageBuffer& img);
ImageBuffer from_float(const FloatPlane& r, const FloatPlane& g, const FloatPlane& b);
inline ImageBuffer from_float(const RgbPlanes& p) { return from_float(p[0], p[1], p[2]); }

struct Hsv {
  double h;  // degrees in [0, 360)
  double s;  // [0, 1]
  double v;  // [0, 1]
};

struct Rgb {
  double r, g, b;  // [0, 1]
};

Hsv rgb_to_hsv(Rgb c);
Rgb hsv_to_rgb(Hsv c);

/// Per-pixel RGB -> HSV -> RGB with no modification.
ImageBuffer rgb_hsv_roundtrip(const ImageBuffer& img);

/// Full-range BT.601 (JFIF) luma/chroma, all components in unit scale with
/// chroma centred on 0.5.
struct YCbCr {
  double y, cb, cr;
};

YCbCr rgb_to_ycbcr(Rgb c);
Rgb ycbcr_to_rgb(YCbCr c);

/// Squared-error sum and PSNR helpers live in metrics; this is the raw
/// per-sample maximum absolute difference, used by tests and replay checks.
int max_abs_diff(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace wilddistort

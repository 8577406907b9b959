#include "wilddistort/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "wilddistort/error.hpp"

namespace wilddistort {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw SizingError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height) : ImageBuffer(width, height, std::uint8_t{0}) {}

ImageBuffer::ImageBuffer(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height * kChannels) {
    throw SizingError("image data length " + std::to_string(data_.size()) + " does not match " +
                      std::to_string(width) + "x" + std::to_string(height) + "x3");
  }
}

std::uint8_t round_to_u8(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  // v is positive, so half-away-from-zero is floor(v + 0.5).
  return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

std::uint8_t unit_to_u8(double v) { return round_to_u8(std::clamp(v, 0.0, 1.0) * 255.0); }

RgbPlanes to_float(const ImageBuffer& img) {
  RgbPlanes planes{FloatPlane(img.width(), img.height()), FloatPlane(img.width(), img.height()),
                   FloatPlane(img.width(), img.height())};
  const auto src = img.data();
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      planes[c].data[i] = static_cast<float>(src[i * 3 + c]) / 255.0f;
    }
  }
  return planes;
}

ImageBuffer from_float(const FloatPlane& r, const FloatPlane& g, const FloatPlane& b) {
  if (r.width != g.width || r.width != b.width || r.height != g.height || r.height != b.height) {
    throw SizingError("from_float: plane dimensions differ");
  }
  ImageBuffer out(r.width, r.height);
  auto dst = out.data();
  const std::size_t n = out.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    dst[i * 3 + 0] = unit_to_u8(r.data[i]);
    dst[i * 3 + 1] = unit_to_u8(g.data[i]);
    dst[i * 3 + 2] = unit_to_u8(b.data[i]);
  }
  return out;
}

Hsv rgb_to_hsv(Rgb c) {
  const double mx = std::max({c.r, c.g, c.b});
  const double mn = std::min({c.r, c.g, c.b});
  const double delta = mx - mn;
  Hsv out{0.0, 0.0, mx};
  if (mx > 0.0) out.s = delta / mx;
  if (delta > 0.0) {
    double h;
    if (mx == c.r) {
      h = std::fmod((c.g - c.b) / delta, 6.0);
    } else if (mx == c.g) {
      h = (c.b - c.r) / delta + 2.0;
    } else {
      h = (c.r - c.g) / delta + 4.0;
    }
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    out.h = h;
  }
  return out;
}

Rgb hsv_to_rgb(Hsv c) {
  double h = std::fmod(c.h, 360.0);
  if (h < 0.0) h += 360.0;
  const double chroma = c.v * c.s;
  const double hp = h / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = c.v - chroma;
  return {r + m, g + m, b + m};
}

ImageBuffer rgb_hsv_roundtrip(const ImageBuffer& img) {
  ImageBuffer out(img.width(), img.height());
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb rgb{src[i * 3] / 255.0, src[i * 3 + 1] / 255.0, src[i * 3 + 2] / 255.0};
    const Rgb back = hsv_to_rgb(rgb_to_hsv(rgb));
    dst[i * 3 + 0] = unit_to_u8(back.r);
    dst[i * 3 + 1] = unit_to_u8(back.g);
    dst[i * 3 + 2] = unit_to_u8(back.b);
  }
  return out;
}

YCbCr rgb_to_ycbcr(Rgb c) {
  const double y = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
  const double cb = 0.5 - 0.168736 * c.r - 0.331264 * c.g + 0.5 * c.b;
  const double cr = 0.5 + 0.5 * c.r - 0.418688 * c.g - 0.081312 * c.b;
  return {y, cb, cr};
}

Rgb ycbcr_to_rgb(YCbCr c) {
  const double cb = c.cb - 0.5;
  const double cr = c.cr - 0.5;
  return {c.y + 1.402 * cr, c.y - 0.344136 * cb - 0.714136 * cr, c.y + 1.772 * cb};
}

int max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_size(b)) throw SizingError("max_abs_diff: dimension mismatch");
  int worst = 0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<int>(da[i]) - static_cast<int>(db[i])));
  }
  return worst;
}

}  // namespace wilddistort

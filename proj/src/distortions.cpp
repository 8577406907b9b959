#include "wilddistort/distortions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "wilddistort/error.hpp"
#include "wilddistort/filters.hpp"

namespace wilddistort {

namespace {

constexpr double kPi = 3.14159265358979323846;

double get(const DistortionSpec& spec, const std::string& key) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    throw ParameterError(std::string(to_string(spec.kind)) + ": missing parameter '" + key + "'");
  }
  return it->second;
}

int get_int(const DistortionSpec& spec, const std::string& key) {
  return static_cast<int>(std::lround(get(spec, key)));
}

[[noreturn]] void too_small(const DistortionSpec& spec, const ImageBuffer& img, const std::string& why) {
  throw SizingError(std::string(to_string(spec.kind)) + ": " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()) + " image too small (" + why + ")");
}

// Applies fn(Rgb) -> Rgb to every pixel in unit scale.
template <typename Fn>
ImageBuffer map_pixels(const ImageBuffer& img, Fn fn) {
  ImageBuffer out(img.width(), img.height());
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb c = fn(Rgb{src[i * 3] / 255.0, src[i * 3 + 1] / 255.0, src[i * 3 + 2] / 255.0});
    dst[i * 3 + 0] = unit_to_u8(c.r);
    dst[i * 3 + 1] = unit_to_u8(c.g);
    dst[i * 3 + 2] = unit_to_u8(c.b);
  }
  return out;
}

template <typename Fn>
ImageBuffer map_samples(const ImageBuffer& img, Fn fn) {
  ImageBuffer out(img.width(), img.height());
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = fn(src[i]);
  return out;
}

Rgb shift_hue(Rgb c, double degrees) {
  Hsv hsv = rgb_to_hsv(c);
  hsv.h += degrees;
  return hsv_to_rgb(hsv);
}

Rgb scale_saturation(Rgb c, double factor) {
  Hsv hsv = rgb_to_hsv(c);
  hsv.s = std::clamp(hsv.s * factor, 0.0, 1.0);
  return hsv_to_rgb(hsv);
}

// ---------------------------------------------------------------------------
// blur group

ImageBuffer glass_blur(const ImageBuffer& img, const DistortionSpec& spec, SeededRng& rng) {
  const int delta = get_int(spec, "delta");
  const int iterations = get_int(spec, "iterations");
  ImageBuffer work = img;
  const int w = img.width();
  const int h = img.height();
  if (delta > 0) {
    for (int it = 0; it < iterations; ++it) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const int nx = std::clamp(x + rng.uniform_int(-delta, delta), 0, w - 1);
          const int ny = std::clamp(y + rng.uniform_int(-delta, delta), 0, h - 1);
          for (int c = 0; c < 3; ++c) std::swap(work.at(x, y, c), work.at(nx, ny, c));
        }
      }
    }
  }
  return filters::blur(work, filters::gaussian_kernel(get(spec, "sigma")));
}

ImageBuffer pixelate(const ImageBuffer& img, int block) {
  if (block <= 1) return img;
  ImageBuffer out(img.width(), img.height());
  for (int by = 0; by < img.height(); by += block) {
    for (int bx = 0; bx < img.width(); bx += block) {
      const int ex = std::min(bx + block, img.width());
      const int ey = std::min(by + block, img.height());
      const int count = (ex - bx) * (ey - by);
      for (int c = 0; c < 3; ++c) {
        long sum = 0;
        for (int y = by; y < ey; ++y) {
          for (int x = bx; x < ex; ++x) sum += img.at(x, y, c);
        }
        const std::uint8_t v = round_to_u8(static_cast<double>(sum) / count);
        for (int y = by; y < ey; ++y) {
          for (int x = bx; x < ex; ++x) out.at(x, y, c) = v;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// noise group

ImageBuffer impulse_noise(const ImageBuffer& img, double density, SeededRng& rng) {
  const std::size_t n = img.pixel_count();
  const auto k = static_cast<std::size_t>(std::floor(density * static_cast<double>(n)));
  if (k == 0) return img;
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  ImageBuffer out = img;
  auto dst = out.data();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
    const std::uint8_t v = rng.bernoulli(0.5) ? 255 : 0;
    for (int c = 0; c < 3; ++c) dst[static_cast<std::size_t>(idx[i]) * 3 + c] = v;
  }
  return out;
}

ImageBuffer iso_noise(const ImageBuffer& img, double sigma, SeededRng& rng) {
  if (sigma == 0.0) return img;
  return map_pixels(img, [&](Rgb c) {
    YCbCr ycc = rgb_to_ycbcr(c);
    ycc.y += sigma * rng.normal();
    ycc.cb += 0.5 * sigma * rng.normal();
    ycc.cr += 0.5 * sigma * rng.normal();
    return ycbcr_to_rgb(ycc);
  });
}

// ---------------------------------------------------------------------------
// color group

ImageBuffer color_jitter(const ImageBuffer& img, const DistortionSpec& spec) {
  const double brightness = get(spec, "brightness");
  const double contrast = get(spec, "contrast");
  const double saturation = get(spec, "saturation");
  const double hue = get(spec, "hue");
  if (brightness == 1.0 && contrast == 1.0 && saturation == 1.0 && hue == 0.0) return img;

  // Mean luma of the brightness-adjusted image is the contrast pivot.
  double luma_sum = 0.0;
  const auto src = img.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const Rgb c{src[i * 3] / 255.0, src[i * 3 + 1] / 255.0, src[i * 3 + 2] / 255.0};
    luma_sum += std::clamp(rgb_to_ycbcr(c).y * brightness, 0.0, 1.0);
  }
  const double pivot = luma_sum / static_cast<double>(img.pixel_count());

  return map_pixels(img, [&](Rgb c) {
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    c = {clamp01(c.r * brightness), clamp01(c.g * brightness), clamp01(c.b * brightness)};
    c = {clamp01(pivot + contrast * (c.r - pivot)), clamp01(pivot + contrast * (c.g - pivot)),
         clamp01(pivot + contrast * (c.b - pivot))};
    const double l = rgb_to_ycbcr(c).y;
    c = {clamp01(l + saturation * (c.r - l)), clamp01(l + saturation * (c.g - l)),
         clamp01(l + saturation * (c.b - l))};
    return hue == 0.0 ? c : shift_hue(c, hue);
  });
}

ImageBuffer color_quantization(const ImageBuffer& img, int levels) {
  if (levels >= 256) return img;
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    const int bin = v * levels / 256;
    lut[v] = round_to_u8(bin * 255.0 / (levels - 1));
  }
  return map_samples(img, [&](std::uint8_t v) { return lut[v]; });
}

ImageBuffer rgb_channel_shift(const ImageBuffer& img, int dx, int dy) {
  if (dx == 0 && dy == 0) return img;
  ImageBuffer out = img;
  const int w = img.width();
  const int h = img.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(x, y, 0) = img.at(filters::reflect101(x - dx, w), filters::reflect101(y - dy, h), 0);
      out.at(x, y, 2) = img.at(filters::reflect101(x + dx, w), filters::reflect101(y + dy, h), 2);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// tone group

ImageBuffer add_offset(const ImageBuffer& img, double delta) {
  if (delta == 0.0) return img;
  return map_samples(img, [&](std::uint8_t v) { return round_to_u8(v + delta); });
}

ImageBuffer tone_curve(const ImageBuffer& img, double y1, double y2) {
  // Cubic Bezier with control ordinates (0, y1, y2, 1) at abscissae (0, 1/3,
  // 2/3, 1); x(t) = t, so the curve is evaluated directly at t = v / 255.
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    const double t = v / 255.0;
    const double s = 1.0 - t;
    const double y = 3.0 * s * s * t * y1 + 3.0 * s * t * t * y2 + t * t * t;
    lut[v] = unit_to_u8(y);
  }
  return map_samples(img, [&](std::uint8_t v) { return lut[v]; });
}

// clip_limit 0 disables equalization.
ImageBuffer clahe_luma(const ImageBuffer& img, double clip_limit, int tiles) {
  if (clip_limit == 0.0) return img;
  const std::size_t n = img.pixel_count();
  std::vector<std::uint8_t> luma(n);
  std::vector<YCbCr> ycc(n);
  const auto src = img.data();
  for (std::size_t i = 0; i < n; ++i) {
    ycc[i] = rgb_to_ycbcr({src[i * 3] / 255.0, src[i * 3 + 1] / 255.0, src[i * 3 + 2] / 255.0});
    luma[i] = unit_to_u8(ycc[i].y);
  }
  const auto eq = filters::clahe(luma, img.width(), img.height(), clip_limit, tiles, tiles);
  ImageBuffer out(img.width(), img.height());
  auto dst = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    const Rgb c = ycbcr_to_rgb({eq[i] / 255.0, ycc[i].cb, ycc[i].cr});
    dst[i * 3 + 0] = unit_to_u8(c.r);
    dst[i * 3 + 1] = unit_to_u8(c.g);
    dst[i * 3 + 2] = unit_to_u8(c.b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// geometric group

struct Window {
  int x, y, w, h;
};

ImageBuffer crop(const ImageBuffer& img, Window win) {
  ImageBuffer out(win.w, win.h);
  for (int y = 0; y < win.h; ++y) {
    const auto* row = img.data().data() + img.index(win.x, win.y + y, 0);
    std::copy(row, row + static_cast<std::size_t>(win.w) * 3, out.data().data() + out.index(0, y, 0));
  }
  return out;
}

int offset_from_unit(double u, int room) {
  // room >= 0 extra pixels; u in [0, 1) selects one of room + 1 offsets.
  return std::min(room, static_cast<int>(std::floor(u * (room + 1))));
}

Window crop_window(const DistortionSpec& spec, const ImageBuffer& img) {
  const auto [w, h] = output_size(spec, img.width(), img.height());
  if (w > img.width() || h > img.height()) too_small(spec, img, "crop window exceeds image");
  return {offset_from_unit(get(spec, "u_x"), img.width() - w), offset_from_unit(get(spec, "u_y"), img.height() - h),
          w, h};
}

using Mat3 = std::array<double, 9>;

// Solves for the homography mapping the four `from` points onto `to`.
Mat3 homography(const std::array<std::array<double, 2>, 4>& from, const std::array<std::array<double, 2>, 4>& to) {
  double a[8][9] = {};
  for (int i = 0; i < 4; ++i) {
    const double x = from[i][0], y = from[i][1], u = to[i][0], v = to[i][1];
    double* r0 = a[2 * i];
    double* r1 = a[2 * i + 1];
    r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
    r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
  }
  for (int col = 0; col < 8; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 8; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (std::fabs(a[pivot][col]) < 1e-12) throw ParameterError("perspective_transform: degenerate corner jitter");
    if (pivot != col) std::swap(a[pivot], a[col]);
    for (int r = 0; r < 8; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 9; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Mat3 m{};
  for (int i = 0; i < 8; ++i) m[i] = a[i][8] / a[i][i];
  m[8] = 1.0;
  return m;
}

ImageBuffer perspective(const ImageBuffer& img, const DistortionSpec& spec) {
  const int w = img.width();
  const int h = img.height();
  if (w < 2 || h < 2) too_small(spec, img, "needs at least 2x2");
  const double jitter = get(spec, "jitter");
  if (jitter == 0.0) return img;
  const double jx = jitter * (w - 1);
  const double jy = jitter * (h - 1);
  std::array<double, 8> c{};
  for (int i = 0; i < 8; ++i) c[i] = get(spec, "c" + std::to_string(i));
  const double r = w - 1.0;
  const double b = h - 1.0;
  const std::array<std::array<double, 2>, 4> dst_corners{{{0, 0}, {r, 0}, {r, b}, {0, b}}};
  const std::array<std::array<double, 2>, 4> src_corners{{{c[0] * jx, c[1] * jy},
                                                          {r - c[2] * jx, c[3] * jy},
                                                          {r - c[4] * jx, b - c[5] * jy},
                                                          {c[6] * jx, b - c[7] * jy}}};
  const Mat3 m = homography(dst_corners, src_corners);
  const auto planes = filters::split(img);
  RgbPlanes out{FloatPlane(w, h), FloatPlane(w, h), FloatPlane(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double den = m[6] * x + m[7] * y + m[8];
      const double sx = (m[0] * x + m[1] * y + m[2]) / den;
      const double sy = (m[3] * x + m[4] * y + m[5]) / den;
      for (int ch = 0; ch < 3; ++ch) out[ch].at(x, y) = filters::sample_bilinear(planes[ch], sx, sy);
    }
  }
  return filters::merge(out);
}

}  // namespace

std::pair<int, int> output_size(const DistortionSpec& spec, int width, int height) {
  auto scaled = [](int extent, double factor) {
    return std::max(1, static_cast<int>(std::lround(extent * factor)));
  };
  switch (spec.kind) {
    case DistortionKind::kRandomCrop: {
      const double s = std::sqrt(get(spec, "area"));
      return {scaled(width, s), scaled(height, s)};
    }
    case DistortionKind::kRandomAspectCrop: {
      const double area = get(spec, "area");
      const double aspect = get(spec, "aspect");
      if (area > 1.0) {
        const double s = std::sqrt(area);
        return {scaled(width, s), scaled(height, s)};
      }
      return {std::min(width, scaled(width, std::sqrt(area * aspect))),
              std::min(height, scaled(height, std::sqrt(area / aspect)))};
    }
    case DistortionKind::kDownscale: {
      const double s = get(spec, "scale");
      return {scaled(width, s), scaled(height, s)};
    }
    case DistortionKind::kSquishResize:
      return {get_int(spec, "width"), get_int(spec, "height")};
    default:
      return {width, height};
  }
}

void resolve_random_params(DistortionSpec& spec, SeededRng& rng) {
  const auto& schema = param_schema(spec.kind);
  bool complete = true;
  for (const auto& k : schema.random_keys) complete = complete && spec.params.count(k);
  if (complete) return;

  // Draw order is fixed per kind; every draw happens even when a key is
  // already present so partially recorded specs stay aligned.
  ParamRecord drawn;
  switch (spec.kind) {
    case DistortionKind::kMotionBlur:
      drawn["angle"] = 180.0 * rng.uniform();
      break;
    case DistortionKind::kColorShift:
      drawn["hue_shift"] = (rng.bernoulli(0.5) ? 1.0 : -1.0) * get(spec, "hue_degrees");
      break;
    case DistortionKind::kColorJitter: {
      const double m = get(spec, "magnitude");
      drawn["brightness"] = 1.0 + m * (2.0 * rng.uniform() - 1.0);
      drawn["contrast"] = 1.0 + m * (2.0 * rng.uniform() - 1.0);
      drawn["saturation"] = 1.0 + m * (2.0 * rng.uniform() - 1.0);
      drawn["hue"] = 90.0 * m * (2.0 * rng.uniform() - 1.0);
      break;
    }
    case DistortionKind::kRgbChannelShift: {
      const double shift = get(spec, "shift");
      const double angle = 2.0 * kPi * rng.uniform();
      drawn["dx"] = static_cast<double>(std::lround(shift * std::cos(angle)));
      drawn["dy"] = static_cast<double>(std::lround(shift * std::sin(angle)));
      break;
    }
    case DistortionKind::kColorCast: {
      const double m = get(spec, "magnitude");
      std::array<double, 3> d{rng.normal(), rng.normal(), rng.normal()};
      const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
      for (auto& v : d) v = norm > 0.0 ? m * v / norm : 0.0;
      drawn["tint_r"] = d[0];
      drawn["tint_g"] = d[1];
      drawn["tint_b"] = d[2];
      break;
    }
    case DistortionKind::kRandomToneCurve: {
      const double s = get(spec, "scale");
      drawn["y1"] = std::clamp(1.0 / 3.0 + s * rng.normal(), 0.0, 1.0);
      drawn["y2"] = std::clamp(2.0 / 3.0 + s * rng.normal(), 0.0, 1.0);
      break;
    }
    case DistortionKind::kRandomCrop:
      drawn["u_x"] = rng.uniform();
      drawn["u_y"] = rng.uniform();
      break;
    case DistortionKind::kRandomAspectCrop: {
      const double log_max = std::log(get(spec, "max_aspect"));
      drawn["aspect"] = std::exp(log_max * (2.0 * rng.uniform() - 1.0));
      drawn["u_x"] = rng.uniform();
      drawn["u_y"] = rng.uniform();
      break;
    }
    case DistortionKind::kPerspectiveTransform:
      for (int i = 0; i < 8; ++i) drawn["c" + std::to_string(i)] = rng.uniform();
      break;
    default:
      break;
  }
  for (auto& [k, v] : drawn) spec.params.emplace(k, v);
}

DistortionSpec make_spec(DistortionKind kind, int level, const SeverityTable& table, SeededRng& rng) {
  DistortionSpec spec{kind, level, severity_params(kind, level, table), group_of(kind)};
  resolve_random_params(spec, rng);
  return spec;
}

ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality) { return decode_image(encode_jpeg(img, quality)); }

namespace {

std::vector<int> jpeg_qualities(const DistortionSpec& spec) {
  if (spec.kind == DistortionKind::kJpegCompression) return {get_int(spec, "quality")};
  std::vector<int> qs;
  for (const char* key : {"q1", "q2", "q3", "q4", "q5"}) {
    if (spec.params.count(key)) qs.push_back(get_int(spec, key));
  }
  return qs;
}

}  // namespace

AppliedImage apply_keep_encoding(const ImageBuffer& img, const DistortionSpec& spec, SeededRng& rng) {
  if (spec.kind != DistortionKind::kJpegCompression && spec.kind != DistortionKind::kMultipleJpegCompressions) {
    return {apply(img, spec, rng), std::nullopt};
  }
  const auto qs = jpeg_qualities(spec);
  ImageBuffer cur = img;
  for (std::size_t i = 0; i + 1 < qs.size(); ++i) cur = jpeg_roundtrip(cur, qs[i]);
  Bytes bytes = encode_jpeg(cur, qs.back());
  ImageBuffer decoded = decode_image(bytes);
  return {std::move(decoded), std::move(bytes)};
}

ImageBuffer apply(const ImageBuffer& img, const DistortionSpec& in_spec, SeededRng& rng) {
  DistortionSpec spec = in_spec;
  resolve_random_params(spec, rng);

  switch (spec.kind) {
    case DistortionKind::kGaussianBlur:
      return filters::blur(img, filters::gaussian_kernel(get(spec, "sigma")));
    case DistortionKind::kLensBlur:
      return filters::blur(img, filters::disk_kernel(get(spec, "radius")));
    case DistortionKind::kMotionBlur:
      return filters::blur(img, filters::line_kernel(get(spec, "length"), get(spec, "angle")));
    case DistortionKind::kGlassBlur:
      return glass_blur(img, spec, rng);
    case DistortionKind::kPixelate:
      return pixelate(img, get_int(spec, "block"));

    case DistortionKind::kWhiteNoise: {
      const double sigma = 255.0 * get(spec, "sigma");
      if (sigma == 0.0) return img;
      return map_samples(img, [&](std::uint8_t v) { return round_to_u8(v + sigma * rng.normal()); });
    }
    case DistortionKind::kImpulseNoise:
      return impulse_noise(img, get(spec, "density"), rng);
    case DistortionKind::kMultiplicativeNoise: {
      const double sigma = get(spec, "sigma");
      if (sigma == 0.0) return img;
      return map_samples(img, [&](std::uint8_t v) { return round_to_u8(v + v * sigma * rng.normal()); });
    }
    case DistortionKind::kShotNoise: {
      const double photons = get(spec, "photons");
      return map_samples(img, [&](std::uint8_t v) {
        const double mean = v / 255.0 * photons;
        return unit_to_u8(static_cast<double>(rng.poisson(mean)) / photons);
      });
    }
    case DistortionKind::kIsoNoise:
      return iso_noise(img, get(spec, "sigma"), rng);

    case DistortionKind::kColorShift: {
      const double shift = get(spec, "hue_shift");
      if (shift == 0.0) return img;
      return map_pixels(img, [&](Rgb c) { return shift_hue(c, shift); });
    }
    case DistortionKind::kColorSaturation: {
      const double factor = get(spec, "factor");
      if (factor == 1.0) return img;
      return map_pixels(img, [&](Rgb c) { return scale_saturation(c, factor); });
    }
    case DistortionKind::kColorJitter:
      return color_jitter(img, spec);
    case DistortionKind::kColorQuantization:
      return color_quantization(img, get_int(spec, "levels"));
    case DistortionKind::kRgbChannelShift:
      return rgb_channel_shift(img, get_int(spec, "dx"), get_int(spec, "dy"));
    case DistortionKind::kColorCast: {
      const std::array<double, 3> tint{255.0 * get(spec, "tint_r"), 255.0 * get(spec, "tint_g"),
                                       255.0 * get(spec, "tint_b")};
      if (tint[0] == 0.0 && tint[1] == 0.0 && tint[2] == 0.0) return img;
      ImageBuffer out(img.width(), img.height());
      const auto src = img.data();
      auto dst = out.data();
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = round_to_u8(src[i] + tint[i % 3]);
      return out;
    }

    case DistortionKind::kBrightnessIncrease:
      return add_offset(img, get(spec, "delta"));
    case DistortionKind::kBrightnessDecrease:
      return add_offset(img, -get(spec, "delta"));
    case DistortionKind::kLinearContrastChange: {
      const double f = get(spec, "factor");
      if (f == 1.0) return img;
      return map_samples(img, [&](std::uint8_t v) { return round_to_u8(127.5 + f * (v - 127.5)); });
    }
    case DistortionKind::kRandomToneCurve:
      return tone_curve(img, get(spec, "y1"), get(spec, "y2"));
    case DistortionKind::kClahe:
      return clahe_luma(img, get(spec, "clip_limit"), get_int(spec, "tiles"));

    case DistortionKind::kJpegCompression:
    case DistortionKind::kMultipleJpegCompressions:
      return apply_keep_encoding(img, spec, rng).image;

    case DistortionKind::kRandomCrop:
    case DistortionKind::kRandomAspectCrop: {
      const Window win = crop_window(spec, img);
      if (win.w == img.width() && win.h == img.height()) return img;
      return crop(img, win);
    }
    case DistortionKind::kDownscale:
    case DistortionKind::kSquishResize: {
      const auto [w, h] = output_size(spec, img.width(), img.height());
      return filters::resize(img, w, h);
    }
    case DistortionKind::kPerspectiveTransform:
      return perspective(img, spec);
  }
  throw ParameterError("unhandled distortion kind");
}

}  // namespace wilddistort

#pragma once

#include <optional>

#include "wilddistort/distortions.hpp"

namespace testsupport {

/// Zero-magnitude parameters for `kind` on a width x height image, or nullopt
/// for kinds without one (lossy compression at any quality).
inline std::optional<wilddistort::ParamRecord> identity_params(wilddistort::DistortionKind kind, int width,
                                                               int height) {
  using K = wilddistort::DistortionKind;
  switch (kind) {
    case K::kGaussianBlur: return wilddistort::ParamRecord{{"sigma", 0}};
    case K::kLensBlur: return wilddistort::ParamRecord{{"radius", 0}};
    case K::kMotionBlur: return wilddistort::ParamRecord{{"length", 0}, {"angle", 30}};
    case K::kGlassBlur: return wilddistort::ParamRecord{{"sigma", 0}, {"delta", 0}, {"iterations", 0}};
    case K::kPixelate: return wilddistort::ParamRecord{{"block", 1}};
    case K::kWhiteNoise: return wilddistort::ParamRecord{{"sigma", 0}};
    case K::kImpulseNoise: return wilddistort::ParamRecord{{"density", 0}};
    case K::kMultiplicativeNoise: return wilddistort::ParamRecord{{"sigma", 0}};
    case K::kShotNoise: return wilddistort::ParamRecord{{"photons", 1e6}};
    case K::kIsoNoise: return wilddistort::ParamRecord{{"sigma", 0}};
    case K::kColorShift: return wilddistort::ParamRecord{{"hue_degrees", 0}, {"hue_shift", 0}};
    case K::kColorSaturation: return wilddistort::ParamRecord{{"factor", 1}};
    case K::kColorJitter:
      return wilddistort::ParamRecord{
          {"magnitude", 0}, {"brightness", 1}, {"contrast", 1}, {"saturation", 1}, {"hue", 0}};
    case K::kColorQuantization: return wilddistort::ParamRecord{{"levels", 256}};
    case K::kRgbChannelShift: return wilddistort::ParamRecord{{"shift", 0}, {"dx", 0}, {"dy", 0}};
    case K::kColorCast:
      return wilddistort::ParamRecord{{"magnitude", 0}, {"tint_r", 0}, {"tint_g", 0}, {"tint_b", 0}};
    case K::kBrightnessIncrease: return wilddistort::ParamRecord{{"delta", 0}};
    case K::kBrightnessDecrease: return wilddistort::ParamRecord{{"delta", 0}};
    case K::kLinearContrastChange: return wilddistort::ParamRecord{{"factor", 1}};
    case K::kRandomToneCurve: return wilddistort::ParamRecord{{"scale", 0}, {"y1", 1.0 / 3}, {"y2", 2.0 / 3}};
    case K::kClahe: return wilddistort::ParamRecord{{"clip_limit", 0}, {"tiles", 8}};
    case K::kJpegCompression:
    case K::kMultipleJpegCompressions: return std::nullopt;
    case K::kRandomCrop: return wilddistort::ParamRecord{{"area", 1}, {"u_x", 0.5}, {"u_y", 0.5}};
    case K::kRandomAspectCrop:
      return wilddistort::ParamRecord{{"area", 1}, {"max_aspect", 1}, {"aspect", 1}, {"u_x", 0.5}, {"u_y", 0.5}};
    case K::kDownscale: return wilddistort::ParamRecord{{"scale", 1}};
    case K::kPerspectiveTransform:
      return wilddistort::ParamRecord{{"jitter", 0}, {"c0", 0.5}, {"c1", 0.5}, {"c2", 0.5}, {"c3", 0.5},
                                      {"c4", 0.5}, {"c5", 0.5}, {"c6", 0.5}, {"c7", 0.5}};
    case K::kSquishResize:
      return wilddistort::ParamRecord{{"width", static_cast<double>(width)}, {"height", static_cast<double>(height)}};
  }
  return std::nullopt;
}

}  // namespace testsupport

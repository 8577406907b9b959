#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wilddistort/image.hpp"

namespace wilddistort::filters {

/// Reflect-101 border index (…2 1 | 0 1 2 … n-1 | n-2 n-3…), the single
/// border policy for every neighbourhood operation.
int reflect101(int i, int n);

/// Planes holding raw sample values in [0, 255] as floats.
RgbPlanes split(const ImageBuffer& img);
ImageBuffer merge(const RgbPlanes& planes);

/// Sampled Gaussian of radius ceil(3 sigma), renormalized to sum 1. sigma <= 0
/// yields the identity kernel {1}.
std::vector<float> gaussian_kernel(double sigma);

FloatPlane convolve_separable(const FloatPlane& src, const std::vector<float>& kernel);

struct Tap {
  int dx;
  int dy;
  float weight;
};

/// Sparse 2-D correlation; only listed taps are visited.
FloatPlane convolve_taps(const FloatPlane& src, const std::vector<Tap>& taps);

/// Uniform disk of the given radius (pixels with dx^2 + dy^2 <= r^2), normalized.
std::vector<Tap> disk_kernel(double radius);

/// Line of the given length through the origin at angle_deg, rasterized by
/// dense sampling along the segment and normalized.
std::vector<Tap> line_kernel(double length, double angle_deg);

ImageBuffer blur(const ImageBuffer& img, const std::vector<float>& kernel);
ImageBuffer blur(const ImageBuffer& img, const std::vector<Tap>& taps);

/// Resamples to (out_w, out_h) independently per axis: exact pixel-area
/// averaging when shrinking, bilinear (half-pixel centres) when enlarging.
/// Same-size resampling is the identity.
ImageBuffer resize(const ImageBuffer& img, int out_w, int out_h);

/// Bilinear sample of a plane at real coordinates with reflect-101 borders.
float sample_bilinear(const FloatPlane& p, double x, double y);

// ---------------------------------------------------------------------------
// CLAHE

using Histogram = std::array<std::uint32_t, 256>;

/// Per-tile clip limit: max(1, floor(clip_limit * tile_area / 256)).
std::uint32_t clahe_bin_limit(double clip_limit, std::size_t tile_area);

struct ClippedHistogram {
  Histogram clipped;        ///< every bin <= limit
  std::uint64_t excess = 0; ///< total mass removed by clipping
  Histogram redistributed;  ///< clipped + excess spread back over the bins
};

ClippedHistogram clip_histogram(const Histogram& hist, std::uint32_t limit);

/// Contrast-limited adaptive histogram equalization of an 8-bit plane with a
/// tiles_x by tiles_y grid and bilinear blending of neighbouring tile maps.
std::vector<std::uint8_t> clahe(const std::vector<std::uint8_t>& plane, int width, int height,
                                double clip_limit, int tiles_x, int tiles_y);

/// Tile boundaries used by clahe(): boundary k is floor(k * extent / tiles).
std::vector<int> tile_bounds(int extent, int tiles);

}  // namespace wilddistort::filters

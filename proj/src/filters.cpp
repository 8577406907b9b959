#include "wilddistort/filters.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "wilddistort/error.hpp"

namespace wilddistort::filters {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

RgbPlanes split(const ImageBuffer& img) {
  RgbPlanes planes{FloatPlane(img.width(), img.height()), FloatPlane(img.width(), img.height()),
                   FloatPlane(img.width(), img.height())};
  const auto src = img.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) planes[c].data[i] = src[i * 3 + c];
  }
  return planes;
}

ImageBuffer merge(const RgbPlanes& planes) {
  ImageBuffer out(planes[0].width, planes[0].height);
  auto dst = out.data();
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) dst[i * 3 + c] = round_to_u8(planes[c].data[i]);
  }
  return out;
}

std::vector<float> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0f};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  std::vector<float> out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = static_cast<float>(k[i] / sum);
  return out;
}

FloatPlane convolve_separable(const FloatPlane& src, const std::vector<float>& kernel) {
  const int w = src.width;
  const int h = src.height;
  const int r = static_cast<int>(kernel.size() / 2);
  if (r == 0) {
    FloatPlane out = src;
    for (auto& v : out.data) v *= kernel[0];
    return out;
  }
  FloatPlane tmp(w, h);
  std::vector<int> xs(w + 2 * r);
  for (int i = 0; i < w + 2 * r; ++i) xs[i] = reflect101(i - r, w);
  for (int y = 0; y < h; ++y) {
    const float* row = src.data.data() + static_cast<std::size_t>(y) * w;
    float* dst = tmp.data.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int t = 0; t <= 2 * r; ++t) acc += kernel[t] * row[xs[x + t]];
      dst[x] = acc;
    }
  }
  FloatPlane out(w, h);
  std::vector<int> ys(h + 2 * r);
  for (int i = 0; i < h + 2 * r; ++i) ys[i] = reflect101(i - r, h);
  for (int y = 0; y < h; ++y) {
    float* dst = out.data.data() + static_cast<std::size_t>(y) * w;
    for (int t = 0; t <= 2 * r; ++t) {
      const float k = kernel[t];
      const float* row = tmp.data.data() + static_cast<std::size_t>(ys[y + t]) * w;
      for (int x = 0; x < w; ++x) dst[x] += k * row[x];
    }
  }
  return out;
}

FloatPlane convolve_taps(const FloatPlane& src, const std::vector<Tap>& taps) {
  const int w = src.width;
  const int h = src.height;
  FloatPlane out(w, h);
  std::vector<int> xs(w);
  for (const Tap& tap : taps) {
    for (int x = 0; x < w; ++x) xs[x] = reflect101(x + tap.dx, w);
    for (int y = 0; y < h; ++y) {
      const float* row = src.data.data() + static_cast<std::size_t>(reflect101(y + tap.dy, h)) * w;
      float* dst = out.data.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) dst[x] += tap.weight * row[xs[x]];
    }
  }
  return out;
}

std::vector<Tap> disk_kernel(double radius) {
  if (!(radius > 0.0)) return {{0, 0, 1.0f}};
  const int r = static_cast<int>(std::floor(radius));
  std::vector<std::pair<int, int>> cells;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) cells.emplace_back(dx, dy);
    }
  }
  const float w = 1.0f / static_cast<float>(cells.size());
  std::vector<Tap> taps;
  taps.reserve(cells.size());
  for (auto [dx, dy] : cells) taps.push_back({dx, dy, w});
  return taps;
}

std::vector<Tap> line_kernel(double length, double angle_deg) {
  if (!(length > 1.0)) return {{0, 0, 1.0f}};
  const double theta = angle_deg * 3.14159265358979323846 / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const int samples = std::max(2, static_cast<int>(std::ceil(4.0 * length)));
  std::map<std::pair<int, int>, int> hits;
  for (int i = 0; i < samples; ++i) {
    const double t = -(length - 1.0) / 2.0 + (length - 1.0) * i / (samples - 1);
    const auto dx = static_cast<int>(std::lround(t * c));
    const auto dy = static_cast<int>(std::lround(-t * s));
    ++hits[{dx, dy}];
  }
  std::vector<Tap> taps;
  for (const auto& [cell, count] : hits) {
    taps.push_back({cell.first, cell.second, static_cast<float>(count) / static_cast<float>(samples)});
  }
  return taps;
}

ImageBuffer blur(const ImageBuffer& img, const std::vector<float>& kernel) {
  if (kernel.size() == 1) return img;
  auto planes = split(img);
  for (auto& p : planes) p = convolve_separable(p, kernel);
  return merge(planes);
}

ImageBuffer blur(const ImageBuffer& img, const std::vector<Tap>& taps) {
  if (taps.size() == 1 && taps[0].dx == 0 && taps[0].dy == 0) return img;
  auto planes = split(img);
  for (auto& p : planes) p = convolve_taps(p, taps);
  return merge(planes);
}

namespace {

struct AxisWeights {
  // For output index i: contributions (source index, weight).
  std::vector<std::vector<std::pair<int, float>>> taps;
};

AxisWeights axis_weights(int in, int out) {
  AxisWeights aw;
  aw.taps.resize(out);
  const double scale = static_cast<double>(in) / out;
  if (scale > 1.0) {
    for (int i = 0; i < out; ++i) {
      const double lo = i * scale;
      const double hi = (i + 1) * scale;
      const int j0 = static_cast<int>(std::floor(lo));
      const int j1 = std::min(in - 1, static_cast<int>(std::ceil(hi)) - 1);
      for (int j = j0; j <= j1; ++j) {
        const double overlap = std::min<double>(hi, j + 1) - std::max<double>(lo, j);
        if (overlap > 0.0) aw.taps[i].emplace_back(j, static_cast<float>(overlap / scale));
      }
    }
  } else {
    for (int i = 0; i < out; ++i) {
      const double src = (i + 0.5) * scale - 0.5;
      const int j0 = static_cast<int>(std::floor(src));
      const double t = src - j0;
      const int a = std::clamp(j0, 0, in - 1);
      const int b = std::clamp(j0 + 1, 0, in - 1);
      if (t == 0.0) {
        aw.taps[i].emplace_back(a, 1.0f);
      } else {
        aw.taps[i].emplace_back(a, static_cast<float>(1.0 - t));
        aw.taps[i].emplace_back(b, static_cast<float>(t));
      }
    }
  }
  return aw;
}

}  // namespace

ImageBuffer resize(const ImageBuffer& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw SizingError("resize: target dimensions must be positive");
  if (out_w == img.width() && out_h == img.height()) return img;
  const AxisWeights wx = axis_weights(img.width(), out_w);
  const AxisWeights wy = axis_weights(img.height(), out_h);
  const auto planes = split(img);
  RgbPlanes result;
  for (int c = 0; c < 3; ++c) {
    const FloatPlane& src = planes[c];
    FloatPlane horiz(out_w, img.height());
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < out_w; ++x) {
        float acc = 0.0f;
        for (auto [j, wgt] : wx.taps[x]) acc += wgt * src.at(j, y);
        horiz.at(x, y) = acc;
      }
    }
    FloatPlane out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
      for (auto [j, wgt] : wy.taps[y]) {
        for (int x = 0; x < out_w; ++x) out.at(x, y) += wgt * horiz.at(x, j);
      }
    }
    result[c] = std::move(out);
  }
  return merge(result);
}

float sample_bilinear(const FloatPlane& p, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const double tx = x - fx;
  const double ty = y - fy;
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const int xa = reflect101(x0, p.width);
  const int xb = reflect101(x0 + 1, p.width);
  const int ya = reflect101(y0, p.height);
  const int yb = reflect101(y0 + 1, p.height);
  const double top = (1.0 - tx) * p.at(xa, ya) + tx * p.at(xb, ya);
  const double bottom = (1.0 - tx) * p.at(xa, yb) + tx * p.at(xb, yb);
  return static_cast<float>((1.0 - ty) * top + ty * bottom);
}

// ---------------------------------------------------------------------------

std::uint32_t clahe_bin_limit(double clip_limit, std::size_t tile_area) {
  const double limit = std::floor(clip_limit * static_cast<double>(tile_area) / 256.0);
  return limit < 1.0 ? 1u : static_cast<std::uint32_t>(limit);
}

ClippedHistogram clip_histogram(const Histogram& hist, std::uint32_t limit) {
  ClippedHistogram out;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (hist[i] > limit) {
      out.excess += hist[i] - limit;
      out.clipped[i] = limit;
    } else {
      out.clipped[i] = hist[i];
    }
  }
  out.redistributed = out.clipped;
  const auto per_bin = static_cast<std::uint32_t>(out.excess / 256);
  const auto residual = static_cast<std::uint32_t>(out.excess % 256);
  for (auto& b : out.redistributed) b += per_bin;
  if (residual > 0) {
    const std::uint32_t step = std::max<std::uint32_t>(256 / residual, 1);
    std::uint32_t placed = 0;
    for (std::uint32_t i = 0; i < 256 && placed < residual; i += step, ++placed) ++out.redistributed[i];
  }
  return out;
}

std::vector<int> tile_bounds(int extent, int tiles) {
  std::vector<int> b(tiles + 1);
  for (int k = 0; k <= tiles; ++k) b[k] = static_cast<int>(static_cast<long long>(k) * extent / tiles);
  return b;
}

std::vector<std::uint8_t> clahe(const std::vector<std::uint8_t>& plane, int width, int height,
                                double clip_limit, int tiles_x, int tiles_y) {
  tiles_x = std::clamp(tiles_x, 1, width);
  tiles_y = std::clamp(tiles_y, 1, height);
  const auto bx = tile_bounds(width, tiles_x);
  const auto by = tile_bounds(height, tiles_y);

  // One 256-entry map per tile.
  std::vector<std::array<float, 256>> maps(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (int ty = 0; ty < tiles_y; ++ty) {
    for (int tx = 0; tx < tiles_x; ++tx) {
      Histogram hist{};
      for (int y = by[ty]; y < by[ty + 1]; ++y) {
        for (int x = bx[tx]; x < bx[tx + 1]; ++x) ++hist[plane[static_cast<std::size_t>(y) * width + x]];
      }
      const std::size_t area = static_cast<std::size_t>(bx[tx + 1] - bx[tx]) * (by[ty + 1] - by[ty]);
      const auto clipped = clip_histogram(hist, clahe_bin_limit(clip_limit, area));
      auto& map = maps[static_cast<std::size_t>(ty) * tiles_x + tx];
      std::uint64_t cdf = 0;
      for (int v = 0; v < 256; ++v) {
        cdf += clipped.redistributed[v];
        map[v] = static_cast<float>(255.0 * static_cast<double>(cdf) / static_cast<double>(area));
      }
    }
  }

  std::vector<double> cx(tiles_x), cy(tiles_y);
  for (int t = 0; t < tiles_x; ++t) cx[t] = (bx[t] + bx[t + 1] - 1) / 2.0;
  for (int t = 0; t < tiles_y; ++t) cy[t] = (by[t] + by[t + 1] - 1) / 2.0;

  auto locate = [](const std::vector<double>& centres, double p, int& lo, int& hi, double& t) {
    const int n = static_cast<int>(centres.size());
    if (p <= centres.front()) {
      lo = hi = 0;
      t = 0.0;
      return;
    }
    if (p >= centres.back()) {
      lo = hi = n - 1;
      t = 0.0;
      return;
    }
    int k = 0;
    while (k + 1 < n && centres[k + 1] <= p) ++k;
    lo = k;
    hi = k + 1;
    t = (p - centres[lo]) / (centres[hi] - centres[lo]);
  };

  std::vector<std::uint8_t> out(plane.size());
  for (int y = 0; y < height; ++y) {
    int y0, y1;
    double fy;
    locate(cy, y, y0, y1, fy);
    for (int x = 0; x < width; ++x) {
      int x0, x1;
      double fx;
      locate(cx, x, x0, x1, fx);
      const std::uint8_t v = plane[static_cast<std::size_t>(y) * width + x];
      const double a = maps[static_cast<std::size_t>(y0) * tiles_x + x0][v];
      const double b = maps[static_cast<std::size_t>(y0) * tiles_x + x1][v];
      const double c = maps[static_cast<std::size_t>(y1) * tiles_x + x0][v];
      const double d = maps[static_cast<std::size_t>(y1) * tiles_x + x1][v];
      const double top = (1.0 - fx) * a + fx * b;
      const double bottom = (1.0 - fx) * c + fx * d;
      out[static_cast<std::size_t>(y) * width + x] = round_to_u8((1.0 - fy) * top + fy * bottom);
    }
  }
  return out;
}

}  // namespace wilddistort::filters

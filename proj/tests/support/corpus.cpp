#include "corpus.hpp"

#include <cmath>
#include <fstream>

#include "wilddistort/codec.hpp"
#include "wilddistort/rng.hpp"

namespace testsupport {

using wilddistort::ImageBuffer;
using wilddistort::SeededRng;

ImageBuffer natural_image(int width, int height, std::uint64_t seed) {
  SeededRng rng(seed);
  const double base[3] = {rng.uniform(40, 200), rng.uniform(40, 200), rng.uniform(40, 200)};
  const double grad_x = rng.uniform(-60, 60);
  const double grad_y = rng.uniform(-60, 60);

  struct Blob {
    double cx, cy, r, soft;
    double color[3];
  };
  std::vector<Blob> blobs(4);
  for (auto& b : blobs) {
    b.cx = rng.uniform(0, width);
    b.cy = rng.uniform(0, height);
    b.r = rng.uniform(0.1, 0.35) * std::min(width, height);
    b.soft = rng.uniform(1.5, 6.0);
    for (double& c : b.color) c = rng.uniform(-70, 70);
  }
  const double fx = rng.uniform(1.0, 4.0) * 2.0 * M_PI / width;
  const double fy = rng.uniform(1.0, 4.0) * 2.0 * M_PI / height;
  const double phase = rng.uniform(0, 2 * M_PI);
  const double wave = rng.uniform(8, 25);

  ImageBuffer img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / width - 0.5;
      const double v = static_cast<double>(y) / height - 0.5;
      const double s = wave * std::sin(fx * x + phase) * std::cos(fy * y);
      double falloff[4];
      for (std::size_t i = 0; i < blobs.size(); ++i) {
        const double d = std::hypot(x - blobs[i].cx, y - blobs[i].cy);
        falloff[i] = 1.0 / (1.0 + std::exp((d - blobs[i].r) / blobs[i].soft));
      }
      for (int c = 0; c < 3; ++c) {
        double val = base[c] + grad_x * u + grad_y * v + s * (1.0 - 0.3 * c);
        for (std::size_t i = 0; i < blobs.size(); ++i) val += blobs[i].color[c] * falloff[i];
        val += 3.0 * rng.normal();
        img.at(x, y, c) = wilddistort::round_to_u8(val);
      }
    }
  }
  return img;
}

std::vector<wilddistort::ListingEntry> write_corpus(const std::filesystem::path& dir, int count, int width,
                                                    int height, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<wilddistort::ListingEntry> entries;
  std::ofstream listing(dir / "listing.csv");
  listing << "image_id,path,label\n";
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "img_%04d", i);
    const std::string path = std::string(id) + ".png";
    wilddistort::write_file(dir / path, wilddistort::encode_png(natural_image(width, height, seed + i)));
    entries.push_back({id, path, i % 2});
    listing << id << "," << path << "," << i % 2 << "\n";
  }
  return entries;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("wilddistort_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport

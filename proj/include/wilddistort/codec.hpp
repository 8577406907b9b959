#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wilddistort/image.hpp"

namespace wilddistort {

using Bytes = std::vector<std::uint8_t>;

enum class ImageFormat { kPng, kJpeg, kUnknown };

ImageFormat sniff_format(std::span<const std::uint8_t> bytes);

/// Decodes PNG or baseline/progressive JPEG into 8-bit RGB. Gray inputs are
/// replicated across channels; alpha is composited over white and dropped;
/// 16-bit PNG is reduced to 8 bits.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

/// Lossless PNG with pinned settings (8-bit RGB, no interlace, "up" filter on
/// every row, zlib level 6) so encoding is a pure function of the pixels.
Bytes encode_png(const ImageBuffer& img);

/// Baseline JPEG, libjpeg quality convention (Annex K tables scaled by
/// quality), integer slow DCT, Huffman tables optimized off. Chroma is 4:2:0
/// for quality < 90 and 4:4:4 at 90 and above.
Bytes encode_jpeg(const ImageBuffer& img, int quality);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

ImageBuffer load_image(const std::filesystem::path& path);

}  // namespace wilddistort

#pragma once

#include <map>
#include <string>
#include <vector>

#include "wilddistort/image.hpp"

namespace wilddistort {

/// Registration point for transforms implemented outside the library (learned
/// codecs, watermarking). A transform is an executable that reads one encoded
/// image on stdin and writes one encoded image on stdout. Input is sent as PNG;
/// output may be any format decode_image accepts.
class ExternalTransformRegistry {
 public:
  /// argv[0] is looked up on PATH. Throws ConfigError for an empty name or argv.
  void add(const std::string& name, std::vector<std::string> argv);
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Throws ConfigError for an unknown name and Error when the process cannot
  /// be started, exits nonzero, or produces undecodable output.
  ImageBuffer apply(const std::string& name, const ImageBuffer& img) const;

 private:
  std::map<std::string, std::vector<std::string>> commands_;
};

/// Runs argv with `input` on stdin and returns stdout. Throws Error on a spawn
/// failure or nonzero exit status.
std::vector<std::uint8_t> run_filter_process(const std::vector<std::string>& argv,
                                             const std::vector<std::uint8_t>& input);

}  // namespace wilddistort

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wilddistort/codec.hpp"
#include "wilddistort/distortions.hpp"
#include "wilddistort/rng.hpp"

namespace wilddistort {

/// Gaussian over severity levels; a draw x becomes
/// clamp(round_half_away(x), 1, num_levels).
struct SeverityGaussian {
  double mean;
  double stddev;
};

/// Sampling scheme for distortion plans.
struct LevelScheme {
  std::string name;
  int min_count = 1;
  int max_count = 1;  ///< count ~ uniform over [min_count, max_count]
  std::optional<SeverityGaussian> severity;  ///< nullopt: uniform over levels
  int num_levels = 5;
  bool distinct_groups = true;
  std::vector<DistortionKind> pool;

  /// Throws ConfigError when the scheme cannot be satisfied (e.g. more
  /// distinct groups requested than the pool covers).
  void validate() const;
};

/// challenge, ant_mild, ant_moderate, ant_heavy, teleai, intsig_light, vincentlc.
const std::vector<LevelScheme>& builtin_schemes();
const LevelScheme& find_scheme(std::string_view name);  // throws ConfigError

int severity_to_level(double draw, int num_levels);

struct DistortionPlan {
  std::string image_id;
  std::uint64_t seed = 0;
  std::string scheme;
  std::vector<DistortionSpec> specs;

  friend bool operator==(const DistortionPlan&, const DistortionPlan&) = default;
};

/// Per-image root stream: SeededRng(global_seed).derive(image_id).
SeededRng image_stream(std::uint64_t global_seed, std::string_view image_id);

/// Draws count, kinds, order and levels from `rng` (the "plan" child of the
/// image stream in batch runs). Random geometric parameters are resolved here
/// and recorded in the specs.
DistortionPlan sample_plan(std::string_view image_id, const LevelScheme& scheme, const SeverityTable& table,
                           SeededRng& rng);

/// Convenience: plan for (global_seed, image_id) using the batch stream layout.
DistortionPlan sample_plan(std::string_view image_id, const LevelScheme& scheme, const SeverityTable& table,
                           std::uint64_t global_seed);

/// Applies the plan in order; step i draws from image_stream(...).derive("step:<i>").
/// When the last step is a JPEG kind the returned `jpeg` holds its stream.
AppliedImage execute_plan(const ImageBuffer& source, const DistortionPlan& plan);

enum class Track { kClean, kRobust };
std::string_view to_string(Track t);
Track parse_track(std::string_view s);

struct ManifestRecord {
  static constexpr int kVersion = 1;

  std::string image_id;
  std::string source_path;
  std::string output_path;  ///< relative to the manifest directory
  int label = 0;            ///< 0 real, 1 fake
  Track track = Track::kClean;
  std::optional<DistortionPlan> plan;  ///< present iff track == robust
  std::uint64_t global_seed = 0;
  // Run provenance.
  std::string scheme;
  double robust_fraction = 0.0;
  std::string severity_table;  ///< SeverityTable::digest()
  std::optional<std::string> error;

  nlohmann::json to_json() const;
  static ManifestRecord from_json(const nlohmann::json& j);  // throws ValidationError
  void validate() const;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

struct ListingEntry {
  std::string image_id;
  std::string path;
  int label;
};

/// CSV with header `image_id,path,label`; label is 0/1 or real/fake. Ids must
/// be unique and use only [A-Za-z0-9._-].
std::vector<ListingEntry> read_listing(const std::filesystem::path& path);
std::vector<ListingEntry> parse_listing(std::string_view csv_text);

/// Exact partition: round(fraction * n) images are robust, chosen by a seeded
/// hash of the id and stratified by label so each label's robust share is
/// within one image of fraction * count. Independent of listing order.
std::vector<Track> assign_tracks(const std::vector<ListingEntry>& entries, double robust_fraction,
                                 std::uint64_t global_seed);

struct BatchOptions {
  LevelScheme scheme;
  SeverityTable table = SeverityTable::defaults();
  double robust_fraction = 0.5;
  std::uint64_t global_seed = 0;
  int jobs = 1;
  std::filesystem::path output_dir;
  /// Directory that relative listing paths are resolved against.
  std::filesystem::path source_root;
};

struct BatchResult {
  std::vector<ManifestRecord> records;  ///< sorted by image_id
  std::filesystem::path manifest_path;
  std::size_t failures = 0;
};

/// Distorts the robust share of `entries` into output_dir/images/ and writes
/// output_dir/manifest.jsonl. Per-record failures are recorded in the
/// manifest and do not stop the run. Output is independent of `jobs`.
BatchResult run_batch(const std::vector<ListingEntry>& entries, const BatchOptions& options);

struct ReplayOutput {
  ImageBuffer image;
  Bytes encoded;  ///< exact file bytes the batch run wrote
};

/// Rebuilds a record's output from its source and plan. Relative source paths
/// resolve against `source_root`. Throws ValidationError for malformed or
/// out-of-range plans and Error when the source is missing.
ReplayOutput replay(const ManifestRecord& record, const std::filesystem::path& source_root,
                    const SeverityTable& table = SeverityTable::defaults());

}  // namespace wilddistort

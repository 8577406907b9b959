#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wilddistort/codec.hpp"
#include "wilddistort/image.hpp"
#include "wilddistort/rng.hpp"

namespace wilddistort {

enum class DistortionKind {
  kGaussianBlur,
  kLensBlur,
  kMotionBlur,
  kGlassBlur,
  kPixelate,
  kWhiteNoise,
  kImpulseNoise,
  kMultiplicativeNoise,
  kShotNoise,
  kIsoNoise,
  kColorShift,
  kColorSaturation,
  kColorJitter,
  kColorQuantization,
  kRgbChannelShift,
  kColorCast,
  kBrightnessIncrease,
  kBrightnessDecrease,
  kLinearContrastChange,
  kRandomToneCurve,
  kClahe,
  kJpegCompression,
  kMultipleJpegCompressions,
  kRandomCrop,
  kRandomAspectCrop,
  kDownscale,
  kPerspectiveTransform,
  kSquishResize,
};

enum class DistortionGroup { kBlur, kNoise, kColor, kTone, kCompression, kGeometric };

inline constexpr int kNumGroups = 6;

/// Resolved parameter record. Ordered so serialization is canonical.
using ParamRecord = std::map<std::string, double>;

std::string_view to_string(DistortionKind kind);
std::string_view to_string(DistortionGroup group);
DistortionKind parse_kind(std::string_view name);  // throws ParameterError
DistortionGroup parse_group(std::string_view name);

const std::vector<DistortionKind>& all_kinds();
DistortionGroup group_of(DistortionKind kind);

/// Kinds that change (width, height): crops, downscale, squish_resize.
bool changes_size(DistortionKind kind);

/// Kinds drawn by the stochastic pipeline. squish_resize is a preprocessing
/// utility and never sampled.
bool is_samplable(DistortionKind kind);

/// Schema for one kind's level record.
struct ParamSchema {
  struct Key {
    std::string name;
    double min;
    double max;
  };
  std::vector<Key> required;
  std::vector<Key> optional;
  /// Key that grows (+1) or shrinks (-1) with severity; empty for kinds with
  /// no severity ordering.
  std::string severity_key;
  int severity_direction = 0;
  /// Keys filled per application from the rng and recorded in the spec.
  std::vector<std::string> random_keys;
};

const ParamSchema& param_schema(DistortionKind kind);

/// Per-kind list of level records (3 or 5 levels), monotone in severity.
///
/// The shipped defaults are implementation choices; every entry can be
/// overridden from a JSON document:
///
///     {"version": 1,
///      "kinds": {"gaussian_blur": [{"sigma": 0.8}, {"sigma": 1.6}, ...], ...}}
///
/// Loading validates kind names, level count, key sets, numeric bounds and
/// severity monotonicity. Overrides replace whole kinds; unlisted kinds keep
/// their current entries.
class SeverityTable {
 public:
  static SeverityTable defaults();

  /// Validates a config document (see class comment). Throws ConfigError.
  static void validate(const nlohmann::json& doc);

  /// Defaults overridden by the kinds listed in `doc`.
  static SeverityTable from_json(const nlohmann::json& doc);

  /// Copy with the kinds in `doc` replaced.
  SeverityTable with_overrides(const nlohmann::json& doc) const;

  int num_levels(DistortionKind kind) const;
  const ParamRecord& params(DistortionKind kind, int level) const;

  nlohmann::json to_json() const;

  /// FNV-1a of the canonical JSON dump, hex; recorded in manifests.
  std::string digest() const;

  friend bool operator==(const SeverityTable&, const SeverityTable&) = default;

 private:
  std::map<DistortionKind, std::vector<ParamRecord>> levels_;
};

/// Pure lookup of SeverityTable[kind][level]; throws ParameterError on an
/// unknown level.
const ParamRecord& severity_params(DistortionKind kind, int level, const SeverityTable& table);

/// One transform instance.
struct DistortionSpec {
  DistortionKind kind;
  int level;
  ParamRecord params;
  DistortionGroup group;

  nlohmann::json to_json() const;
  static DistortionSpec from_json(const nlohmann::json& j);

  friend bool operator==(const DistortionSpec&, const DistortionSpec&) = default;
};

/// Spec for (kind, level) with the table entry and per-application random
/// parameters (angles, offsets, tints, control points) drawn from `rng`.
DistortionSpec make_spec(DistortionKind kind, int level, const SeverityTable& table, SeededRng& rng);

/// Fills any random keys missing from spec.params using `rng`. Keys already
/// present are kept, which is how manifest replays reuse recorded draws.
void resolve_random_params(DistortionSpec& spec, SeededRng& rng);

/// Checks the spec against the kind schema and (when given) the table's level
/// count. Throws ValidationError.
void validate_spec(const DistortionSpec& spec, const SeverityTable* table = nullptr);

/// Applies one distortion. Noise fields and any unresolved random parameters
/// are drawn from `rng` only. Throws SizingError naming the kind when the
/// image is too small for the transform.
ImageBuffer apply(const ImageBuffer& img, const DistortionSpec& spec, SeededRng& rng);

/// Result of the final step of a plan: the image plus, for compression kinds,
/// the exact JPEG stream it was decoded from.
struct AppliedImage {
  ImageBuffer image;
  std::optional<Bytes> jpeg;
};

AppliedImage apply_keep_encoding(const ImageBuffer& img, const DistortionSpec& spec, SeededRng& rng);

ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality);

/// Output size of dimension-changing kinds for an input of (w, h); identity
/// for all other kinds.
std::pair<int, int> output_size(const DistortionSpec& spec, int width, int height);

}  // namespace wilddistort

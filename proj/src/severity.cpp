// Kind catalogue, parameter schemas and the severity table.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "wilddistort/distortions.hpp"
#include "wilddistort/error.hpp"

namespace wilddistort {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KindInfo {
  DistortionKind kind;
  std::string_view name;
  DistortionGroup group;
  bool samplable;
  bool changes_size;
  ParamSchema schema;
  // Default levels: one value list per required key, same order as schema.required.
  std::vector<std::vector<double>> defaults;
};

using K = ParamSchema::Key;

std::vector<KindInfo> build_catalogue() {
  using DK = DistortionKind;
  using G = DistortionGroup;
  std::vector<KindInfo> c;
  // clang-format off
  c.push_back({DK::kGaussianBlur, "gaussian_blur", G::kBlur, true, false,
               {{K{"sigma", 0, 50}}, {}, "sigma", +1, {}},
               {{0.8, 1.6, 2.4, 3.6, 5.0}}});
  c.push_back({DK::kLensBlur, "lens_blur", G::kBlur, true, false,
               {{K{"radius", 0, 50}}, {}, "radius", +1, {}},
               {{1.0, 2.0, 3.0, 4.5, 6.0}}});
  c.push_back({DK::kMotionBlur, "motion_blur", G::kBlur, true, false,
               {{K{"length", 0, 100}}, {K{"angle", -360, 360}}, "length", +1, {"angle"}},
               {{3, 5, 9, 13, 19}}});
  c.push_back({DK::kGlassBlur, "glass_blur", G::kBlur, true, false,
               {{K{"sigma", 0, 20}, K{"delta", 0, 20}, K{"iterations", 0, 10}}, {}, "sigma", +1, {}},
               {{0.65, 0.7, 0.9, 1.1, 1.4}, {1, 1, 2, 2, 3}, {1, 2, 2, 3, 3}}});
  c.push_back({DK::kPixelate, "pixelate", G::kBlur, true, false,
               {{K{"block", 1, 256}}, {}, "block", +1, {}},
               {{2, 3, 4, 6, 8}}});
  c.push_back({DK::kWhiteNoise, "white_noise", G::kNoise, true, false,
               {{K{"sigma", 0, 1}}, {}, "sigma", +1, {}},
               {{0.02, 0.04, 0.07, 0.10, 0.15}}});
  c.push_back({DK::kImpulseNoise, "impulse_noise", G::kNoise, true, false,
               {{K{"density", 0, 1}}, {}, "density", +1, {}},
               {{0.01, 0.03, 0.07, 0.12, 0.2}}});
  c.push_back({DK::kMultiplicativeNoise, "multiplicative_noise", G::kNoise, true, false,
               {{K{"sigma", 0, 2}}, {}, "sigma", +1, {}},
               {{0.06, 0.12, 0.2, 0.3, 0.45}}});
  c.push_back({DK::kShotNoise, "shot_noise", G::kNoise, true, false,
               {{K{"photons", 0.1, 1e6}}, {}, "photons", -1, {}},
               {{200, 80, 35, 15, 6}}});
  c.push_back({DK::kIsoNoise, "iso_noise", G::kNoise, true, false,
               {{K{"sigma", 0, 1}}, {}, "sigma", +1, {}},
               {{0.02, 0.035, 0.05, 0.075, 0.1}}});
  c.push_back({DK::kColorShift, "color_shift", G::kColor, true, false,
               {{K{"hue_degrees", 0, 180}}, {K{"hue_shift", -180, 180}}, "hue_degrees", +1, {"hue_shift"}},
               {{8, 16, 28, 42, 60}}});
  c.push_back({DK::kColorSaturation, "color_saturation", G::kColor, true, false,
               {{K{"factor", 0, 1}}, {}, "factor", -1, {}},
               {{0.75, 0.55, 0.35, 0.18, 0.0}}});
  c.push_back({DK::kColorJitter, "color_jitter", G::kColor, true, false,
               {{K{"magnitude", 0, 1}},
                {K{"brightness", 0, 2}, K{"contrast", 0, 2}, K{"saturation", 0, 2}, K{"hue", -180, 180}},
                "magnitude", +1, {"brightness", "contrast", "saturation", "hue"}},
               {{0.05, 0.1, 0.18, 0.28, 0.4}}});
  c.push_back({DK::kColorQuantization, "color_quantization", G::kColor, true, false,
               {{K{"levels", 2, 256}}, {}, "levels", -1, {}},
               {{32, 16, 8, 4, 2}}});
  c.push_back({DK::kRgbChannelShift, "rgb_channel_shift", G::kColor, true, false,
               {{K{"shift", 0, 64}}, {K{"dx", -64, 64}, K{"dy", -64, 64}}, "shift", +1, {"dx", "dy"}},
               {{1, 2, 3, 5, 8}}});
  c.push_back({DK::kColorCast, "color_cast", G::kColor, true, false,
               {{K{"magnitude", 0, 1}},
                {K{"tint_r", -1, 1}, K{"tint_g", -1, 1}, K{"tint_b", -1, 1}},
                "magnitude", +1, {"tint_r", "tint_g", "tint_b"}},
               {{0.03, 0.06, 0.1, 0.15, 0.22}}});
  c.push_back({DK::kBrightnessIncrease, "brightness_increase", G::kTone, true, false,
               {{K{"delta", 0, 255}}, {}, "delta", +1, {}},
               {{10, 20, 35, 50, 70}}});
  c.push_back({DK::kBrightnessDecrease, "brightness_decrease", G::kTone, true, false,
               {{K{"delta", 0, 255}}, {}, "delta", +1, {}},
               {{10, 20, 35, 50, 70}}});
  c.push_back({DK::kLinearContrastChange, "linear_contrast_change", G::kTone, true, false,
               {{K{"factor", 0, 4}}, {}, "factor", -1, {}},
               {{0.85, 0.7, 0.55, 0.4, 0.25}}});
  c.push_back({DK::kRandomToneCurve, "random_tone_curve", G::kTone, true, false,
               {{K{"scale", 0, 1}}, {K{"y1", 0, 1}, K{"y2", 0, 1}}, "scale", +1, {"y1", "y2"}},
               {{0.04, 0.08, 0.12, 0.17, 0.23}}});
  c.push_back({DK::kClahe, "clahe", G::kTone, true, false,
               {{K{"clip_limit", 0, 256}, K{"tiles", 1, 64}}, {}, "clip_limit", +1, {}},
               {{1.5, 2.5, 4.0, 6.0, 10.0}, {4, 4, 4, 4, 4}}});
  c.push_back({DK::kJpegCompression, "jpeg_compression", G::kCompression, true, false,
               {{K{"quality", 1, 100}}, {}, "quality", -1, {}},
               {{80, 55, 35, 18, 8}}});
  c.push_back({DK::kMultipleJpegCompressions, "multiple_jpeg_compressions", G::kCompression, true, false,
               {{K{"q1", 1, 100}, K{"q2", 1, 100}}, {K{"q3", 1, 100}, K{"q4", 1, 100}, K{"q5", 1, 100}},
                "q2", -1, {}},
               {{85, 70, 55, 40, 25}, {75, 60, 45, 30, 15}}});
  c.push_back({DK::kRandomCrop, "random_crop", G::kGeometric, true, true,
               {{K{"area", 0, kInf}}, {K{"u_x", 0, 1}, K{"u_y", 0, 1}}, "area", -1, {"u_x", "u_y"}},
               {{0.9, 0.8, 0.7, 0.6, 0.5}}});
  c.push_back({DK::kRandomAspectCrop, "random_aspect_crop", G::kGeometric, true, true,
               {{K{"area", 0, kInf}, K{"max_aspect", 1, 10}},
                {K{"aspect", 0.1, 10}, K{"u_x", 0, 1}, K{"u_y", 0, 1}},
                "area", -1, {"aspect", "u_x", "u_y"}},
               {{0.9, 0.8, 0.7, 0.6, 0.5}, {1.15, 1.3, 1.5, 1.75, 2.0}}});
  c.push_back({DK::kDownscale, "downscale", G::kGeometric, true, true,
               {{K{"scale", 0, 1}}, {}, "scale", -1, {}},
               {{0.9, 0.75, 0.6, 0.45, 0.3}}});
  c.push_back({DK::kPerspectiveTransform, "perspective_transform", G::kGeometric, true, false,
               {{K{"jitter", 0, 0.45}},
                {K{"c0", 0, 1}, K{"c1", 0, 1}, K{"c2", 0, 1}, K{"c3", 0, 1},
                 K{"c4", 0, 1}, K{"c5", 0, 1}, K{"c6", 0, 1}, K{"c7", 0, 1}},
                "jitter", +1, {"c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7"}},
               {{0.03, 0.06, 0.09, 0.12, 0.16}}});
  c.push_back({DK::kSquishResize, "squish_resize", G::kGeometric, false, true,
               {{K{"width", 1, 16384}, K{"height", 1, 16384}}, {}, "", 0, {}},
               {{384, 384, 384, 384, 384}, {384, 384, 384, 384, 384}}});
  // clang-format on
  return c;
}

const std::vector<KindInfo>& catalogue() {
  static const std::vector<KindInfo> c = build_catalogue();
  return c;
}

const KindInfo& info(DistortionKind kind) {
  const auto& c = catalogue();
  return c.at(static_cast<std::size_t>(kind));
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<ParamRecord> default_levels(const KindInfo& k) {
  const std::size_t n = k.defaults.front().size();
  std::vector<ParamRecord> levels(n);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t i = 0; i < k.schema.required.size(); ++i) {
      levels[l][k.schema.required[i].name] = k.defaults[i][l];
    }
  }
  return levels;
}

const ParamSchema::Key* find_key(const ParamSchema& s, std::string_view name) {
  for (const auto& k : s.required) {
    if (k.name == name) return &k;
  }
  for (const auto& k : s.optional) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

void check_value(std::string_view kind, const ParamSchema::Key& key, double v, const std::string& where) {
  if (!std::isfinite(v) || v < key.min || v > key.max) {
    throw ConfigError(where + ": " + std::string(kind) + "." + key.name + " = " + format_number(v) +
                      " outside [" + format_number(key.min) + ", " + format_number(key.max) + "]");
  }
}

std::vector<ParamRecord> parse_levels(DistortionKind kind, const nlohmann::json& levels) {
  const auto& k = info(kind);
  const std::string where = "severity table";
  if (!levels.is_array()) throw ConfigError(where + ": " + std::string(k.name) + " must map to an array of levels");
  if (levels.size() != 3 && levels.size() != 5) {
    throw ConfigError(where + ": " + std::string(k.name) + " must define 3 or 5 levels, got " +
                      std::to_string(levels.size()));
  }
  std::vector<ParamRecord> out;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& rec = levels[l];
    const std::string lw = where + " level " + std::to_string(l + 1);
    if (!rec.is_object()) throw ConfigError(lw + ": " + std::string(k.name) + " level must be an object");
    ParamRecord params;
    for (const auto& [name, value] : rec.items()) {
      const auto* key = find_key(k.schema, name);
      const bool is_random = std::find(k.schema.random_keys.begin(), k.schema.random_keys.end(), name) !=
                             k.schema.random_keys.end();
      if (!key || is_random) throw ConfigError(lw + ": unknown key '" + name + "' for " + std::string(k.name));
      if (!value.is_number()) throw ConfigError(lw + ": " + std::string(k.name) + "." + name + " must be a number");
      check_value(k.name, *key, value.get<double>(), lw);
      params[name] = value.get<double>();
    }
    for (const auto& key : k.schema.required) {
      if (!params.count(key.name)) {
        throw ConfigError(lw + ": " + std::string(k.name) + " missing key '" + key.name + "'");
      }
    }
    out.push_back(std::move(params));
  }
  const auto& s = k.schema;
  if (!s.severity_key.empty()) {
    for (std::size_t l = 1; l < out.size(); ++l) {
      const double prev = out[l - 1].at(s.severity_key);
      const double cur = out[l].at(s.severity_key);
      if ((cur - prev) * s.severity_direction <= 0) {
        throw ConfigError(where + ": " + std::string(k.name) + "." + s.severity_key +
                          " is not strictly monotone in severity between levels " + std::to_string(l) + " and " +
                          std::to_string(l + 1));
      }
    }
  }
  return out;
}

std::map<DistortionKind, std::vector<ParamRecord>> parse_overrides(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("severity table: document must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "version" && key != "kinds") throw ConfigError("severity table: unknown top-level key '" + key + "'");
  }
  if (!doc.contains("version") || !doc["version"].is_number_integer() || doc["version"].get<int>() != 1) {
    throw ConfigError("severity table: \"version\": 1 is required");
  }
  std::map<DistortionKind, std::vector<ParamRecord>> out;
  if (!doc.contains("kinds")) return out;
  if (!doc["kinds"].is_object()) throw ConfigError("severity table: \"kinds\" must be an object");
  for (const auto& [name, levels] : doc["kinds"].items()) {
    DistortionKind kind;
    try {
      kind = parse_kind(name);
    } catch (const ParameterError&) {
      throw ConfigError("severity table: unknown distortion kind '" + name + "'");
    }
    out[kind] = parse_levels(kind, levels);
  }
  return out;
}

}  // namespace

std::string_view to_string(DistortionKind kind) { return info(kind).name; }

std::string_view to_string(DistortionGroup group) {
  switch (group) {
    case DistortionGroup::kBlur: return "blur";
    case DistortionGroup::kNoise: return "noise";
    case DistortionGroup::kColor: return "color";
    case DistortionGroup::kTone: return "tone";
    case DistortionGroup::kCompression: return "compression";
    case DistortionGroup::kGeometric: return "geometric";
  }
  return "?";
}

DistortionKind parse_kind(std::string_view name) {
  for (const auto& k : catalogue()) {
    if (k.name == name) return k.kind;
  }
  throw ParameterError("unknown distortion kind '" + std::string(name) + "'");
}

DistortionGroup parse_group(std::string_view name) {
  for (int g = 0; g < kNumGroups; ++g) {
    if (to_string(static_cast<DistortionGroup>(g)) == name) return static_cast<DistortionGroup>(g);
  }
  throw ParameterError("unknown distortion group '" + std::string(name) + "'");
}

const std::vector<DistortionKind>& all_kinds() {
  static const std::vector<DistortionKind> kinds = [] {
    std::vector<DistortionKind> v;
    for (const auto& k : catalogue()) v.push_back(k.kind);
    return v;
  }();
  return kinds;
}

DistortionGroup group_of(DistortionKind kind) { return info(kind).group; }
bool changes_size(DistortionKind kind) { return info(kind).changes_size; }
bool is_samplable(DistortionKind kind) { return info(kind).samplable; }
const ParamSchema& param_schema(DistortionKind kind) { return info(kind).schema; }

SeverityTable SeverityTable::defaults() {
  SeverityTable t;
  for (const auto& k : catalogue()) t.levels_[k.kind] = default_levels(k);
  return t;
}

void SeverityTable::validate(const nlohmann::json& doc) { (void)parse_overrides(doc); }

SeverityTable SeverityTable::from_json(const nlohmann::json& doc) { return defaults().with_overrides(doc); }

SeverityTable SeverityTable::with_overrides(const nlohmann::json& doc) const {
  SeverityTable t = *this;
  for (auto& [kind, levels] : parse_overrides(doc)) t.levels_[kind] = std::move(levels);
  return t;
}

int SeverityTable::num_levels(DistortionKind kind) const {
  return static_cast<int>(levels_.at(kind).size());
}

const ParamRecord& SeverityTable::params(DistortionKind kind, int level) const {
  const auto it = levels_.find(kind);
  if (it == levels_.end()) throw ParameterError("severity table has no entry for " + std::string(to_string(kind)));
  if (level < 1 || level > static_cast<int>(it->second.size())) {
    throw ParameterError(std::string(to_string(kind)) + ": level " + std::to_string(level) + " outside [1, " +
                         std::to_string(it->second.size()) + "]");
  }
  return it->second[static_cast<std::size_t>(level - 1)];
}

nlohmann::json SeverityTable::to_json() const {
  nlohmann::json kinds = nlohmann::json::object();
  for (const auto& [kind, levels] : levels_) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : levels) arr.push_back(rec);
    kinds[std::string(to_string(kind))] = std::move(arr);
  }
  return {{"version", 1}, {"kinds", std::move(kinds)}};
}

std::string SeverityTable::digest() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

const ParamRecord& severity_params(DistortionKind kind, int level, const SeverityTable& table) {
  return table.params(kind, level);
}

nlohmann::json DistortionSpec::to_json() const {
  return {{"kind", std::string(to_string(kind))},
          {"level", level},
          {"group", std::string(to_string(group))},
          {"params", params}};
}

DistortionSpec DistortionSpec::from_json(const nlohmann::json& j) {
  try {
    DistortionSpec spec{parse_kind(j.at("kind").get<std::string>()), j.at("level").get<int>(), {},
                        DistortionGroup::kBlur};
    spec.group = group_of(spec.kind);
    if (j.contains("group") && parse_group(j.at("group").get<std::string>()) != spec.group) {
      throw ValidationError("distortion " + std::string(to_string(spec.kind)) + " recorded with wrong group");
    }
    for (const auto& [name, value] : j.at("params").items()) spec.params[name] = value.get<double>();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed distortion spec: ") + e.what());
  } catch (const ParameterError& e) {
    throw ValidationError(e.what());
  }
}

void validate_spec(const DistortionSpec& spec, const SeverityTable* table) {
  const auto& k = info(spec.kind);
  const std::string name(k.name);
  if (spec.group != k.group) throw ValidationError(name + ": group mismatch");
  const int max_level = table ? table->num_levels(spec.kind) : 5;
  if (spec.level < 1 || spec.level > max_level) {
    throw ValidationError(name + ": level " + std::to_string(spec.level) + " outside [1, " +
                          std::to_string(max_level) + "]");
  }
  for (const auto& key : k.schema.required) {
    if (!spec.params.count(key.name)) throw ValidationError(name + ": missing parameter '" + key.name + "'");
  }
  for (const auto& [pname, value] : spec.params) {
    const auto* key = find_key(k.schema, pname);
    if (!key) throw ValidationError(name + ": unknown parameter '" + pname + "'");
    try {
      check_value(k.name, *key, value, "distortion spec");
    } catch (const ConfigError& e) {
      throw ValidationError(e.what());
    }
  }
}

}  // namespace wilddistort

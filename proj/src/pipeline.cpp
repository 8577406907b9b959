#include "wilddistort/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "wilddistort/csv.hpp"
#include "wilddistort/error.hpp"

namespace wilddistort {

namespace {

std::vector<DistortionKind> challenge_pool() {
  std::vector<DistortionKind> pool;
  for (auto k : all_kinds()) {
    if (is_samplable(k) && k != DistortionKind::kColorCast) pool.push_back(k);
  }
  return pool;
}

std::vector<DistortionKind> full_pool() {
  std::vector<DistortionKind> pool;
  for (auto k : all_kinds()) {
    if (is_samplable(k)) pool.push_back(k);
  }
  return pool;
}

std::vector<LevelScheme> make_builtin_schemes() {
  const auto organizer = challenge_pool();
  std::vector<LevelScheme> s;
  s.push_back({"challenge", 1, 5, std::nullopt, 5, true, organizer});
  s.push_back({"ant_mild", 1, 3, SeverityGaussian{0.0, 2.5}, 5, false, organizer});
  s.push_back({"ant_moderate", 3, 6, SeverityGaussian{2.5, 2.0}, 5, false, organizer});
  s.push_back({"ant_heavy", 6, 6, SeverityGaussian{3.5, 1.0}, 5, false, organizer});
  s.push_back({"teleai", 1, 5, SeverityGaussian{3.0, 1.5}, 5, true, full_pool()});
  s.push_back({"intsig_light", 1, 3, std::nullopt, 3, true, organizer});
  s.push_back({"vincentlc", 1, 3, std::nullopt, 5, true, organizer});
  return s;
}

std::string step_key(std::size_t i) { return "step:" + std::to_string(i); }

bool valid_id_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
         c == '-';
}

std::filesystem::path resolve(const std::filesystem::path& root, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || root.empty() ? path : root / path;
}

}  // namespace

void LevelScheme::validate() const {
  if (name.empty()) throw ConfigError("scheme: empty name");
  if (min_count < 1 || max_count < min_count) {
    throw ConfigError("scheme " + name + ": invalid count range [" + std::to_string(min_count) + ", " +
                      std::to_string(max_count) + "]");
  }
  if (num_levels != 3 && num_levels != 5) throw ConfigError("scheme " + name + ": num_levels must be 3 or 5");
  if (severity && !(severity->stddev >= 0.0)) throw ConfigError("scheme " + name + ": negative severity stddev");
  if (pool.empty()) throw ConfigError("scheme " + name + ": empty distortion pool");
  std::set<DistortionGroup> groups;
  std::set<DistortionKind> kinds(pool.begin(), pool.end());
  for (auto k : pool) groups.insert(group_of(k));
  if (distinct_groups && static_cast<std::size_t>(max_count) > groups.size()) {
    throw ConfigError("scheme " + name + ": requests up to " + std::to_string(max_count) +
                      " distinct groups but only " + std::to_string(groups.size()) + " exist");
  }
  if (!distinct_groups && static_cast<std::size_t>(max_count) > kinds.size()) {
    throw ConfigError("scheme " + name + ": requests more distortions than distinct kinds in the pool");
  }
}

const std::vector<LevelScheme>& builtin_schemes() {
  static const std::vector<LevelScheme> schemes = make_builtin_schemes();
  return schemes;
}

const LevelScheme& find_scheme(std::string_view name) {
  for (const auto& s : builtin_schemes()) {
    if (s.name == name) return s;
  }
  std::string known;
  for (const auto& s : builtin_schemes()) known += (known.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown scheme '" + std::string(name) + "' (known: " + known + ")");
}

int severity_to_level(double draw, int num_levels) {
  const double r = draw < 0.0 ? -std::floor(-draw + 0.5) : std::floor(draw + 0.5);
  return static_cast<int>(std::clamp(r, 1.0, static_cast<double>(num_levels)));
}

SeededRng image_stream(std::uint64_t global_seed, std::string_view image_id) {
  return SeededRng(global_seed).derive(image_id);
}

DistortionPlan sample_plan(std::string_view image_id, const LevelScheme& scheme, const SeverityTable& table,
                           SeededRng& rng) {
  scheme.validate();
  DistortionPlan plan{std::string(image_id), 0, scheme.name, {}};
  const int count = rng.uniform_int(scheme.min_count, scheme.max_count);
  std::set<DistortionGroup> used_groups;
  std::set<DistortionKind> used_kinds;
  while (static_cast<int>(plan.specs.size()) < count) {
    const DistortionKind kind = scheme.pool[rng.below(scheme.pool.size())];
    if (scheme.distinct_groups ? used_groups.count(group_of(kind)) > 0 : used_kinds.count(kind) > 0) continue;
    used_groups.insert(group_of(kind));
    used_kinds.insert(kind);

    const int kind_levels = std::min(scheme.num_levels, table.num_levels(kind));
    int level;
    if (scheme.severity) {
      level = severity_to_level(rng.normal(scheme.severity->mean, scheme.severity->stddev), scheme.num_levels);
    } else {
      level = rng.uniform_int(1, scheme.num_levels);
    }
    level = std::min(level, kind_levels);
    plan.specs.push_back(make_spec(kind, level, table, rng));
  }
  return plan;
}

DistortionPlan sample_plan(std::string_view image_id, const LevelScheme& scheme, const SeverityTable& table,
                           std::uint64_t global_seed) {
  SeededRng rng = image_stream(global_seed, image_id).derive("plan");
  DistortionPlan plan = sample_plan(image_id, scheme, table, rng);
  plan.seed = global_seed;
  return plan;
}

AppliedImage execute_plan(const ImageBuffer& source, const DistortionPlan& plan) {
  const SeededRng root = image_stream(plan.seed, plan.image_id);
  AppliedImage cur{source, std::nullopt};
  for (std::size_t i = 0; i < plan.specs.size(); ++i) {
    SeededRng step = root.derive(step_key(i));
    if (i + 1 == plan.specs.size()) {
      cur = apply_keep_encoding(cur.image, plan.specs[i], step);
    } else {
      cur.image = apply(cur.image, plan.specs[i], step);
    }
  }
  return cur;
}

std::string_view to_string(Track t) { return t == Track::kClean ? "clean" : "robust"; }

Track parse_track(std::string_view s) {
  if (s == "clean") return Track::kClean;
  if (s == "robust") return Track::kRobust;
  throw ValidationError("unknown track '" + std::string(s) + "'");
}

nlohmann::json ManifestRecord::to_json() const {
  nlohmann::json j;
  j["manifest_v"] = kVersion;
  j["image_id"] = image_id;
  j["source_path"] = source_path;
  j["output_path"] = output_path;
  j["label"] = label;
  j["track"] = std::string(to_string(track));
  nlohmann::json specs = nlohmann::json::array();
  if (plan) {
    for (const auto& s : plan->specs) specs.push_back(s.to_json());
  }
  j["plan"] = std::move(specs);
  j["global_seed"] = global_seed;
  j["scheme"] = scheme;
  j["robust_fraction"] = robust_fraction;
  j["severity_table"] = severity_table;
  if (error) j["error"] = *error;
  return j;
}

ManifestRecord ManifestRecord::from_json(const nlohmann::json& j) {
  ManifestRecord r;
  try {
    if (j.at("manifest_v").get<int>() != kVersion) {
      throw ValidationError("unsupported manifest_v " + j.at("manifest_v").dump());
    }
    r.image_id = j.at("image_id").get<std::string>();
    r.source_path = j.at("source_path").get<std::string>();
    r.output_path = j.at("output_path").get<std::string>();
    r.label = j.at("label").get<int>();
    r.track = parse_track(j.at("track").get<std::string>());
    r.global_seed = j.at("global_seed").get<std::uint64_t>();
    r.scheme = j.at("scheme").get<std::string>();
    r.robust_fraction = j.at("robust_fraction").get<double>();
    r.severity_table = j.at("severity_table").get<std::string>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    const auto& specs = j.at("plan");
    if (!specs.is_array()) throw ValidationError("plan must be an array");
    if (r.track == Track::kRobust) {
      DistortionPlan plan{r.image_id, r.global_seed, r.scheme, {}};
      for (const auto& s : specs) plan.specs.push_back(DistortionSpec::from_json(s));
      r.plan = std::move(plan);
    } else if (!specs.empty()) {
      throw ValidationError("record " + r.image_id + ": clean track with a non-empty plan");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest record: ") + e.what());
  }
  return r;
}

void ManifestRecord::validate() const {
  if (label != 0 && label != 1) throw ValidationError("record " + image_id + ": label must be 0 or 1");
  if (track == Track::kClean && plan && !plan->specs.empty()) {
    throw ValidationError("record " + image_id + ": clean track must have an empty plan");
  }
  if (track == Track::kRobust && (!plan || plan->specs.empty())) {
    throw ValidationError("record " + image_id + ": robust track requires a non-empty plan");
  }
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  std::vector<ManifestRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(ManifestRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write manifest " + path.string());
  for (const auto& r : records) out << r.to_json().dump() << '\n';
}

std::vector<ListingEntry> parse_listing(std::string_view csv_text) {
  const CsvTable t = parse_csv(csv_text);
  const int id_col = t.column("image_id");
  const int path_col = t.column("path");
  const int label_col = t.column("label");
  if (id_col < 0 || path_col < 0 || label_col < 0) {
    throw ConfigError("listing: header must contain image_id,path,label");
  }
  std::vector<ListingEntry> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = "listing row " + std::to_string(r + 2);
    ListingEntry e{row[id_col], row[path_col], 0};
    if (e.image_id.empty() || !std::all_of(e.image_id.begin(), e.image_id.end(), valid_id_char)) {
      throw ConfigError(where + ": image_id '" + e.image_id + "' must be non-empty [A-Za-z0-9._-]");
    }
    if (!seen.insert(e.image_id).second) throw ConfigError(where + ": duplicate image_id '" + e.image_id + "'");
    const std::string& label = row[label_col];
    if (label == "0" || label == "real") {
      e.label = 0;
    } else if (label == "1" || label == "fake") {
      e.label = 1;
    } else {
      throw ConfigError(where + ": label must be 0/1 or real/fake, got '" + label + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ListingEntry> read_listing(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open listing " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_listing(ss.str());
}

std::vector<Track> assign_tracks(const std::vector<ListingEntry>& entries, double robust_fraction,
                                 std::uint64_t global_seed) {
  if (!(robust_fraction >= 0.0 && robust_fraction <= 1.0)) {
    throw ConfigError("robust_fraction must be in [0, 1]");
  }
  const std::size_t n = entries.size();
  std::vector<std::uint64_t> hash(n);
  for (std::size_t i = 0; i < n; ++i) hash[i] = image_stream(global_seed, entries[i].image_id).derive("track").next_u64();
  auto by_hash = [&](std::size_t a, std::size_t b) {
    if (hash[a] != hash[b]) return hash[a] < hash[b];
    return entries[a].image_id < entries[b].image_id;
  };

  // Rank within each label, then merge labels by quantile position so every
  // label gets its share of the robust track (within one image).
  std::map<int, std::vector<std::size_t>> per_label;
  for (std::size_t i = 0; i < n; ++i) per_label[entries[i].label].push_back(i);
  std::vector<double> quantile(n);
  for (auto& [label, members] : per_label) {
    std::sort(members.begin(), members.end(), by_hash);
    for (std::size_t r = 0; r < members.size(); ++r) {
      quantile[members[r]] = (static_cast<double>(r) + 0.5) / static_cast<double>(members.size());
    }
  }
  std::vector<std::size_t> keyed(n);
  for (std::size_t i = 0; i < n; ++i) keyed[i] = i;
  std::sort(keyed.begin(), keyed.end(), [&](std::size_t a, std::size_t b) {
    if (quantile[a] != quantile[b]) return quantile[a] < quantile[b];
    return by_hash(a, b);
  });
  const auto n_robust = static_cast<std::size_t>(std::floor(robust_fraction * static_cast<double>(n) + 0.5));
  std::vector<Track> tracks(n, Track::kClean);
  for (std::size_t r = 0; r < std::min(n_robust, n); ++r) tracks[keyed[r]] = Track::kRobust;
  return tracks;
}

BatchResult run_batch(const std::vector<ListingEntry>& entries, const BatchOptions& options) {
  options.scheme.validate();
  const auto tracks = assign_tracks(entries, options.robust_fraction, options.global_seed);
  std::filesystem::create_directories(options.output_dir / "images");

  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return entries[a].image_id < entries[b].image_id; });

  std::vector<ManifestRecord> records(entries.size());
  const std::string digest = options.table.digest();

  auto process = [&](std::size_t slot) {
    const ListingEntry& e = entries[order[slot]];
    ManifestRecord& rec = records[slot];
    rec.image_id = e.image_id;
    rec.source_path = e.path;
    rec.label = e.label;
    rec.track = tracks[order[slot]];
    rec.global_seed = options.global_seed;
    rec.scheme = options.scheme.name;
    rec.robust_fraction = options.robust_fraction;
    rec.severity_table = digest;
    try {
      if (rec.track == Track::kRobust) {
        rec.plan = sample_plan(e.image_id, options.scheme, options.table, options.global_seed);
      }
      const ImageBuffer source = load_image(resolve(options.source_root, e.path));
      Bytes encoded;
      std::string ext = ".png";
      if (rec.plan) {
        AppliedImage out = execute_plan(source, *rec.plan);
        if (out.jpeg) {
          encoded = std::move(*out.jpeg);
          ext = ".jpg";
        } else {
          encoded = encode_png(out.image);
        }
      } else {
        encoded = encode_png(source);
      }
      rec.output_path = "images/" + e.image_id + ext;
      write_file(options.output_dir / rec.output_path, encoded);
    } catch (const std::exception& ex) {
      rec.output_path.clear();
      rec.error = ex.what();
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1 || records.size() <= 1) {
    for (std::size_t i = 0; i < records.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), records.size());
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) process(i);
      });
    }
    for (auto& t : workers) t.join();
  }

  BatchResult result;
  result.records = std::move(records);
  for (const auto& r : result.records) result.failures += r.error ? 1 : 0;
  result.manifest_path = options.output_dir / "manifest.jsonl";
  write_manifest(result.manifest_path, result.records);
  return result;
}

ReplayOutput replay(const ManifestRecord& record, const std::filesystem::path& source_root,
                    const SeverityTable& table) {
  record.validate();
  if (record.plan) {
    for (const auto& spec : record.plan->specs) validate_spec(spec, &table);
  }
  const auto source_path = resolve(source_root, record.source_path);
  if (!std::filesystem::exists(source_path)) throw Error("replay: missing source " + source_path.string());
  const ImageBuffer source = load_image(source_path);
  if (!record.plan) {
    Bytes png = encode_png(source);
    return {source, std::move(png)};
  }
  DistortionPlan plan = *record.plan;
  plan.image_id = record.image_id;
  plan.seed = record.global_seed;
  AppliedImage out = execute_plan(source, plan);
  if (out.jpeg) return {std::move(out.image), std::move(*out.jpeg)};
  Bytes png = encode_png(out.image);
  return {std::move(out.image), std::move(png)};
}

}  // namespace wilddistort

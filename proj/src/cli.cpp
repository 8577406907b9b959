#include "wilddistort/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "wilddistort/codec.hpp"
#include "wilddistort/error.hpp"
#include "wilddistort/pipeline.hpp"

namespace wilddistort::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Fusion over a scores table

namespace {

const std::vector<std::string>& rapid_roles() {
  static const std::vector<std::string> roles{"g4", "siglip", "srm", "eva02", "eva02_fixed", "g4v2"};
  return roles;
}

const std::vector<std::string>& intsig_roles() {
  static const std::vector<std::string> roles = [] {
    std::vector<std::string> r;
    for (int m = 1; m <= 5; ++m) {
      r.push_back("M" + std::to_string(m) + "_logit0");
      r.push_back("M" + std::to_string(m) + "_logit1");
    }
    return r;
  }();
  return roles;
}

const std::set<std::string>& scheme_names() {
  static const std::set<std::string> names{"rapid", "intsig", "prism", "average", "weighted", "tta"};
  return names;
}

void check_keys(const json& doc, const std::set<std::string>& allowed, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [k, _] : doc.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array of column names");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(where + ": column names must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

double cell_value(const CsvTable& t, std::size_t row, int col) {
  const std::string& s = t.rows[row][static_cast<std::size_t>(col)];
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("scores row " + std::to_string(row + 2) + ", column '" + t.header[static_cast<std::size_t>(col)] +
                      "': invalid number '" + s + "'");
  }
  return v;
}

int require_column(const CsvTable& t, const std::string& name) {
  const int c = t.column(name);
  if (c < 0) throw MissingColumnError(name);
  return c;
}

std::string head_name(fusion::HeadType h) { return h == fusion::HeadType::kSigmoid ? "sigmoid" : "softmax"; }

std::string policy_name(fusion::Gate2Policy p) {
  return p == fusion::Gate2Policy::kWithinBracket ? "within_bracket" : "global";
}

}  // namespace

MissingColumnError::MissingColumnError(std::string column)
    : ConfigError("scores file is missing column '" + column + "'"), column_(std::move(column)) {}

FuseConfig FuseConfig::for_scheme(const std::string& scheme) {
  if (!scheme_names().count(scheme)) throw ConfigError("unknown fusion scheme '" + scheme + "'");
  FuseConfig c;
  c.scheme = scheme;
  if (scheme == "rapid") {
    for (const auto& r : rapid_roles()) c.roles.emplace_back(r, r);
  } else if (scheme == "intsig") {
    for (const auto& r : intsig_roles()) c.roles.emplace_back(r, r);
  } else if (scheme == "prism") {
    throw ConfigError("fusion scheme 'prism' needs a scheme config listing its models");
  } else if (scheme == "weighted") {
    throw ConfigError("fusion scheme 'weighted' needs a scheme config listing its weights");
  }
  return c;
}

FuseConfig FuseConfig::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("scheme") || !doc["scheme"].is_string()) {
    throw ConfigError("fusion config: 'scheme' (string) is required");
  }
  const std::string scheme = doc["scheme"].get<std::string>();
  if (!scheme_names().count(scheme)) throw ConfigError("unknown fusion scheme '" + scheme + "'");
  FuseConfig c;
  c.scheme = scheme;

  if (scheme == "rapid" || scheme == "intsig") {
    const auto& roles = scheme == "rapid" ? rapid_roles() : intsig_roles();
    if (scheme == "rapid") {
      check_keys(doc, {"scheme", "columns"}, "fusion config");
    } else {
      check_keys(doc, {"scheme", "columns", "gates", "gate2_policy"}, "fusion config");
    }
    json cols = doc.value("columns", json::object());
    if (!cols.is_object()) throw ConfigError("fusion config: 'columns' must map roles to column names");
    for (const auto& [k, v] : cols.items()) {
      if (std::find(roles.begin(), roles.end(), k) == roles.end()) {
        throw ConfigError("fusion config: unknown role '" + k + "' for scheme " + scheme);
      }
      if (!v.is_string()) throw ConfigError("fusion config: column for role '" + k + "' must be a string");
    }
    for (const auto& r : roles) c.roles.emplace_back(r, cols.contains(r) ? cols[r].get<std::string>() : r);
    if (scheme == "intsig") {
      if (doc.contains("gates")) {
        if (!doc["gates"].is_boolean()) throw ConfigError("fusion config: 'gates' must be boolean");
        c.intsig.gates_enabled = doc["gates"].get<bool>();
      }
      if (doc.contains("gate2_policy")) {
        const auto p = doc["gate2_policy"].is_string() ? doc["gate2_policy"].get<std::string>() : std::string();
        if (p == "within_bracket") {
          c.intsig.gate2_policy = fusion::Gate2Policy::kWithinBracket;
        } else if (p == "global") {
          c.intsig.gate2_policy = fusion::Gate2Policy::kGlobal;
        } else {
          throw ConfigError("fusion config: gate2_policy must be 'within_bracket' or 'global'");
        }
      }
    }
  } else if (scheme == "prism") {
    check_keys(doc, {"scheme", "models"}, "fusion config");
    if (!doc.contains("models") || !doc["models"].is_array() || doc["models"].empty()) {
      throw ConfigError("fusion config: prism needs a nonempty 'models' array");
    }
    for (const auto& m : doc["models"]) {
      check_keys(m, {"p", "p_flipped", "robust_auc"}, "fusion config model");
      if (!m.contains("p") || !m["p"].is_string() || !m.contains("p_flipped") || !m["p_flipped"].is_string()) {
        throw ConfigError("fusion config: each prism model needs 'p' and 'p_flipped' column names");
      }
      if (!m.contains("robust_auc") || !m["robust_auc"].is_number()) {
        throw ConfigError("fusion config: each prism model needs a numeric 'robust_auc'");
      }
      const double a = m["robust_auc"].get<double>();
      if (!(a > 0.0 && a <= 1.0)) throw ConfigError("fusion config: robust_auc must lie in (0, 1]");
      c.prism_columns.emplace_back(m["p"].get<std::string>(), m["p_flipped"].get<std::string>());
      c.prism_aucs.push_back(a);
    }
  } else {
    std::set<std::string> allowed{"scheme", "columns"};
    if (scheme == "weighted") allowed.insert("weights");
    if (scheme == "tta") allowed.insert("head");
    check_keys(doc, allowed, "fusion config");
    if (doc.contains("columns")) c.columns = string_list(doc["columns"], "fusion config 'columns'");
    if (scheme == "weighted") {
      if (!doc.contains("weights") || !doc["weights"].is_array()) {
        throw ConfigError("fusion config: weighted needs a 'weights' array");
      }
      for (const auto& w : doc["weights"]) {
        if (!w.is_number() || !(w.get<double>() >= 0.0)) throw ConfigError("fusion config: weights must be >= 0");
        c.weights.push_back(w.get<double>());
      }
      if (!c.columns.empty() && c.columns.size() != c.weights.size()) {
        throw ConfigError("fusion config: 'weights' and 'columns' differ in length");
      }
    }
    if (scheme == "tta" && doc.contains("head")) {
      const auto h = doc["head"].is_string() ? doc["head"].get<std::string>() : std::string();
      if (h == "sigmoid") {
        c.head = fusion::HeadType::kSigmoid;
      } else if (h == "softmax") {
        c.head = fusion::HeadType::kSoftmax;
      } else {
        throw ConfigError("fusion config: head must be 'sigmoid' or 'softmax'");
      }
    }
  }
  return c;
}

json FuseConfig::to_json() const {
  json j{{"scheme", scheme}};
  if (!roles.empty()) {
    json cols = json::object();
    for (const auto& [r, col] : roles) cols[r] = col;
    j["columns"] = cols;
  }
  if (scheme == "intsig") {
    j["gates"] = intsig.gates_enabled;
    j["gate2_policy"] = policy_name(intsig.gate2_policy);
  }
  if (scheme == "prism") {
    json models = json::array();
    for (std::size_t k = 0; k < prism_columns.size(); ++k) {
      models.push_back({{"p", prism_columns[k].first}, {"p_flipped", prism_columns[k].second},
                        {"robust_auc", prism_aucs[k]}});
    }
    j["models"] = models;
  }
  if (scheme == "average" || scheme == "weighted" || scheme == "tta") {
    j["columns"] = columns.empty() ? json("all") : json(columns);
  }
  if (scheme == "weighted") j["weights"] = weights;
  if (scheme == "tta") j["head"] = head_name(head);
  return j;
}

std::vector<Prediction> fuse_table(const CsvTable& scores, const FuseConfig& config) {
  const int id_col = require_column(scores, "image_id");
  std::vector<Prediction> out;
  out.reserve(scores.rows.size());

  auto role_columns = [&] {
    std::vector<int> cols;
    for (const auto& [_, name] : config.roles) cols.push_back(require_column(scores, name));
    return cols;
  };
  auto list_columns = [&] {
    std::vector<int> cols;
    if (config.columns.empty()) {
      for (std::size_t c = 0; c < scores.header.size(); ++c) {
        if (static_cast<int>(c) != id_col) cols.push_back(static_cast<int>(c));
      }
      if (cols.empty()) throw ConfigError("scores file has no score columns");
    } else {
      for (const auto& name : config.columns) cols.push_back(require_column(scores, name));
    }
    return cols;
  };

  if (config.scheme == "rapid") {
    const auto cols = role_columns();
    for (std::size_t r = 0; r < scores.rows.size(); ++r) {
      const fusion::RapidScores s{cell_value(scores, r, cols[0]), cell_value(scores, r, cols[1]),
                                  cell_value(scores, r, cols[2]), cell_value(scores, r, cols[3]),
                                  cell_value(scores, r, cols[4]), cell_value(scores, r, cols[5])};
      out.push_back({scores.rows[r][id_col], fusion::rapid_cascade(s)});
    }
  } else if (config.scheme == "intsig") {
    const auto cols = role_columns();
    for (std::size_t r = 0; r < scores.rows.size(); ++r) {
      fusion::IntsigScores s{};
      for (std::size_t m = 0; m < 5; ++m) {
        s[m] = {cell_value(scores, r, cols[2 * m]), cell_value(scores, r, cols[2 * m + 1])};
      }
      out.push_back({scores.rows[r][id_col], fusion::intsig_fuse(s, config.intsig).diff()});
    }
  } else if (config.scheme == "prism") {
    std::vector<std::pair<int, int>> cols;
    for (const auto& [p, pf] : config.prism_columns) cols.emplace_back(require_column(scores, p), require_column(scores, pf));
    std::vector<fusion::PrismModel> models(cols.size());
    for (std::size_t r = 0; r < scores.rows.size(); ++r) {
      for (std::size_t k = 0; k < cols.size(); ++k) {
        models[k] = {cell_value(scores, r, cols[k].first), cell_value(scores, r, cols[k].second), config.prism_aucs[k]};
      }
      out.push_back({scores.rows[r][id_col], fusion::prism_predict(models)});
    }
  } else if (config.scheme == "average" || config.scheme == "weighted" || config.scheme == "tta") {
    const auto cols = list_columns();
    if (config.scheme == "weighted" && cols.size() != config.weights.size()) {
      throw ConfigError("fusion config: " + std::to_string(config.weights.size()) + " weights for " +
                        std::to_string(cols.size()) + " score columns");
    }
    std::vector<double> v(cols.size());
    for (std::size_t r = 0; r < scores.rows.size(); ++r) {
      for (std::size_t k = 0; k < cols.size(); ++k) v[k] = cell_value(scores, r, cols[k]);
      double s = 0.0;
      if (config.scheme == "average") {
        s = fusion::average_probs(v);
      } else if (config.scheme == "weighted") {
        s = fusion::weighted_expert_average(v, config.weights);
      } else {
        s = fusion::aggregate_tta({v, config.head});
      }
      out.push_back({scores.rows[r][id_col], s});
    }
  } else {
    throw ConfigError("unknown fusion scheme '" + config.scheme + "'");
  }
  return out;
}

std::string predictions_csv(const std::vector<Prediction>& predictions) {
  std::string out = "image_id,score\n";
  for (const auto& p : predictions) out += csv_escape(p.image_id) + "," + format_double(p.score) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

json read_json_file(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + what + " " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " " + path.string() + ": " + e.what());
  }
}

const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"distort", {"scheme", "robust_fraction", "seed", "jobs", "severity_table", "source_root"}},
      {"evaluate", {"format"}},
      {"fuse", {"scheme", "scheme_config", "gates"}},
      {"replay", {"source_root", "severity_table"}},
  };
  return schema;
}

/// File layer of the run configuration: {"distort": {...}, "evaluate": {...}, ...}.
class ConfigFile {
 public:
  ConfigFile() = default;
  explicit ConfigFile(const fs::path& path) : path_(path), doc_(read_json_file(path, "config")) {
    if (!doc_.is_object()) throw ConfigError("config " + path.string() + ": expected a JSON object");
    for (const auto& [section, body] : doc_.items()) {
      const auto it = config_schema().find(section);
      if (it == config_schema().end()) throw ConfigError("config: unknown section '" + section + "'");
      check_keys(body, it->second, "config section '" + section + "'");
    }
  }

  bool has(const std::string& section, const std::string& key) const {
    return doc_.contains(section) && doc_[section].contains(key);
  }

  template <typename T>
  T get(const std::string& section, const std::string& key) const {
    try {
      return doc_[section][key].get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: '" + section + "." + key + "' has the wrong type");
    }
  }

  /// Paths in the config file are relative to the file's directory.
  fs::path get_path(const std::string& section, const std::string& key) const {
    const fs::path p = get<std::string>(section, key);
    return p.is_absolute() ? p : path_.parent_path() / p;
  }

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  json doc_;
};

ConfigFile load_config(const std::string& flag_path) {
  if (!flag_path.empty()) return ConfigFile(flag_path);
  if (const char* env = std::getenv("WILDDISTORT_CONFIG"); env != nullptr && *env != '\0') return ConfigFile(env);
  return ConfigFile();
}

/// flag > config file > default.
template <typename T>
T resolve(const CLI::Option* flag, const T& flag_value, const ConfigFile& cfg, const std::string& section,
          const std::string& key, const T& fallback) {
  if (flag->count() > 0) return flag_value;
  if (cfg.has(section, key)) return cfg.get<T>(section, key);
  return fallback;
}

fs::path resolve_path(const CLI::Option* flag, const std::string& flag_value, const ConfigFile& cfg,
                      const std::string& section, const std::string& key, const fs::path& fallback) {
  if (flag->count() > 0) return flag_value;
  if (cfg.has(section, key)) return cfg.get_path(section, key);
  return fallback;
}

std::uint64_t parse_seed(const std::string& s) {
  if (s == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("--seed must be a non-negative integer or 'random', got '" + s + "'");
  }
  return v;
}

bool parse_on_off(const std::string& s, const std::string& what) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw ConfigError(what + " must be 'on' or 'off', got '" + s + "'");
}

SeverityTable load_table(const fs::path& path) {
  if (path.empty()) return SeverityTable::defaults();
  return SeverityTable::from_json(read_json_file(path, "severity table"));
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// ---------------------------------------------------------------------------
// Commands

struct DistortFlags {
  std::string input, output_dir, scheme, seed, severity_table, source_root;
  double robust_fraction = 0.5;
  int jobs = 1;
  CLI::Option *o_scheme, *o_fraction, *o_seed, *o_jobs, *o_table, *o_root;
};

int cmd_distort(const DistortFlags& f, const ConfigFile& cfg, std::ostream& out, std::ostream& err) {
  BatchOptions opt;
  const std::string scheme = resolve<std::string>(f.o_scheme, f.scheme, cfg, "distort", "scheme", "challenge");
  opt.scheme = find_scheme(scheme);
  opt.robust_fraction = resolve(f.o_fraction, f.robust_fraction, cfg, "distort", "robust_fraction", 0.5);
  if (!(opt.robust_fraction >= 0.0 && opt.robust_fraction <= 1.0)) {
    throw ConfigError("robust fraction must lie in [0, 1]");
  }
  if (f.o_seed->count() > 0) {
    opt.global_seed = parse_seed(f.seed);
  } else if (cfg.has("distort", "seed")) {
    opt.global_seed = cfg.get<std::uint64_t>("distort", "seed");
  } else {
    opt.global_seed = kDefaultSeed;
  }
  opt.jobs = resolve(f.o_jobs, f.jobs, cfg, "distort", "jobs", default_jobs());
  if (opt.jobs < 1) throw ConfigError("--jobs must be at least 1");
  const fs::path table_path = resolve_path(f.o_table, f.severity_table, cfg, "distort", "severity_table", {});
  opt.table = load_table(table_path);
  opt.source_root = resolve_path(f.o_root, f.source_root, cfg, "distort", "source_root", ".");
  opt.output_dir = f.output_dir;

  const auto entries = read_listing(f.input);
  const BatchResult result = run_batch(entries, opt);

  const json resolved{{"command", "distort"},
                      {"input", f.input},
                      {"output_dir", f.output_dir},
                      {"scheme", scheme},
                      {"robust_fraction", opt.robust_fraction},
                      {"seed", opt.global_seed},
                      {"jobs", opt.jobs},
                      {"severity_table", table_path.empty() ? json("defaults") : json(table_path.string())},
                      {"severity_table_digest", opt.table.digest()},
                      {"source_root", opt.source_root.string()},
                      {"config_file", cfg.path().empty() ? json(nullptr) : json(cfg.path().string())}};
  write_text(opt.output_dir / "run_config.json", resolved.dump(2) + "\n");

  std::size_t n_clean = 0;
  std::size_t n_robust = 0;
  std::map<std::string, std::size_t> histogram;
  for (const auto& r : result.records) {
    if (r.error) continue;
    if (r.track == Track::kClean) {
      ++n_clean;
    } else {
      ++n_robust;
      for (const auto& s : r.plan->specs) ++histogram[std::string(to_string(s.kind))];
    }
  }
  out << "manifest: " << result.manifest_path.string() << "\n";
  out << "records: " << result.records.size() << " (clean " << n_clean << ", robust " << n_robust << ", failed "
      << result.failures << ")\n";
  out << "seed: " << opt.global_seed << "  scheme: " << scheme << "\n";
  out << "kind usage:\n";
  for (const auto& [kind, n] : histogram) out << "  " << kind << " " << n << "\n";
  if (result.failures > 0) {
    for (const auto& r : result.records) {
      if (r.error) err << "failed " << r.image_id << ": " << *r.error << "\n";
    }
    return kPartial;
  }
  return kSuccess;
}

struct EvaluateFlags {
  std::string manifest, predictions, format, output;
  CLI::Option* o_format;
};

int cmd_evaluate(const EvaluateFlags& f, const ConfigFile& cfg, std::ostream& out, std::ostream& err) {
  const std::string format = resolve<std::string>(f.o_format, f.format, cfg, "evaluate", "format", "json");
  if (format != "json" && format != "csv") throw ConfigError("--format must be json or csv");
  const auto manifest = read_manifest(f.manifest);
  const auto predictions = read_predictions(f.predictions);
  EvalReport report;
  try {
    report = evaluate(manifest, predictions);
  } catch (const PredictionMismatch& e) {
    err << "prediction ids do not match the manifest\n";
    for (const auto& id : e.missing()) err << "  missing    " << id << "\n";
    for (const auto& id : e.duplicate()) err << "  duplicate  " << id << "\n";
    for (const auto& id : e.unexpected()) err << "  unexpected " << id << "\n";
    return kConfigError;
  }
  const json resolved{{"command", "evaluate"},
                      {"manifest", f.manifest},
                      {"predictions", f.predictions},
                      {"format", format},
                      {"config_file", cfg.path().empty() ? json(nullptr) : json(cfg.path().string())}};
  std::string text;
  if (format == "json") {
    json j = report.to_json();
    j["config"] = resolved;
    text = j.dump(2) + "\n";
  } else {
    std::string csv = report.to_csv();
    const auto nl = csv.find('\n');
    text = csv.substr(0, nl) + ",config" + csv.substr(nl, csv.size() - nl - 1) + "," +
           csv_escape(resolved.dump()) + "\n";
  }
  if (f.output.empty()) {
    out << text;
  } else {
    write_text(f.output, text);
  }
  return kSuccess;
}

struct FuseFlags {
  std::string scores, scheme, scheme_config, gates, output;
  CLI::Option *o_scheme, *o_scheme_config, *o_gates;
};

int cmd_fuse(const FuseFlags& f, const ConfigFile& cfg, std::ostream& out, std::ostream&) {
  FuseConfig config;
  const fs::path scheme_config =
      resolve_path(f.o_scheme_config, f.scheme_config, cfg, "fuse", "scheme_config", {});
  if (!scheme_config.empty()) {
    if (f.o_scheme->count() > 0) throw ConfigError("--scheme and --scheme-config are mutually exclusive");
    config = FuseConfig::from_json(read_json_file(scheme_config, "fusion config"));
  } else {
    const std::string scheme = resolve<std::string>(f.o_scheme, f.scheme, cfg, "fuse", "scheme", "");
    if (scheme.empty()) throw ConfigError("fuse needs --scheme or --scheme-config");
    config = FuseConfig::for_scheme(scheme);
  }
  if (f.o_gates->count() > 0) {
    config.intsig.gates_enabled = parse_on_off(f.gates, "--gates");
  } else if (cfg.has("fuse", "gates")) {
    config.intsig.gates_enabled = cfg.get<bool>("fuse", "gates");
  }
  if (f.o_gates->count() > 0 && config.scheme != "intsig") throw ConfigError("--gates applies only to intsig");

  const auto fused = fuse_table(read_csv(f.scores), config);
  const std::string text = predictions_csv(fused);
  if (f.output.empty()) {
    out << text;
  } else {
    write_text(f.output, text);
    const json resolved{{"command", "fuse"}, {"scores", f.scores}, {"output", f.output}, {"fusion", config.to_json()}};
    write_text(fs::path(f.output + ".config.json"), resolved.dump(2) + "\n");
  }
  return kSuccess;
}

struct ReplayFlags {
  std::string manifest, source_root, severity_table, output_dir;
  std::vector<std::string> ids;
  bool check = false;
  CLI::Option *o_root, *o_table;
};

int cmd_replay(const ReplayFlags& f, const ConfigFile& cfg, std::ostream& out, std::ostream& err) {
  if (!f.check && f.output_dir.empty()) throw ConfigError("replay needs --check and/or --output-dir");
  const fs::path root = resolve_path(f.o_root, f.source_root, cfg, "replay", "source_root", ".");
  const SeverityTable table = load_table(resolve_path(f.o_table, f.severity_table, cfg, "replay", "severity_table", {}));
  const auto records = read_manifest(f.manifest);
  const fs::path manifest_dir = fs::path(f.manifest).parent_path();

  std::set<std::string> wanted(f.ids.begin(), f.ids.end());
  for (const auto& id : wanted) {
    if (std::none_of(records.begin(), records.end(), [&](const ManifestRecord& r) { return r.image_id == id; })) {
      throw ConfigError("manifest has no record '" + id + "'");
    }
  }

  std::size_t ok = 0;
  std::size_t bad = 0;
  for (const auto& r : records) {
    if (!wanted.empty() && !wanted.count(r.image_id)) continue;
    if (r.error) continue;
    ReplayOutput replayed{ImageBuffer(1, 1), {}};
    try {
      replayed = replay(r, root, table);
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      err << "failed " << r.image_id << ": " << e.what() << "\n";
      ++bad;
      continue;
    }
    if (!f.output_dir.empty()) write_file(fs::path(f.output_dir) / r.output_path, replayed.encoded);
    if (f.check) {
      const fs::path original = manifest_dir / r.output_path;
      Bytes expected;
      try {
        expected = read_file(original);
      } catch (const Error& e) {
        err << "failed " << r.image_id << ": " << e.what() << "\n";
        ++bad;
        continue;
      }
      if (expected != replayed.encoded) {
        err << "mismatch " << r.image_id << "\n";
        ++bad;
        continue;
      }
    }
    ++ok;
  }
  out << "replayed " << ok + bad << " records: " << ok << " ok, " << bad << " failed\n";
  return bad == 0 ? kSuccess : kPartial;
}

int cmd_table_show(const std::string& table_path, std::ostream& out) {
  out << load_table(table_path).to_json().dump(2) << "\n";
  return kSuccess;
}

int cmd_table_validate(const std::string& table_path, std::ostream& out) {
  const json doc = read_json_file(table_path, "severity table");
  SeverityTable::validate(doc);
  out << table_path << ": ok (digest " << SeverityTable::from_json(doc).digest() << ")\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Seeded image distortion pipeline, detector evaluation and score fusion.", "wilddistort"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON run config (default: $WILDDISTORT_CONFIG)");

  DistortFlags df;
  auto* distort = app.add_subcommand("distort", "Build the robust track from an image listing");
  distort->add_option("--input", df.input, "Listing CSV with header image_id,path,label")->required();
  distort->add_option("--output-dir", df.output_dir, "Directory for images/ and manifest.jsonl")->required();
  df.o_scheme = distort->add_option("--scheme", df.scheme,
                                    "challenge|ant_mild|ant_moderate|ant_heavy|teleai|intsig_light|vincentlc "
                                    "(default challenge)");
  df.o_fraction = distort->add_option("--robust-fraction", df.robust_fraction, "Share of images distorted (default 0.5)");
  df.o_seed = distort->add_option("--seed", df.seed, "Global seed or 'random' (default 2026)");
  df.o_jobs = distort->add_option("--jobs", df.jobs, "Worker threads (default: hardware threads)");
  df.o_table = distort->add_option("--severity-table", df.severity_table, "JSON severity table overrides");
  df.o_root = distort->add_option("--source-root", df.source_root, "Base for relative listing paths (default .)");

  EvaluateFlags ef;
  auto* eval = app.add_subcommand("evaluate", "Clean/robust ROC AUC and combined score");
  eval->add_option("--manifest", ef.manifest, "manifest.jsonl from distort")->required();
  eval->add_option("--predictions", ef.predictions, "CSV with header image_id,score")->required();
  ef.o_format = eval->add_option("--format", ef.format, "json|csv (default json)");
  eval->add_option("--output", ef.output, "Report path (default stdout)");

  FuseFlags ff;
  auto* fuse = app.add_subcommand("fuse", "Combine per-model scores into one score per image");
  fuse->add_option("--scores", ff.scores, "CSV with header image_id,<model columns>")->required();
  ff.o_scheme = fuse->add_option("--scheme", ff.scheme, "rapid|intsig|average|tta with default column names");
  ff.o_scheme_config = fuse->add_option("--scheme-config", ff.scheme_config, "JSON fusion scheme config");
  ff.o_gates = fuse->add_option("--gates", ff.gates, "on|off: intsig gating (default on)");
  fuse->add_option("--output", ff.output, "Output CSV image_id,score (default stdout)");

  ReplayFlags rf;
  auto* rep = app.add_subcommand("replay", "Rebuild outputs from a manifest");
  rep->add_option("--manifest", rf.manifest, "manifest.jsonl")->required();
  rf.o_root = rep->add_option("--source-root", rf.source_root, "Base for relative source paths (default .)");
  rf.o_table = rep->add_option("--severity-table", rf.severity_table, "Severity table the run used");
  rep->add_option("--id", rf.ids, "Replay only these image ids (repeatable)");
  rep->add_option("--output-dir", rf.output_dir, "Write replayed outputs here");
  rep->add_flag("--check", rf.check, "Compare against the files next to the manifest");

  auto* table = app.add_subcommand("severity-table", "Inspect or validate severity tables");
  table->require_subcommand(1);
  std::string show_path;
  auto* show = table->add_subcommand("show", "Print the effective table as JSON");
  show->add_option("--table", show_path, "Overrides applied to the defaults");
  std::string validate_path;
  auto* validate = table->add_subcommand("validate", "Check a severity table document");
  validate->add_option("path", validate_path, "JSON document")->required();

  std::vector<std::string> argv_store{"wilddistort"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    const ConfigFile cfg = load_config(config_path);
    if (distort->parsed()) return cmd_distort(df, cfg, out, err);
    if (eval->parsed()) return cmd_evaluate(ef, cfg, out, err);
    if (fuse->parsed()) return cmd_fuse(ff, cfg, out, err);
    if (rep->parsed()) return cmd_replay(rf, cfg, out, err);
    if (show->parsed()) return cmd_table_show(show_path, out);
    if (validate->parsed()) return cmd_table_validate(validate_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace wilddistort::cli

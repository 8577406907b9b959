#include "wilddistort/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "wilddistort/csv.hpp"
#include "wilddistort/error.hpp"

namespace wilddistort {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DomainError("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DomainError("roc_auc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw DomainError("roc_auc: NaN score");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the positive-class rank sum; midranks of a tie block [i, j) are
  // (i + 1 + j) / 2, so doubling keeps everything integral.
  std::uint64_t twice_rank_sum = 0;
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    std::uint64_t pos_in_block = 0;
    for (std::size_t k = i; k < j; ++k) pos_in_block += static_cast<std::uint64_t>(labels[order[k]]);
    twice_rank_sum += pos_in_block * static_cast<std::uint64_t>(i + 1 + j);
    n_pos += pos_in_block;
    i = j;
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("roc_auc: need at least one positive and one negative (got " +
                               std::to_string(n_pos) + " positive, " + std::to_string(n_neg) + " negative)");
  }
  // 2U = 2R - n_pos (n_pos + 1)
  const std::uint64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double combined_score(double robust_auc, double clean_auc) { return 0.7 * robust_auc + 0.3 * clean_auc; }

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json counts_json(const TrackCounts& c) {
  return {{"n", c.total}, {"positives", c.positives}, {"negatives", c.negatives}};
}

std::string optional_csv(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

double parse_score(const std::string& s, std::size_t row) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("predictions row " + std::to_string(row) + ": invalid score '" + s + "'");
  }
  return v;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  return {{"clean_auc", optional_number(clean_auc)},
          {"robust_auc", optional_number(robust_auc)},
          {"combined", optional_number(combined)},
          {"clean", counts_json(clean)},
          {"robust", counts_json(robust)},
          {"skipped_failed", skipped_failed}};
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "clean_auc,robust_auc,combined,n_clean,clean_positives,clean_negatives,n_robust,robust_positives,"
         "robust_negatives,skipped_failed\n";
  out << optional_csv(clean_auc) << ',' << optional_csv(robust_auc) << ',' << optional_csv(combined) << ','
      << clean.total << ',' << clean.positives << ',' << clean.negatives << ',' << robust.total << ','
      << robust.positives << ',' << robust.negatives << ',' << skipped_failed << '\n';
  return out.str();
}

std::vector<Prediction> parse_predictions(std::string_view csv_text) {
  const CsvTable t = parse_csv(csv_text);
  const int id_col = t.column("image_id");
  const int score_col = t.column("score");
  if (id_col < 0 || score_col < 0) throw ConfigError("predictions: header must contain image_id,score");
  std::vector<Prediction> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.push_back({t.rows[r][id_col], parse_score(t.rows[r][score_col], r + 2)});
  }
  return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open predictions " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_predictions(ss.str());
}

PredictionMismatch::PredictionMismatch(std::vector<std::string> missing, std::vector<std::string> duplicate,
                                       std::vector<std::string> unexpected)
    : Error("prediction ids do not match manifest: " + std::to_string(missing.size()) + " missing [" +
            join(missing) + "], " + std::to_string(duplicate.size()) + " duplicate [" + join(duplicate) + "], " +
            std::to_string(unexpected.size()) + " unexpected [" + join(unexpected) + "]"),
      missing_(std::move(missing)),
      duplicate_(std::move(duplicate)),
      unexpected_(std::move(unexpected)) {}

EvalReport evaluate(const std::vector<ManifestRecord>& manifest, const std::vector<Prediction>& predictions) {
  std::map<std::string, double> by_id;
  std::vector<std::string> duplicate;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.image_id, p.score).second) duplicate.push_back(p.image_id);
  }

  EvalReport report;
  std::vector<std::string> missing;
  std::map<std::string, const ManifestRecord*> expected;
  for (const auto& r : manifest) {
    if (r.error) {
      ++report.skipped_failed;
      continue;
    }
    expected.emplace(r.image_id, &r);
    if (!by_id.count(r.image_id)) missing.push_back(r.image_id);
  }
  std::vector<std::string> unexpected;
  for (const auto& [id, _] : by_id) {
    if (!expected.count(id)) unexpected.push_back(id);
  }
  std::sort(duplicate.begin(), duplicate.end());
  duplicate.erase(std::unique(duplicate.begin(), duplicate.end()), duplicate.end());
  if (!missing.empty() || !duplicate.empty() || !unexpected.empty()) {
    throw PredictionMismatch(std::move(missing), std::move(duplicate), std::move(unexpected));
  }

  // Iterate in id order so the result is independent of input row order.
  std::vector<double> scores[2];
  std::vector<int> labels[2];
  for (const auto& [id, rec] : expected) {
    const int t = rec->track == Track::kClean ? 0 : 1;
    scores[t].push_back(by_id.at(id));
    labels[t].push_back(rec->label);
    TrackCounts& c = t == 0 ? report.clean : report.robust;
    ++c.total;
    (rec->label == 1 ? c.positives : c.negatives) += 1;
  }
  auto auc_or_undefined = [](const std::vector<double>& s, const std::vector<int>& l,
                             const TrackCounts& c) -> std::optional<double> {
    if (c.positives == 0 || c.negatives == 0) return std::nullopt;
    return roc_auc(s, l);
  };
  report.clean_auc = auc_or_undefined(scores[0], labels[0], report.clean);
  report.robust_auc = auc_or_undefined(scores[1], labels[1], report.robust);
  if (report.clean_auc && report.robust_auc) report.combined = combined_score(*report.robust_auc, *report.clean_auc);
  return report;
}

// ---------------------------------------------------------------------------

namespace {

void check_distribution(std::span<const double> p, const char* what, bool strictly_positive) {
  if (p.empty()) throw DomainError(std::string(what) + ": empty distribution");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0 || (strictly_positive && v == 0.0)) {
      throw DomainError(std::string(what) + ": probabilities must be finite and " +
                        (strictly_positive ? "positive" : "non-negative"));
    }
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw DomainError(std::string(what) + ": probabilities must sum to 1");
}

}  // namespace

double cross_entropy(std::span<const double> probs, std::size_t label) {
  check_distribution(probs, "cross_entropy", false);
  if (label >= probs.size()) throw DomainError("cross_entropy: label outside the distribution");
  if (probs[label] <= 0.0) throw DomainError("cross_entropy: zero probability on the true label");
  return -std::log(probs[label]);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("kl_divergence: length mismatch");
  check_distribution(p, "kl_divergence(p)", false);
  check_distribution(q, "kl_divergence(q)", false);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) throw DomainError("kl_divergence: q must be positive wherever p is");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double mean_squared_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("mean_squared_error: length mismatch");
  if (a.empty()) throw DomainError("mean_squared_error: empty vectors");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

double lpt_loss(double ce, double kl, double mse, LptWeights weights) {
  return ce + weights.alpha * kl + weights.beta * mse;
}

bool Psnr::identical() const { return std::isinf(db) && db > 0; }

Psnr psnr(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_size(b)) throw SizingError("psnr: dimension mismatch");
  const auto da = a.data();
  const auto db = b.data();
  std::uint64_t sse = 0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const int d = static_cast<int>(da[i]) - static_cast<int>(db[i]);
    sse += static_cast<std::uint64_t>(d * d);
  }
  if (sse == 0) return {std::numeric_limits<double>::infinity()};
  const double mse = static_cast<double>(sse) / static_cast<double>(da.size());
  return {10.0 * std::log10(255.0 * 255.0 / mse)};
}

}  // namespace wilddistort

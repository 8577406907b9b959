#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wilddistort/error.hpp"
#include "wilddistort/image.hpp"
#include "wilddistort/pipeline.hpp"

namespace wilddistort {

/// Area under the ROC curve as the Mann-Whitney statistic:
/// (wins + 0.5 * ties) / (n_pos * n_neg) over all (positive, negative) pairs.
/// Computed from midranks with exact integer rank sums. Labels are 0/1.
/// Throws UndefinedMetricError when either class is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Selection metric weighting robust over clean AUC: 0.7 * robust + 0.3 * clean.
double combined_score(double robust_auc, double clean_auc);

struct TrackCounts {
  std::size_t total = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct EvalReport {
  std::optional<double> clean_auc;   ///< nullopt when the track is single-class or empty
  std::optional<double> robust_auc;
  std::optional<double> combined;    ///< defined only when both AUCs are
  TrackCounts clean;
  TrackCounts robust;
  std::size_t skipped_failed = 0;    ///< manifest records with an error entry

  nlohmann::json to_json() const;
  /// Two-line CSV: header then values; undefined metrics are empty fields.
  std::string to_csv() const;
};

struct Prediction {
  std::string image_id;
  double score;
};

/// CSV with header `image_id,score`.
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
std::vector<Prediction> parse_predictions(std::string_view csv_text);

/// Prediction ids that do not line up with the manifest.
class PredictionMismatch : public Error {
 public:
  PredictionMismatch(std::vector<std::string> missing, std::vector<std::string> duplicate,
                     std::vector<std::string> unexpected);

  const std::vector<std::string>& missing() const { return missing_; }
  const std::vector<std::string>& duplicate() const { return duplicate_; }
  const std::vector<std::string>& unexpected() const { return unexpected_; }

 private:
  std::vector<std::string> missing_;
  std::vector<std::string> duplicate_;
  std::vector<std::string> unexpected_;
};

/// Splits predictions by manifest track and computes both AUCs. Records that
/// failed during the batch run are skipped. Throws PredictionMismatch.
EvalReport evaluate(const std::vector<ManifestRecord>& manifest, const std::vector<Prediction>& predictions);

// ---------------------------------------------------------------------------
// Loss components of the pairwise clean/distorted training objective.

/// -log p[label]. p must be a distribution with p[label] > 0.
double cross_entropy(std::span<const double> probs, std::size_t label);

/// sum p log(p / q), with 0 log 0 = 0; q must be positive wherever p is.
double kl_divergence(std::span<const double> p, std::span<const double> q);

double mean_squared_error(std::span<const double> a, std::span<const double> b);

struct LptWeights {
  double alpha = 0.5;  ///< KL weight
  double beta = 0.25;  ///< MSE weight
};

/// ce + alpha * kl + beta * mse.
double lpt_loss(double ce, double kl, double mse, LptWeights weights = {});

// ---------------------------------------------------------------------------

struct Psnr {
  double db;  ///< +infinity for identical images
  bool identical() const;
};

Psnr psnr(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace wilddistort

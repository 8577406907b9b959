#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wilddistort/csv.hpp"
#include "wilddistort/fusion.hpp"
#include "wilddistort/metrics.hpp"

namespace wilddistort::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kPartial = 2 };

/// Default global seed when --seed is not given.
inline constexpr std::uint64_t kDefaultSeed = 2026;

/// Column-to-role mapping for `fuse`, loaded from JSON:
///
///     {"scheme": "rapid",   "columns": {"g4": "colA", "siglip": "colB", ...}}
///     {"scheme": "intsig",  "columns": {"M1_logit0": "...", ..., "M5_logit1": "..."},
///                           "gates": true, "gate2_policy": "within_bracket" | "global"}
///     {"scheme": "prism",   "models": [{"p": "a", "p_flipped": "a_flip", "robust_auc": 0.91}, ...]}
///     {"scheme": "average", "columns": ["a", "b"]}
///     {"scheme": "weighted","columns": ["a", "b"], "weights": [2, 1]}
///     {"scheme": "tta",     "columns": ["v1", "v2"], "head": "sigmoid" | "softmax"}
///
/// Without "columns", rapid and intsig read columns named after their roles
/// and the list schemes use every column except image_id. The intsig score is
/// the fused diff logit1 - logit0.
struct FuseConfig {
  std::string scheme;
  std::vector<std::pair<std::string, std::string>> roles;  ///< role -> column (rapid, intsig)
  std::vector<std::string> columns;                         ///< average, weighted, tta
  std::vector<double> weights;                              ///< weighted
  fusion::HeadType head = fusion::HeadType::kSigmoid;
  std::vector<std::pair<std::string, std::string>> prism_columns;  ///< (p, p_flipped) per model
  std::vector<double> prism_aucs;
  fusion::IntsigOptions intsig;

  /// Throws ConfigError for unknown schemes or keys.
  static FuseConfig from_json(const nlohmann::json& doc);
  /// Default mapping for a bare scheme name.
  static FuseConfig for_scheme(const std::string& scheme);
  nlohmann::json to_json() const;
};

/// Raised when the scores table lacks a column the config needs.
class MissingColumnError : public ConfigError {
 public:
  explicit MissingColumnError(std::string column);
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

/// One fused score per row, in input order. Throws MissingColumnError,
/// ConfigError for unparsable cells.
std::vector<Prediction> fuse_table(const CsvTable& scores, const FuseConfig& config);

std::string predictions_csv(const std::vector<Prediction>& predictions);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wilddistort::cli

#pragma once

#include <array>
#include <span>
#include <vector>

namespace wilddistort::fusion {

/// Clamp applied to every probability before it enters logit space.
inline constexpr double kProbabilityEpsilon = 1e-7;

/// Probability clamped to [eps, 1 - eps] so its logit is finite.
class Probability {
 public:
  explicit Probability(double p);
  double value() const { return value_; }
  operator double() const { return value_; }

 private:
  double value_;
};

double logit(Probability p);
inline double logit(double p) { return logit(Probability(p)); }
double sigmoid(double x);

// ---------------------------------------------------------------------------
// Four-stage logit-space cascade.
//
//   s1a = sigmoid(0.50 L(g4) + 0.35 L(siglip) + 0.15 L(srm))
//   b   = sigmoid(0.80 L(s1a) + 0.20 L(eva02))
//   s2  = sigmoid(0.85 L(b) + 0.15 L(eva02_fixed))
//   f   = sigmoid(0.89 L(s2) + 0.11 L(g4v2))

struct RapidScores {
  double g4;
  double siglip;
  double srm;
  double eva02;
  double eva02_fixed;
  double g4v2;
};

struct RapidStages {
  double s1a;
  double b;
  double s2;
  double f;
};

struct RapidCoefficients {
  std::array<double, 3> stage1{0.50, 0.35, 0.15};
  std::array<double, 2> stage2{0.80, 0.20};
  std::array<double, 2> stage3{0.85, 0.15};
  std::array<double, 2> stage4{0.89, 0.11};
};

RapidStages rapid_cascade_stages(const RapidScores& s);
double rapid_cascade(const RapidScores& s);

// ---------------------------------------------------------------------------
// Weighted hierarchical fusion of five two-class models with dual gating.
//
//   final = 0.7 [0.7 (0.75 M1 + 0.15 M2 + 0.10 M3) + 0.3 M4] + 0.3 M5
//
// applied componentwise to (logit0, logit1). With gates enabled:
//
//   1. Exclusion gate: if at least three of {M1, M2, M3, M5} share a nonzero
//      diff sign and M4's sign differs, M4 is dropped and its mass is
//      renormalized (see Gate2Policy).
//   2. Consensus gate, on the result of step 1: if |diff(M4)| >= 8,
//      |diff(M5)| >= 3, sign(diff(M4)) == sign(diff(M5)) != 0 and the fused
//      diff does not have that sign, logit1 is shifted by 2.5 * sign(diff(M4)).
//
// diff = logit1 - logit0 throughout.

struct TwoClassLogits {
  double logit0;
  double logit1;

  double diff() const { return logit1 - logit0; }
  friend bool operator==(const TwoClassLogits&, const TwoClassLogits&) = default;
};

using IntsigScores = std::array<TwoClassLogits, 5>;  // M1..M5

/// Flattened model weights (M1..M5): 0.3675, 0.0735, 0.0490, 0.2100, 0.3000.
std::array<double, 5> intsig_flat_weights();

enum class Gate2Policy {
  /// M4's 0.3 share of the middle bracket goes to the inner committee, which
  /// then carries the whole bracket: 0.7 (0.75 M1 + 0.15 M2 + 0.1 M3) + 0.3 M5.
  kWithinBracket,
  /// Remaining flattened weights divided by their sum (1 - 0.21).
  kGlobal,
};

struct IntsigOptions {
  bool gates_enabled = true;
  Gate2Policy gate2_policy = Gate2Policy::kWithinBracket;
  double gate1_m4_threshold = 8.0;
  double gate1_m5_threshold = 3.0;
  double gate1_shift = 2.5;
};

struct IntsigResult {
  TwoClassLogits logits;
  bool gate1_fired = false;
  bool gate2_fired = false;

  double diff() const { return logits.diff(); }
};

bool intsig_gate2_triggered(const IntsigScores& s);
/// Consensus-gate predicate given the fused diff it would correct.
bool intsig_gate1_triggered(const IntsigScores& s, double fused_diff, const IntsigOptions& opt = {});

IntsigResult intsig_fuse(const IntsigScores& s, const IntsigOptions& opt = {});

// ---------------------------------------------------------------------------
// Robust-AUC-weighted ensemble with horizontal-flip averaging.

struct PrismModel {
  double p;           ///< probability on the image
  double p_flipped;   ///< probability on the horizontally flipped image
  double robust_auc;  ///< validation robust AUC, in (0, 1]
};

/// w_k = A_k / sum_j A_j. Throws DomainError for an empty list or a
/// non-positive entry.
std::vector<double> prism_weights(std::span<const double> robust_aucs);

/// 0.5 [sum w_k p_k(x) + sum w_k p_k(flip x)], in probability space.
double prism_predict(std::span<const PrismModel> models);

// ---------------------------------------------------------------------------
// Averaging rules.

/// Arithmetic mean of probabilities. Throws DomainError when empty.
double average_probs(std::span<const double> probs);

enum class HeadType { kSigmoid, kSoftmax };

struct TtaBundle {
  std::vector<double> views;  ///< per-view probability of the fake class
  HeadType head = HeadType::kSigmoid;
};

/// Sigmoid heads: sigmoid(mean of view logits). Softmax heads: mean of view
/// probabilities.
double aggregate_tta(const TtaBundle& bundle);

/// sum w_i s_i / sum w_i. Weights must be non-negative with positive sum.
double weighted_expert_average(std::span<const double> scores, std::span<const double> weights);

}  // namespace wilddistort::fusion

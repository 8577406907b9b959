#include "wilddistort/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "wilddistort/error.hpp"

namespace wilddistort::fusion {

Probability::Probability(double p) {
  if (std::isnan(p)) throw DomainError("probability is NaN");
  value_ = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

double logit(Probability p) { return std::log(p.value() / (1.0 - p.value())); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

RapidStages rapid_cascade_stages(const RapidScores& s) {
  const RapidCoefficients c;
  RapidStages out{};
  out.s1a = sigmoid(c.stage1[0] * logit(s.g4) + c.stage1[1] * logit(s.siglip) + c.stage1[2] * logit(s.srm));
  out.b = sigmoid(c.stage2[0] * logit(out.s1a) + c.stage2[1] * logit(s.eva02));
  out.s2 = sigmoid(c.stage3[0] * logit(out.b) + c.stage3[1] * logit(s.eva02_fixed));
  out.f = sigmoid(c.stage4[0] * logit(out.s2) + c.stage4[1] * logit(s.g4v2));
  return out;
}

double rapid_cascade(const RapidScores& s) { return rapid_cascade_stages(s).f; }

// ---------------------------------------------------------------------------

namespace {

constexpr double kOuter = 0.7;   // middle bracket vs M5
constexpr double kMiddle = 0.7;  // inner committee vs M4
constexpr std::array<double, 3> kInner{0.75, 0.15, 0.10};

int sign(double v) { return (v > 0.0) - (v < 0.0); }

TwoClassLogits weighted_sum(const IntsigScores& s, const std::array<double, 5>& w) {
  TwoClassLogits out{0.0, 0.0};
  for (std::size_t k = 0; k < 5; ++k) {
    out.logit0 += w[k] * s[k].logit0;
    out.logit1 += w[k] * s[k].logit1;
  }
  return out;
}

std::array<double, 5> weights_without_m4(Gate2Policy policy) {
  if (policy == Gate2Policy::kWithinBracket) {
    return {kOuter * kInner[0], kOuter * kInner[1], kOuter * kInner[2], 0.0, 1.0 - kOuter};
  }
  auto w = intsig_flat_weights();
  const double remaining = 1.0 - w[3];
  for (auto& v : w) v /= remaining;
  w[3] = 0.0;
  return w;
}

}  // namespace

std::array<double, 5> intsig_flat_weights() {
  return {kOuter * kMiddle * kInner[0], kOuter * kMiddle * kInner[1], kOuter * kMiddle * kInner[2],
          kOuter * (1.0 - kMiddle), 1.0 - kOuter};
}

bool intsig_gate2_triggered(const IntsigScores& s) {
  const int m4 = sign(s[3].diff());
  for (int target : {1, -1}) {
    int agree = 0;
    for (std::size_t k : {0, 1, 2, 4}) agree += sign(s[k].diff()) == target ? 1 : 0;
    if (agree >= 3 && m4 != target) return true;
  }
  return false;
}

bool intsig_gate1_triggered(const IntsigScores& s, double fused_diff, const IntsigOptions& opt) {
  const double d4 = s[3].diff();
  const double d5 = s[4].diff();
  if (std::fabs(d4) < opt.gate1_m4_threshold || std::fabs(d5) < opt.gate1_m5_threshold) return false;
  if (sign(d4) == 0 || sign(d4) != sign(d5)) return false;
  return sign(fused_diff) != sign(d4);
}

IntsigResult intsig_fuse(const IntsigScores& s, const IntsigOptions& opt) {
  for (const auto& m : s) {
    if (!std::isfinite(m.logit0) || !std::isfinite(m.logit1)) throw DomainError("intsig_fuse: non-finite logit");
  }
  IntsigResult r;
  if (!opt.gates_enabled) {
    r.logits = weighted_sum(s, intsig_flat_weights());
    return r;
  }
  r.gate2_fired = intsig_gate2_triggered(s);
  r.logits = weighted_sum(s, r.gate2_fired ? weights_without_m4(opt.gate2_policy) : intsig_flat_weights());
  if (intsig_gate1_triggered(s, r.logits.diff(), opt)) {
    r.gate1_fired = true;
    r.logits.logit1 += opt.gate1_shift * sign(s[3].diff());
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> prism_weights(std::span<const double> robust_aucs) {
  if (robust_aucs.empty()) throw DomainError("prism_weights: empty model list");
  double sum = 0.0;
  for (double a : robust_aucs) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("prism_weights: robust AUCs must be positive");
    sum += a;
  }
  std::vector<double> w(robust_aucs.begin(), robust_aucs.end());
  for (auto& v : w) v /= sum;
  return w;
}

double prism_predict(std::span<const PrismModel> models) {
  if (models.empty()) throw DomainError("prism_predict: empty model list");
  std::vector<double> aucs;
  aucs.reserve(models.size());
  for (const auto& m : models) {
    if (!(m.robust_auc > 0.0 && m.robust_auc <= 1.0)) throw DomainError("prism_predict: robust AUC outside (0, 1]");
    aucs.push_back(m.robust_auc);
  }
  const auto w = prism_weights(aucs);
  double plain = 0.0;
  double flipped = 0.0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    plain += w[k] * models[k].p;
    flipped += w[k] * models[k].p_flipped;
  }
  return 0.5 * (plain + flipped);
}

double average_probs(std::span<const double> probs) {
  if (probs.empty()) throw DomainError("average_probs: empty list");
  double sum = 0.0;
  for (double p : probs) sum += p;
  return sum / static_cast<double>(probs.size());
}

double aggregate_tta(const TtaBundle& bundle) {
  if (bundle.views.empty()) throw DomainError("aggregate_tta: empty bundle");
  if (bundle.head == HeadType::kSoftmax) return average_probs(bundle.views);
  double sum = 0.0;
  for (double v : bundle.views) sum += logit(v);
  return sigmoid(sum / static_cast<double>(bundle.views.size()));
}

double weighted_expert_average(std::span<const double> scores, std::span<const double> weights) {
  if (scores.size() != weights.size()) throw DomainError("weighted_expert_average: length mismatch");
  if (scores.empty()) throw DomainError("weighted_expert_average: no experts");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw DomainError("weighted_expert_average: negative weight");
    num += weights[i] * scores[i];
    den += weights[i];
  }
  if (!(den > 0.0)) throw DomainError("weighted_expert_average: zero weight mass");
  return num / den;
}

}  // namespace wilddistort::fusion

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wilddistort/image.hpp"

namespace oracle {

/// O(n^2) Mann-Whitney: (wins + ties / 2) / (n_pos * n_neg).
inline double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
  long double wins = 0;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) ++pos; else ++neg;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5L;
    }
  }
  return static_cast<double>(wins / (static_cast<long double>(pos) * neg));
}

inline int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

/// Direct 2-D correlation with reflect-101 borders, in double precision.
inline std::vector<double> dense_correlate(const wilddistort::FloatPlane& p, const std::vector<double>& k2d,
                                           int radius) {
  const int size = 2 * radius + 1;
  std::vector<double> out(p.data.size());
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      double acc = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          acc += k2d[(dy + radius) * size + dx + radius] * p.at(reflect(x + dx, p.width), reflect(y + dy, p.height));
        }
      }
      out[static_cast<std::size_t>(y) * p.width + x] = acc;
    }
  }
  return out;
}

/// Four-stage cascade in long double, written out independently.
struct RapidLong {
  long double s1a, b, s2, f;
};

inline long double logit_l(long double p) {
  const long double eps = 1e-7L;
  p = p < eps ? eps : (p > 1 - eps ? 1 - eps : p);
  return std::log(p / (1 - p));
}
inline long double sigmoid_l(long double x) { return 1 / (1 + std::exp(-x)); }

inline RapidLong rapid_long(long double g4, long double si, long double srm, long double e, long double ef,
                            long double g2) {
  RapidLong r;
  r.s1a = sigmoid_l(0.50L * logit_l(g4) + 0.35L * logit_l(si) + 0.15L * logit_l(srm));
  r.b = sigmoid_l(0.80L * logit_l(r.s1a) + 0.20L * logit_l(e));
  r.s2 = sigmoid_l(0.85L * logit_l(r.b) + 0.15L * logit_l(ef));
  r.f = sigmoid_l(0.89L * logit_l(r.s2) + 0.11L * logit_l(g2));
  return r;
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "amsf/error.hpp"

namespace amsf {

/// n / sum(1 / v_i). Any non-positive value makes the result 0, which reads
/// as total imbalance.
inline double harmonic_mean(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("harmonic_mean: empty list");
  // Equal values: n / (n / a) need not round back to a.
  if (values.front() > 0.0 &&
      std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    return values.front();
  }
  double inv = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) return 0.0;
    inv += 1.0 / v;
  }
  return static_cast<double>(values.size()) / inv;
}

struct BalanceReport {
  std::vector<double> per_style_alignment;
  double harmonic_mean = 0.0;
  std::optional<std::size_t> dominant_style;  // zero-based
};

// A style dominates when it leads the runner-up by more than `dominance_margin`.
inline BalanceReport balance_report(const std::vector<double>& alignments, double dominance_margin) {
  if (alignments.empty()) throw ConfigError("balance_report: empty list");
  if (!(dominance_margin >= 0.0)) throw ConfigError("balance_report: dominance_margin must be >= 0");
  BalanceReport r;
  r.per_style_alignment = alignments;
  r.harmonic_mean = harmonic_mean(alignments);
  if (alignments.size() >= 2) {
    const auto best = std::max_element(alignments.begin(), alignments.end());
    double second = -std::numeric_limits<double>::infinity();
    for (auto it = alignments.begin(); it != alignments.end(); ++it)
      if (it != best) second = std::max(second, *it);
    if (*best - second > dominance_margin) {
      r.dominant_style = static_cast<std::size_t>(best - alignments.begin());
    }
  }
  return r;
}

}  // namespace amsf

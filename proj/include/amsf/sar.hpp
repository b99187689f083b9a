#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "amsf/embedding.hpp"
#include "amsf/error.hpp"
#include "amsf/numerics.hpp"

namespace amsf {

/// Hyper-parameters of similarity-aware re-weighting.
struct SarConfig {
  double kappa = 4.0;
  double gamma_min = 1.0;
  double gamma_max = 5.0;
  double delta = 1e-8;
  // Share of attention reserved for the subject. Unset means 1 / (n + 1).
  std::optional<double> subject_fraction;

  double subject_fraction_for(std::size_t style_count) const {
    return subject_fraction.value_or(1.0 / static_cast<double>(style_count + 1));
  }

  void validate() const {
    if (!(gamma_min <= gamma_max)) throw ConfigError("sar.gamma_min must be <= sar.gamma_max");
    if (!(kappa >= 0.0)) throw ConfigError("sar.kappa must be >= 0");
    if (!(delta > 0.0)) throw ConfigError("sar.delta must be > 0");
    if (subject_fraction && !(*subject_fraction > 0.0 && *subject_fraction < 1.0)) {
      throw ConfigError("sar.subject_fraction must lie in (0, 1)");
    }
  }
};

struct SimilarityStats {
  double sigma = 0.0;  // global: mean latent vs style vector
  double tau = 0.0;    // token-level: average per-position similarity
};

/// Per-step record of every intermediate quantity.
struct SarState {
  std::vector<double> sigma;
  std::vector<double> tau;
  double gamma_auto = 1.0;
  std::vector<double> scores;
  std::vector<double> weights;
  double subject_weight = 0.0;

  std::size_t style_count() const noexcept { return weights.size(); }

  friend bool operator==(const SarState&, const SarState&) = default;
};

inline SimilarityStats similarity_stats(const Matrix& x, const Vector& s) {
  if (x.cols() != s.size()) {
    throw DimensionError("similarity_stats: latent has " + std::to_string(x.cols()) +
                         " channels, style vector has " + std::to_string(s.size()));
  }
  SimilarityStats out;
  out.sigma = cosine_sim(row_mean(x), s);
  double acc = 0.0;
  for (std::size_t j = 0; j < x.rows(); ++j) acc += cosine_sim(x.row(j), s);
  out.tau = acc / static_cast<double>(x.rows());
  return out;
}

/// Damping exponent from the similarity gaps between styles. For more than
/// two styles the largest pairwise gaps are used; a single style gets
/// gamma_min.
inline double gamma_auto(const std::vector<SimilarityStats>& stats, const SarConfig& cfg) {
  if (stats.size() < 2) return cfg.gamma_min;
  double sigma_gap = 0.0;
  double tau_gap = 0.0;
  for (std::size_t a = 0; a < stats.size(); ++a) {
    for (std::size_t b = a + 1; b < stats.size(); ++b) {
      sigma_gap = std::max(sigma_gap, std::abs(stats[a].sigma - stats[b].sigma));
      tau_gap = std::max(tau_gap, std::abs(stats[a].tau - stats[b].tau));
    }
  }
  return std::clamp(1.0 + cfg.kappa * sigma_gap + tau_gap, cfg.gamma_min, cfg.gamma_max);
}

/// (1 + sigma)(1 + tau) / (1 + |s|^gamma)
inline double style_score(double sigma, double tau, double s_norm, double gamma) {
  return (1.0 + sigma) * (1.0 + tau) / (1.0 + std::pow(s_norm, gamma));
}

struct NormalizedWeights {
  std::vector<double> style_weights;
  double subject_weight = 0.0;
};

/// Normalized score ratios, rescaled so the styles share 1 - subject_fraction
/// and the whole vector sums to one. All-zero scores split the style budget
/// equally.
inline NormalizedWeights normalize_weights(const std::vector<double>& scores, const SarConfig& cfg) {
  NormalizedWeights out;
  const std::size_t n = scores.size();
  if (n == 0) throw ConfigError("normalize_weights: no styles");
  out.subject_weight = cfg.subject_fraction_for(n);
  const double budget = 1.0 - out.subject_weight;

  double total = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0)) throw NumericError("normalize_weights: negative or NaN score");
    total += s;
  }
  std::vector<double> raw(n);
  double raw_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = scores[i] / (total + cfg.delta);
    raw_total += raw[i];
  }
  out.style_weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.style_weights[i] =
        raw_total > 0.0 ? budget * raw[i] / raw_total : budget / static_cast<double>(n);
  }
  return out;
}

/// One re-weighting step: similarity statistics against the current latent,
/// damping exponent, per-style scores, then normalized weights.
inline SarState sar_step(const Matrix& x, const std::vector<StyleReference>& styles,
                         const SarConfig& cfg) {
  if (styles.empty()) throw ConfigError("sar_step: no styles");
  SarState st;
  std::vector<SimilarityStats> stats;
  stats.reserve(styles.size());
  for (const auto& s : styles) {
    stats.push_back(similarity_stats(x, s.pooled));
    st.sigma.push_back(stats.back().sigma);
    st.tau.push_back(stats.back().tau);
  }
  st.gamma_auto = gamma_auto(stats, cfg);
  for (std::size_t i = 0; i < styles.size(); ++i) {
    st.scores.push_back(style_score(st.sigma[i], st.tau[i], norm(styles[i].pooled), st.gamma_auto));
  }
  auto w = normalize_weights(st.scores, cfg);
  st.weights = std::move(w.style_weights);
  st.subject_weight = w.subject_weight;
  return st;
}

}  // namespace amsf

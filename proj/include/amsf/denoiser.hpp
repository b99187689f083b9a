#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "amsf/attention.hpp"
#include "amsf/decomposition.hpp"
#include "amsf/embedding.hpp"
#include "amsf/error.hpp"
#include "amsf/numerics.hpp"
#include "amsf/random.hpp"
#include "amsf/sar.hpp"

namespace amsf {

enum class WeightMode { fixed_equal, sar_adaptive, manual };

inline std::string_view to_string(WeightMode m) {
  switch (m) {
    case WeightMode::fixed_equal: return "fixed_equal";
    case WeightMode::sar_adaptive: return "sar_adaptive";
    case WeightMode::manual: break;
  }
  return "manual";
}

inline WeightMode parse_weight_mode(std::string_view s) {
  if (s == "fixed_equal") return WeightMode::fixed_equal;
  if (s == "sar_adaptive") return WeightMode::sar_adaptive;
  if (s == "manual") return WeightMode::manual;
  throw ConfigError("denoise.weight_mode: unknown value '" + std::string(s) + "'");
}

struct DenoiseConfig {
  std::size_t steps = 30;
  std::size_t latent_rows = 64;
  std::size_t dim = 32;
  double step_size = 0.3;
  std::uint64_t seed = 0;
  SarConfig sar;
  WeightMode weight_mode = WeightMode::sar_adaptive;
  // manual mode: w_1..w_n followed by the subject weight
  std::vector<double> manual_weights;

  void validate() const {
    if (latent_rows == 0) throw ConfigError("denoise.latent_rows must be >= 1");
    if (dim < 2) throw ConfigError("denoise.dim must be >= 2");
    if (!(step_size > 0.0 && step_size <= 1.0)) throw ConfigError("denoise.step_size must lie in (0, 1]");
    for (double w : manual_weights)
      if (!(w >= 0.0)) throw ConfigError("denoise.manual_weights must be >= 0");
    sar.validate();
  }
};

struct StepRecord {
  std::size_t step = 0;  // 1-based
  SarState sar;
  Vector latent_pool;  // row mean of the latent after this step's update
};

struct TrajectoryLog {
  std::vector<StepRecord> records;
  Matrix initial_latent;
  Matrix final_latent;
};

inline Matrix initial_latent(const DenoiseConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "latent"));
  Matrix x(cfg.latent_rows, cfg.dim);
  for (double& v : x.data()) v = rng.normal();
  return x;
}

inline AttentionParams attention_params(const DenoiseConfig& cfg) {
  return AttentionParams::seeded(cfg.dim, derive_seed(cfg.seed, "attention"));
}

namespace detail {

inline void override_weights(SarState& st, const DenoiseConfig& cfg) {
  const std::size_t n = st.style_count();
  if (cfg.weight_mode == WeightMode::fixed_equal) {
    const double w = 1.0 / static_cast<double>(n + 1);
    st.weights.assign(n, w);
    st.subject_weight = w;
    return;
  }
  if (cfg.manual_weights.size() != n + 1) {
    throw ConfigError("denoise.manual_weights: expected " + std::to_string(n + 1) +
                      " values (one per style plus subject), got " +
                      std::to_string(cfg.manual_weights.size()));
  }
  const double total = std::accumulate(cfg.manual_weights.begin(), cfg.manual_weights.end(), 0.0);
  if (!(total > 0.0)) throw ConfigError("denoise.manual_weights must not all be zero");
  for (std::size_t i = 0; i < n; ++i) st.weights[i] = cfg.manual_weights[i] / total;
  st.subject_weight = cfg.manual_weights[n] / total;
}

}  // namespace detail

/// Toy reverse process. Each step measures SAR statistics on the current
/// latent, attends to the fused context with the resulting weights, then
/// moves the latent toward the attention output:
///   x <- (1 - step_size) x + step_size * cross_attend(x)
inline TrajectoryLog run(const FusedContext& ctx, const std::vector<StyleReference>& styles,
                         const DenoiseConfig& cfg) {
  cfg.validate();
  if (styles.size() != ctx.style_count) {
    throw DimensionError("denoiser: context built for " + std::to_string(ctx.style_count) +
                         " styles, got " + std::to_string(styles.size()));
  }
  if (ctx.z.cols() != cfg.dim) {
    throw DimensionError("denoiser: context dim " + std::to_string(ctx.z.cols()) +
                         " != denoise.dim " + std::to_string(cfg.dim));
  }
  for (const auto& s : styles) {
    if (s.dim() != cfg.dim) throw DimensionError("denoiser: style '" + s.name + "' has wrong dim");
  }

  const AttentionParams params = attention_params(cfg);
  TrajectoryLog log;
  log.initial_latent = initial_latent(cfg);
  Matrix x = log.initial_latent;
  log.records.reserve(cfg.steps);

  for (std::size_t t = 1; t <= cfg.steps; ++t) {
    SarState st = sar_step(x, styles, cfg.sar);
    if (cfg.weight_mode != WeightMode::sar_adaptive) detail::override_weights(st, cfg);

    const Matrix a = cross_attend(x, ctx, component_weights(ctx, st.weights, st.subject_weight), params);
    x = scaled(std::move(x), 1.0 - cfg.step_size);
    axpy(x, cfg.step_size, a);
    if (!x.all_finite()) {
      throw NumericError("denoiser: non-finite latent at step " + std::to_string(t));
    }
    log.records.push_back({t, std::move(st), row_mean(x)});
  }
  log.final_latent = std::move(x);
  return log;
}

/// cos(row_mean(final latent), s_i) for every style.
inline std::vector<double> final_alignment(const TrajectoryLog& log,
                                           const std::vector<StyleReference>& styles) {
  const Vector pooled = row_mean(log.final_latent);
  std::vector<double> out;
  out.reserve(styles.size());
  for (const auto& s : styles) out.push_back(cosine_sim(pooled, s.pooled));
  return out;
}

}  // namespace amsf

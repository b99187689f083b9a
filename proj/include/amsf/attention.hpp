#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amsf/decomposition.hpp"
#include "amsf/error.hpp"
#include "amsf/numerics.hpp"
#include "amsf/random.hpp"

namespace amsf {

enum class ValueProjection {
  identity,  // values stay in embedding space, so latent/style cosines are meaningful
  random,    // same scaled-uniform init as the query and key projections
};

/// Shared query/key/value projections for every component stream.
struct AttentionParams {
  Matrix w_q;
  Matrix w_k;
  Matrix w_v;
  std::uint64_t seed = 0;

  // Query and key entries are uniform in [-1/sqrt(C), 1/sqrt(C)].
  static AttentionParams seeded(std::size_t dim, std::uint64_t seed,
                                ValueProjection value = ValueProjection::identity) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    auto fill = [&](std::string_view tag) {
      Rng rng(derive_seed(seed, tag));
      Matrix m(dim, dim);
      for (double& v : m.data()) v = rng.uniform(-bound, bound);
      return m;
    };
    AttentionParams p;
    p.w_q = fill("w_q");
    p.w_k = fill("w_k");
    p.w_v = value == ValueProjection::identity ? Matrix::identity(dim) : fill("w_v");
    p.seed = seed;
    return p;
  }

  std::size_t dim() const noexcept { return w_q.rows(); }
};

using ComponentWeights = std::map<ComponentId, double>;

/// Expands per-style weights into per-segment weights. Each style weight is
/// split evenly between its text and image segments. In a context without a
/// subject segment (naive concatenation) the subject share is spread evenly
/// over the per-style text segments that carry the subject copies.
inline ComponentWeights component_weights(const FusedContext& ctx,
                                          const std::vector<double>& style_weights,
                                          double subject_weight) {
  if (style_weights.size() != ctx.style_count) {
    throw DimensionError("component_weights: " + std::to_string(style_weights.size()) +
                         " style weights for " + std::to_string(ctx.style_count) + " styles");
  }
  const bool subject_segment = has_subject_segment(ctx);
  ComponentWeights out;
  for (const auto& seg : ctx.segments) {
    switch (seg.id.role) {
      case ComponentRole::subject: out[seg.id] = subject_weight; break;
      case ComponentRole::style_text:
        out[seg.id] = 0.5 * style_weights[seg.id.style] +
                      (subject_segment ? 0.0 : subject_weight / static_cast<double>(ctx.style_count));
        break;
      case ComponentRole::style_image: out[seg.id] = 0.5 * style_weights[seg.id.style]; break;
    }
  }
  return out;
}

inline ComponentWeights uniform_component_weights(const FusedContext& ctx) {
  ComponentWeights out;
  const double w = 1.0 / static_cast<double>(ctx.segments.size());
  for (const auto& seg : ctx.segments) out[seg.id] = w;
  return out;
}

/// Output and attention probabilities of one component stream.
struct ComponentAttention {
  Segment segment;
  Matrix probs;   // HW x segment length, rows sum to one
  Matrix output;  // HW x C
};

/// Runs one cross-attention stream per segment:
/// softmax((x Wq)(Zc Wk)^T / sqrt(C)) (Zc Wv).
inline std::vector<ComponentAttention> component_attention(const Matrix& x, const FusedContext& ctx,
                                                           const AttentionParams& params) {
  const std::size_t c = params.dim();
  if (x.cols() != c || ctx.z.cols() != c) {
    throw DimensionError("cross_attend: latent has " + std::to_string(x.cols()) +
                         " channels, context " + std::to_string(ctx.z.cols()) + ", projections " +
                         std::to_string(c));
  }
  const Matrix q = matmul(x, params.w_q);
  const double scale = 1.0 / std::sqrt(static_cast<double>(c));
  std::vector<ComponentAttention> out;
  out.reserve(ctx.segments.size());
  for (const auto& seg : ctx.segments) {
    const Matrix block = ctx.block(seg);
    const Matrix k = matmul(block, params.w_k);
    const Matrix v = matmul(block, params.w_v);
    Matrix probs = softmax_rows(scaled(matmul(q, k.transposed()), scale));
    Matrix o = matmul(probs, v);
    out.push_back({seg, std::move(probs), std::move(o)});
  }
  return out;
}

inline void validate_weights(const FusedContext& ctx, const ComponentWeights& weights) {
  double total = 0.0;
  for (const auto& seg : ctx.segments) {
    auto it = weights.find(seg.id);
    if (it == weights.end()) throw ConfigError("missing component weight: " + to_string(seg.id));
    if (!(it->second >= 0.0)) throw ConfigError("negative component weight: " + to_string(seg.id));
    total += it->second;
  }
  if (weights.size() != ctx.segments.size()) {
    throw ConfigError("component weights name components absent from the context");
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("component weights sum to " + std::to_string(total) + ", expected 1");
  }
}

/// Weighted sum of the per-component streams. Uniform weights give the plain
/// parallel-and-average aggregation.
inline Matrix cross_attend(const Matrix& x, const FusedContext& ctx, const ComponentWeights& weights,
                           const AttentionParams& params) {
  validate_weights(ctx, weights);
  Matrix out(x.rows(), params.dim());
  for (const auto& stream : component_attention(x, ctx, params)) {
    axpy(out, weights.at(stream.segment.id), stream.output);
  }
  return out;
}

/// Share of the weighted attention that lands on subject-prompt rows,
/// averaged over query positions.
inline double subject_attention_share(const Matrix& x, const FusedContext& ctx,
                                      const ComponentWeights& weights,
                                      const AttentionParams& params) {
  validate_weights(ctx, weights);
  double share = 0.0;
  for (const auto& stream : component_attention(x, ctx, params)) {
    const auto& seg = stream.segment;
    if (seg.subject_rows == 0) continue;
    const std::size_t first = seg.length - seg.subject_rows;
    double mass = 0.0;
    for (std::size_t r = 0; r < stream.probs.rows(); ++r)
      for (std::size_t k = first; k < seg.length; ++k) mass += stream.probs(r, k);
    share += weights.at(seg.id) * mass / static_cast<double>(stream.probs.rows());
  }
  return share;
}

/// Unnormalized attention mass on subject rows when every logit is equal:
/// each key contributes exp(0) = 1, scaled by a common per-component weight.
/// Subject duplication multiplies this by the number of copies.
inline double uniform_subject_attention_mass(const FusedContext& ctx, double component_weight) {
  double mass = 0.0;
  for (const auto& seg : ctx.segments) mass += component_weight * static_cast<double>(seg.subject_rows);
  return mass;
}

}  // namespace amsf

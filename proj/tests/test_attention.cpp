#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "amsf/attention.hpp"

using amsf::ComponentId;
using amsf::ComponentWeights;
using amsf::Matrix;
using amsf::StyleReference;

namespace {

constexpr std::size_t kDim = 8;

StyleReference style(const std::string& name, std::size_t text = 3, std::size_t image = 4) {
  return StyleReference::make(name, amsf::toy_encode_text(name, kDim, text, 1),
                              amsf::toy_encode_image(name, kDim, image, 1));
}

amsf::SubjectPrompt subject(std::size_t tokens = 2) {
  return {"dog", amsf::toy_encode_text("dog", kDim, tokens, 1)};
}

Matrix random_latent(std::uint64_t seed, std::size_t rows = 10) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix x(rows, kDim);
  for (auto& v : x.data()) v = nd(gen);
  return x;
}

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], tol);
}

}  // namespace

TEST(AttentionParams, SeededInit) {
  auto p = amsf::AttentionParams::seeded(kDim, 42, amsf::ValueProjection::random);
  const double bound = 1.0 / std::sqrt(static_cast<double>(kDim));
  for (const Matrix* m : {&p.w_q, &p.w_k, &p.w_v}) {
    EXPECT_EQ(m->rows(), kDim);
    EXPECT_EQ(m->cols(), kDim);
    for (double v : m->data()) {
      EXPECT_GE(v, -bound);
      EXPECT_LE(v, bound);
    }
  }
  EXPECT_NE(p.w_q, p.w_k);
  auto again = amsf::AttentionParams::seeded(kDim, 42, amsf::ValueProjection::random);
  EXPECT_EQ(p.w_q, again.w_q);
  EXPECT_EQ(p.w_v, again.w_v);
  EXPECT_NE(p.w_q, amsf::AttentionParams::seeded(kDim, 43).w_q);
  EXPECT_EQ(amsf::AttentionParams::seeded(kDim, 42).w_v, Matrix::identity(kDim));
}

TEST(CrossAttend, SubjectOnlyWeightsSelectSubjectStream) {
  auto ctx = amsf::assemble({style("a"), style("b")}, subject());
  auto params = amsf::AttentionParams::seeded(kDim, 3, amsf::ValueProjection::random);
  Matrix x = random_latent(1);
  ComponentWeights w;
  for (auto id : ctx.component_ids()) w[id] = 0.0;
  w[ComponentId::subject()] = 1.0;

  const auto streams = amsf::component_attention(x, ctx, params);
  Matrix subject_only;
  for (const auto& s : streams)
    if (s.segment.id == ComponentId::subject()) subject_only = s.output;
  expect_near(amsf::cross_attend(x, ctx, w, params), subject_only, 1e-15);
}

TEST(CrossAttend, SingleTokenSegmentIgnoresQueries) {
  auto ctx = amsf::assemble({style("a", 1, 3)}, subject(1));
  auto params = amsf::AttentionParams::seeded(kDim, 5, amsf::ValueProjection::random);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const auto& s : amsf::component_attention(random_latent(seed), ctx, params)) {
      if (s.segment.length != 1) continue;
      const Matrix expected = amsf::matmul(ctx.block(s.segment), params.w_v);
      for (std::size_t r = 0; r < s.output.rows(); ++r)
        for (std::size_t c = 0; c < kDim; ++c) EXPECT_NEAR(s.output(r, c), expected(0, c), 1e-15);
    }
  }
}

TEST(CrossAttend, UniformWeightsEqualPlainAverage) {
  auto ctx = amsf::assemble({style("a")}, subject());
  ASSERT_EQ(ctx.segments.size(), 3u);
  auto params = amsf::AttentionParams::seeded(kDim, 7);
  Matrix x = random_latent(4);
  const auto streams = amsf::component_attention(x, ctx, params);
  Matrix avg(x.rows(), kDim);
  for (const auto& s : streams) amsf::axpy(avg, 1.0, s.output);
  avg = amsf::scaled(avg, 1.0 / 3.0);
  expect_near(amsf::cross_attend(x, ctx, amsf::uniform_component_weights(ctx), params), avg, 1e-12);
}

TEST(CrossAttend, AttentionRowsSumToOne) {
  auto ctx = amsf::assemble({style("a"), style("b"), style("c")}, subject());
  auto params = amsf::AttentionParams::seeded(kDim, 9);
  for (const auto& s : amsf::component_attention(random_latent(6), ctx, params)) {
    EXPECT_EQ(s.probs.cols(), s.segment.length);
    for (std::size_t r = 0; r < s.probs.rows(); ++r) {
      double sum = 0;
      for (double v : s.probs.row(r)) sum += v;
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(CrossAttend, AffineInWeights) {
  auto ctx = amsf::assemble({style("a"), style("b")}, subject());
  auto params = amsf::AttentionParams::seeded(kDim, 11);
  Matrix x = random_latent(8);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    auto random_weights = [&] {
      ComponentWeights w;
      double total = 0;
      for (auto id : ctx.component_ids()) total += (w[id] = u(gen));
      for (auto& [id, v] : w) v /= total;
      return w;
    };
    const auto a = random_weights();
    const auto b = random_weights();
    const double alpha = u(gen);
    ComponentWeights mix;
    for (auto id : ctx.component_ids()) mix[id] = alpha * a.at(id) + (1 - alpha) * b.at(id);
    Matrix expect = amsf::scaled(amsf::cross_attend(x, ctx, a, params), alpha);
    amsf::axpy(expect, 1 - alpha, amsf::cross_attend(x, ctx, b, params));
    expect_near(amsf::cross_attend(x, ctx, mix, params), expect, 1e-9);
  }
}

TEST(CrossAttend, PermutingStylesWithWeightsLeavesOutputUnchanged) {
  std::vector<StyleReference> styles{style("a"), style("b", 2, 5), style("c", 4, 1)};
  auto subj = subject();
  auto params = amsf::AttentionParams::seeded(kDim, 13);
  Matrix x = random_latent(10);
  std::vector<double> w{0.2, 0.35, 0.15};
  auto base = amsf::assemble(styles, subj);
  const Matrix expect = amsf::cross_attend(x, base, amsf::component_weights(base, w, 0.3), params);

  std::vector<std::size_t> perm{1, 2, 0};
  std::vector<StyleReference> ps;
  std::vector<double> pw;
  for (auto p : perm) {
    ps.push_back(styles[p]);
    pw.push_back(w[p]);
  }
  auto permuted = amsf::assemble(ps, subj);
  expect_near(amsf::cross_attend(x, permuted, amsf::component_weights(permuted, pw, 0.3), params), expect, 1e-9);
}

TEST(CrossAttend, OutputFiniteForLargeInputs) {
  auto ctx = amsf::assemble({style("a"), style("b")}, subject());
  auto params = amsf::AttentionParams::seeded(kDim, 15);
  Matrix x = amsf::scaled(random_latent(12), 1e6);
  EXPECT_TRUE(amsf::cross_attend(x, ctx, amsf::uniform_component_weights(ctx), params).all_finite());
}

TEST(CrossAttend, WeightValidation) {
  auto ctx = amsf::assemble({style("a"), style("b")}, subject());
  auto params = amsf::AttentionParams::seeded(kDim, 1);
  Matrix x = random_latent(1);
  auto w = amsf::uniform_component_weights(ctx);
  w.erase(ComponentId::subject());
  EXPECT_THROW(amsf::cross_attend(x, ctx, w, params), amsf::ConfigError);

  w = amsf::uniform_component_weights(ctx);
  w[ComponentId::style_text(5)] = 0.0;
  EXPECT_THROW(amsf::cross_attend(x, ctx, w, params), amsf::ConfigError);

  w = amsf::uniform_component_weights(ctx);
  w[ComponentId::subject()] += 0.1;
  EXPECT_THROW(amsf::cross_attend(x, ctx, w, params), amsf::ConfigError);

  EXPECT_THROW(amsf::cross_attend(Matrix(3, kDim + 1), ctx, amsf::uniform_component_weights(ctx), params),
               amsf::DimensionError);
}

TEST(ComponentWeights, SplitsStyleWeightAcrossTextAndImage) {
  auto ctx = amsf::assemble({style("a"), style("b")}, subject());
  auto w = amsf::component_weights(ctx, {0.4, 0.2}, 0.4);
  EXPECT_DOUBLE_EQ(w.at(ComponentId::style_text(0)), 0.2);
  EXPECT_DOUBLE_EQ(w.at(ComponentId::style_image(0)), 0.2);
  EXPECT_DOUBLE_EQ(w.at(ComponentId::style_text(1)), 0.1);
  EXPECT_DOUBLE_EQ(w.at(ComponentId::subject()), 0.4);

  auto naive = amsf::assemble_naive_concat({style("a"), style("b")}, subject());
  auto nw = amsf::component_weights(naive, {0.4, 0.2}, 0.4);
  EXPECT_EQ(nw.size(), 4u);
  EXPECT_DOUBLE_EQ(nw.at(ComponentId::style_text(0)), 0.4);
  EXPECT_DOUBLE_EQ(nw.at(ComponentId::style_text(1)), 0.3);
  EXPECT_THROW(amsf::component_weights(ctx, {1.0}, 0.0), amsf::DimensionError);
}

TEST(SubjectAttention, UniformMassScalesWithDuplication) {
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    std::vector<StyleReference> styles;
    for (std::size_t i = 0; i < n; ++i) styles.push_back(style("s" + std::to_string(i)));
    auto dec = amsf::assemble(styles, subject(3));
    auto naive = amsf::assemble_naive_concat(styles, subject(3));
    const double ratio =
        amsf::uniform_subject_attention_mass(naive, 0.25) / amsf::uniform_subject_attention_mass(dec, 0.25);
    EXPECT_NEAR(ratio, static_cast<double>(n), 1e-9);
  }
}

TEST(SubjectAttention, MeasuredShareWithSubjectOnlyWeights) {
  auto ctx = amsf::assemble({style("a"), style("b")}, subject());
  auto params = amsf::AttentionParams::seeded(kDim, 3);
  ComponentWeights w;
  for (auto id : ctx.component_ids()) w[id] = 0.0;
  w[ComponentId::subject()] = 1.0;
  EXPECT_NEAR(amsf::subject_attention_share(random_latent(2), ctx, w, params), 1.0, 1e-12);
  EXPECT_NEAR(amsf::subject_attention_share(random_latent(2), ctx, amsf::uniform_component_weights(ctx), params),
              0.2, 1e-12);
}

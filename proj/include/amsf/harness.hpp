#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "amsf/attention.hpp"
#include "amsf/config.hpp"
#include "amsf/decomposition.hpp"
#include "amsf/denoiser.hpp"
#include "amsf/embedding.hpp"
#include "amsf/error.hpp"
#include "amsf/metrics.hpp"

namespace amsf {

struct ExperimentInputs {
  std::vector<StyleReference> styles;
  SubjectPrompt subject;
};

/// Encodes (or looks up) every style and the subject named by the config.
inline ExperimentInputs build_inputs(const ExperimentConfig& cfg) {
  const std::size_t dim = cfg.denoise.dim;
  std::map<std::string, TokenSequence> records;
  if (!cfg.embedding_file.empty()) {
    for (auto& rec : load_embeddings(cfg.embedding_file)) records[rec.name] = std::move(rec.sequence);
  }
  auto record = [&](const std::string& name, SourceKind kind, const std::string& field) {
    auto it = records.find(name);
    if (it == records.end()) {
      throw ConfigError(field + ": record '" + name + "' not found in " + cfg.embedding_file.string());
    }
    if (it->second.kind != kind) {
      throw ConfigError(field + ": record '" + name + "' is a " + std::string(to_string(it->second.kind)) +
                        " record, expected " + std::string(to_string(kind)));
    }
    if (it->second.dim() != dim) {
      throw ConfigError(field + ": record '" + name + "' has dim " + std::to_string(it->second.dim()) +
                        ", denoise.dim is " + std::to_string(dim));
    }
    return it->second;
  };

  ExperimentInputs in;
  const auto& enc = cfg.encoder;
  for (std::size_t i = 0; i < cfg.styles.size(); ++i) {
    const auto& s = cfg.styles[i];
    const std::string sec = "style." + std::to_string(i + 1);
    TokenSequence text, image;
    if (s.source == InputSource::toy) {
      text = toy_encode_text(s.prompt, dim, enc.text_tokens, enc.seed);
      image = toy_encode_image(s.image, dim, enc.image_tokens, enc.seed);
    } else {
      text = record(s.text_record, SourceKind::text, sec + ".text_record");
      image = record(s.image_record, SourceKind::image, sec + ".image_record");
    }
    auto ref = StyleReference::make(s.name, std::move(text), std::move(image));
    in.styles.push_back(s.scale == 1.0 ? std::move(ref) : scale_reference(ref, s.scale));
  }
  if (cfg.subject.source == InputSource::toy) {
    in.subject = {cfg.subject.prompt, toy_encode_text(cfg.subject.prompt, dim, enc.subject_tokens, enc.seed)};
  } else {
    in.subject = {cfg.subject.record, record(cfg.subject.record, SourceKind::text, "subject.record")};
  }
  return in;
}

// ---------------------------------------------------------------------------
// Trajectory CSV: step, gamma_auto, {sigma_i, tau_i, score_i, w_i}..., subject_w,
// latent_pool_norm. Header row, LF endings, reals as %.17g.
// ---------------------------------------------------------------------------

inline std::string trajectory_csv_header(std::size_t style_count) {
  std::string h = "step,gamma_auto";
  for (std::size_t i = 1; i <= style_count; ++i) {
    const auto k = std::to_string(i);
    h += ",sigma_" + k + ",tau_" + k + ",score_" + k + ",w_" + k;
  }
  h += ",subject_w,latent_pool_norm\n";
  return h;
}

inline std::string trajectory_csv(const TrajectoryLog& log, std::size_t style_count) {
  std::string out = trajectory_csv_header(style_count);
  for (const auto& rec : log.records) {
    out += std::to_string(rec.step);
    out += ',' + format_real(rec.sar.gamma_auto);
    for (std::size_t i = 0; i < style_count; ++i) {
      out += ',' + format_real(rec.sar.sigma[i]);
      out += ',' + format_real(rec.sar.tau[i]);
      out += ',' + format_real(rec.sar.scores[i]);
      out += ',' + format_real(rec.sar.weights[i]);
    }
    out += ',' + format_real(rec.sar.subject_weight);
    out += ',' + format_real(norm(rec.latent_pool));
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct RepeatResult {
  std::uint64_t seed = 0;
  std::vector<double> alignments;
  BalanceReport balance;
  std::vector<double> mean_weights;
  double mean_subject_weight = 0.0;
  TrajectoryLog log;
};

struct ExperimentSummary {
  std::vector<RepeatResult> repeats;
  std::vector<double> mean_alignments;
  BalanceReport balance;  // over mean_alignments
  std::vector<double> mean_weights;
  double mean_subject_weight = 0.0;
  std::vector<std::filesystem::path> files;
};

inline RepeatResult run_repeat(const FusedContext& ctx, const ExperimentInputs& in, DenoiseConfig dcfg,
                               double dominance_margin) {
  RepeatResult r;
  r.seed = dcfg.seed;
  r.log = run(ctx, in.styles, dcfg);
  r.alignments = final_alignment(r.log, in.styles);
  for (double a : r.alignments) {
    if (!std::isfinite(a)) throw NumericError("non-finite alignment for seed " + std::to_string(r.seed));
  }
  r.balance = balance_report(r.alignments, dominance_margin);
  const std::size_t n = in.styles.size();
  r.mean_weights.assign(n, 0.0);
  for (const auto& rec : r.log.records) {
    for (std::size_t i = 0; i < n; ++i) r.mean_weights[i] += rec.sar.weights[i];
    r.mean_subject_weight += rec.sar.subject_weight;
  }
  if (!r.log.records.empty()) {
    const double inv = 1.0 / static_cast<double>(r.log.records.size());
    for (double& w : r.mean_weights) w *= inv;
    r.mean_subject_weight *= inv;
  }
  return r;
}

// Runs every repeat concurrently; results come back in repeat order.
inline std::vector<RepeatResult> run_repeats(const FusedContext& ctx, const ExperimentInputs& in,
                                             const ExperimentConfig& cfg) {
  std::vector<std::future<RepeatResult>> jobs;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    DenoiseConfig d = cfg.denoise;
    d.seed = cfg.denoise.seed + r;
    jobs.push_back(std::async(std::launch::async, [&ctx, &in, d, m = cfg.dominance_margin] {
      return run_repeat(ctx, in, d, m);
    }));
  }
  std::vector<RepeatResult> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

inline std::string summary_csv(const ExperimentSummary& s, std::size_t n) {
  std::string out = "repeat,seed";
  for (std::size_t i = 1; i <= n; ++i) out += ",align_" + std::to_string(i);
  out += ",hm";
  for (std::size_t i = 1; i <= n; ++i) out += ",mean_w_" + std::to_string(i);
  out += ",mean_subject_w,dominant_style\n";
  auto row = [&](const std::string& label, const std::string& seed, const std::vector<double>& align,
                 const BalanceReport& b, const std::vector<double>& w, double subj) {
    out += label + ',' + seed;
    for (double a : align) out += ',' + format_real(a);
    out += ',' + format_real(b.harmonic_mean);
    for (double x : w) out += ',' + format_real(x);
    out += ',' + format_real(subj);
    out += ',' + (b.dominant_style ? std::to_string(*b.dominant_style + 1) : std::string("none"));
    out += '\n';
  };
  for (std::size_t r = 0; r < s.repeats.size(); ++r) {
    const auto& rr = s.repeats[r];
    row(std::to_string(r), std::to_string(rr.seed), rr.alignments, rr.balance, rr.mean_weights,
        rr.mean_subject_weight);
  }
  row("mean", "", s.mean_alignments, s.balance, s.mean_weights, s.mean_subject_weight);
  return out;
}

inline ExperimentSummary summarize(std::vector<RepeatResult> repeats, std::size_t n, double margin) {
  ExperimentSummary s;
  s.repeats = std::move(repeats);
  s.mean_alignments.assign(n, 0.0);
  s.mean_weights.assign(n, 0.0);
  const double inv = 1.0 / static_cast<double>(s.repeats.size());
  for (const auto& r : s.repeats) {
    for (std::size_t i = 0; i < n; ++i) {
      s.mean_alignments[i] += inv * r.alignments[i];
      s.mean_weights[i] += inv * r.mean_weights[i];
    }
    s.mean_subject_weight += inv * r.mean_subject_weight;
  }
  s.balance = balance_report(s.mean_alignments, margin);
  return s;
}

/// Runs the decomposed fusion for every repeat (seeds denoise.seed + r) and
/// writes trajectory_r<r>.csv plus summary.csv into cfg.output_dir.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ExperimentInputs in = build_inputs(cfg);
  const FusedContext ctx = assemble(in.styles, in.subject);
  const std::size_t n = in.styles.size();

  ExperimentSummary s = summarize(run_repeats(ctx, in, cfg), n, cfg.dominance_margin);
  for (std::size_t r = 0; r < s.repeats.size(); ++r) {
    auto path = cfg.output_dir / ("trajectory_r" + std::to_string(r) + ".csv");
    write_text_file(path, trajectory_csv(s.repeats[r].log, n));
    s.files.push_back(std::move(path));
  }
  auto path = cfg.output_dir / "summary.csv";
  write_text_file(path, summary_csv(s, n));
  s.files.push_back(std::move(path));
  return s;
}

// ---------------------------------------------------------------------------
// Ablation: {decomposed, naive_concat} x {fixed_equal, sar_adaptive}
// ---------------------------------------------------------------------------

enum class ContextKind { decomposed, naive_concat };

inline std::string_view to_string(ContextKind k) {
  return k == ContextKind::decomposed ? "decomposed" : "naive_concat";
}

struct AblationArm {
  ContextKind context = ContextKind::decomposed;
  WeightMode mode = WeightMode::fixed_equal;
  std::size_t subject_rows = 0;
  double uniform_subject_mass = 0.0;  // unnormalized, unit per-component weight
  double subject_attention_share = 0.0;  // measured at the initial latent, step-1 weights
  ExperimentSummary summary;

  std::string name() const { return std::string(to_string(context)) + "_" + std::string(to_string(mode)); }
};

struct AblationReport {
  std::vector<AblationArm> arms;
  std::vector<std::filesystem::path> files;

  const AblationArm& arm(ContextKind c, WeightMode m) const {
    for (const auto& a : arms)
      if (a.context == c && a.mode == m) return a;
    throw ConfigError("no such ablation arm");
  }
};

inline std::string ablation_csv(const AblationReport& rep, std::size_t n) {
  std::string out = "arm,context,weight_mode,subject_rows,uniform_subject_mass,subject_attention_share";
  for (std::size_t i = 1; i <= n; ++i) out += ",align_" + std::to_string(i);
  out += ",hm";
  for (std::size_t i = 1; i <= n; ++i) out += ",mean_w_" + std::to_string(i);
  out += ",mean_subject_w\n";
  for (const auto& a : rep.arms) {
    out += a.name() + ',' + std::string(to_string(a.context)) + ',' + std::string(to_string(a.mode));
    out += ',' + std::to_string(a.subject_rows);
    out += ',' + format_real(a.uniform_subject_mass);
    out += ',' + format_real(a.subject_attention_share);
    for (double v : a.summary.mean_alignments) out += ',' + format_real(v);
    out += ',' + format_real(a.summary.balance.harmonic_mean);
    for (double v : a.summary.mean_weights) out += ',' + format_real(v);
    out += ',' + format_real(a.summary.mean_subject_weight) + '\n';
  }
  return out;
}

/// Runs the four ablation arms on identical inputs and seeds. Writes
/// ablation.csv and one trajectory per arm and repeat into cfg.output_dir.
inline AblationReport run_ablation_suite(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.styles.size() < 2) throw ConfigError("ablate: at least two styles are required");
  const ExperimentInputs in = build_inputs(cfg);
  const std::size_t n = in.styles.size();
  const FusedContext decomposed = assemble(in.styles, in.subject);
  const FusedContext naive = assemble_naive_concat(in.styles, in.subject);

  AblationReport rep;
  for (ContextKind c : {ContextKind::decomposed, ContextKind::naive_concat}) {
    for (WeightMode m : {WeightMode::fixed_equal, WeightMode::sar_adaptive}) {
      rep.arms.push_back({c, m, 0, 0.0, 0.0, {}});
    }
  }

  std::vector<std::future<void>> jobs;
  for (auto& arm : rep.arms) {
    jobs.push_back(std::async(std::launch::async, [&] {
      const FusedContext& ctx = arm.context == ContextKind::decomposed ? decomposed : naive;
      ExperimentConfig arm_cfg = cfg;
      arm_cfg.denoise.weight_mode = arm.mode;
      arm.subject_rows = ctx.subject_row_count();
      arm.uniform_subject_mass = uniform_subject_attention_mass(ctx, 1.0);
      arm.summary = summarize(run_repeats(ctx, in, arm_cfg), n, cfg.dominance_margin);

      const auto& first = arm.summary.repeats.front();
      if (!first.log.records.empty()) {
        const auto& st = first.log.records.front().sar;
        DenoiseConfig d = cfg.denoise;
        d.seed = first.seed;
        const auto params = attention_params(d);
        arm.subject_attention_share = subject_attention_share(
            first.log.initial_latent, ctx, component_weights(ctx, st.weights, st.subject_weight), params);
      }
    }));
  }
  for (auto& j : jobs) j.get();

  for (const auto& arm : rep.arms) {
    for (std::size_t r = 0; r < arm.summary.repeats.size(); ++r) {
      auto path = cfg.output_dir / ("ablation_" + arm.name() + "_r" + std::to_string(r) + ".csv");
      write_text_file(path, trajectory_csv(arm.summary.repeats[r].log, n));
      rep.files.push_back(std::move(path));
    }
  }
  auto path = cfg.output_dir / "ablation.csv";
  write_text_file(path, ablation_csv(rep, n));
  rep.files.push_back(std::move(path));
  return rep;
}

}  // namespace amsf

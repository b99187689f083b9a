// amsf: command-line front end for fusion experiments and embedding files.
//
//   amsf run --config <path> [--out <dir>] [--seed <n>]
//   amsf ablate --config <path> [--out <dir>]
//   amsf encode --prompt <s> --out <file> [--kind text|image] [--name <s>]
//               [--dim <n>] [--tokens <n>] [--seed <n>]
//   amsf inspect <embedding-file>
//
// Exit codes: 0 success, 1 config error, 2 I/O error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "amsf/amsf.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfig = 1, kIo = 2, kNumeric = 3 };

void print_summary(const amsf::ExperimentSummary& s) {
  std::cout << "alignment:";
  for (double a : s.mean_alignments) std::cout << ' ' << amsf::format_real(a);
  std::cout << "\nhm: " << amsf::format_real(s.balance.harmonic_mean) << '\n';
  std::cout << "dominant: "
            << (s.balance.dominant_style ? std::to_string(*s.balance.dominant_style + 1) : "none") << '\n';
  for (const auto& f : s.files) std::cout << "wrote " << f.string() << '\n';
}

int run_cmd(const std::string& config, const std::optional<std::string>& out,
            const std::optional<std::uint64_t>& seed) {
  auto cfg = amsf::load_config(config);
  if (out) cfg.output_dir = *out;
  if (seed) cfg.denoise.seed = *seed;
  print_summary(amsf::run_experiment(cfg));
  return kOk;
}

int ablate_cmd(const std::string& config, const std::optional<std::string>& out) {
  auto cfg = amsf::load_config(config);
  if (out) cfg.output_dir = *out;
  const auto rep = amsf::run_ablation_suite(cfg);
  for (const auto& a : rep.arms) {
    std::cout << a.name() << ": subject_rows=" << a.subject_rows
              << " hm=" << amsf::format_real(a.summary.balance.harmonic_mean) << '\n';
  }
  std::cout << "wrote " << rep.files.back().string() << '\n';
  return kOk;
}

int encode_cmd(const std::string& prompt, const std::string& out, const std::string& kind,
               std::string name, std::size_t dim, std::size_t tokens, std::int64_t seed) {
  amsf::TokenSequence seq;
  if (kind == "text") {
    seq = amsf::toy_encode_text(prompt, dim, tokens, seed);
  } else if (kind == "image") {
    seq = amsf::toy_encode_image(prompt, dim, tokens, seed);
  } else {
    throw amsf::ConfigError("--kind must be 'text' or 'image'");
  }
  if (name.empty()) name = prompt;
  // Add to an existing file, replacing a record of the same name.
  std::vector<amsf::EmbeddingRecord> records;
  if (std::filesystem::exists(out)) records = amsf::load_embeddings(out);
  std::erase_if(records, [&](const amsf::EmbeddingRecord& r) { return r.name == name; });
  records.push_back({std::move(name), std::move(seq)});
  amsf::write_embeddings(out, records);
  std::cout << "wrote " << out << " (" << records.size() << " records)\n";
  return kOk;
}

int inspect_cmd(const std::string& path) {
  const auto records = amsf::load_embeddings(path);
  std::cout << "records: " << records.size() << '\n';
  for (const auto& r : records) {
    const auto pooled = amsf::row_mean(r.sequence.tokens);
    std::cout << r.name << '\t' << amsf::to_string(r.sequence.kind) << '\t' << r.sequence.size() << 'x'
              << r.sequence.dim() << "\tpooled_norm=" << amsf::format_real(amsf::norm(pooled)) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-style fusion with similarity-aware attention re-weighting"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a fusion experiment");
  run->add_option("--config", config, "Experiment config (INI)")->required();
  run->add_option("--out", out, "Output directory (overrides experiment.output_dir)");
  run->add_option("--seed", seed, "Base denoise seed (overrides denoise.seed)");

  auto* ablate = app.add_subcommand("ablate", "Run the decomposition x weighting ablation");
  ablate->add_option("--config", config, "Experiment config (INI)")->required();
  ablate->add_option("--out", out, "Output directory (overrides experiment.output_dir)");

  std::string prompt, encode_out, kind = "text", name;
  std::size_t dim = 32, tokens = 4;
  std::int64_t encode_seed = 0;
  auto* encode = app.add_subcommand("encode", "Write toy-encoder tokens to an embedding file");
  encode->add_option("--prompt", prompt, "Prompt text (or image id with --kind image)")->required();
  encode->add_option("--out", encode_out, "Output embedding file")->required();
  encode->add_option("--kind", kind, "text or image")->capture_default_str();
  encode->add_option("--name", name, "Record name (defaults to the prompt)");
  encode->add_option("--dim", dim, "Embedding dimension")->capture_default_str();
  encode->add_option("--tokens", tokens, "Tokens per sequence")->capture_default_str();
  encode->add_option("--seed", encode_seed, "Encoder seed")->capture_default_str();

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "List records of an embedding file");
  inspect->add_option("file", inspect_path, "Embedding file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return run_cmd(config, out, seed);
    if (*ablate) return ablate_cmd(config, out);
    if (*encode) return encode_cmd(prompt, encode_out, kind, name, dim, tokens, encode_seed);
    if (*inspect) return inspect_cmd(inspect_path);
  } catch (const amsf::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const amsf::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const amsf::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
  return kConfig;
}

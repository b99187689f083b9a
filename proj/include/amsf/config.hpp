#pragma once

// Experiment configuration in INI syntax (UTF-8, "key = value" under
// [section] headers). Sections:
//
//   [experiment]  output_dir, repeats, embedding_file, dominance_margin
//   [encoder]     text_tokens, image_tokens, subject_tokens, seed
//   [denoise]     steps, latent_rows, dim, step_size, seed, weight_mode,
//                 manual_weights (comma separated; n style weights + subject)
//   [sar]         kappa, gamma_min, gamma_max, delta, subject_fraction
//   [subject]     source (toy | file), prompt, record
//   [style.N]     name, source (toy | file), prompt, image, text_record,
//                 image_record, scale          -- one section per style, N = 1, 2, ...
//
// Empty values mean "unset". Unknown sections or keys are rejected.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "amsf/denoiser.hpp"
#include "amsf/error.hpp"

namespace amsf {

enum class InputSource { toy, file };

struct StyleSpec {
  std::string name;
  InputSource source = InputSource::toy;
  std::string prompt;        // toy: style prompt text
  std::string image;         // toy: image identifier
  std::string text_record;   // file: record names in the embedding file
  std::string image_record;
  double scale = 1.0;        // multiplies every token of the reference

  friend bool operator==(const StyleSpec&, const StyleSpec&) = default;
};

struct SubjectSpec {
  InputSource source = InputSource::toy;
  std::string prompt;
  std::string record;

  friend bool operator==(const SubjectSpec&, const SubjectSpec&) = default;
};

struct EncoderSpec {
  std::size_t text_tokens = 4;
  std::size_t image_tokens = 4;
  std::size_t subject_tokens = 2;
  std::int64_t seed = 0;

  friend bool operator==(const EncoderSpec&, const EncoderSpec&) = default;
};

struct ExperimentConfig {
  std::vector<StyleSpec> styles;
  SubjectSpec subject;
  EncoderSpec encoder;
  DenoiseConfig denoise;
  std::filesystem::path output_dir = "out";
  std::filesystem::path embedding_file;
  std::size_t repeats = 1;
  double dominance_margin = 0.05;

  void validate() const {
    if (styles.empty()) throw ConfigError("style: at least one [style.N] section is required");
    if (repeats < 1) throw ConfigError("experiment.repeats must be >= 1");
    if (!(dominance_margin >= 0.0)) throw ConfigError("experiment.dominance_margin must be >= 0");
    std::set<std::string> names;
    bool needs_file = subject.source == InputSource::file;
    for (std::size_t i = 0; i < styles.size(); ++i) {
      const auto& s = styles[i];
      const std::string sec = "style." + std::to_string(i + 1);
      if (s.name.empty()) throw ConfigError(sec + ".name is required");
      if (!names.insert(s.name).second) throw ConfigError(sec + ".name: duplicate style name '" + s.name + "'");
      if (!(s.scale > 0.0)) throw ConfigError(sec + ".scale must be > 0");
      if (s.source == InputSource::toy) {
        if (s.prompt.empty()) throw ConfigError(sec + ".prompt is required for toy styles");
        if (s.image.empty()) throw ConfigError(sec + ".image is required for toy styles");
      } else {
        needs_file = true;
        if (s.text_record.empty()) throw ConfigError(sec + ".text_record is required for file styles");
        if (s.image_record.empty()) throw ConfigError(sec + ".image_record is required for file styles");
      }
    }
    if (subject.source == InputSource::toy && subject.prompt.empty()) {
      throw ConfigError("subject.prompt is required");
    }
    if (subject.source == InputSource::file && subject.record.empty()) {
      throw ConfigError("subject.record is required for file subjects");
    }
    if (needs_file && embedding_file.empty()) {
      throw ConfigError("experiment.embedding_file is required when any input has source = file");
    }
    if (encoder.text_tokens < 1) throw ConfigError("encoder.text_tokens must be >= 1");
    if (encoder.image_tokens < 1) throw ConfigError("encoder.image_tokens must be >= 1");
    if (encoder.subject_tokens < 1) throw ConfigError("encoder.subject_tokens must be >= 1");
    denoise.validate();
  }
};

inline bool operator==(const SarConfig& a, const SarConfig& b) {
  return a.kappa == b.kappa && a.gamma_min == b.gamma_min && a.gamma_max == b.gamma_max &&
         a.delta == b.delta && a.subject_fraction == b.subject_fraction;
}

inline bool operator==(const DenoiseConfig& a, const DenoiseConfig& b) {
  return a.steps == b.steps && a.latent_rows == b.latent_rows && a.dim == b.dim &&
         a.step_size == b.step_size && a.seed == b.seed && a.sar == b.sar &&
         a.weight_mode == b.weight_mode && a.manual_weights == b.manual_weights;
}

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.styles == b.styles && a.subject == b.subject && a.encoder == b.encoder &&
         a.denoise == b.denoise && a.output_dir == b.output_dir &&
         a.embedding_file == b.embedding_file && a.repeats == b.repeats &&
         a.dominance_margin == b.dominance_margin;
}

// Shortest-exact decimal form ("%.17g") so configs and CSVs round-trip.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

using boost::property_tree::ptree;

class SectionReader {
 public:
  SectionReader(const ptree& section, std::string name) : section_(section), name_(std::move(name)) {}

  // Rejects keys that were never requested.
  void finish() const {
    for (const auto& [key, value] : section_) {
      if (!seen_.count(key)) throw ConfigError(name_ + "." + key + ": unknown key");
    }
  }

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    auto it = section_.find(key);
    if (it == section_.not_found()) return std::nullopt;
    std::string v = it->second.data();
    if (v.empty()) return std::nullopt;
    return v;
  }

  std::string text(const std::string& key, std::string fallback = {}) {
    return raw(key).value_or(std::move(fallback));
  }

  double real(const std::string& key, double fallback) {
    auto v = raw(key);
    return v ? parse_real(*v, key) : fallback;
  }

  std::optional<double> optional_real(const std::string& key) {
    auto v = raw(key);
    if (!v) return std::nullopt;
    return parse_real(*v, key);
  }

  template <typename Int>
  Int integer(const std::string& key, Int fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    Int out{};
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
      throw ConfigError(name_ + "." + key + ": expected an integer, got '" + *v + "'");
    }
    return out;
  }

  std::vector<double> real_list(const std::string& key) {
    std::vector<double> out;
    auto v = raw(key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), key));
    return out;
  }

  InputSource source(const std::string& key) {
    const std::string v = text(key, "toy");
    if (v == "toy") return InputSource::toy;
    if (v == "file") return InputSource::file;
    throw ConfigError(name_ + "." + key + ": expected 'toy' or 'file', got '" + v + "'");
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  double parse_real(const std::string& v, const std::string& key) const {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(name_ + "." + key + ": expected a number, got '" + v + "'");
    }
  }

  const ptree& section_;
  std::string name_;
  std::set<std::string> seen_;
};

inline std::string_view to_string(InputSource s) { return s == InputSource::toy ? "toy" : "file"; }

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  using boost::property_tree::ptree;
  ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  ExperimentConfig cfg;
  const ptree empty;
  auto section = [&](const char* name) -> const ptree& {
    auto it = root.find(name);
    return it == root.not_found() ? empty : it->second;
  };

  {
    detail::SectionReader r(section("experiment"), "experiment");
    cfg.output_dir = r.text("output_dir", "out");
    cfg.embedding_file = r.text("embedding_file");
    cfg.repeats = r.integer<std::size_t>("repeats", 1);
    cfg.dominance_margin = r.real("dominance_margin", 0.05);
    r.finish();
  }
  {
    detail::SectionReader r(section("encoder"), "encoder");
    cfg.encoder.text_tokens = r.integer<std::size_t>("text_tokens", cfg.encoder.text_tokens);
    cfg.encoder.image_tokens = r.integer<std::size_t>("image_tokens", cfg.encoder.image_tokens);
    cfg.encoder.subject_tokens = r.integer<std::size_t>("subject_tokens", cfg.encoder.subject_tokens);
    cfg.encoder.seed = r.integer<std::int64_t>("seed", cfg.encoder.seed);
    r.finish();
  }
  {
    detail::SectionReader r(section("denoise"), "denoise");
    auto& d = cfg.denoise;
    d.steps = r.integer<std::size_t>("steps", d.steps);
    d.latent_rows = r.integer<std::size_t>("latent_rows", d.latent_rows);
    d.dim = r.integer<std::size_t>("dim", d.dim);
    d.step_size = r.real("step_size", d.step_size);
    d.seed = r.integer<std::uint64_t>("seed", d.seed);
    d.weight_mode = parse_weight_mode(r.text("weight_mode", "sar_adaptive"));
    d.manual_weights = r.real_list("manual_weights");
    r.finish();
  }
  {
    detail::SectionReader r(section("sar"), "sar");
    auto& s = cfg.denoise.sar;
    s.kappa = r.real("kappa", s.kappa);
    s.gamma_min = r.real("gamma_min", s.gamma_min);
    s.gamma_max = r.real("gamma_max", s.gamma_max);
    s.delta = r.real("delta", s.delta);
    s.subject_fraction = r.optional_real("subject_fraction");
    r.finish();
  }
  {
    detail::SectionReader r(section("subject"), "subject");
    cfg.subject.source = r.source("source");
    cfg.subject.prompt = r.text("prompt");
    cfg.subject.record = r.text("record");
    r.finish();
  }

  // [style.N] sections, ordered by N.
  std::vector<std::pair<std::size_t, const ptree*>> style_sections;
  for (const auto& [name, child] : root) {
    static const std::set<std::string> known = {"experiment", "encoder", "denoise", "sar", "subject"};
    if (known.count(name)) continue;
    std::size_t index = 0;
    const std::string prefix = "style.";
    if (name.rfind(prefix, 0) != 0 ||
        std::from_chars(name.data() + prefix.size(), name.data() + name.size(), index).ptr !=
            name.data() + name.size() ||
        index == 0) {
      throw ConfigError(name + ": unknown section");
    }
    style_sections.emplace_back(index, &child);
  }
  std::sort(style_sections.begin(), style_sections.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < style_sections.size(); ++i) {
    if (style_sections[i].first != i + 1) {
      throw ConfigError("style." + std::to_string(i + 1) + ": style sections must be numbered 1..n without gaps");
    }
    detail::SectionReader r(*style_sections[i].second, "style." + std::to_string(i + 1));
    StyleSpec s;
    s.name = r.text("name");
    s.source = r.source("source");
    s.prompt = r.text("prompt");
    s.image = r.text("image");
    s.text_record = r.text("text_record");
    s.image_record = r.text("image_record");
    s.scale = r.real("scale", 1.0);
    r.finish();
    cfg.styles.push_back(std::move(s));
  }

  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  return parse_config(in);
}

/// Writes `cfg` in the syntax parse_config reads; parse_config(format_config(c)) == c.
inline std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  out << "[experiment]\n";
  kv("output_dir", cfg.output_dir.string());
  kv("embedding_file", cfg.embedding_file.string());
  kv("repeats", std::to_string(cfg.repeats));
  kv("dominance_margin", format_real(cfg.dominance_margin));

  out << "\n[encoder]\n";
  kv("text_tokens", std::to_string(cfg.encoder.text_tokens));
  kv("image_tokens", std::to_string(cfg.encoder.image_tokens));
  kv("subject_tokens", std::to_string(cfg.encoder.subject_tokens));
  kv("seed", std::to_string(cfg.encoder.seed));

  const auto& d = cfg.denoise;
  out << "\n[denoise]\n";
  kv("steps", std::to_string(d.steps));
  kv("latent_rows", std::to_string(d.latent_rows));
  kv("dim", std::to_string(d.dim));
  kv("step_size", format_real(d.step_size));
  kv("seed", std::to_string(d.seed));
  kv("weight_mode", std::string(to_string(d.weight_mode)));
  std::string manual;
  for (std::size_t i = 0; i < d.manual_weights.size(); ++i) {
    if (i) manual += ", ";
    manual += format_real(d.manual_weights[i]);
  }
  kv("manual_weights", manual);

  out << "\n[sar]\n";
  kv("kappa", format_real(d.sar.kappa));
  kv("gamma_min", format_real(d.sar.gamma_min));
  kv("gamma_max", format_real(d.sar.gamma_max));
  kv("delta", format_real(d.sar.delta));
  kv("subject_fraction", d.sar.subject_fraction ? format_real(*d.sar.subject_fraction) : "");

  out << "\n[subject]\n";
  kv("source", std::string(detail::to_string(cfg.subject.source)));
  kv("prompt", cfg.subject.prompt);
  kv("record", cfg.subject.record);

  for (std::size_t i = 0; i < cfg.styles.size(); ++i) {
    const auto& s = cfg.styles[i];
    out << "\n[style." << i + 1 << "]\n";
    kv("name", s.name);
    kv("source", std::string(detail::to_string(s.source)));
    kv("prompt", s.prompt);
    kv("image", s.image);
    kv("text_record", s.text_record);
    kv("image_record", s.image_record);
    kv("scale", format_real(s.scale));
  }
  return out.str();
}

}  // namespace amsf

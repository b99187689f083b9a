#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "amsf/config.hpp"

namespace fixtures {

inline amsf::ExperimentConfig two_style_config(const std::filesystem::path& out) {
  amsf::ExperimentConfig cfg;
  cfg.output_dir = out;
  cfg.subject.prompt = "dog";
  cfg.styles.push_back({"mosaic", amsf::InputSource::toy, "mosaic style", "mosaic.png", "", "", 1.0});
  cfg.styles.push_back({"watercolor", amsf::InputSource::toy, "watercolor painting", "watercolor.png", "", "", 1.0});
  return cfg;
}

inline amsf::ExperimentConfig three_style_config(const std::filesystem::path& out) {
  auto cfg = two_style_config(out);
  cfg.styles.push_back({"ukiyoe", amsf::InputSource::toy, "ukiyo-e print", "ukiyoe.png", "", "", 1.0});
  return cfg;
}

// Style 1's tokens (and so its pooled vector) scaled by 3.
inline amsf::ExperimentConfig dominance_config(const std::filesystem::path& out) {
  auto cfg = two_style_config(out);
  cfg.styles[0].scale = 3.0;
  return cfg;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("amsf_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace fixtures

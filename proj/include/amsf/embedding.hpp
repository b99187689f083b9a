#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "amsf/error.hpp"
#include "amsf/numerics.hpp"
#include "amsf/random.hpp"

namespace amsf {

enum class SourceKind : std::uint8_t { text = 0, image = 1 };

inline std::string_view to_string(SourceKind kind) {
  return kind == SourceKind::text ? "text" : "image";
}

/// One semantic component: m token rows of dimension D.
struct TokenSequence {
  Matrix tokens;
  SourceKind kind = SourceKind::text;

  std::size_t size() const noexcept { return tokens.rows(); }
  std::size_t dim() const noexcept { return tokens.cols(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Mean over all rows of both sequences. This is the style vector the
/// re-weighting compares latents against; it is deliberately not normalized.
inline Vector pool_reference(const TokenSequence& text_tokens, const TokenSequence& image_tokens) {
  if (text_tokens.dim() != image_tokens.dim()) {
    throw DimensionError("pool_reference: dimension mismatch (" +
                         std::to_string(text_tokens.dim()) + " vs " +
                         std::to_string(image_tokens.dim()) + ")");
  }
  const std::size_t total = text_tokens.size() + image_tokens.size();
  if (total == 0) throw DimensionError("empty input");
  Vector sum(text_tokens.dim(), 0.0);
  for (const auto* seq : {&text_tokens, &image_tokens}) {
    for (std::size_t r = 0; r < seq->size(); ++r) {
      auto row = seq->tokens.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) sum[c] += row[c];
    }
  }
  return scaled(std::move(sum), 1.0 / static_cast<double>(total));
}

struct StyleReference {
  std::string name;
  TokenSequence text_tokens;
  TokenSequence image_tokens;
  Vector pooled;

  static StyleReference make(std::string name, TokenSequence text, TokenSequence image) {
    Vector pooled = pool_reference(text, image);
    return {std::move(name), std::move(text), std::move(image), std::move(pooled)};
  }

  std::size_t dim() const noexcept { return pooled.size(); }

  friend bool operator==(const StyleReference&, const StyleReference&) = default;
};

// Multiplies every token of the reference (and therefore its pooled vector)
// by `factor`.
inline StyleReference scale_reference(const StyleReference& ref, double factor) {
  return StyleReference::make(ref.name,
                              {scaled(ref.text_tokens.tokens, factor), ref.text_tokens.kind},
                              {scaled(ref.image_tokens.tokens, factor), ref.image_tokens.kind});
}

struct SubjectPrompt {
  std::string text;
  TokenSequence tokens;
};

namespace detail {

inline TokenSequence toy_encode(SourceKind kind, std::string_view key, std::size_t dim,
                                std::size_t count, std::int64_t seed) {
  if (key.empty()) {
    throw ConfigError(kind == SourceKind::text ? "toy_encode_text: empty prompt"
                                               : "toy_encode_image: empty image id");
  }
  if (dim < 2) throw ConfigError("toy encoder: dim must be >= 2");
  if (count < 1) throw ConfigError("toy encoder: token count must be >= 1");

  Matrix tokens(count, dim);
  const std::uint64_t base =
      fnv1a_u64(static_cast<std::uint64_t>(seed),
                fnv1a(key, fnv1a_u64(static_cast<std::uint64_t>(kind), 0xcbf29ce484222325ULL)));
  for (std::size_t t = 0; t < count; ++t) {
    Rng rng(fnv1a_u64(t, base));
    auto row = tokens.row(t);
    double n = 0.0;
    while (n == 0.0) {
      for (double& v : row) v = rng.normal();
      n = norm(row);
    }
    for (double& v : row) v /= n;
  }
  return {std::move(tokens), kind};
}

}  // namespace detail

/// Deterministic stand-in for a text encoder. Each row is a unit vector keyed
/// by a stable hash of (prompt, token index, seed).
inline TokenSequence toy_encode_text(std::string_view prompt, std::size_t dim,
                                     std::size_t tokens_per_prompt, std::int64_t seed) {
  return detail::toy_encode(SourceKind::text, prompt, dim, tokens_per_prompt, seed);
}

/// Image counterpart of toy_encode_text. Text and image keys hash into
/// separate streams, so the same string yields different sequences.
inline TokenSequence toy_encode_image(std::string_view image_id, std::size_t dim,
                                      std::size_t tokens_per_image, std::int64_t seed) {
  return detail::toy_encode(SourceKind::image, image_id, dim, tokens_per_image, seed);
}

// ---------------------------------------------------------------------------
// Interchange file
//
//   "AMSFEMB1"            8 bytes magic
//   u32                   record count
//   per record:
//     u16 + bytes         UTF-8 name
//     u8                  kind (0 = text, 1 = image)
//     u32, u32            rows, cols
//     rows*cols f64       row-major payload
//
// All integers and floats are little-endian.
// ---------------------------------------------------------------------------

struct EmbeddingRecord {
  std::string name;
  TokenSequence sequence;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

inline constexpr std::array<char, 8> kEmbeddingMagic = {'A', 'M', 'S', 'F', 'E', 'M', 'B', '1'};

namespace detail {

template <typename UInt>
void put_le(std::ostream& out, UInt value) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xffU);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError(std::string("corrupt record: truncated ") + what);
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<UInt>(v);
}

inline void put_f64(std::ostream& out, double value) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof bits);
  put_le<std::uint64_t>(out, bits);
}

}  // namespace detail

inline void write_embeddings(std::ostream& out, const std::vector<EmbeddingRecord>& records) {
  out.write(kEmbeddingMagic.data(), kEmbeddingMagic.size());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
  for (const auto& rec : records) {
    if (rec.name.size() > 0xffffU) throw ConfigError("record name too long: " + rec.name);
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(rec.name.size()));
    out.write(rec.name.data(), static_cast<std::streamsize>(rec.name.size()));
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(rec.sequence.kind));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.sequence.tokens.rows()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.sequence.tokens.cols()));
    for (double v : rec.sequence.tokens.data()) detail::put_f64(out, v);
  }
  if (!out) throw IoError("failed writing embedding stream");
}

inline void write_embeddings(const std::filesystem::path& path,
                             const std::vector<EmbeddingRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  write_embeddings(out, records);
}

/// Reads every record. Throws FormatError with "not an embedding file",
/// "corrupt record" or "invalid value" for malformed input.
inline std::vector<EmbeddingRecord> load_embeddings(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kEmbeddingMagic) {
    throw FormatError("not an embedding file");
  }
  const auto count = detail::get_le<std::uint32_t>(in, "record count");
  std::vector<EmbeddingRecord> records;
  for (std::uint32_t i = 0; i < count; ++i) {
    EmbeddingRecord rec;
    const auto name_len = detail::get_le<std::uint16_t>(in, "name length");
    rec.name.resize(name_len);
    in.read(rec.name.data(), name_len);
    if (in.gcount() != name_len) throw FormatError("corrupt record: truncated name");
    const auto kind = detail::get_le<std::uint8_t>(in, "kind");
    if (kind > 1) throw FormatError("corrupt record: unknown kind " + std::to_string(kind) + " in '" + rec.name + "'");
    const auto rows = detail::get_le<std::uint32_t>(in, "rows");
    const auto cols = detail::get_le<std::uint32_t>(in, "cols");
    if (rows == 0 || cols == 0) throw FormatError("corrupt record: empty shape in '" + rec.name + "'");
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    std::vector<double> values(n);
    std::vector<unsigned char> raw(n * 8);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw FormatError("corrupt record: '" + rec.name + "' declares " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " but payload is short");
    }
    for (std::size_t k = 0; k < n; ++k) {
      std::uint64_t bits = 0;
      for (std::size_t b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(raw[k * 8 + b]) << (8 * b);
      std::memcpy(&values[k], &bits, sizeof bits);
      if (!std::isfinite(values[k])) {
        throw FormatError("invalid value: non-finite entry in '" + rec.name + "'");
      }
    }
    rec.sequence = {Matrix(rows, cols, std::move(values)), static_cast<SourceKind>(kind)};
    records.push_back(std::move(rec));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("corrupt record: trailing bytes after last record");
  }
  return records;
}

inline std::vector<EmbeddingRecord> load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  try {
    return load_embeddings(in);
  } catch (const FormatError& e) {
    throw FormatError(std::string(e.what()) + " (" + path.string() + ")");
  }
}

}  // namespace amsf

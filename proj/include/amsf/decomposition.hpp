#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "amsf/embedding.hpp"
#include "amsf/error.hpp"
#include "amsf/numerics.hpp"

namespace amsf {

enum class ComponentRole { style_text, subject, style_image };

/// Identifies one token segment of the fused context. `style` is the
/// zero-based reference index; it is 0 and ignored for the subject.
struct ComponentId {
  ComponentRole role = ComponentRole::subject;
  std::size_t style = 0;

  static ComponentId style_text(std::size_t i) { return {ComponentRole::style_text, i}; }
  static ComponentId style_image(std::size_t i) { return {ComponentRole::style_image, i}; }
  static ComponentId subject() { return {ComponentRole::subject, 0}; }

  auto operator<=>(const ComponentId&) const = default;
};

inline std::string to_string(const ComponentId& id) {
  switch (id.role) {
    case ComponentRole::style_text: return "style_text_" + std::to_string(id.style + 1);
    case ComponentRole::style_image: return "style_image_" + std::to_string(id.style + 1);
    case ComponentRole::subject: break;
  }
  return "subject";
}

struct Segment {
  ComponentId id;
  std::size_t start = 0;
  std::size_t length = 0;
  // Rows of this segment that are copies of the subject prompt.
  std::size_t subject_rows = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Stacked token matrix plus the segment layout over its rows.
struct FusedContext {
  Matrix z;
  std::vector<Segment> segments;
  std::size_t style_count = 0;

  std::vector<ComponentId> component_ids() const {
    std::vector<ComponentId> ids;
    ids.reserve(segments.size());
    for (const auto& s : segments) ids.push_back(s.id);
    return ids;
  }

  Matrix block(const Segment& s) const { return z.slice_rows(s.start, s.length); }

  std::size_t subject_row_count() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.subject_rows;
    return n;
  }
};

namespace detail {

inline std::size_t check_inputs(const std::vector<StyleReference>& styles,
                                const SubjectPrompt& subject) {
  if (styles.empty()) throw ConfigError("assemble: style list is empty");
  const std::size_t dim = subject.tokens.dim();
  if (subject.tokens.size() == 0) throw DimensionError("assemble: subject has no tokens");
  for (const auto& s : styles) {
    if (s.text_tokens.dim() != dim || s.image_tokens.dim() != dim) {
      throw DimensionError("assemble: style '" + s.name + "' has dimension " +
                           std::to_string(s.text_tokens.dim()) + "/" +
                           std::to_string(s.image_tokens.dim()) + ", subject has " +
                           std::to_string(dim));
    }
  }
  return dim;
}

class ContextBuilder {
 public:
  void add(ComponentId id, std::vector<const Matrix*> parts, std::size_t subject_rows) {
    std::size_t len = 0;
    for (const auto* p : parts) {
      blocks_.push_back(*p);
      len += p->rows();
    }
    segments_.push_back({id, offset_, len, subject_rows});
    offset_ += len;
  }

  FusedContext finish(std::size_t style_count) && {
    return {Matrix::vstack(blocks_), std::move(segments_), style_count};
  }

 private:
  std::vector<Matrix> blocks_;
  std::vector<Segment> segments_;
  std::size_t offset_ = 0;
};

}  // namespace detail

/// Decomposed context: all style texts in reference order, the subject once,
/// then all style images in reference order. With two styles this is
/// [T1; T2; Ts; I1; I2].
inline FusedContext assemble(const std::vector<StyleReference>& styles,
                             const SubjectPrompt& subject) {
  detail::check_inputs(styles, subject);
  detail::ContextBuilder b;
  for (std::size_t i = 0; i < styles.size(); ++i) {
    b.add(ComponentId::style_text(i), {&styles[i].text_tokens.tokens}, 0);
  }
  b.add(ComponentId::subject(), {&subject.tokens.tokens}, subject.tokens.size());
  for (std::size_t i = 0; i < styles.size(); ++i) {
    b.add(ComponentId::style_image(i), {&styles[i].image_tokens.tokens}, 0);
  }
  return std::move(b).finish(styles.size());
}

/// Naive baseline that mimics concatenating one "<style> <subject>" prompt per
/// reference: each style text segment carries its own copy of the subject
/// tokens, so the subject appears once per style. No separate subject segment.
inline FusedContext assemble_naive_concat(const std::vector<StyleReference>& styles,
                                          const SubjectPrompt& subject) {
  detail::check_inputs(styles, subject);
  detail::ContextBuilder b;
  for (std::size_t i = 0; i < styles.size(); ++i) {
    b.add(ComponentId::style_text(i), {&styles[i].text_tokens.tokens, &subject.tokens.tokens},
          subject.tokens.size());
  }
  for (std::size_t i = 0; i < styles.size(); ++i) {
    b.add(ComponentId::style_image(i), {&styles[i].image_tokens.tokens}, 0);
  }
  return std::move(b).finish(styles.size());
}

inline bool has_subject_segment(const FusedContext& ctx) {
  for (const auto& s : ctx.segments)
    if (s.id.role == ComponentRole::subject) return true;
  return false;
}

}  // namespace amsf

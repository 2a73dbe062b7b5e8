#pragma once

// Instruction templates per task and their seeded rendering.
//
// Placeholders: <image> <expr> <question> <objs> <bsep> <msep>. <image>,
// <bsep> and <msep> are markers and stay in the rendered text; the others are
// replaced by caller bindings. Multi-image tasks (CoSeg, AttCoSeg) write one
// <image> that expands to one marker per input image.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maskseq/codec.hpp"

namespace maskseq {

enum class Task {
  kCaption,
  kVqa,
  kRec,
  kRes,
  kGrec,
  kGres,
  kReg,
  kNlvr,
  kSpotCaption,
  kCoSeg,
  kAttCoSeg,
  kPqa,
  kBqa,
};

inline constexpr std::string_view kImageMarker = "<image>";

/// Lower-case names: caption, vqa, rec, res, grec, gres, reg, nlvr,
/// spot_caption, coseg, attcoseg, pqa, bqa.
std::string_view to_string(Task task);
Task parse_task(std::string_view name);
std::span<const Task> all_tasks();

/// Tasks whose answer follows the grounding grammar.
bool is_grounding_task(Task task);
ExpectKind grounding_kind(Task task);
/// Tasks whose <image> expands to the number of input images.
bool is_multi_image_task(Task task);

struct PlaceholderRule {
  std::vector<std::string> required;  // substitutable names, without brackets
  std::vector<std::string> allowed;   // required + optional + markers
  /// Exact number of <image> markers a template must contain.
  std::size_t image_markers = 1;
};

const PlaceholderRule& placeholder_rule(Task task);

/// Placeholder names in order of appearance (duplicates kept), e.g.
/// {"expr", "image"}. Only lower-case names in angle brackets count.
std::vector<std::string> placeholders_in(std::string_view text);

std::size_t count_image_markers(std::string_view text);

/// Values for <expr>, <question>, <objs>, keyed without brackets.
using Bindings = std::map<std::string, std::string, std::less<>>;

class TemplateRegistry {
 public:
  static constexpr std::string_view kVersion = "templates/v1";

  /// Built-in set, 2-4 per task.
  static const TemplateRegistry& builtin();

  /// Throws Error(kInvalidArgument) naming the offending placeholder when a
  /// text uses one that is unknown or illegal for the task, misses a
  /// required one, or has the wrong number of <image> markers.
  void register_templates(Task task, std::span<const std::string> texts);
  void register_template(Task task, std::string text);

  /// Throws Error(kInvalidArgument) when the task has no templates.
  const std::vector<std::string>& templates(Task task) const;

  /// Index of the template chosen for `seed`.
  std::size_t pick(Task task, std::uint64_t seed) const;

  /// Seeded template choice with bindings substituted. `image_count` is the
  /// number of images the record carries; for multi-image tasks it sets the
  /// marker count, elsewhere it must be 0 or equal the template's count.
  /// Throws Error(kInvalidArgument, "missing binding for <name>").
  std::string render(Task task, const Bindings& bindings, std::uint64_t seed,
                     std::size_t image_count = 0) const;

 private:
  std::map<Task, std::vector<std::string>> templates_;
};

/// Substitutes bindings into one template text (no task checks).
std::string render_text(std::string_view text, const Bindings& bindings,
                        std::size_t image_expansion = 1);

}  // namespace maskseq

#pragma once

// Quantized sequence representation of masks and boxes, and its text form.
//
// A pixel coordinate v in an image of extent w maps to the integer bin
// round(v / w * n_bins) clamped to [0, n_bins - 1]; bins map back to the left
// edge q * w / n_bins. Masks become a fixed-length clockwise ring of bins,
// boxes the four bins of their diagonal corners.
//
// Text grammar (see docs/grounding.ebnf):
//   ""                                      no target
//   "[x0, y0, x1, y1]<bsep>[...]"           one or more boxes
//   "[x0, y0, ..., xN, yN]<msep>[...]"      one or more masks

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maskseq/geometry.hpp"
#include "maskseq/sampling.hpp"

namespace maskseq {

inline constexpr std::string_view kBoxSeparator = "<bsep>";
inline constexpr std::string_view kMaskSeparator = "<msep>";

struct QuantConfig {
  std::uint32_t n_bins = 1000;
  double image_w = 1.0;
  double image_h = 1.0;

  static QuantConfig for_image(double width, double height, std::uint32_t n_bins = 1000);
  void validate() const;
  /// Raster size used when decoding: (ceil(image_w), ceil(image_h)).
  std::uint32_t grid_width() const;
  std::uint32_t grid_height() const;
};

struct QuantPoint {
  std::uint32_t x = 0;
  std::uint32_t y = 0;

  friend auto operator<=>(const QuantPoint&, const QuantPoint&) = default;
};

struct QuantBox {
  std::uint32_t x0 = 0;
  std::uint32_t y0 = 0;
  std::uint32_t x1 = 0;
  std::uint32_t y1 = 0;

  friend bool operator==(const QuantBox&, const QuantBox&) = default;
};

struct QuantSeq {
  std::vector<QuantPoint> coords;

  std::size_t point_count() const { return coords.size(); }
  friend bool operator==(const QuantSeq&, const QuantSeq&) = default;
};

QuantPoint quantize(Point p, const QuantConfig& cfg);
/// Throws Error(kInvalidArgument, "bin out of range") for bins >= n_bins.
Point dequantize(QuantPoint q, const QuantConfig& cfg);

QuantBox quantize_box(const BBox& box, const QuantConfig& cfg);
BBox dequantize_box(const QuantBox& box, const QuantConfig& cfg);

/// Cyclic rotation starting at the first point with the smallest quantized
/// (y, x). Order is otherwise untouched.
std::vector<Point> canonicalize(std::span<const Point> ring, const QuantConfig& cfg);

/// Mask -> fixed-length sequence: largest outer contour, sampled by `method`
/// to `scfg.n_out` points, canonical start, quantized.
/// Throws Error(kEmptyMask, "no foreground") for an empty mask.
QuantSeq encode_mask(const BinaryMask& mask, const QuantConfig& cfg, const SamplingConfig& scfg,
                     SamplingMethod method);

/// The sampling half of encode_mask for an already-extracted outer contour
/// on the lattice (adaptive sampling first removes the staircase with
/// scfg.lattice_tolerance and anchors the dense points at the remaining
/// vertices).
QuantSeq encode_contour(const Contour& outer, const QuantConfig& cfg, const SamplingConfig& scfg,
                        SamplingMethod method);

/// Sequence -> mask on a grid_width() x grid_height() raster.
/// Throws Error(kDegenerateGeometry, "degenerate sequence") below 3 points.
BinaryMask decode_mask(const QuantSeq& seq, const QuantConfig& cfg);

std::vector<Point> dequantize_ring(const QuantSeq& seq, const QuantConfig& cfg);

/// Parsed (or to-be-serialized) grounding answer.
class GroundingOutput {
 public:
  enum class Kind { kNoTarget, kBoxes, kMasks };

  GroundingOutput() = default;  // no target

  static GroundingOutput no_target() { return {}; }
  /// Throws Error(kInvalidArgument) when the list is empty.
  static GroundingOutput from_boxes(std::vector<QuantBox> boxes);
  /// Throws Error(kInvalidArgument) when the list is empty or a sequence has
  /// fewer than 3 points.
  static GroundingOutput from_masks(std::vector<QuantSeq> masks);

  Kind kind() const { return kind_; }
  bool is_no_target() const { return kind_ == Kind::kNoTarget; }
  const std::vector<QuantBox>& boxes() const { return boxes_; }
  const std::vector<QuantSeq>& masks() const { return masks_; }

  friend bool operator==(const GroundingOutput&, const GroundingOutput&) = default;

 private:
  Kind kind_ = Kind::kNoTarget;
  std::vector<QuantBox> boxes_;
  std::vector<QuantSeq> masks_;
};

std::string_view to_string(GroundingOutput::Kind kind);

/// Byte-exact text form: decimal integers separated by ", ", groups joined by
/// <bsep> (boxes) or <msep> (masks); the empty string for no target.
std::string serialize(const GroundingOutput& out);
std::string serialize_box(const QuantBox& box);
std::string serialize_sequence(const QuantSeq& seq);

enum class ParseMode { kStrict, kLenient };
enum class ExpectKind { kBoxes, kMasks };

std::string_view to_string(ParseMode mode);
std::string_view to_string(ExpectKind expect);
ExpectKind parse_expect_kind(std::string_view name);

struct ParseOptions {
  ParseMode mode = ParseMode::kStrict;
  ExpectKind expect = ExpectKind::kMasks;
  std::uint32_t n_bins = 1000;
};

struct ParseReport {
  GroundingOutput output;
  /// Lenient-mode repairs (clamped bins, dropped integers, swapped
  /// separators, trailing commas, dropped empty groups). Always 0 in strict
  /// mode.
  std::size_t warnings = 0;
};

/// Inverse of serialize(). Whitespace is allowed around every token.
/// Strict mode raises ParseError (with byte offset) on any violation. Lenient
/// mode repairs what it can (see ParseReport::warnings) and still raises
/// ParseError for input it cannot interpret.
ParseReport parse_grounding_report(std::string_view text, const ParseOptions& options);

GroundingOutput parse_grounding(std::string_view text, ParseMode mode, ExpectKind expect,
                                std::uint32_t n_bins = 1000);

}  // namespace maskseq

#include "maskseq/codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "log_internal.hpp"
#include "maskseq/error.hpp"

namespace maskseq {

QuantConfig QuantConfig::for_image(double width, double height, std::uint32_t n_bins) {
  QuantConfig cfg{n_bins, width, height};
  cfg.validate();
  return cfg;
}

void QuantConfig::validate() const {
  if (n_bins < 2) throw Error(ErrorCode::kInvalidArgument, "n_bins must be at least 2");
  if (!(image_w > 0.0) || !(image_h > 0.0) || !std::isfinite(image_w) ||
      !std::isfinite(image_h)) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive and finite");
  }
}

std::uint32_t QuantConfig::grid_width() const {
  return static_cast<std::uint32_t>(std::ceil(image_w));
}

std::uint32_t QuantConfig::grid_height() const {
  return static_cast<std::uint32_t>(std::ceil(image_h));
}

namespace {

std::uint32_t quantize_axis(double value, double extent, std::uint32_t n_bins, char axis) {
  // std::round rounds halves away from zero.
  const double raw = std::round(value / extent * n_bins);
  if (raw < 0.0) {
    detail::logger().debug("quantize: {} = {} below 0, clamped", axis, value);
    return 0;
  }
  if (raw > n_bins - 1) return n_bins - 1;
  return static_cast<std::uint32_t>(raw);
}

}  // namespace

QuantPoint quantize(Point p, const QuantConfig& cfg) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw Error(ErrorCode::kInvalidArgument, "cannot quantize a non-finite point");
  }
  return {quantize_axis(p.x, cfg.image_w, cfg.n_bins, 'x'),
          quantize_axis(p.y, cfg.image_h, cfg.n_bins, 'y')};
}

Point dequantize(QuantPoint q, const QuantConfig& cfg) {
  if (q.x >= cfg.n_bins || q.y >= cfg.n_bins) {
    throw Error(ErrorCode::kInvalidArgument, "bin out of range");
  }
  return {q.x * cfg.image_w / cfg.n_bins, q.y * cfg.image_h / cfg.n_bins};
}

QuantBox quantize_box(const BBox& box, const QuantConfig& cfg) {
  const QuantPoint a = quantize({box.x0, box.y0}, cfg);
  const QuantPoint b = quantize({box.x1, box.y1}, cfg);
  return {a.x, a.y, b.x, b.y};
}

BBox dequantize_box(const QuantBox& box, const QuantConfig& cfg) {
  return BBox::from_corners(dequantize({box.x0, box.y0}, cfg), dequantize({box.x1, box.y1}, cfg));
}

std::vector<Point> canonicalize(std::span<const Point> ring, const QuantConfig& cfg) {
  std::vector<Point> out(ring.begin(), ring.end());
  if (out.empty()) return out;
  std::size_t start = 0;
  QuantPoint best = quantize(out[0], cfg);
  for (std::size_t i = 1; i < out.size(); ++i) {
    const QuantPoint q = quantize(out[i], cfg);
    if (q.y < best.y || (q.y == best.y && q.x < best.x)) {
      best = q;
      start = i;
    }
  }
  std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(start), out.end());
  return out;
}

QuantSeq encode_mask(const BinaryMask& mask, const QuantConfig& cfg, const SamplingConfig& scfg,
                     SamplingMethod method) {
  cfg.validate();
  scfg.validate();
  const std::vector<Contour> contours = extract_contours(mask);
  if (contours.empty()) throw Error(ErrorCode::kEmptyMask, "no foreground");
  if (contours.size() > 1) {
    detail::logger().debug("encode_mask: {} components, keeping the largest", contours.size());
  }
  return encode_contour(largest_contour(contours), cfg, scfg, method);
}

QuantSeq encode_contour(const Contour& outer, const QuantConfig& cfg, const SamplingConfig& scfg,
                        SamplingMethod method) {
  cfg.validate();
  scfg.validate();
  std::vector<Point> sampled;
  if (method == SamplingMethod::kAdaptive && scfg.lattice_tolerance > 0.0) {
    sampled = adaptive_sample_anchored(simplify_ring(outer, scfg.lattice_tolerance), scfg);
  } else if (method == SamplingMethod::kAdaptive) {
    sampled = adaptive_sample(outer, scfg);
  } else {
    sampled = uniform_sample(outer, scfg.n_out);
  }

  QuantSeq seq;
  seq.coords.reserve(sampled.size());
  for (const Point& p : canonicalize(sampled, cfg)) seq.coords.push_back(quantize(p, cfg));
  return seq;
}

std::vector<Point> dequantize_ring(const QuantSeq& seq, const QuantConfig& cfg) {
  std::vector<Point> ring;
  ring.reserve(seq.coords.size());
  for (const QuantPoint& q : seq.coords) ring.push_back(dequantize(q, cfg));
  return ring;
}

BinaryMask decode_mask(const QuantSeq& seq, const QuantConfig& cfg) {
  cfg.validate();
  if (seq.coords.size() < 3) {
    throw Error(ErrorCode::kDegenerateGeometry, "degenerate sequence");
  }
  return rasterize_polygon(dequantize_ring(seq, cfg), cfg.grid_width(), cfg.grid_height());
}

// ---------------------------------------------------------------------------
// GroundingOutput

GroundingOutput GroundingOutput::from_boxes(std::vector<QuantBox> boxes) {
  if (boxes.empty()) throw Error(ErrorCode::kInvalidArgument, "box list must not be empty");
  GroundingOutput out;
  out.kind_ = Kind::kBoxes;
  out.boxes_ = std::move(boxes);
  return out;
}

GroundingOutput GroundingOutput::from_masks(std::vector<QuantSeq> masks) {
  if (masks.empty()) throw Error(ErrorCode::kInvalidArgument, "mask list must not be empty");
  for (const auto& m : masks) {
    if (m.coords.size() < 3) {
      throw Error(ErrorCode::kInvalidArgument, "mask sequence needs at least 3 points");
    }
  }
  GroundingOutput out;
  out.kind_ = Kind::kMasks;
  out.masks_ = std::move(masks);
  return out;
}

std::string_view to_string(GroundingOutput::Kind kind) {
  switch (kind) {
    case GroundingOutput::Kind::kNoTarget: return "no_target";
    case GroundingOutput::Kind::kBoxes: return "boxes";
    case GroundingOutput::Kind::kMasks: return "masks";
  }
  return "unknown";
}

std::string serialize_box(const QuantBox& box) {
  return "[" + std::to_string(box.x0) + ", " + std::to_string(box.y0) + ", " +
         std::to_string(box.x1) + ", " + std::to_string(box.y1) + "]";
}

std::string serialize_sequence(const QuantSeq& seq) {
  std::string s = "[";
  for (std::size_t i = 0; i < seq.coords.size(); ++i) {
    if (i > 0) s += ", ";
    s += std::to_string(seq.coords[i].x);
    s += ", ";
    s += std::to_string(seq.coords[i].y);
  }
  s += "]";
  return s;
}

std::string serialize(const GroundingOutput& out) {
  std::string s;
  switch (out.kind()) {
    case GroundingOutput::Kind::kNoTarget:
      break;
    case GroundingOutput::Kind::kBoxes:
      for (std::size_t i = 0; i < out.boxes().size(); ++i) {
        if (i > 0) s += kBoxSeparator;
        s += serialize_box(out.boxes()[i]);
      }
      break;
    case GroundingOutput::Kind::kMasks:
      for (std::size_t i = 0; i < out.masks().size(); ++i) {
        if (i > 0) s += kMaskSeparator;
        s += serialize_sequence(out.masks()[i]);
      }
      break;
  }
  return s;
}

}  // namespace maskseq

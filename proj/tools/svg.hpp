#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "maskseq/codec.hpp"

namespace maskseq::tools {

/// Grounding answer drawn over an image reference: one closed <path> per mask,
/// one <rect> per box, or a "no target" layer for the empty answer.
std::string overlay_svg(std::string_view image_ref, const GroundingOutput& output,
                        const QuantConfig& cfg);

struct CurvePoint {
  std::uint32_t n = 0;
  std::string method;
  double miou = 0.0;
};

/// Reads "n,method,miou" CSV text (header required).
std::vector<CurvePoint> parse_upper_bound_csv(std::string_view csv);

/// Line plot of mIoU against n, one polyline per method.
std::string upper_bound_plot_svg(const std::vector<CurvePoint>& points);

}  // namespace maskseq::tools

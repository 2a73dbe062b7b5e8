#pragma once

// Contour discretization and point selection.
//
// Two strategies reduce a contour to a fixed number of points:
//  - uniform: equal arc-length spacing, blind to curvature;
//  - adaptive: discretize densely, score every dense point by its turning
//    angle, and keep the sharpest bends in contour order.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "maskseq/geometry.hpp"

namespace maskseq {

enum class SamplingMethod { kUniform, kAdaptive };

std::string_view to_string(SamplingMethod method);
/// Accepts "uniform" / "adaptive"; throws Error(kInvalidArgument) otherwise.
SamplingMethod parse_sampling_method(std::string_view name);

struct SamplingConfig {
  std::uint32_t m_dense = 400;
  std::uint32_t n_out = 32;
  /// Profiles whose angle spread is below this (radians) count as constant
  /// curvature and fall back to uniform sampling.
  double theta_eps = 1e-6;
  /// Douglas-Peucker tolerance (pixels) applied to mask-derived contours
  /// before adaptive sampling, removing the pixel-lattice staircase; the
  /// simplified ring is then discretized with its vertices anchored. Only the
  /// mask pipeline (encode_mask) reads it; 0 disables both steps.
  double lattice_tolerance = 1.0;

  /// Throws Error(kInvalidArgument) unless n_out >= 3 and m_dense >= n_out.
  void validate() const;
};

/// Per-dense-point turning angles in radians, each in [0, pi).
struct TurningProfile {
  std::vector<double> angles;
};

/// `m` points at equal arc-length spacing along the clockwise ring, starting
/// at its first vertex.
std::vector<Point> densify(const Contour& contour, std::uint32_t m);

/// `m` points along the ring that include every vertex: each edge keeps its
/// start vertex and receives a share of the remaining points proportional to
/// its length, spaced evenly along the edge. Spacing therefore varies by at
/// most one step between edges. Falls back to densify() when the ring has
/// more than `m` vertices.
std::vector<Point> densify_anchored(const Contour& contour, std::uint32_t m);

/// Equal arc-length sampling of `n` points (the classic polygon sequence
/// representation).
std::vector<Point> uniform_sample(const Contour& contour, std::uint32_t n);

/// Turning angle at every point of a closed ring: pi minus the interior angle
/// formed with its two cyclic neighbours. Zero on straight runs and at
/// degenerate (repeated) points.
TurningProfile turning_angles(std::span<const Point> dense);

/// Curvature-aware sampling: the `cfg.n_out` dense points with the largest
/// turning angles, emitted in clockwise contour order.
std::vector<Point> adaptive_sample(const Contour& contour, const SamplingConfig& cfg);

/// adaptive_sample on a vertex-anchored discretization, so that a polygon
/// corner is scored as one dense point carrying the whole turn instead of two
/// neighbours sharing it. Used for simplified mask contours.
std::vector<Point> adaptive_sample_anchored(const Contour& contour, const SamplingConfig& cfg);

/// Dispatches on `method`; uniform sampling uses `cfg.n_out` points.
std::vector<Point> sample_contour(const Contour& contour, const SamplingConfig& cfg,
                                  SamplingMethod method);

}  // namespace maskseq

#pragma once

// Geometric primitives shared by every stage of the mask <-> sequence
// pipeline. Coordinates are image pixels with the origin at the top-left
// corner, x to the right and y downward. Pixel (i, j) covers the unit square
// [i, i+1) x [j, j+1), so its center is (i + 0.5, j + 0.5).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace maskseq {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned box given by its diagonal corners.
struct BBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  /// Builds a box from two arbitrary corners, ordering them.
  static BBox from_corners(Point a, Point b);
  /// COCO-style [x, y, width, height].
  static BBox from_xywh(double x, double y, double w, double h);

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool valid() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Row-major boolean grid. Storage is one byte per pixel holding 0 or 1.
class BinaryMask {
 public:
  BinaryMask(std::uint32_t width, std::uint32_t height);
  BinaryMask(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> bits);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(std::uint32_t x, std::uint32_t y) const { return bits_[index(x, y)] != 0; }
  void set(std::uint32_t x, std::uint32_t y, bool value = true) {
    bits_[index(x, y)] = value ? 1 : 0;
  }
  /// Bounds-checked read; coordinates outside the grid read as background.
  bool test(std::int64_t x, std::int64_t y) const;

  std::span<const std::uint8_t> bits() const { return bits_; }

  /// Number of foreground pixels.
  std::size_t count() const;
  bool any() const;

  void fill_rect(std::uint32_t x0, std::uint32_t y0, std::uint32_t x1, std::uint32_t y1);

  /// Pixel-wise union; dimensions must match.
  BinaryMask& operator|=(const BinaryMask& other);

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(std::uint32_t x, std::uint32_t y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<std::uint8_t> bits_;
};

/// Closed ring of points; the last point implicitly connects to the first.
/// At least three points, all finite, no two cyclically-consecutive points
/// equal. Orientation is derived from the signed area, never stored
/// separately, so it cannot disagree with the geometry.
class Contour {
 public:
  explicit Contour(std::vector<Point> points);

  const std::vector<Point>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  /// Shoelace sum / 2. Positive means clockwise on screen (y down).
  double signed_area() const;
  bool is_clockwise() const { return signed_area() > 0.0; }
  /// Same ring traversed clockwise, starting at the same first vertex.
  Contour clockwise() const;

  double perimeter() const;
  BBox bounds() const;

  friend bool operator==(const Contour&, const Contour&) = default;

 private:
  std::vector<Point> points_;
};

double signed_shoelace_area(std::span<const Point> ring);
double shoelace_area(std::span<const Point> ring);
double shoelace_area(const Contour& contour);
double ring_perimeter(std::span<const Point> ring);

/// Outer boundary of every 8-connected foreground component, traced
/// clockwise along pixel edges (vertices on the integer lattice). Only
/// direction changes are emitted as vertices. Holes are not reported.
/// Components are ordered by their first pixel in raster order, and every
/// ring starts at the top-left corner of that pixel.
std::vector<Contour> extract_contours(const BinaryMask& mask);

/// Closed-ring Douglas-Peucker: drops vertices within `tolerance` pixels of
/// the simplified ring. Anchors are the first vertex and the vertex farthest
/// from it, so the start point survives. Used to turn a pixel-lattice
/// staircase into a polygonal curve; returns the input unchanged when
/// `tolerance <= 0` or when fewer than 3 vertices would remain.
Contour simplify_ring(const Contour& contour, double tolerance);

/// Contour with maximal absolute area; the earliest wins ties.
/// Throws Error(kDegenerateGeometry, "no contour") on empty input.
const Contour& largest_contour(std::span<const Contour> contours);

/// Even-odd fill with a pixel-center test. Points may lie outside the grid;
/// coverage is clipped to it. Zero-length edges are ignored.
BinaryMask rasterize_polygon(std::span<const Point> ring, std::uint32_t width,
                             std::uint32_t height);

/// |a & b| / |a | b|, and 1.0 when both are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);
double box_iou(const BBox& a, const BBox& b);

/// True when some background pixel cannot reach the grid border through
/// 4-connected background, i.e. a foreground component encloses a hole.
bool has_holes(const BinaryMask& mask);

}  // namespace maskseq

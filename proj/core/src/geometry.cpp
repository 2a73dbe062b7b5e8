#include "maskseq/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "maskseq/error.hpp"

namespace maskseq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kEmptyMask: return "empty_mask";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kNoTarget: return "no_target";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// BBox

BBox BBox::from_corners(Point a, Point b) {
  return BBox{std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
}

BBox BBox::from_xywh(double x, double y, double w, double h) {
  return from_corners({x, y}, {x + w, y + h});
}

bool BBox::valid() const {
  return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) && std::isfinite(y1) &&
         x0 <= x1 && y0 <= y1;
}

// ---------------------------------------------------------------------------
// BinaryMask

BinaryMask::BinaryMask(std::uint32_t width, std::uint32_t height)
    : BinaryMask(width, height,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)) {}

BinaryMask::BinaryMask(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width_ == 0 || height_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "mask dimensions must be at least 1x1");
  }
  if (bits_.size() != static_cast<std::size_t>(width_) * height_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask storage has " + std::to_string(bits_.size()) + " cells, expected " +
                    std::to_string(static_cast<std::size_t>(width_) * height_));
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

bool BinaryMask::test(std::int64_t x, std::int64_t y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
  return at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool BinaryMask::any() const {
  return std::find(bits_.begin(), bits_.end(), std::uint8_t{1}) != bits_.end();
}

void BinaryMask::fill_rect(std::uint32_t x0, std::uint32_t y0, std::uint32_t x1,
                           std::uint32_t y1) {
  x1 = std::min(x1, width_);
  y1 = std::min(y1, height_);
  for (std::uint32_t y = y0; y < y1; ++y) {
    for (std::uint32_t x = x0; x < x1; ++x) set(x, y);
  }
}

BinaryMask& BinaryMask::operator|=(const BinaryMask& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw Error(ErrorCode::kDimensionMismatch, "mask union requires equal dimensions");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

// ---------------------------------------------------------------------------
// Contour

Contour::Contour(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.size() < 3) {
    throw Error(ErrorCode::kDegenerateGeometry, "contour needs at least 3 points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Point& p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::kInvalidArgument, "contour point is not finite");
    }
    if (p == points_[(i + 1) % points_.size()]) {
      throw Error(ErrorCode::kDegenerateGeometry,
                  "contour has repeated consecutive point at index " + std::to_string(i));
    }
  }
}

double Contour::signed_area() const { return signed_shoelace_area(points_); }

Contour Contour::clockwise() const {
  if (signed_area() >= 0.0) return *this;
  std::vector<Point> reversed;
  reversed.reserve(points_.size());
  reversed.push_back(points_.front());
  for (std::size_t i = points_.size() - 1; i > 0; --i) reversed.push_back(points_[i]);
  return Contour(std::move(reversed));
}

double Contour::perimeter() const { return ring_perimeter(points_); }

BBox Contour::bounds() const {
  BBox box{points_[0].x, points_[0].y, points_[0].x, points_[0].y};
  for (const auto& p : points_) {
    box.x0 = std::min(box.x0, p.x);
    box.y0 = std::min(box.y0, p.y);
    box.x1 = std::max(box.x1, p.x);
    box.y1 = std::max(box.y1, p.y);
  }
  return box;
}

double signed_shoelace_area(std::span<const Point> ring) {
  if (ring.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % ring.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

double shoelace_area(std::span<const Point> ring) { return std::abs(signed_shoelace_area(ring)); }

double shoelace_area(const Contour& contour) { return std::abs(contour.signed_area()); }

double ring_perimeter(std::span<const Point> ring) {
  double total = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % ring.size()];
    total += std::hypot(b.x - a.x, b.y - a.y);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Contour extraction

namespace {

// 8-connected component labels in raster order; 0 is background.
std::vector<std::uint32_t> label_components(const BinaryMask& mask, std::uint32_t& count) {
  const std::uint32_t w = mask.width();
  const std::uint32_t h = mask.height();
  std::vector<std::uint32_t> labels(mask.size(), 0);
  std::vector<std::uint32_t> stack;
  count = 0;
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!mask.at(x, y) || labels[idx] != 0) continue;
      const std::uint32_t id = ++count;
      labels[idx] = id;
      stack.assign(1, static_cast<std::uint32_t>(idx));
      while (!stack.empty()) {
        const std::uint32_t cur = stack.back();
        stack.pop_back();
        const std::int64_t cx = cur % w;
        const std::int64_t cy = cur / w;
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dx = -1; dx <= 1; ++dx) {
            const std::int64_t nx = cx + dx;
            const std::int64_t ny = cy + dy;
            if (!mask.test(nx, ny)) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
            if (labels[nidx] != 0) continue;
            labels[nidx] = id;
            stack.push_back(static_cast<std::uint32_t>(nidx));
          }
        }
      }
    }
  }
  return labels;
}

// Directions in clockwise order on screen: east, south, west, north.
constexpr std::array<int, 4> kDx = {1, 0, -1, 0};
constexpr std::array<int, 4> kDy = {0, 1, 0, -1};

// Pixel offsets (relative to a lattice vertex) of the pixels ahead-left and
// ahead-right of the travel direction.
constexpr std::array<std::array<int, 2>, 4> kAheadLeft = {{{0, -1}, {0, 0}, {-1, 0}, {-1, -1}}};
constexpr std::array<std::array<int, 2>, 4> kAheadRight = {{{0, 0}, {-1, 0}, {-1, -1}, {0, -1}}};

// Crack following with the component on the right-hand side. Checking the
// ahead-left pixel first makes diagonal neighbours part of the same ring.
Contour trace_outer(const BinaryMask& mask, const std::vector<std::uint32_t>& labels,
                    std::uint32_t id, std::int64_t start_x, std::int64_t start_y) {
  const std::int64_t w = mask.width();
  auto inside = [&](std::int64_t x, std::int64_t y) {
    if (x < 0 || y < 0 || x >= w || y >= static_cast<std::int64_t>(mask.height())) return false;
    return labels[static_cast<std::size_t>(y * w + x)] == id;
  };

  std::vector<Point> ring;
  ring.push_back({static_cast<double>(start_x), static_cast<double>(start_y)});
  std::int64_t vx = start_x;
  std::int64_t vy = start_y;
  int dir = 0;
  for (;;) {
    vx += kDx[dir];
    vy += kDy[dir];
    int next = dir;
    if (inside(vx + kAheadLeft[dir][0], vy + kAheadLeft[dir][1])) {
      next = (dir + 3) % 4;
    } else if (!inside(vx + kAheadRight[dir][0], vy + kAheadRight[dir][1])) {
      next = (dir + 1) % 4;
    }
    if (vx == start_x && vy == start_y && next == 0) break;
    if (next != dir) ring.push_back({static_cast<double>(vx), static_cast<double>(vy)});
    dir = next;
  }
  return Contour(std::move(ring));
}

}  // namespace

std::vector<Contour> extract_contours(const BinaryMask& mask) {
  std::uint32_t count = 0;
  const auto labels = label_components(mask, count);
  std::vector<Contour> contours;
  contours.reserve(count);
  std::uint32_t next_id = 1;
  for (std::uint32_t y = 0; y < mask.height() && next_id <= count; ++y) {
    for (std::uint32_t x = 0; x < mask.width(); ++x) {
      if (labels[static_cast<std::size_t>(y) * mask.width() + x] == next_id) {
        contours.push_back(trace_outer(mask, labels, next_id, x, y));
        ++next_id;
      }
    }
  }
  return contours;
}

namespace {

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
  const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

}  // namespace

Contour simplify_ring(const Contour& contour, double tolerance) {
  const auto& v = contour.points();
  const std::size_t n = v.size();
  if (!(tolerance > 0.0)) return contour;

  std::size_t far = 0;
  double far_dist = -1.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double d = std::hypot(v[k].x - v[0].x, v[k].y - v[0].y);
    if (d > far_dist) {
      far_dist = d;
      far = k;
    }
  }

  // Index n stands for vertex 0 closing the ring.
  auto at = [&](std::size_t i) -> const Point& { return v[i % n]; };
  std::vector<std::uint8_t> keep(n + 1, 0);
  keep[0] = keep[far] = keep[n] = 1;
  std::vector<std::pair<std::size_t, std::size_t>> spans = {{0, far}, {far, n}};
  while (!spans.empty()) {
    const auto [lo, hi] = spans.back();
    spans.pop_back();
    if (hi <= lo + 1) continue;
    double best = -1.0;
    std::size_t best_k = lo;
    for (std::size_t k = lo + 1; k < hi; ++k) {
      const double d = point_segment_distance(at(k), at(lo), at(hi));
      if (d > best) {
        best = d;
        best_k = k;
      }
    }
    if (best > tolerance) {
      keep[best_k] = 1;
      spans.emplace_back(lo, best_k);
      spans.emplace_back(best_k, hi);
    }
  }

  std::vector<Point> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (keep[k]) out.push_back(v[k]);
  }
  if (out.size() < 3) return contour;
  return Contour(std::move(out));
}

const Contour& largest_contour(std::span<const Contour> contours) {
  if (contours.empty()) throw Error(ErrorCode::kDegenerateGeometry, "no contour");
  std::size_t best = 0;
  double best_area = shoelace_area(contours[0]);
  for (std::size_t i = 1; i < contours.size(); ++i) {
    const double area = shoelace_area(contours[i]);
    if (area > best_area) {
      best = i;
      best_area = area;
    }
  }
  return contours[best];
}

// ---------------------------------------------------------------------------
// Rasterization

BinaryMask rasterize_polygon(std::span<const Point> ring, std::uint32_t width,
                             std::uint32_t height) {
  if (ring.size() < 3) throw Error(ErrorCode::kDegenerateGeometry, "degenerate polygon");
  for (const auto& p : ring) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::kInvalidArgument, "polygon point is not finite");
    }
  }
  BinaryMask mask(width, height);
  std::vector<double> crossings;
  const std::size_t n = ring.size();
  for (std::uint32_t row = 0; row < height; ++row) {
    const double y = row + 0.5;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = ring[i];
      const Point& b = ring[j];
      // Half-open in y: an edge counts when exactly one endpoint lies above.
      if ((a.y > y) != (b.y > y)) {
        crossings.push_back((b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x);
      }
    }
    if (crossings.size() < 2) continue;
    std::sort(crossings.begin(), crossings.end());
    // Centers in [left, right) are inside.
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const double left = crossings[k];
      const double right = crossings[k + 1];
      if (right <= 0.5 || left >= width) continue;
      double first = std::max(0.0, std::ceil(left - 0.5));
      while (first > 0.0 && (first - 1.0) + 0.5 >= left) first -= 1.0;
      while (first + 0.5 < left) first += 1.0;
      for (double col = first; col < width && col + 0.5 < right; col += 1.0) {
        mask.set(static_cast<std::uint32_t>(col), row);
      }
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Overlap measures

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask_iou: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto ab = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    inter += ab[i] & bb[i];
    uni += ab[i] | bb[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double box_iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

bool has_holes(const BinaryMask& mask) {
  const std::uint32_t w = mask.width();
  const std::uint32_t h = mask.height();
  std::vector<std::uint8_t> reached(mask.size(), 0);
  std::deque<std::size_t> queue;
  auto seed = [&](std::uint32_t x, std::uint32_t y) {
    const std::size_t idx = static_cast<std::size_t>(y) * w + x;
    if (!mask.at(x, y) && !reached[idx]) {
      reached[idx] = 1;
      queue.push_back(idx);
    }
  };
  for (std::uint32_t x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (std::uint32_t y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!queue.empty()) {
    const std::size_t idx = queue.front();
    queue.pop_front();
    const std::uint32_t x = static_cast<std::uint32_t>(idx % w);
    const std::uint32_t y = static_cast<std::uint32_t>(idx / w);
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }
  for (std::size_t i = 0; i < reached.size(); ++i) {
    if (mask.bits()[i] == 0 && !reached[i]) return true;
  }
  return false;
}

}  // namespace maskseq

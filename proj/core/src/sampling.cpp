#include "maskseq/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "maskseq/error.hpp"

namespace maskseq {

std::string_view to_string(SamplingMethod method) {
  return method == SamplingMethod::kUniform ? "uniform" : "adaptive";
}

SamplingMethod parse_sampling_method(std::string_view name) {
  if (name == "uniform") return SamplingMethod::kUniform;
  if (name == "adaptive") return SamplingMethod::kAdaptive;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown sampling method '" + std::string(name) + "' (expected uniform|adaptive)");
}

void SamplingConfig::validate() const {
  if (n_out < 3) {
    throw Error(ErrorCode::kInvalidArgument, "n_out must be at least 3");
  }
  if (m_dense < n_out) {
    throw Error(ErrorCode::kInvalidArgument, "m_dense (" + std::to_string(m_dense) +
                                                 ") must be >= n_out (" +
                                                 std::to_string(n_out) + ")");
  }
  if (!(theta_eps >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "theta_eps must be non-negative");
  }
  if (!(lattice_tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lattice_tolerance must be non-negative");
  }
}

std::vector<Point> densify(const Contour& contour, std::uint32_t m) {
  if (m < 3) throw Error(ErrorCode::kInvalidArgument, "densify needs m >= 3");
  const Contour ring = contour.clockwise();
  const auto& v = ring.points();
  const std::size_t n = v.size();

  std::vector<double> cumulative(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % n];
    cumulative[i + 1] = cumulative[i] + std::hypot(b.x - a.x, b.y - a.y);
  }
  const double length = cumulative[n];

  std::vector<Point> out;
  out.reserve(m);
  std::size_t edge = 0;
  for (std::uint32_t k = 0; k < m; ++k) {
    const double s = length * k / m;
    while (edge + 1 < n && cumulative[edge + 1] <= s) ++edge;
    const Point& a = v[edge];
    const Point& b = v[(edge + 1) % n];
    const double edge_len = cumulative[edge + 1] - cumulative[edge];
    const double t = edge_len > 0.0 ? (s - cumulative[edge]) / edge_len : 0.0;
    out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return out;
}

std::vector<Point> uniform_sample(const Contour& contour, std::uint32_t n) {
  if (n < 3) throw Error(ErrorCode::kInvalidArgument, "uniform_sample needs n >= 3");
  return densify(contour, n);
}

TurningProfile turning_angles(std::span<const Point> dense) {
  if (dense.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "turning_angles needs at least 3 points");
  }
  const std::size_t m = dense.size();
  // Largest double strictly below pi; a perfect hairpin maps here.
  const double below_pi = std::nextafter(std::numbers::pi, 0.0);
  TurningProfile profile;
  profile.angles.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Point& prev = dense[(i + m - 1) % m];
    const Point& cur = dense[i];
    const Point& next = dense[(i + 1) % m];
    const double ax = cur.x - prev.x;
    const double ay = cur.y - prev.y;
    const double bx = next.x - cur.x;
    const double by = next.y - cur.y;
    if ((ax == 0.0 && ay == 0.0) || (bx == 0.0 && by == 0.0)) {
      profile.angles[i] = 0.0;
      continue;
    }
    const double cross = ax * by - ay * bx;
    const double dot = ax * bx + ay * by;
    profile.angles[i] = std::min(std::atan2(std::abs(cross), dot), below_pi);
  }
  return profile;
}

namespace {

// Steps after discretization: score, fall back on constant curvature, keep
// the sharpest points in ring order.
std::vector<Point> keep_sharpest(const std::vector<Point>& dense, const Contour& contour,
                                 const SamplingConfig& cfg) {
  const TurningProfile profile = turning_angles(dense);

  const auto [lo, hi] = std::minmax_element(profile.angles.begin(), profile.angles.end());
  if (*hi - *lo < cfg.theta_eps) return uniform_sample(contour, cfg.n_out);

  std::vector<std::size_t> order(dense.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return profile.angles[a] > profile.angles[b];
  });

  // Keep distinct positions only; a ring that revisits a point (pinch
  // vertex) must not spend two output slots on it.
  std::vector<std::size_t> kept;
  kept.reserve(cfg.n_out);
  for (const std::size_t idx : order) {
    if (kept.size() == cfg.n_out) break;
    const bool duplicate = std::any_of(kept.begin(), kept.end(),
                                       [&](std::size_t k) { return dense[k] == dense[idx]; });
    if (!duplicate) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());

  std::vector<Point> out;
  out.reserve(cfg.n_out);
  for (const std::size_t idx : kept) out.push_back(dense[idx]);
  while (out.size() < cfg.n_out) out.push_back(out.back());
  return out;
}

}  // namespace

std::vector<Point> densify_anchored(const Contour& contour, std::uint32_t m) {
  if (m < 3) throw Error(ErrorCode::kInvalidArgument, "densify needs m >= 3");
  const Contour ring = contour.clockwise();
  const auto& v = ring.points();
  const std::size_t n = v.size();
  if (n > m) return densify(contour, m);

  std::vector<double> len(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % n];
    len[i] = std::hypot(b.x - a.x, b.y - a.y);
    total += len[i];
  }

  // One point per vertex, the rest shared by length (largest remainder).
  const std::size_t extra = m - n;
  std::vector<std::size_t> per_edge(n, 1);
  std::vector<double> remainder(n, 0.0);
  std::size_t given = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = total > 0.0 ? static_cast<double>(extra) * len[i] / total : 0.0;
    const auto whole = static_cast<std::size_t>(std::floor(share));
    per_edge[i] += whole;
    given += whole;
    remainder[i] = share - static_cast<double>(whole);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; given < extra; ++k, ++given) ++per_edge[order[k % n]];

  std::vector<Point> out;
  out.reserve(m);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % n];
    for (std::size_t j = 0; j < per_edge[i]; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(per_edge[i]);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  return out;
}

std::vector<Point> adaptive_sample(const Contour& contour, const SamplingConfig& cfg) {
  cfg.validate();
  return keep_sharpest(densify(contour, cfg.m_dense), contour, cfg);
}

std::vector<Point> adaptive_sample_anchored(const Contour& contour, const SamplingConfig& cfg) {
  cfg.validate();
  return keep_sharpest(densify_anchored(contour, cfg.m_dense), contour, cfg);
}

std::vector<Point> sample_contour(const Contour& contour, const SamplingConfig& cfg,
                                  SamplingMethod method) {
  if (method == SamplingMethod::kUniform) {
    cfg.validate();
    return uniform_sample(contour, cfg.n_out);
  }
  return adaptive_sample(contour, cfg);
}

}  // namespace maskseq

#include "svg.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "maskseq/error.hpp"

namespace maskseq::tools {

namespace {

constexpr std::array<std::string_view, 6> kPalette = {"#e6194b", "#3cb44b", "#4363d8",
                                                      "#f58231", "#911eb4", "#46f0f0"};

std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 2);
  std::string s(buf.data(), res.ptr);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string overlay_svg(std::string_view image_ref, const GroundingOutput& output,
                        const QuantConfig& cfg) {
  std::ostringstream s;
  const std::string w = num(cfg.image_w);
  const std::string h = num(cfg.image_h);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" "
    << "width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  if (!image_ref.empty()) {
    s << "  <image xlink:href=\"" << xml_escape(image_ref) << "\" x=\"0\" y=\"0\" width=\"" << w
      << "\" height=\"" << h << "\"/>\n";
  }
  switch (output.kind()) {
    case GroundingOutput::Kind::kNoTarget:
      s << "  <g id=\"no-target\">\n"
        << "    <text x=\"8\" y=\"24\" font-family=\"sans-serif\" font-size=\"20\" "
           "fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"0.5\">no target</text>\n"
        << "  </g>\n";
      break;
    case GroundingOutput::Kind::kMasks:
      for (std::size_t i = 0; i < output.masks().size(); ++i) {
        const auto ring = dequantize_ring(output.masks()[i], cfg);
        const auto colour = kPalette[i % kPalette.size()];
        s << "  <path class=\"mask\" d=\"";
        for (std::size_t k = 0; k < ring.size(); ++k) {
          s << (k == 0 ? "M " : " L ") << num(ring[k].x) << ' ' << num(ring[k].y);
        }
        s << " Z\" fill=\"" << colour << "\" fill-opacity=\"0.35\" stroke=\"" << colour
          << "\" stroke-width=\"2\"/>\n";
      }
      break;
    case GroundingOutput::Kind::kBoxes:
      for (std::size_t i = 0; i < output.boxes().size(); ++i) {
        const BBox b = dequantize_box(output.boxes()[i], cfg);
        const auto colour = kPalette[i % kPalette.size()];
        s << "  <rect class=\"box\" x=\"" << num(b.x0) << "\" y=\"" << num(b.y0) << "\" width=\""
          << num(b.width()) << "\" height=\"" << num(b.height()) << "\" fill=\"none\" stroke=\""
          << colour << "\" stroke-width=\"2\"/>\n";
      }
      break;
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<CurvePoint> parse_upper_bound_csv(std::string_view csv) {
  std::vector<CurvePoint> out;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "n,method,miou") throw ParseError("expected header n,method,miou", 1, true);
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ParseError("expected 3 columns", line_no, true);
    }
    CurvePoint p;
    p.method = line.substr(c1 + 1, c2 - c1 - 1);
    const char* b = line.data();
    if (std::from_chars(b, b + c1, p.n).ec != std::errc{} ||
        std::from_chars(b + c2 + 1, b + line.size(), p.miou).ec != std::errc{}) {
      throw ParseError("bad number", line_no, true);
    }
    out.push_back(p);
  }
  return out;
}

std::string upper_bound_plot_svg(const std::vector<CurvePoint>& points) {
  constexpr double kW = 480, kH = 320, kLeft = 56, kRight = 16, kTop = 16, kBottom = 44;
  std::map<std::string, std::vector<CurvePoint>> series;
  for (const auto& p : points) series[p.method].push_back(p);

  double n_min = 0, n_max = 1, y_min = 0, y_max = 100;
  if (!points.empty()) {
    const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                              [](const auto& a, const auto& b) { return a.n < b.n; });
    n_min = lo->n;
    n_max = hi->n > lo->n ? hi->n : lo->n + 1.0;
    double lowest = 100.0;
    for (const auto& p : points) lowest = std::min(lowest, p.miou * 100.0);
    y_min = std::max(0.0, std::floor(lowest / 10.0) * 10.0);
    if (y_min >= y_max) y_min = y_max - 10.0;
  }
  const auto px = [&](double n) { return kLeft + (n - n_min) / (n_max - n_min) * (kW - kLeft - kRight); };
  const auto py = [&](double v) { return kH - kBottom - (v - y_min) / (y_max - y_min) * (kH - kTop - kBottom); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
    << "  <line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
    << "\" y2=\"" << kH - kBottom << "\" stroke=\"#000000\"/>\n"
    << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kH - kBottom << "\" stroke=\"#000000\"/>\n";
  for (double v = y_min; v <= y_max + 1e-9; v += 10.0) {
    s << "  <text x=\"" << kLeft - 6 << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">"
      << num(v) << "</text>\n";
  }
  std::map<std::uint32_t, bool> ticks;
  for (const auto& p : points) ticks[p.n] = true;
  for (const auto& [n, _] : ticks) {
    s << "  <text x=\"" << num(px(n)) << "\" y=\"" << kH - kBottom + 16
      << "\" text-anchor=\"middle\">" << n << "</text>\n";
  }
  s << "  <text x=\"" << num((kLeft + kW - kRight) / 2) << "\" y=\"" << kH - 8
    << "\" text-anchor=\"middle\">points per mask</text>\n"
    << "  <text x=\"14\" y=\"" << num((kTop + kH - kBottom) / 2)
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << num((kTop + kH - kBottom) / 2)
    << ")\">mIoU upper bound (%)</text>\n";

  std::size_t idx = 0;
  for (auto& [method, pts] : series) {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
    const auto colour = kPalette[idx % kPalette.size()];
    s << "  <polyline class=\"series\" data-method=\"" << xml_escape(method)
      << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      s << (i ? " " : "") << num(px(pts[i].n)) << ',' << num(py(pts[i].miou * 100.0));
    }
    s << "\"/>\n";
    for (const auto& p : pts) {
      s << "  <circle cx=\"" << num(px(p.n)) << "\" cy=\"" << num(py(p.miou * 100.0))
        << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    s << "  <text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 14 + 14 * static_cast<double>(idx)
      << "\" fill=\"" << colour << "\">" << xml_escape(method) << "</text>\n";
    ++idx;
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace maskseq::tools

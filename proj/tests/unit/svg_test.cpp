#include <gtest/gtest.h>

#include "maskseq/error.hpp"
#include "svg.hpp"

using namespace maskseq;

namespace {

std::size_t occurrences(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

QuantSeq ring(std::uint32_t points) {
  QuantSeq s;
  for (std::uint32_t i = 0; i < points; ++i) s.coords.push_back({i * 10, (i * 37) % 1000});
  return s;
}

}  // namespace

TEST(OverlaySvg, OneClosedPathOf32Vertices) {
  const auto cfg = QuantConfig::for_image(640, 480);
  const std::string svg =
      tools::overlay_svg("img.jpg", GroundingOutput::from_masks({ring(32)}), cfg);
  EXPECT_EQ(occurrences(svg, "<path class=\"mask\""), 1u);
  const auto d = svg.find(" d=\"");
  const std::string path = svg.substr(d, svg.find('"', d + 4) - d);
  EXPECT_EQ(occurrences(path, "M"), 1u);
  EXPECT_EQ(occurrences(path, "L"), 31u);
  EXPECT_EQ(occurrences(path, "Z"), 1u);
  EXPECT_NE(svg.find("img.jpg"), std::string::npos);
}

TEST(OverlaySvg, TwoMasksTwoPaths) {
  const auto cfg = QuantConfig::for_image(100, 100);
  const auto out = parse_grounding("[0, 0, 10, 0, 10, 10]<msep>[50, 50, 60, 50, 60, 60]",
                                   ParseMode::kStrict, ExpectKind::kMasks);
  EXPECT_EQ(occurrences(tools::overlay_svg("a.png", out, cfg), "<path class=\"mask\""), 2u);
}

TEST(OverlaySvg, BoxesAndNoTarget) {
  const auto cfg = QuantConfig::for_image(100, 100);
  const auto boxes = GroundingOutput::from_boxes({{0, 0, 500, 500}, {100, 100, 200, 300}});
  EXPECT_EQ(occurrences(tools::overlay_svg("a.png", boxes, cfg), "<rect class=\"box\""), 2u);
  const std::string empty = tools::overlay_svg("a.png", GroundingOutput::no_target(), cfg);
  EXPECT_NE(empty.find("id=\"no-target\""), std::string::npos);
  EXPECT_EQ(occurrences(empty, "<path"), 0u);
}

TEST(OverlaySvg, EscapesTheImageReference) {
  const auto cfg = QuantConfig::for_image(10, 10);
  const std::string svg = tools::overlay_svg("a&b\".png", GroundingOutput::no_target(), cfg);
  EXPECT_EQ(svg.find("a&b"), std::string::npos);
  EXPECT_NE(svg.find("a&amp;b"), std::string::npos);
}

TEST(UpperBoundCsv, ParseAndPlot) {
  const auto pts = tools::parse_upper_bound_csv(
      "n,method,miou\n8,adaptive,0.91\n16,adaptive,0.97\n8,uniform,0.85\n16,uniform,0.95\n");
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[1].n, 16u);
  EXPECT_EQ(pts[2].method, "uniform");
  EXPECT_DOUBLE_EQ(pts[3].miou, 0.95);
  const std::string svg = tools::upper_bound_plot_svg(pts);
  EXPECT_EQ(occurrences(svg, "<polyline class=\"series\""), 2u);
  EXPECT_THROW(tools::parse_upper_bound_csv("a,b,c\n"), ParseError);
  EXPECT_THROW(tools::parse_upper_bound_csv("n,method,miou\n8,adaptive\n"), ParseError);
  EXPECT_THROW(tools::parse_upper_bound_csv("n,method,miou\nx,adaptive,0.5\n"), ParseError);
}

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "maskseq/codec.hpp"
#include "maskseq/geometry.hpp"
#include "maskseq/sampling.hpp"

using namespace maskseq;

namespace {

BinaryMask disk(std::uint32_t size) {
  BinaryMask m(size, size);
  const double c = size / 2.0, r = size * 0.4;
  for (std::uint32_t y = 0; y < size; ++y) {
    for (std::uint32_t x = 0; x < size; ++x) {
      if (std::hypot(x + 0.5 - c, y + 0.5 - c) <= r) m.set(x, y, true);
    }
  }
  return m;
}

// Star-shaped ring with a wobbling radius, so turning angles vary.
Contour wobbly_ring(std::size_t vertices) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < vertices; ++i) {
    const double t = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(vertices);
    const double r = 100 + 30 * std::sin(5 * t) + 10 * std::cos(13 * t);
    pts.push_back({200 + r * std::cos(t), 200 + r * std::sin(t)});
  }
  return Contour(std::move(pts));
}

void BM_Densify(benchmark::State& state) {
  const Contour ring = wobbly_ring(1000);
  const auto m = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(densify(ring, m));
}
BENCHMARK(BM_Densify)->Arg(400)->Arg(4000);

void BM_AdaptiveSample(benchmark::State& state) {
  const Contour ring = wobbly_ring(1000);
  SamplingConfig cfg;
  cfg.n_out = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(adaptive_sample(ring, cfg));
}
BENCHMARK(BM_AdaptiveSample)->Arg(8)->Arg(32);

void BM_EncodeMask(benchmark::State& state) {
  const auto size = static_cast<std::uint32_t>(state.range(0));
  const BinaryMask mask = disk(size);
  const auto cfg = QuantConfig::for_image(size, size, 1000);
  const auto method = state.range(1) != 0 ? SamplingMethod::kAdaptive : SamplingMethod::kUniform;
  for (auto _ : state) benchmark::DoNotOptimize(encode_mask(mask, cfg, SamplingConfig{}, method));
}
BENCHMARK(BM_EncodeMask)->Args({128, 0})->Args({128, 1})->Args({640, 1});

void BM_ParseGrounding(benchmark::State& state) {
  const BinaryMask mask = disk(256);
  const auto cfg = QuantConfig::for_image(256, 256, 1000);
  const QuantSeq seq = encode_mask(mask, cfg, SamplingConfig{}, SamplingMethod::kAdaptive);
  const std::string text = serialize(GroundingOutput::from_masks({seq, seq, seq}));
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_grounding(text, ParseMode::kStrict, ExpectKind::kMasks));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseGrounding);

void BM_Rasterize(benchmark::State& state) {
  const auto size = static_cast<std::uint32_t>(state.range(0));
  const Contour ring = wobbly_ring(32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize_polygon(ring.points(), size, size));
  }
}
BENCHMARK(BM_Rasterize)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();

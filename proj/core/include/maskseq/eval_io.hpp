#pragma once

// File formats for grounding evaluation (see docs/eval-format.md).
//
// Ground truth, one JSON object per line:
//   {"id": "s1", "width": 640, "height": 480, "no_target": false,
//    "masks": [<COCO segmentation>...], "boxes": [[x0, y0, x1, y1]...]}
// Predictions: JSONL {"id": ..., "prediction": "<serialized answer>"} matched
// by id, or a plain text file with one serialized answer per line in
// ground-truth order (an empty line is a no-target answer).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskseq/codec.hpp"
#include "maskseq/metrics.hpp"

namespace maskseq {

/// One ground-truth line. The prediction is left as no-target.
EvalSample sample_from_json(const nlohmann::json& j);

std::vector<EvalSample> read_ground_truth(const std::filesystem::path& path);

struct PredictionStats {
  std::size_t parsed = 0;
  std::size_t repaired = 0;  // parsed with lenient repairs
  std::size_t invalid = 0;   // unparseable, scored as wrong
};

/// Parses predictions leniently against `expect` and stores them in the
/// matching samples. A sample without a prediction is an Error(kParse)
/// naming the id (or a ParseError naming the line for text input).
PredictionStats attach_predictions(std::vector<EvalSample>& samples,
                                   const std::filesystem::path& predictions, ExpectKind expect,
                                   std::uint32_t n_bins = 1000);

/// Same, from in-memory answers aligned with `samples`.
PredictionStats attach_predictions(std::vector<EvalSample>& samples,
                                   std::span<const std::string> answers, ExpectKind expect,
                                   std::uint32_t n_bins = 1000);

/// Shortest round-trip decimal form of a threshold, e.g. "0.5".
std::string threshold_key(double threshold);

nlohmann::json report_to_json(const EvalReport& report);

}  // namespace maskseq

#pragma once

// Attribute-level co-segmentation groups: two positive images that share an
// object with matching attributes, mixed with negatives and shuffled.
//
// Pair manifest (JSONL), one pair per line:
//   {"id": "p1", "split": "train", "items": [
//      {"image": "a.jpg", "width": 640, "height": 480, "segmentation": <COCO seg>},
//      {"image": "b.jpg", "width": 500, "height": 375, "segmentation": <COCO seg>}]}
// Negative pool (JSONL): {"image": "c.jpg"}
//
// Target: "images i and j: <mask i><msep><mask j>" with 0-based positions
// i < j in the shuffled image list.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskseq/converters.hpp"
#include "maskseq/geometry.hpp"
#include "maskseq/records.hpp"

namespace maskseq {

struct AttCoSegItem {
  std::string image;
  BinaryMask mask{1, 1};
};

struct AttCoSegPair {
  std::string id;
  std::string split;
  std::array<AttCoSegItem, 2> items;
};

AttCoSegPair attcoseg_pair_from_json(const nlohmann::json& j, std::size_t line);

struct AttCoSegOptions {
  /// Images per group, positives included. 2 means no negatives.
  std::size_t k_images = 4;
  std::string source = "attcoseg";
  std::uint32_t n_bins = 1000;
  SamplingConfig sampling;
  SamplingMethod method = SamplingMethod::kAdaptive;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// One record per pair. Throws Error(kInvalidArgument) with "pool too small"
/// when fewer than k_images - 2 negatives exist, and "duplicate image" when a
/// group would hold the same image twice.
ConversionResult build_attcoseg(std::span<const AttCoSegPair> pairs,
                                std::span<const std::string> negatives,
                                const AttCoSegOptions& options);

ConversionResult build_attcoseg_files(const std::filesystem::path& pairs,
                                      const std::filesystem::path& negatives,
                                      const AttCoSegOptions& options);

struct AttCoSegAnswer {
  std::array<std::size_t, 2> positives{};
  std::string grounding;
};

std::string format_attcoseg_answer(std::size_t first, std::size_t second,
                                   std::string_view grounding);
/// Throws ParseError when the "images i and j: " prefix is malformed.
AttCoSegAnswer split_attcoseg_answer(std::string_view target);

}  // namespace maskseq

#pragma once

// COCO instances + referring expressions -> instruction records.
//
// Referring expressions come as JSONL (see docs/refs-conversion.md):
//   {"ann_id": 12 | [12, 13] | [] | null, "image_id": 3,
//    "expression": "the left zebra", "split": "val", "ref_id": 7}
// ref_id is optional; the 1-based position among non-blank lines is used
// when it is absent.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskseq/codec.hpp"
#include "maskseq/records.hpp"
#include "maskseq/sampling.hpp"

namespace maskseq {

struct ConvertOptions {
  Task task = Task::kRes;  // rec, res, grec, gres or reg
  /// Keep only refs of this split; all splits when empty.
  std::string split;
  std::string source = "coco";
  /// Prepended to each image file name.
  std::string image_prefix;
  std::uint32_t n_bins = 1000;
  SamplingConfig sampling;
  SamplingMethod method = SamplingMethod::kAdaptive;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct ConversionResult {
  std::vector<InstructionRecord> records;
  ConversionStats stats;
};

/// Records are produced in refs order and do not depend on options.jobs.
/// Throws Error(kParse) for malformed instances or refs.
ConversionResult convert_coco(const nlohmann::json& instances,
                              std::span<const nlohmann::json> refs, const ConvertOptions& options);

ConversionResult convert_coco_files(const std::filesystem::path& instances,
                                    const std::filesystem::path& refs,
                                    const ConvertOptions& options);

/// Ground-truth masks of referring expressions, one per (expression,
/// annotation) in refs order, decoded on demand. Holds pointers into
/// `instances`, which must outlive it.
class RefMaskSource {
 public:
  /// `split` empty keeps every split. Refs naming an unknown image or
  /// annotation are counted in missing().
  RefMaskSource(const nlohmann::json& instances, std::span<const nlohmann::json> refs,
                std::string_view split = {});

  std::size_t size() const { return entries_.size(); }
  std::size_t missing() const { return missing_; }
  BinaryMask mask(std::size_t i) const;

 private:
  struct Entry {
    const nlohmann::json* segmentation = nullptr;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
  };
  std::vector<Entry> entries_;
  std::size_t missing_ = 0;
};

}  // namespace maskseq

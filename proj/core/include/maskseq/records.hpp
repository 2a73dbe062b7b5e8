#pragma once

// Instruction-tuning records ("coinit-record/v1", see docs/record-schema.md).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskseq/templates.hpp"

namespace maskseq {

inline constexpr std::string_view kRecordSchema = "coinit-record/v1";

struct RecordMeta {
  std::string source;
  std::vector<std::int64_t> image_ids;
  std::vector<std::int64_t> ann_ids;
  /// AttCoSeg: positions of the two positive images.
  std::vector<std::size_t> positives;
  std::vector<std::string> warnings;

  friend bool operator==(const RecordMeta&, const RecordMeta&) = default;
};

struct InstructionRecord {
  std::string id;
  Task task = Task::kRes;
  std::string split;
  std::vector<std::string> images;
  std::string instruction;
  std::string target;
  RecordMeta meta;

  friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

nlohmann::json record_to_json(const InstructionRecord& record);
/// Throws Error(kParse) on a wrong schema tag or missing fields.
InstructionRecord record_from_json(const nlohmann::json& j);

/// One compact JSON line per record, '\n'-terminated. Keys are sorted, so
/// equal records give equal bytes.
std::string to_jsonl(std::span<const InstructionRecord> records);

/// The grounding part of a target: for AttCoSeg the text after the
/// "images i and j: " prefix, otherwise the target itself.
std::string grounding_part(const InstructionRecord& record);

/// Checks one record: <image> marker count equals the image count, and a
/// grounding target parses in strict mode. Returns the problems found.
std::vector<std::string> validate_record(const InstructionRecord& record,
                                         std::uint32_t n_bins = 1000);

struct SplitLeak {
  std::string image;
  std::vector<std::string> splits;
};

/// Images that occur in records of more than one split. Images are keyed by
/// meta.image_ids when present, else by the image references.
std::vector<SplitLeak> find_split_leaks(std::span<const InstructionRecord> records);

struct ConversionStats {
  std::size_t records = 0;
  std::size_t no_target = 0;
  std::size_t skipped_missing_ann = 0;
  std::size_t skipped_empty_mask = 0;
  std::size_t skipped_split = 0;
  std::size_t skipped_unsupported = 0;
  std::size_t hole_warnings = 0;
  std::size_t multipart_warnings = 0;

  std::size_t skipped() const {
    return skipped_missing_ann + skipped_empty_mask + skipped_unsupported;
  }
};

nlohmann::json stats_to_json(const ConversionStats& stats);

}  // namespace maskseq

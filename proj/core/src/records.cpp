#include "maskseq/records.hpp"

#include <map>
#include <set>

#include "maskseq/attcoseg.hpp"
#include "maskseq/error.hpp"

namespace maskseq {

nlohmann::json record_to_json(const InstructionRecord& r) {
  nlohmann::json meta = {
      {"source", r.meta.source},
      {"image_ids", r.meta.image_ids},
      {"ann_ids", r.meta.ann_ids},
      {"warnings", r.meta.warnings},
  };
  if (!r.meta.positives.empty()) meta["positives"] = r.meta.positives;
  return {
      {"schema", kRecordSchema},
      {"id", r.id},
      {"task", to_string(r.task)},
      {"split", r.split},
      {"images", r.images},
      {"instruction", r.instruction},
      {"target", r.target},
      {"meta", meta},
  };
}

InstructionRecord record_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != kRecordSchema) {
      throw Error(ErrorCode::kParse, "unsupported record schema '" +
                                         j.at("schema").get<std::string>() + "'");
    }
    InstructionRecord r;
    r.id = j.at("id").get<std::string>();
    r.task = parse_task(j.at("task").get<std::string>());
    r.split = j.at("split").get<std::string>();
    r.images = j.at("images").get<std::vector<std::string>>();
    r.instruction = j.at("instruction").get<std::string>();
    r.target = j.at("target").get<std::string>();
    const auto& m = j.at("meta");
    r.meta.source = m.at("source").get<std::string>();
    r.meta.image_ids = m.at("image_ids").get<std::vector<std::int64_t>>();
    r.meta.ann_ids = m.at("ann_ids").get<std::vector<std::int64_t>>();
    r.meta.warnings = m.at("warnings").get<std::vector<std::string>>();
    if (m.contains("positives")) r.meta.positives = m["positives"].get<std::vector<std::size_t>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed record: ") + e.what());
  }
}

std::string to_jsonl(std::span<const InstructionRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::string grounding_part(const InstructionRecord& record) {
  if (record.task == Task::kAttCoSeg) return split_attcoseg_answer(record.target).grounding;
  return record.target;
}

std::vector<std::string> validate_record(const InstructionRecord& record, std::uint32_t n_bins) {
  std::vector<std::string> problems;
  const std::size_t markers = count_image_markers(record.instruction);
  if (markers != record.images.size()) {
    problems.push_back(record.id + ": " + std::to_string(markers) + " <image> marker(s) for " +
                       std::to_string(record.images.size()) + " image(s)");
  }
  if (is_grounding_task(record.task)) {
    try {
      parse_grounding(grounding_part(record), ParseMode::kStrict, grounding_kind(record.task),
                      n_bins);
    } catch (const Error& e) {
      problems.push_back(record.id + ": target does not parse: " + e.what());
    }
  }
  return problems;
}

std::vector<SplitLeak> find_split_leaks(std::span<const InstructionRecord> records) {
  std::map<std::string, std::set<std::string>> splits_by_image;
  for (const auto& r : records) {
    if (!r.meta.image_ids.empty()) {
      for (const auto id : r.meta.image_ids) splits_by_image["id:" + std::to_string(id)].insert(r.split);
    } else {
      for (const auto& img : r.images) splits_by_image[img].insert(r.split);
    }
  }
  std::vector<SplitLeak> leaks;
  for (const auto& [image, splits] : splits_by_image) {
    if (splits.size() > 1) leaks.push_back({image, {splits.begin(), splits.end()}});
  }
  return leaks;
}

nlohmann::json stats_to_json(const ConversionStats& s) {
  return {
      {"records", s.records},
      {"no_target", s.no_target},
      {"skipped", s.skipped()},
      {"skipped_missing_ann", s.skipped_missing_ann},
      {"skipped_empty_mask", s.skipped_empty_mask},
      {"skipped_split", s.skipped_split},
      {"skipped_unsupported", s.skipped_unsupported},
      {"hole_warnings", s.hole_warnings},
      {"multipart_warnings", s.multipart_warnings},
  };
}

}  // namespace maskseq

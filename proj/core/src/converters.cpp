#include "maskseq/converters.hpp"

#include <optional>
#include <unordered_map>

#include "log_internal.hpp"
#include "maskseq/error.hpp"
#include "maskseq/jsonl.hpp"
#include "maskseq/mask_io.hpp"
#include "maskseq/parallel.hpp"
#include "maskseq/random.hpp"

namespace maskseq {

namespace {

struct ImageInfo {
  std::string file_name;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

struct CocoIndex {
  std::unordered_map<std::int64_t, ImageInfo> images;
  std::unordered_map<std::int64_t, const nlohmann::json*> annotations;
};

CocoIndex index_instances(const nlohmann::json& instances) {
  CocoIndex index;
  try {
    for (const auto& img : instances.at("images")) {
      ImageInfo info;
      info.file_name = img.at("file_name").get<std::string>();
      info.width = img.at("width").get<std::uint32_t>();
      info.height = img.at("height").get<std::uint32_t>();
      index.images.emplace(img.at("id").get<std::int64_t>(), std::move(info));
    }
    for (const auto& ann : instances.at("annotations")) {
      index.annotations.emplace(ann.at("id").get<std::int64_t>(), &ann);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed instances: ") + e.what());
  }
  return index;
}

struct RefItem {
  std::string key;
  std::vector<std::int64_t> ann_ids;
  std::int64_t image_id = 0;
  std::string expression;
  std::string split;
};

RefItem ref_from_json(const nlohmann::json& j, std::size_t line) {
  try {
    RefItem r;
    r.key = j.contains("ref_id") ? (j["ref_id"].is_string() ? j["ref_id"].get<std::string>()
                                                             : j["ref_id"].dump())
                                 : std::to_string(line);
    const auto& ann = j.at("ann_id");
    if (ann.is_number_integer()) {
      r.ann_ids.push_back(ann.get<std::int64_t>());
    } else if (ann.is_array()) {
      r.ann_ids = ann.get<std::vector<std::int64_t>>();
    } else if (!ann.is_null()) {
      throw ParseError("ann_id must be an integer, a list or null", line, true);
    }
    r.image_id = j.at("image_id").get<std::int64_t>();
    r.expression = j.at("expression").get<std::string>();
    r.split = j.value("split", std::string{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed ref: ") + e.what(), line, true);
  }
}

enum class Skip { kNone, kMissingAnn, kEmptyMask, kUnsupported };

struct Outcome {
  Skip skip = Skip::kNone;
  InstructionRecord record;
  std::size_t holes = 0;
  std::size_t multipart = 0;
};

bool single_target_task(Task task) {
  return task == Task::kRec || task == Task::kRes || task == Task::kReg;
}

BBox ann_box(const nlohmann::json& ann) {
  const auto xywh = ann.at("bbox").get<std::vector<double>>();
  if (xywh.size() != 4) throw Error(ErrorCode::kParse, "bbox must have 4 numbers");
  return BBox::from_xywh(xywh[0], xywh[1], xywh[2], xywh[3]);
}

Outcome convert_one(const RefItem& ref, const CocoIndex& index, const ConvertOptions& opt) {
  Outcome out;
  if (single_target_task(opt.task) && ref.ann_ids.size() != 1) {
    out.skip = Skip::kUnsupported;
    return out;
  }
  const auto img_it = index.images.find(ref.image_id);
  if (img_it == index.images.end()) {
    out.skip = Skip::kMissingAnn;
    return out;
  }
  const ImageInfo& img = img_it->second;
  std::vector<const nlohmann::json*> anns;
  for (const auto id : ref.ann_ids) {
    const auto it = index.annotations.find(id);
    if (it == index.annotations.end() || it->second->value("image_id", std::int64_t{-1}) != ref.image_id) {
      out.skip = Skip::kMissingAnn;
      return out;
    }
    anns.push_back(it->second);
  }

  InstructionRecord& r = out.record;
  r.id = opt.source + "-" + std::string(to_string(opt.task)) + "-" + ref.key;
  r.task = opt.task;
  r.split = ref.split;
  r.images = {opt.image_prefix + img.file_name};
  r.meta.source = opt.source;
  r.meta.image_ids = {ref.image_id};
  r.meta.ann_ids = ref.ann_ids;

  const QuantConfig qcfg = QuantConfig::for_image(img.width, img.height, opt.n_bins);
  Bindings bindings{{"expr", ref.expression}};

  if (opt.task == Task::kRec || opt.task == Task::kGrec || opt.task == Task::kReg) {
    std::vector<QuantBox> boxes;
    for (const auto* ann : anns) boxes.push_back(quantize_box(ann_box(*ann), qcfg));
    if (opt.task == Task::kReg) {
      bindings = {{"objs", serialize_box(boxes.front())}};
      r.target = ref.expression;
    } else {
      r.target = boxes.empty() ? "" : serialize(GroundingOutput::from_boxes(std::move(boxes)));
    }
  } else {
    std::vector<QuantSeq> seqs;
    for (std::size_t i = 0; i < anns.size(); ++i) {
      const BinaryMask mask = mask_from_segmentation(anns[i]->at("segmentation"), img.width,
                                                     img.height);
      if (!mask.any()) {
        out.skip = Skip::kEmptyMask;
        return out;
      }
      const std::string ann = "ann " + std::to_string(ref.ann_ids[i]);
      if (has_holes(mask)) {
        ++out.holes;
        r.meta.warnings.push_back(ann + " has holes; outer boundary kept");
      }
      const std::size_t parts = extract_contours(mask).size();
      if (parts > 1) {
        ++out.multipart;
        r.meta.warnings.push_back(ann + " has " + std::to_string(parts) +
                                  " parts; largest kept");
      }
      seqs.push_back(encode_mask(mask, qcfg, opt.sampling, opt.method));
    }
    r.target = seqs.empty() ? "" : serialize(GroundingOutput::from_masks(std::move(seqs)));
  }

  r.instruction =
      TemplateRegistry::builtin().render(opt.task, bindings, item_seed(opt.seed, r.id), 1);
  return out;
}

}  // namespace

ConversionResult convert_coco(const nlohmann::json& instances,
                              std::span<const nlohmann::json> refs, const ConvertOptions& options) {
  switch (options.task) {
    case Task::kRec:
    case Task::kRes:
    case Task::kGrec:
    case Task::kGres:
    case Task::kReg:
      break;
    default:
      throw Error(ErrorCode::kInvalidArgument, "COCO conversion supports rec, res, grec, gres "
                                               "and reg, not " +
                                                   std::string(to_string(options.task)));
  }
  options.sampling.validate();

  const CocoIndex index = index_instances(instances);
  ConversionResult result;
  std::vector<RefItem> items;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    RefItem ref = ref_from_json(refs[i], i + 1);
    if (!options.split.empty() && ref.split != options.split) {
      ++result.stats.skipped_split;
      continue;
    }
    items.push_back(std::move(ref));
  }

  std::vector<Outcome> outcomes(items.size());
  parallel_for(items.size(), options.jobs, [&](std::size_t i) {
    try {
      outcomes[i] = convert_one(items[i], index, options);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw Error(e.code(), "ref " + items[i].key + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, "ref " + items[i].key + ": " + e.what());
    }
  });

  ConversionStats& stats = result.stats;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    Outcome& o = outcomes[i];
    switch (o.skip) {
      case Skip::kMissingAnn:
        ++stats.skipped_missing_ann;
        detail::logger().warn("ref {}: missing image or annotation, skipped", items[i].key);
        continue;
      case Skip::kEmptyMask:
        ++stats.skipped_empty_mask;
        detail::logger().warn("ref {}: empty mask, skipped", items[i].key);
        continue;
      case Skip::kUnsupported:
        ++stats.skipped_unsupported;
        detail::logger().info("ref {}: {} annotations for a single-target task, skipped",
                              items[i].key, items[i].ann_ids.size());
        continue;
      case Skip::kNone:
        break;
    }
    stats.hole_warnings += o.holes;
    stats.multipart_warnings += o.multipart;
    if (is_grounding_task(o.record.task) && o.record.target.empty()) ++stats.no_target;
    result.records.push_back(std::move(o.record));
  }
  stats.records = result.records.size();
  return result;
}

ConversionResult convert_coco_files(const std::filesystem::path& instances,
                                    const std::filesystem::path& refs,
                                    const ConvertOptions& options) {
  const nlohmann::json inst = read_json_file(instances);
  const std::vector<nlohmann::json> ref_lines = read_jsonl(refs);
  return convert_coco(inst, ref_lines, options);
}

RefMaskSource::RefMaskSource(const nlohmann::json& instances,
                             std::span<const nlohmann::json> refs, std::string_view split) {
  const CocoIndex index = index_instances(instances);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const RefItem ref = ref_from_json(refs[i], i + 1);
    if (!split.empty() && ref.split != split) continue;
    const auto img = index.images.find(ref.image_id);
    if (img == index.images.end()) {
      ++missing_;
      continue;
    }
    for (const auto id : ref.ann_ids) {
      const auto ann = index.annotations.find(id);
      if (ann == index.annotations.end() || !ann->second->contains("segmentation")) {
        ++missing_;
        continue;
      }
      entries_.push_back({&ann->second->at("segmentation"), img->second.width, img->second.height});
    }
  }
}

BinaryMask RefMaskSource::mask(std::size_t i) const {
  const Entry& e = entries_.at(i);
  return mask_from_segmentation(*e.segmentation, e.width, e.height);
}

}  // namespace maskseq

#include "maskseq/eval_io.hpp"

#include <array>
#include <charconv>
#include <unordered_map>

#include "log_internal.hpp"
#include "maskseq/error.hpp"
#include "maskseq/jsonl.hpp"
#include "maskseq/mask_io.hpp"

namespace maskseq {

namespace {

std::uint32_t positive_dim(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<std::int64_t>() <= 0) {
    throw Error(ErrorCode::kInvalidArgument, std::string("missing or invalid '") + key + "'");
  }
  return j[key].get<std::uint32_t>();
}

BBox box_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorCode::kInvalidArgument, "a box must be [x0, y0, x1, y1]");
  }
  return BBox::from_corners({j[0].get<double>(), j[1].get<double>()},
                            {j[2].get<double>(), j[3].get<double>()});
}

PredictionStats& record(PredictionStats& stats, EvalSample& sample, const std::string& answer,
                        ExpectKind expect, std::uint32_t n_bins) {
  try {
    const ParseReport report =
        parse_grounding_report(answer, {ParseMode::kLenient, expect, n_bins});
    sample.pred = report.output;
    sample.pred_invalid = false;
    ++stats.parsed;
    if (report.warnings > 0) ++stats.repaired;
  } catch (const ParseError& e) {
    detail::logger().warn("sample '{}': unparseable prediction: {}", sample.id, e.what());
    sample.pred = GroundingOutput::no_target();
    sample.pred_invalid = true;
    ++stats.invalid;
  }
  return stats;
}

}  // namespace

EvalSample sample_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "sample must be a JSON object");
  EvalSample s;
  if (!j.contains("id")) throw Error(ErrorCode::kInvalidArgument, "missing 'id'");
  s.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
  s.width = positive_dim(j, "width");
  s.height = positive_dim(j, "height");
  s.gt.no_target = j.value("no_target", false);
  if (j.contains("masks")) {
    for (const auto& seg : j["masks"]) {
      s.gt.masks.push_back(mask_from_segmentation(seg, s.width, s.height));
    }
  }
  if (j.contains("boxes")) {
    for (const auto& b : j["boxes"]) s.gt.boxes.push_back(box_from_json(b));
  }
  s.validate();
  return s;
}

std::vector<EvalSample> read_ground_truth(const std::filesystem::path& path) {
  std::vector<EvalSample> samples;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      samples.push_back(sample_from_json(j));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), line, true);
    }
  });
  return samples;
}

PredictionStats attach_predictions(std::vector<EvalSample>& samples,
                                   std::span<const std::string> answers, ExpectKind expect,
                                   std::uint32_t n_bins) {
  if (answers.size() < samples.size()) {
    throw ParseError("missing prediction for sample '" + samples[answers.size()].id + "'",
                     answers.size() + 1, true);
  }
  if (answers.size() > samples.size()) {
    throw ParseError("more predictions than samples", samples.size() + 1, true);
  }
  PredictionStats stats;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    record(stats, samples[i], answers[i], expect, n_bins);
  }
  return stats;
}

PredictionStats attach_predictions(std::vector<EvalSample>& samples,
                                   const std::filesystem::path& predictions, ExpectKind expect,
                                   std::uint32_t n_bins) {
  if (predictions.extension() == ".jsonl" || predictions.extension() == ".json") {
    std::unordered_map<std::string, std::string> by_id;
    for_each_jsonl(predictions, [&](const nlohmann::json& j, std::size_t line) {
      if (!j.is_object() || !j.contains("id") || !j.contains("prediction") ||
          !j["prediction"].is_string()) {
        throw ParseError("prediction lines need 'id' and a string 'prediction'", line, true);
      }
      const std::string id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      if (!by_id.emplace(id, j["prediction"].get<std::string>()).second) {
        throw ParseError("duplicate prediction for sample '" + id + "'", line, true);
      }
    });
    PredictionStats stats;
    for (auto& s : samples) {
      const auto it = by_id.find(s.id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::kParse, "missing prediction for sample '" + s.id + "'");
      }
      record(stats, s, it->second, expect, n_bins);
    }
    return stats;
  }

  std::vector<std::string> lines;
  const std::string text = read_text_file(predictions);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return attach_predictions(samples, lines, expect, n_bins);
}

std::string threshold_key(double threshold) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), threshold);
  return std::string(buf.data(), res.ptr);
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["task"] = std::string(to_string(report.task));
  j["sample_count"] = report.sample_count;
  if (report.miou) j["miou"] = *report.miou;
  if (report.giou) j["giou"] = *report.giou;
  if (report.n_acc) {
    j["n_acc"] = *report.n_acc;
    j["n_acc_vacuous"] = report.n_acc_vacuous;
  }
  if (report.t_acc) {
    j["t_acc"] = *report.t_acc;
    j["t_acc_vacuous"] = report.t_acc_vacuous;
  }
  if (!report.pr_at.empty()) {
    nlohmann::json pr = nlohmann::json::object();
    for (const auto& [t, v] : report.pr_at) pr[threshold_key(t)] = v;
    j["pr_at"] = pr;
  }
  return j;
}

}  // namespace maskseq

// maskseq: encode/decode masks as point sequences, evaluate grounding answers,
// measure the representation's upper bound and build instruction records.
//
// Exit codes: 0 success, 1 failed check, 2 usage, parse or I/O error,
// 3 empty mask or no-target answer where a target is needed.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "maskseq/attcoseg.hpp"
#include "maskseq/codec.hpp"
#include "maskseq/converters.hpp"
#include "maskseq/error.hpp"
#include "maskseq/eval_io.hpp"
#include "maskseq/jsonl.hpp"
#include "maskseq/log.hpp"
#include "maskseq/mask_io.hpp"
#include "maskseq/metrics.hpp"
#include "maskseq/records.hpp"
#include "maskseq/version.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace maskseq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitParse = 2;
constexpr int kExitEmpty = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::uint32_t n_bins = 1000;
  std::uint32_t points = 32;
  std::string method = "adaptive";
  std::uint32_t dense = 400;
  double lattice_tolerance = 1.0;
  unsigned jobs = 0;
  std::string format = "text";
};

SamplingConfig sampling_config(const Globals& g) {
  SamplingConfig cfg;
  cfg.n_out = g.points;
  cfg.m_dense = std::max(g.dense, g.points);
  cfg.lattice_tolerance = g.lattice_tolerance;
  cfg.validate();
  return cfg;
}

std::vector<std::uint32_t> parse_u32_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size() || v == 0 || v > 1'000'000) throw std::invalid_argument(item);
      out.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad list entry '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad threshold '" + item + "'");
    }
  }
  return out;
}

std::string read_answer(const std::string& inline_text, const std::string& file) {
  if (file.empty()) return inline_text;
  std::string text = read_text_file(file);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

GroundingOutput parse_answer_auto(const std::string& text, const std::string& kind,
                                  std::uint32_t n_bins) {
  if (kind == "boxes") return parse_grounding(text, ParseMode::kStrict, ExpectKind::kBoxes, n_bins);
  if (kind == "masks") return parse_grounding(text, ParseMode::kStrict, ExpectKind::kMasks, n_bins);
  try {
    return parse_grounding(text, ParseMode::kStrict, ExpectKind::kBoxes, n_bins);
  } catch (const ParseError&) {
    return parse_grounding(text, ParseMode::kStrict, ExpectKind::kMasks, n_bins);
  }
}

// --- encode -----------------------------------------------------------------

struct EncodeArgs {
  std::string input;
  std::string out;
};

int run_encode(const Globals& g, const EncodeArgs& a) {
  const BinaryMask mask = read_mask_file(a.input);
  const QuantConfig qcfg = QuantConfig::for_image(mask.width(), mask.height(), g.n_bins);
  const QuantSeq seq =
      encode_mask(mask, qcfg, sampling_config(g), parse_sampling_method(g.method));
  const std::string text = serialize_sequence(seq);
  if (g.format == "json") {
    const nlohmann::json j = {{"sequence", text},
                              {"points", seq.point_count()},
                              {"width", mask.width()},
                              {"height", mask.height()},
                              {"n_bins", g.n_bins},
                              {"method", g.method}};
    write_text_output(a.out, j.dump() + "\n");
  } else {
    write_text_output(a.out, text + "\n");
  }
  return kExitOk;
}

// --- decode -----------------------------------------------------------------

struct DecodeArgs {
  std::string sequence;
  std::string from_file;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::string out;
};

int run_decode(const Globals& g, const DecodeArgs& a) {
  const std::string text = read_answer(a.sequence, a.from_file);
  const GroundingOutput parsed =
      parse_grounding(text, ParseMode::kStrict, ExpectKind::kMasks, g.n_bins);
  if (parsed.is_no_target()) throw Error(ErrorCode::kNoTarget, "no-target answer, nothing to decode");
  const QuantConfig qcfg = QuantConfig::for_image(a.width, a.height, g.n_bins);
  BinaryMask mask(a.width, a.height);
  for (const auto& seq : parsed.masks()) mask |= decode_mask(seq, qcfg);
  write_png_mask(mask, a.out);
  return kExitOk;
}

// --- upper-bound --------------------------------------------------------------

struct UpperBoundArgs {
  std::string png_dir;
  std::string gt;
  std::string coco;
  std::string refs;
  std::string split;
  std::string n_list = "8,12,16,24,32";
  std::string methods = "adaptive,uniform";
  std::string out;
  std::string plot;
};

int run_upper_bound(const Globals& g, const UpperBoundArgs& a) {
  const auto n_values = parse_u32_list(a.n_list);
  std::vector<SamplingMethod> methods;
  {
    std::stringstream ss(a.methods);
    std::string m;
    while (std::getline(ss, m, ',')) methods.push_back(parse_sampling_method(m));
  }

  // Corpus: count + on-demand mask access.
  std::vector<BinaryMask> owned;
  nlohmann::json instances;
  std::vector<nlohmann::json> ref_lines;
  std::unique_ptr<RefMaskSource> refs;
  std::size_t count = 0;
  std::function<BinaryMask(std::size_t)> mask_at;
  if (!a.png_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.png_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    count = files.size();
    mask_at = [files](std::size_t i) { return read_png_mask(files[i]); };
  } else if (!a.gt.empty()) {
    for (auto& s : read_ground_truth(a.gt)) {
      for (auto& m : s.gt.masks) owned.push_back(std::move(m));
    }
    count = owned.size();
    mask_at = [&owned](std::size_t i) { return owned[i]; };
  } else {
    instances = read_json_file(a.coco);
    ref_lines = read_jsonl(a.refs);
    refs = std::make_unique<RefMaskSource>(instances, ref_lines, a.split);
    if (refs->missing() > 0) {
      std::cerr << "upper-bound: " << refs->missing() << " ref(s) with missing annotations skipped\n";
    }
    count = refs->size();
    mask_at = [&refs](std::size_t i) { return refs->mask(i); };
  }
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "corpus is empty");

  UpperBoundOptions opt;
  opt.n_bins = g.n_bins;
  opt.m_dense = g.dense;
  opt.lattice_tolerance = g.lattice_tolerance;
  opt.jobs = g.jobs;

  std::vector<UpperBoundRow> rows;
  for (const auto method : methods) {
    auto r = upper_bound_eval(count, mask_at, n_values, method, opt);
    rows.insert(rows.end(), r.begin(), r.end());
  }

  std::ostringstream csv;
  csv << "n,method,miou\n";
  for (const auto& r : rows) {
    csv << r.n << ',' << to_string(r.method) << ',' << threshold_key(r.miou) << '\n';
  }
  if (g.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
      j.push_back({{"n", r.n},
                   {"method", to_string(r.method)},
                   {"miou", r.miou},
                   {"evaluated", r.evaluated},
                   {"skipped", r.skipped}});
    }
    write_text_output(a.out, j.dump(2) + "\n");
  } else {
    write_text_output(a.out, csv.str());
  }
  if (!a.plot.empty()) {
    // The plot is drawn from the CSV text, the artifact of record.
    write_text_output(a.plot, tools::upper_bound_plot_svg(tools::parse_upper_bound_csv(csv.str())));
  }
  return kExitOk;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string gt;
  std::string pred;
  std::string task = "res";
  std::string thresholds = "0.5";
  std::string out;
};

int run_eval(const Globals& g, const EvalArgs& a) {
  const EvalTask task = parse_eval_task(a.task);
  std::vector<EvalSample> samples = read_ground_truth(a.gt);
  const PredictionStats ps = attach_predictions(samples, a.pred, expected_output(task), g.n_bins);
  if (ps.invalid > 0 || ps.repaired > 0) {
    std::cerr << "eval: " << ps.invalid << " unparseable, " << ps.repaired
              << " repaired prediction(s)\n";
  }
  const auto thresholds = parse_double_list(a.thresholds);
  const EvalReport report = evaluate(samples, task, thresholds, g.n_bins, g.jobs);
  nlohmann::json j = report_to_json(report);
  j["invalid_predictions"] = ps.invalid;
  if (g.format == "csv") {
    std::ostringstream csv;
    csv << "metric,value\n";
    for (const auto& [k, v] : j.items()) {
      if (v.is_object()) {
        for (const auto& [t, pv] : v.items()) csv << k << '@' << t << ',' << pv.dump() << '\n';
      } else {
        csv << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
      }
    }
    write_text_output(a.out, csv.str());
  } else {
    write_text_output(a.out, j.dump(2) + "\n");
  }
  return kExitOk;
}

// --- convert / attcoseg / validate-splits -------------------------------------

struct ConvertArgs {
  std::string instances;
  std::string refs;
  std::string task = "res";
  std::string split;
  std::string source = "coco";
  std::string image_prefix;
  std::string out;
  std::string stats;
};

int finish_records(const ConversionResult& result, const std::string& out,
                   const std::string& stats_path, std::uint32_t n_bins) {
  std::size_t problems = 0;
  for (const auto& r : result.records) {
    for (const auto& p : validate_record(r, n_bins)) {
      std::cerr << "invalid record " << p << '\n';
      ++problems;
    }
  }
  write_text_output(out, to_jsonl(result.records));
  const std::string stats = stats_to_json(result.stats).dump(2) + "\n";
  if (stats_path.empty()) {
    std::cerr << stats;
  } else {
    write_text_output(stats_path, stats);
  }
  return problems == 0 ? kExitOk : kExitCheckFailed;
}

int run_convert(const Globals& g, const ConvertArgs& a) {
  ConvertOptions opt;
  opt.task = parse_task(a.task);
  opt.split = a.split;
  opt.source = a.source;
  opt.image_prefix = a.image_prefix;
  opt.n_bins = g.n_bins;
  opt.sampling = sampling_config(g);
  opt.method = parse_sampling_method(g.method);
  opt.seed = g.seed;
  opt.jobs = g.jobs;
  return finish_records(convert_coco_files(a.instances, a.refs, opt), a.out, a.stats, g.n_bins);
}

struct AttCoSegArgs {
  std::string pairs;
  std::string negatives;
  std::size_t k_images = 4;
  std::string source = "attcoseg";
  std::string out;
  std::string stats;
};

int run_attcoseg(const Globals& g, const AttCoSegArgs& a) {
  AttCoSegOptions opt;
  opt.k_images = a.k_images;
  opt.source = a.source;
  opt.n_bins = g.n_bins;
  opt.sampling = sampling_config(g);
  opt.method = parse_sampling_method(g.method);
  opt.seed = g.seed;
  opt.jobs = g.jobs;
  return finish_records(build_attcoseg_files(a.pairs, a.negatives, opt), a.out, a.stats, g.n_bins);
}

int run_validate_splits(const Globals& g, const std::vector<std::string>& files) {
  std::vector<InstructionRecord> records;
  std::size_t problems = 0;
  for (const auto& f : files) {
    for_each_jsonl(f, [&](const nlohmann::json& j, std::size_t) {
      records.push_back(record_from_json(j));
      for (const auto& p : validate_record(records.back(), g.n_bins)) {
        std::cerr << "invalid record " << p << '\n';
        ++problems;
      }
    });
  }
  const auto leaks = find_split_leaks(records);
  nlohmann::json j = {{"records", records.size()},
                      {"invalid_records", problems},
                      {"leaked_images", nlohmann::json::array()}};
  for (const auto& l : leaks) j["leaked_images"].push_back({{"image", l.image}, {"splits", l.splits}});
  write_text_output("-", j.dump(2) + "\n");
  return leaks.empty() && problems == 0 ? kExitOk : kExitCheckFailed;
}

// --- visualize ----------------------------------------------------------------

struct VisualizeArgs {
  std::string image;
  std::string answer;
  std::string from_file;
  std::string kind = "auto";
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::string out;
};

int run_visualize(const Globals& g, const VisualizeArgs& a) {
  const GroundingOutput parsed = parse_answer_auto(read_answer(a.answer, a.from_file), a.kind, g.n_bins);
  const QuantConfig qcfg = QuantConfig::for_image(a.width, a.height, g.n_bins);
  write_text_output(a.out, tools::overlay_svg(a.image, parsed, qcfg));
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyMask:
    case ErrorCode::kNoTarget:
      return kExitEmpty;
    default:
      return kExitParse;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mask/box point-sequence codec, grounding metrics and instruction-record tools",
               "maskseq"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for template choice and group shuffles")
      ->capture_default_str();
  app.add_option("--n-bins", g.n_bins, "Quantization bins per axis")
      ->check(CLI::Range(2u, 1u << 20))
      ->capture_default_str();
  app.add_option("--points", g.points, "Points per mask sequence")
      ->check(CLI::Range(3u, 1u << 16))
      ->capture_default_str();
  app.add_option("--method", g.method, "Contour sampling method")
      ->check(CLI::IsMember({"uniform", "adaptive"}))
      ->capture_default_str();
  app.add_option("--dense", g.dense, "Dense resampling count before point selection")
      ->check(CLI::Range(3u, 1u << 20))
      ->capture_default_str();
  app.add_option("--lattice-tolerance", g.lattice_tolerance,
                 "Pixel-staircase removal tolerance (px) before adaptive sampling; 0 disables")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Mask file (PNG or RLE JSON) to a point sequence");
  encode->add_option("mask", enc.input, "Mask file")->required()->check(CLI::ExistingFile);
  encode->add_option("-o,--out", enc.out, "Output file (default stdout)");

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Point sequence(s) to a PNG mask");
  auto* dec_seq = decode->add_option("sequence", dec.sequence, "Serialized answer");
  auto* dec_file = decode->add_option("--from-file", dec.from_file, "Read the answer from a file")
                       ->check(CLI::ExistingFile);
  dec_seq->excludes(dec_file);
  decode->add_option("--width", dec.width, "Image width")->required()->check(CLI::PositiveNumber);
  decode->add_option("--height", dec.height, "Image height")->required()->check(CLI::PositiveNumber);
  decode->add_option("-o,--out", dec.out, "Output PNG")->required();

  UpperBoundArgs ub;
  auto* upper = app.add_subcommand("upper-bound", "Mean encode/decode IoU per point count");
  auto* ub_png = upper->add_option("--png-dir", ub.png_dir, "Directory of PNG masks")
                     ->check(CLI::ExistingDirectory);
  auto* ub_gt = upper->add_option("--gt", ub.gt, "Ground-truth JSONL (every mask counts)")
                    ->check(CLI::ExistingFile);
  auto* ub_coco = upper->add_option("--coco", ub.coco, "COCO instances JSON")
                      ->check(CLI::ExistingFile);
  auto* ub_refs = upper->add_option("--refs", ub.refs, "Referring-expression JSONL")
                      ->check(CLI::ExistingFile);
  upper->add_option("--split", ub.split, "Keep refs of this split");
  upper->add_option("--n-list", ub.n_list, "Point counts")->capture_default_str();
  upper->add_option("--methods", ub.methods, "Sampling methods")->capture_default_str();
  upper->add_option("-o,--out", ub.out, "CSV output (default stdout)");
  upper->add_option("--plot", ub.plot, "SVG line plot drawn from the CSV");
  ub_coco->needs(ub_refs);
  ub_refs->needs(ub_coco);
  ub_png->excludes(ub_gt)->excludes(ub_coco);
  ub_gt->excludes(ub_coco);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("gt", ev.gt, "Ground-truth JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("pred", ev.pred, "Predictions (.jsonl by id, or text one per line)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--task", ev.task, "Metric family")
      ->check(CLI::IsMember({"rec", "res", "grec", "gres"}))
      ->capture_default_str();
  eval->add_option("--thresholds", ev.thresholds, "IoU thresholds for precision")
      ->capture_default_str();
  eval->add_option("-o,--out", ev.out, "Report file (default stdout)");

  ConvertArgs cv;
  auto* convert = app.add_subcommand("convert", "COCO instances + refs JSONL to instruction records");
  convert->add_option("--instances", cv.instances, "COCO instances JSON")
      ->required()
      ->check(CLI::ExistingFile);
  convert->add_option("--refs", cv.refs, "Referring-expression JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  convert->add_option("--task", cv.task, "Record task")
      ->check(CLI::IsMember({"rec", "res", "grec", "gres", "reg"}))
      ->capture_default_str();
  convert->add_option("--split", cv.split, "Keep refs of this split");
  convert->add_option("--source", cv.source, "Source dataset name")->capture_default_str();
  convert->add_option("--image-prefix", cv.image_prefix, "Prefix for image file names");
  convert->add_option("-o,--out", cv.out, "Output JSONL (default stdout)");
  convert->add_option("--stats", cv.stats, "Stats JSON file (default stderr)");

  AttCoSegArgs ac;
  auto* attcoseg = app.add_subcommand("attcoseg", "Build attribute co-segmentation groups");
  attcoseg->add_option("--pairs", ac.pairs, "Pair manifest JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  attcoseg->add_option("--negatives", ac.negatives, "Negative image pool JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  attcoseg->add_option("-k,--k-images", ac.k_images, "Images per group")
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
  attcoseg->add_option("--source", ac.source, "Source dataset name")->capture_default_str();
  attcoseg->add_option("-o,--out", ac.out, "Output JSONL (default stdout)");
  attcoseg->add_option("--stats", ac.stats, "Stats JSON file (default stderr)");

  std::vector<std::string> record_files;
  auto* validate = app.add_subcommand("validate-splits",
                                      "Check record files for invalid targets and split leaks");
  validate->add_option("records", record_files, "Record JSONL files")
      ->required()
      ->check(CLI::ExistingFile);

  VisualizeArgs vz;
  auto* visualize = app.add_subcommand("visualize", "SVG overlay of an answer on an image");
  visualize->add_option("--image", vz.image, "Image reference placed under the overlay");
  auto* vz_answer = visualize->add_option("answer", vz.answer, "Serialized answer");
  auto* vz_file = visualize->add_option("--from-file", vz.from_file, "Read the answer from a file")
                      ->check(CLI::ExistingFile);
  vz_answer->excludes(vz_file);
  visualize->add_option("--kind", vz.kind, "Answer kind")
      ->check(CLI::IsMember({"auto", "masks", "boxes"}))
      ->capture_default_str();
  visualize->add_option("--width", vz.width, "Image width")->required()->check(CLI::PositiveNumber);
  visualize->add_option("--height", vz.height, "Image height")
      ->required()
      ->check(CLI::PositiveNumber);
  visualize->add_option("-o,--out", vz.out, "Output SVG (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitParse;
  }

  try {
    init_logging();
    if (*encode) return run_encode(g, enc);
    if (*decode) return run_decode(g, dec);
    if (*upper) {
      if (ub_png->count() + ub_gt->count() + ub_coco->count() == 0) {
        throw Error(ErrorCode::kInvalidArgument, "give --png-dir, --gt or --coco with --refs");
      }
      return run_upper_bound(g, ub);
    }
    if (*eval) return run_eval(g, ev);
    if (*convert) return run_convert(g, cv);
    if (*attcoseg) return run_attcoseg(g, ac);
    if (*validate) return run_validate_splits(g, record_files);
    if (*visualize) return run_visualize(g, vz);
  } catch (const Error& e) {
    std::cerr << "maskseq: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "maskseq: " << e.what() << '\n';
    return kExitParse;
  }
  return kExitParse;
}

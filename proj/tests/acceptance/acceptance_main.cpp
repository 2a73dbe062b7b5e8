// Acceptance run: one PASS / FAIL / SKIPPED line per criterion, followed by
// indented info lines. Exit status is 1 when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "maskseq/codec.hpp"
#include "maskseq/converters.hpp"
#include "maskseq/error.hpp"
#include "maskseq/eval_io.hpp"
#include "maskseq/jsonl.hpp"
#include "maskseq/log.hpp"
#include "maskseq/metrics.hpp"
#include "maskseq/sampling.hpp"
#include "support/naive_metrics.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace maskseq;

namespace {

const fs::path kFixtures = MASKSEQ_FIXTURE_DIR;
// Every synthetic corpus below is drawn from this seed.
constexpr std::uint64_t kCorpusSeed = 1;

struct Outcome {
  enum class Status { kPass, kFail, kSkipped } status = Status::kPass;
  std::string summary;
  std::vector<std::string> info;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome::Status pass_if(bool ok) { return ok ? Outcome::Status::kPass : Outcome::Status::kFail; }

// ---------------------------------------------------------------------------

Outcome quantization_bound() {
  std::mt19937_64 rng(kCorpusSeed);
  std::uniform_real_distribution<double> dim(1.0, 4096.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto t0 = Clock::now();
  std::size_t violations = 0;
  double worst = 0.0;  // error / (dim / n_bins)
  for (int i = 0; i < 100000; ++i) {
    const auto cfg = QuantConfig::for_image(dim(rng), dim(rng), 1000);
    const Point p{unit(rng) * cfg.image_w, unit(rng) * cfg.image_h};
    const Point back = dequantize(quantize(p, cfg), cfg);
    const double ex = std::abs(back.x - p.x) / (cfg.image_w / cfg.n_bins);
    const double ey = std::abs(back.y - p.y) / (cfg.image_h / cfg.n_bins);
    worst = std::max({worst, ex, ey});
    if (ex > 1.0 + 1e-9 || ey > 1.0 + 1e-9) ++violations;
  }
  const double secs = seconds_since(t0);
  return {pass_if(violations == 0 && secs < 1.0),
          fmt("1e5 points, %zu violations, worst error %.4f bin widths, %.3f s (limit 1 s)",
              violations, worst, secs),
          {}};
}

GroundingOutput random_output(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> bin(0, 999);
  std::uniform_int_distribution<int> groups(1, 4);
  std::uniform_int_distribution<int> points(3, 48);
  switch (rng() % 3) {
    case 0:
      return GroundingOutput::no_target();
    case 1: {
      std::vector<QuantBox> boxes(static_cast<std::size_t>(groups(rng)));
      for (auto& b : boxes) b = {bin(rng), bin(rng), bin(rng), bin(rng)};
      return GroundingOutput::from_boxes(std::move(boxes));
    }
    default: {
      std::vector<QuantSeq> masks(static_cast<std::size_t>(groups(rng)));
      for (auto& m : masks) {
        m.coords.resize(static_cast<std::size_t>(points(rng)));
        for (auto& p : m.coords) p = {bin(rng), bin(rng)};
      }
      return GroundingOutput::from_masks(std::move(masks));
    }
  }
}

// Mutates a valid answer: byte flips, insertions, deletions, splices of
// grammar fragments, or replaces it with random bytes.
std::string mutate(std::string s, std::mt19937_64& rng) {
  static const std::vector<std::string> fragments = {
      "[", "]", ",", ", ", "<bsep>", "<msep>", "<bse", "-", ".", "5.5", "999", "1000",
      "99999999999999999999999", " ", "\n", "\t", "[]", "<", ">", "e7", "+3", "\xff", std::string(1, '\0')};
  const int edits = 1 + static_cast<int>(rng() % 6);
  for (int e = 0; e < edits; ++e) {
    const std::size_t pos = s.empty() ? 0 : rng() % (s.size() + 1);
    switch (rng() % 5) {
      case 0:
        if (!s.empty() && pos < s.size()) s[pos] = static_cast<char>(rng() % 256);
        break;
      case 1:
        s.insert(pos, fragments[rng() % fragments.size()]);
        break;
      case 2:
        if (pos < s.size()) s.erase(pos, 1 + rng() % 8);
        break;
      case 3:
        if (!s.empty()) s = s.substr(0, pos);
        break;
      default: {
        std::string r(rng() % 64, '\0');
        for (auto& c : r) c = static_cast<char>(rng() % 256);
        s.insert(pos, r);
      }
    }
  }
  return s;
}

Outcome grammar_round_trip(double fuzz_seconds) {
  std::mt19937_64 rng(kCorpusSeed);
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const GroundingOutput g = random_output(rng);
    const ExpectKind expect =
        g.kind() == GroundingOutput::Kind::kBoxes ? ExpectKind::kBoxes : ExpectKind::kMasks;
    try {
      if (!(parse_grounding(serialize(g), ParseMode::kStrict, expect) == g)) ++mismatches;
    } catch (const std::exception&) {
      ++mismatches;
    }
  }
  const double rt_secs = seconds_since(t0);

  const auto f0 = Clock::now();
  std::size_t inputs = 0, accepted = 0, parse_errors = 0, other_errors = 0;
  std::string first_other;
  std::vector<std::string> seeds;
  for (int i = 0; i < 64; ++i) seeds.push_back(serialize(random_output(rng)));
  while (seconds_since(f0) < fuzz_seconds) {
    for (int batch = 0; batch < 256; ++batch) {
      const std::string input = mutate(seeds[rng() % seeds.size()], rng);
      for (const auto mode : {ParseMode::kStrict, ParseMode::kLenient}) {
        for (const auto expect : {ExpectKind::kBoxes, ExpectKind::kMasks}) {
          ++inputs;
          try {
            parse_grounding_report(input, {mode, expect, 1000});
            ++accepted;
          } catch (const ParseError&) {
            ++parse_errors;
          } catch (const std::exception& e) {
            if (other_errors++ == 0) first_other = e.what();
          }
        }
      }
    }
  }
  Outcome o{pass_if(mismatches == 0 && other_errors == 0),
            fmt("1e4 round trips, %zu mismatches (%.2f s); fuzz %.0f s, %zu inputs, %zu "
                "non-ParseError exceptions",
                mismatches, rt_secs, fuzz_seconds, inputs, other_errors),
            {fmt("fuzz: %zu accepted, %zu ParseError", accepted, parse_errors)}};
  if (other_errors > 0) o.info.push_back("first untyped error: " + first_other);
  return o;
}

std::vector<BinaryMask> rectangle_corpus() {
  std::mt19937_64 rng(kCorpusSeed);
  std::uniform_int_distribution<int> side(10, 250);
  std::vector<BinaryMask> v;
  for (int i = 0; i < 100; ++i) {
    const int w = side(rng), h = side(rng);
    std::uniform_int_distribution<int> ox(0, 256 - w), oy(0, 256 - h);
    const int x = ox(rng), y = oy(rng);
    BinaryMask m(256, 256);
    m.fill_rect(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                static_cast<std::uint32_t>(x + w), static_cast<std::uint32_t>(y + h));
    v.push_back(std::move(m));
  }
  return v;
}

Outcome corner_recovery() {
  const auto t0 = Clock::now();
  const auto corpus = rectangle_corpus();
  const std::uint32_t n4[] = {4};
  const double adaptive = upper_bound_eval(corpus, n4, SamplingMethod::kAdaptive)[0].miou;
  const double uniform = upper_bound_eval(corpus, n4, SamplingMethod::kUniform)[0].miou;
  const double secs = seconds_since(t0);
  UpperBoundOptions literal;
  literal.lattice_tolerance = 0.0;
  const double literal_iou = upper_bound_eval(corpus, n4, SamplingMethod::kAdaptive, literal)[0].miou;
  return {pass_if(adaptive >= 0.99 && uniform <= 0.90 && secs < 5.0),
          fmt("100 rectangles 256x256, n=4: adaptive %.4f (>= 0.99), uniform %.4f (<= 0.90), "
              "%.2f s (limit 5 s)",
              adaptive, uniform, secs),
          {fmt("fully literal adaptive pipeline (lattice tolerance 0): %.4f", literal_iou)}};
}

std::vector<BinaryMask> skyline_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> columns(2, 5);  // 6, 8, 10 or 12 corners
  std::vector<BinaryMask> v;
  for (int i = 0; i < 200; ++i) {
    v.push_back(oracle::rasterize(oracle::random_skyline(rng, columns(rng), 256), 256, 256));
  }
  return v;
}

Outcome adaptive_beats_uniform() {
  const std::uint32_t ns[] = {8, 16, 32};
  const auto t0 = Clock::now();
  const auto corpus = skyline_corpus(kCorpusSeed);
  const auto a = upper_bound_eval(corpus, ns, SamplingMethod::kAdaptive);
  const auto u = upper_bound_eval(corpus, ns, SamplingMethod::kUniform);
  const double secs = seconds_since(t0);
  bool ok = secs < 30.0;
  std::string cols;
  for (std::size_t i = 0; i < 3; ++i) {
    ok = ok && a[i].miou > u[i].miou;
    cols += fmt(" n=%u %.4f vs %.4f;", a[i].n, a[i].miou, u[i].miou);
  }
  Outcome o{pass_if(ok),
            "200 rectilinear shapes (6-12 corners), adaptive vs uniform:" + cols +
                fmt(" %.2f s (limit 30 s)", secs),
            {}};

  // Seed sweep: how stable is the n=8 margin?
  int wins = 0;
  double sum_a = 0.0, sum_u = 0.0;
  const std::uint32_t n8[] = {8};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = skyline_corpus(seed);
    const double av = upper_bound_eval(c, n8, SamplingMethod::kAdaptive)[0].miou;
    const double uv = upper_bound_eval(c, n8, SamplingMethod::kUniform)[0].miou;
    wins += av > uv;
    sum_a += av;
    sum_u += uv;
  }
  o.info.push_back(fmt("n=8 over corpus seeds 1-10: adaptive ahead on %d/10, mean %.4f vs %.4f",
                       wins, sum_a / 10, sum_u / 10));
  return o;
}

Outcome refcoco_upper_bound() {
  const char* inst = std::getenv("MASKSEQ_REFCOCO_INSTANCES");
  const char* refs = std::getenv("MASKSEQ_REFCOCO_REFS");
  if (inst == nullptr || refs == nullptr) {
    return {Outcome::Status::kSkipped,
            "RefCOCO val masks not supplied (set MASKSEQ_REFCOCO_INSTANCES and "
            "MASKSEQ_REFCOCO_REFS)",
            {}};
  }
  const char* split_env = std::getenv("MASKSEQ_REFCOCO_SPLIT");
  const std::string split = split_env ? split_env : "val";
  const auto t0 = Clock::now();
  const nlohmann::json instances = read_json_file(inst);
  const auto lines = read_jsonl(refs);
  const RefMaskSource source(instances, lines, split);
  UpperBoundOptions opt;
  opt.jobs = 0;
  const std::uint32_t ns[] = {8, 12, 16, 24, 32};
  const auto mask_at = [&](std::size_t i) { return source.mask(i); };
  const auto a = upper_bound_eval(source.size(), mask_at, ns, SamplingMethod::kAdaptive, opt);
  const std::uint32_t n32[] = {32};
  const auto u = upper_bound_eval(source.size(), mask_at, n32, SamplingMethod::kUniform, opt);
  const double secs = seconds_since(t0);
  const double expected[] = {76.47, 82.55, 89.51, 93.04, 97.26};
  const double tol[] = {1.0, 1.0, 1.0, 1.0, 0.5};
  bool ok = std::abs(u[0].miou * 100 - 94.70) <= 0.5 && secs < 600.0;
  std::string cols;
  for (std::size_t i = 0; i < 5; ++i) {
    ok = ok && std::abs(a[i].miou * 100 - expected[i]) <= tol[i];
    cols += fmt(" n=%u %.2f (want %.2f +- %.1f);", ns[i], a[i].miou * 100, expected[i], tol[i]);
  }
  return {pass_if(ok),
          fmt("%zu masks, split %s: adaptive", source.size(), split.c_str()) + cols +
              fmt(" uniform n=32 %.2f (want 94.70 +- 0.5); %.0f s (limit 600 s)",
                  u[0].miou * 100, secs),
          {fmt("%zu refs with missing annotations skipped", source.missing())}};
}

Outcome metric_fixture() {
  const auto t0 = Clock::now();
  auto samples = read_ground_truth(kFixtures / "gres_gt.jsonl");
  attach_predictions(samples, kFixtures / "gres_pred.txt", ExpectKind::kMasks);
  const auto g = giou_nacc_tacc(samples);
  const bool fixture_ok = g.giou == 0.5 && g.n_acc == 0.5 && g.t_acc == 0.75;

  std::mt19937_64 rng(kCorpusSeed);
  const auto random = oracle::random_gres(rng, 20);
  const auto lib = giou_nacc_tacc(random);
  const auto naive = oracle::naive_gres(random);
  const double diff = std::max({std::abs(lib.giou - naive.giou), std::abs(lib.n_acc - naive.n_acc),
                                std::abs(lib.t_acc - naive.t_acc)});
  const double secs = seconds_since(t0);
  return {pass_if(fixture_ok && diff <= 1e-12 && secs < 1.0),
          fmt("6-sample GRES fixture gIoU %.4f N-acc %.4f T-acc %.4f (want 0.5/0.5/0.75); "
              "naive oracle on 20 random samples max diff %.1e; %.3f s (limit 1 s)",
              g.giou, g.n_acc, g.t_acc, diff, secs),
          {}};
}

Outcome converter_determinism() {
  std::size_t mismatches = 0, bad_targets = 0, leaks = 0, records = 0;
  const auto inst = read_json_file(kFixtures / "coco_instances.json");
  for (const auto& [task, refs_file] :
       std::vector<std::pair<Task, std::string>>{{Task::kRes, "refs_res.jsonl"},
                                                 {Task::kRec, "refs_res.jsonl"},
                                                 {Task::kGres, "refs_gres.jsonl"},
                                                 {Task::kGrec, "refs_gres.jsonl"}}) {
    const auto refs = read_jsonl(kFixtures / refs_file);
    ConvertOptions opt;
    opt.task = task;
    opt.seed = 20240601;
    opt.jobs = 1;
    const auto first = convert_coco(inst, refs, opt);
    const std::string a = to_jsonl(first.records);
    const std::string b = to_jsonl(convert_coco(inst, refs, opt).records);
    opt.jobs = 8;
    const std::string c = to_jsonl(convert_coco(inst, refs, opt).records);
    mismatches += (a != b) + (a != c);
    for (const auto& r : first.records) {
      ++records;
      try {
        parse_grounding(r.target, ParseMode::kStrict, grounding_kind(r.task));
      } catch (const ParseError&) {
        ++bad_targets;
      }
    }
    leaks += find_split_leaks(first.records).size();
  }
  return {pass_if(mismatches == 0 && bad_targets == 0 && leaks == 0),
          fmt("rec/res/grec/gres fixtures, %zu records: %zu output mismatches (2 runs, jobs 1 vs "
              "8), %zu targets failing strict parse, %zu leaked images",
              records, mismatches, bad_targets, leaks),
          {}};
}

Outcome turning_angle_geometry() {
  std::mt19937_64 rng(kCorpusSeed);
  std::uniform_real_distribution<double> radius(5.0, 200.0);
  std::uniform_int_distribution<int> vertices(3, 64);
  double worst_sum = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto ring = oracle::random_convex(rng, 0, 0, radius(rng), radius(rng), vertices(rng));
    const auto dense = densify(Contour(ring), 400);
    double sum = 0.0;
    for (const double a : turning_angles(dense).angles) sum += a;
    worst_sum = std::max(worst_sum, std::abs(sum - 2 * std::numbers::pi));
  }
  const std::vector<Point> square = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  double worst_corner = 0.0;
  for (const double a : turning_angles(square).angles) {
    worst_corner = std::max(worst_corner, std::abs(a - std::numbers::pi / 2));
  }
  return {pass_if(worst_sum <= 1e-6 && worst_corner <= 1e-9),
          fmt("100 convex dense rings: max |sum - 2pi| = %.2e (<= 1e-6); square corners max "
              "|angle - pi/2| = %.2e (<= 1e-9)",
              worst_sum, worst_corner),
          {}};
}

}  // namespace

int main() {
  // The fixtures skip a ref on purpose; keep its warning out of the report.
  maskseq::init_logging("error");
  double fuzz_seconds = 60.0;
  if (const char* env = std::getenv("MASKSEQ_FUZZ_SECONDS")) fuzz_seconds = std::atof(env);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"quantization-bound", quantization_bound},
      {"grammar-round-trip", [&] { return grammar_round_trip(fuzz_seconds); }},
      {"corner-recovery", corner_recovery},
      {"adaptive-beats-uniform", adaptive_beats_uniform},
      {"refcoco-upper-bound", refcoco_upper_bound},
      {"metric-fixture", metric_fixture},
      {"converter-determinism", converter_determinism},
      {"turning-angle-geometry", turning_angle_geometry},
  };

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Outcome::Status::kFail, std::string("exception: ") + e.what(), {}};
    }
    const char* tag = o.status == Outcome::Status::kPass     ? "PASS"
                      : o.status == Outcome::Status::kFail   ? "FAIL"
                                                             : "SKIPPED";
    std::printf("%-7s %s: %s\n", tag, name.c_str(), o.summary.c_str());
    for (const auto& line : o.info) std::printf("        %s\n", line.c_str());
    std::fflush(stdout);
    failures += o.status == Outcome::Status::kFail;
  }
  return failures == 0 ? 0 : 1;
}

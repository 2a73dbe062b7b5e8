#include <gtest/gtest.h>

#include <random>

#include "maskseq/error.hpp"
#include "maskseq/metrics.hpp"
#include "support/naive_metrics.hpp"
#include "support/oracles.hpp"

using namespace maskseq;

namespace {

BinaryMask rect(std::uint32_t w, std::uint32_t h, std::uint32_t x0, std::uint32_t y0,
                std::uint32_t x1, std::uint32_t y1) {
  BinaryMask m(w, h);
  m.fill_rect(x0, y0, x1, y1);
  return m;
}

EvalSample mask_sample(std::string id, std::vector<BinaryMask> gt, std::string_view pred) {
  EvalSample s;
  s.id = std::move(id);
  s.width = 10;
  s.height = 10;
  s.gt.no_target = gt.empty();
  s.gt.masks = std::move(gt);
  s.pred = parse_grounding(pred, ParseMode::kStrict, ExpectKind::kMasks);
  return s;
}

EvalSample box_sample(std::vector<BBox> gt, std::string_view pred, std::uint32_t w = 100,
                      std::uint32_t h = 100) {
  EvalSample s;
  s.id = "b";
  s.width = w;
  s.height = h;
  s.gt.no_target = gt.empty();
  s.gt.boxes = std::move(gt);
  s.pred = parse_grounding(pred, ParseMode::kStrict, ExpectKind::kBoxes);
  return s;
}

const char* kFull = "[0, 0, 999, 0, 999, 999, 0, 999]";

// The six-sample GRES fixture on 10 x 10 images.
std::vector<EvalSample> gres_fixture() {
  std::vector<EvalSample> v;
  v.push_back(mask_sample("s1", {rect(10, 10, 0, 0, 5, 10)}, kFull));          // IoU 0.5
  v.push_back(mask_sample("s2", {rect(10, 10, 0, 0, 10, 10)}, kFull));         // IoU 1
  v.push_back(mask_sample("s3", {}, ""));                                      // 1
  v.push_back(mask_sample("s4", {}, kFull));                                   // 0
  v.push_back(mask_sample("s5", {rect(10, 10, 0, 0, 5, 5), rect(10, 10, 5, 5, 10, 10)},
                          "[0, 0, 500, 0, 500, 500, 0, 500]"));                // 25 / 50
  v.push_back(mask_sample("s6", {rect(10, 10, 0, 0, 10, 5)}, ""));             // 0
  return v;
}

}  // namespace

TEST(EvalTaskNames, RoundTrip) {
  for (const auto t : {EvalTask::kRec, EvalTask::kRes, EvalTask::kGrec, EvalTask::kGres}) {
    EXPECT_EQ(parse_eval_task(to_string(t)), t);
  }
  EXPECT_THROW(parse_eval_task("vqa"), Error);
  EXPECT_EQ(expected_output(EvalTask::kGrec), ExpectKind::kBoxes);
  EXPECT_EQ(expected_output(EvalTask::kRes), ExpectKind::kMasks);
}

TEST(EvalSample, Validation) {
  auto s = mask_sample("x", {rect(10, 10, 0, 0, 2, 2)}, "");
  EXPECT_NO_THROW(s.validate());
  s.gt.masks.push_back(BinaryMask(5, 5));
  try {
    s.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  auto z = mask_sample("z", {}, "");
  z.width = 0;
  EXPECT_THROW(z.validate(), Error);
  auto nt = mask_sample("n", {}, "");
  nt.gt.boxes.push_back({0, 0, 1, 1});
  EXPECT_THROW(nt.validate(), Error);
}

TEST(Miou, Examples) {
  const std::vector<EvalSample> perfect = {mask_sample("a", {rect(10, 10, 0, 0, 10, 10)}, kFull)};
  EXPECT_DOUBLE_EQ(miou(perfect), 1.0);

  // 0.8 = 8 / 10 columns, 0.4 = 4 / 10 columns.
  const std::vector<EvalSample> two = {
      mask_sample("a", {rect(10, 10, 0, 0, 8, 10)}, kFull),
      mask_sample("b", {rect(10, 10, 0, 0, 4, 10)}, kFull),
  };
  EXPECT_DOUBLE_EQ(sample_mask_iou(two[0]), 0.8);
  EXPECT_DOUBLE_EQ(sample_mask_iou(two[1]), 0.4);
  EXPECT_DOUBLE_EQ(miou(two), 0.6);

  const std::vector<EvalSample> missed = {mask_sample("a", {rect(10, 10, 0, 0, 5, 5)}, "")};
  EXPECT_DOUBLE_EQ(miou(missed), 0.0);
  EXPECT_THROW(miou(std::span<const EvalSample>{}), Error);
}

TEST(Giou, TargetedPlusCorrectNoTarget) {
  const std::vector<EvalSample> v = {
      mask_sample("a", {rect(10, 10, 0, 0, 8, 10)}, kFull),
      mask_sample("b", {}, ""),
  };
  const auto g = giou_nacc_tacc(v);
  EXPECT_DOUBLE_EQ(g.giou, 0.9);
  EXPECT_DOUBLE_EQ(g.n_acc, 1.0);
  EXPECT_DOUBLE_EQ(g.t_acc, 1.0);
  EXPECT_FALSE(g.n_acc_vacuous);
}

TEST(Giou, AllNoTargetIsVacuousForTacc) {
  const std::vector<EvalSample> v = {mask_sample("a", {}, ""), mask_sample("b", {}, "")};
  const auto g = giou_nacc_tacc(v);
  EXPECT_DOUBLE_EQ(g.giou, 1.0);
  EXPECT_DOUBLE_EQ(g.n_acc, 1.0);
  EXPECT_DOUBLE_EQ(g.t_acc, 1.0);
  EXPECT_TRUE(g.t_acc_vacuous);
  EXPECT_FALSE(g.n_acc_vacuous);
  EXPECT_EQ(g.no_target_samples, 2u);
  EXPECT_EQ(g.targeted_samples, 0u);
}

TEST(Giou, TargetedAnsweredEmptyLowersTacc) {
  const std::vector<EvalSample> v = {
      mask_sample("a", {rect(10, 10, 0, 0, 10, 10)}, kFull),
      mask_sample("b", {rect(10, 10, 0, 0, 10, 10)}, ""),
  };
  const auto g = giou_nacc_tacc(v);
  EXPECT_DOUBLE_EQ(g.giou, 0.5);
  EXPECT_DOUBLE_EQ(g.t_acc, 0.5);
  EXPECT_TRUE(g.n_acc_vacuous);
}

TEST(Giou, SixSampleFixture) {
  const auto v = gres_fixture();
  const auto g = giou_nacc_tacc(v);
  EXPECT_DOUBLE_EQ(g.giou, 0.5);
  EXPECT_DOUBLE_EQ(g.n_acc, 0.5);
  EXPECT_DOUBLE_EQ(g.t_acc, 0.75);
  const auto report = evaluate(v, EvalTask::kGres, {});
  EXPECT_EQ(report.sample_count, 6u);
  EXPECT_DOUBLE_EQ(*report.giou, 0.5);
  EXPECT_FALSE(report.miou.has_value());
}

TEST(Giou, InvalidPredictionCountsAsWrongNonEmpty) {
  auto s = mask_sample("a", {}, "");
  s.pred_invalid = true;
  const std::vector<EvalSample> v = {s};
  const auto g = giou_nacc_tacc(v);
  EXPECT_DOUBLE_EQ(g.giou, 0.0);
  EXPECT_DOUBLE_EQ(g.n_acc, 0.0);
}

TEST(Giou, AgreesWithNaiveOracle) {
  std::mt19937_64 rng(59);
  for (int round = 0; round < 5; ++round) {
    const auto v = oracle::random_gres(rng, 20);
    const auto g = giou_nacc_tacc(v);
    const auto n = oracle::naive_gres(v);
    EXPECT_NEAR(g.giou, n.giou, 1e-12);
    EXPECT_NEAR(g.n_acc, n.n_acc, 1e-12);
    EXPECT_NEAR(g.t_acc, n.t_acc, 1e-12);
  }
}

TEST(Giou, IndependentOfJobs) {
  std::mt19937_64 rng(61);
  const auto v = oracle::random_gres(rng, 200);
  const auto a = giou_nacc_tacc(v, 1000, 1);
  const auto b = giou_nacc_tacc(v, 1000, 8);
  EXPECT_EQ(a.giou, b.giou);
  EXPECT_EQ(miou(v, 1000, 1), miou(v, 1000, 8));
}

TEST(PrecisionAt, BoundaryAndCounting) {
  // GT [0,0,10,10] on 100x100; prediction widths give IoU 0.6, 0.5 and 0.3.
  const auto s06 = box_sample({{0, 0, 10, 10}}, "[0, 0, 60, 100]");
  const auto s05 = box_sample({{0, 0, 10, 10}}, "[0, 0, 50, 100]");
  const auto s03 = box_sample({{0, 0, 10, 10}}, "[0, 0, 30, 100]");
  EXPECT_DOUBLE_EQ(sample_box_iou(s06), 0.6);
  EXPECT_DOUBLE_EQ(sample_box_iou(s05), 0.5);
  const std::vector<double> t = {0.5};
  EXPECT_DOUBLE_EQ(precision_at(std::vector<EvalSample>{s06}, t).at(0.5), 1.0);
  EXPECT_DOUBLE_EQ(precision_at(std::vector<EvalSample>{s05}, t).at(0.5), 1.0);
  EXPECT_DOUBLE_EQ(precision_at(std::vector<EvalSample>{s06, s03}, t).at(0.5), 0.5);
}

TEST(PrecisionAt, MultiBoxAnswerFailsRec) {
  const auto s = box_sample({{0, 0, 10, 10}}, "[0, 0, 100, 100]<bsep>[0, 0, 100, 100]");
  EXPECT_DOUBLE_EQ(sample_box_iou(s), 0.0);
}

TEST(Grec, MatchingRules) {
  const std::vector<BBox> two = {{0, 0, 10, 10}, {50, 50, 60, 60}};
  EXPECT_TRUE(grec_sample_success(box_sample(two, "[500, 500, 600, 600]<bsep>[0, 0, 100, 100]"),
                                  0.5));
  // One GT unmatched.
  EXPECT_FALSE(grec_sample_success(box_sample(two, "[0, 0, 100, 100]"), 0.5));
  // Spurious extra prediction.
  EXPECT_FALSE(grec_sample_success(
      box_sample(two, "[0, 0, 100, 100]<bsep>[500, 500, 600, 600]<bsep>[900, 900, 990, 990]"),
      0.5));
  // Both predictions on the same GT box.
  EXPECT_FALSE(grec_sample_success(box_sample(two, "[0, 0, 100, 100]<bsep>[0, 0, 100, 100]"),
                                   0.5));
  // No-target needs the empty answer.
  EXPECT_TRUE(grec_sample_success(box_sample({}, ""), 0.5));
  EXPECT_FALSE(grec_sample_success(box_sample({}, "[0, 0, 100, 100]"), 0.5));
  EXPECT_FALSE(grec_sample_success(box_sample(two, ""), 0.5));
}

TEST(Grec, ReportIncludesAcceptance) {
  const std::vector<EvalSample> v = {
      box_sample({{0, 0, 10, 10}}, "[0, 0, 100, 100]"),
      box_sample({}, ""),
      box_sample({}, "[0, 0, 100, 100]"),
  };
  const std::vector<double> t = {0.5, 0.75};
  const auto r = evaluate(v, EvalTask::kGrec, t);
  EXPECT_NEAR(r.pr_at.at(0.5), 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(*r.n_acc, 0.5);
  EXPECT_DOUBLE_EQ(*r.t_acc, 1.0);
}

TEST(Evaluate, PerfectPredictionsScoreOne) {
  const std::vector<EvalSample> v = {mask_sample("a", {rect(10, 10, 0, 0, 10, 10)}, kFull)};
  const std::vector<double> t = {0.5, 0.9};
  const auto r = evaluate(v, EvalTask::kRes, t);
  EXPECT_DOUBLE_EQ(*r.miou, 1.0);
  EXPECT_DOUBLE_EQ(r.pr_at.at(0.9), 1.0);
}

TEST(UpperBound, FullFrameSquareAtFourPoints) {
  const std::vector<BinaryMask> masks = {rect(64, 64, 0, 0, 64, 64)};
  const std::vector<std::uint32_t> n = {4};
  const auto rows = upper_bound_eval(masks, n, SamplingMethod::kAdaptive);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GE(rows[0].miou, 0.99);
  EXPECT_EQ(rows[0].evaluated, 1u);
}

TEST(UpperBound, SkipsEmptyMasksAndIsJobIndependent) {
  std::mt19937_64 rng(67);
  std::vector<BinaryMask> masks;
  for (int i = 0; i < 30; ++i) {
    const auto ring = oracle::random_convex(rng, 64, 64, 20 + rng() % 30, 20 + rng() % 30, 12);
    masks.push_back(oracle::rasterize(ring, 128, 128));
  }
  masks.push_back(BinaryMask(128, 128));
  const std::vector<std::uint32_t> n = {8, 16, 32};
  UpperBoundOptions one, many;
  many.jobs = 4;
  for (const auto method : {SamplingMethod::kAdaptive, SamplingMethod::kUniform}) {
    const auto a = upper_bound_eval(masks, n, method, one);
    const auto b = upper_bound_eval(masks, n, method, many);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].miou, b[i].miou);
      EXPECT_EQ(a[i].evaluated, 30u);
      EXPECT_EQ(a[i].skipped, 1u);
    }
    // More points never hurts by more than half a point on convex shapes.
    EXPECT_GE(a[1].miou, a[0].miou - 0.005);
    EXPECT_GE(a[2].miou, a[1].miou - 0.005);
  }
}

TEST(UpperBound, ReconstructionIouMatchesOracle) {
  BinaryMask m(50, 50);
  m.fill_rect(5, 5, 30, 45);
  const double iou = reconstruction_iou(m, 4, SamplingMethod::kAdaptive, {});
  EXPECT_DOUBLE_EQ(iou, 1.0);
  EXPECT_THROW(reconstruction_iou(BinaryMask(5, 5), 4, SamplingMethod::kAdaptive, {}), Error);
}

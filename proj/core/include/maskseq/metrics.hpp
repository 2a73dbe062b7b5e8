#pragma once

// Grounding metrics for referring-expression tasks and the representation
// upper-bound harness.
//
//   REC   Pr@t    fraction of samples whose single predicted box has IoU >= t
//   RES   mIoU    mean per-sample mask IoU
//   GREC  Pr@t    per-sample success: every GT box matched one-to-one by a
//                 prediction at IoU >= t (greedy, IoU-descending) and no
//                 spurious predictions; no-target samples need an empty answer
//   GRES  gIoU    mean per-sample IoU of unioned masks; no-target samples score
//                 1 for an empty answer and 0 otherwise
//         N-acc   no-target samples answered with the empty string
//         T-acc   targeted samples NOT answered with the empty string
//
// Rates with a zero denominator are reported as 1.0 and flagged.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maskseq/codec.hpp"
#include "maskseq/geometry.hpp"
#include "maskseq/sampling.hpp"

namespace maskseq {

struct GroundTruth {
  bool no_target = false;
  std::vector<BinaryMask> masks;
  std::vector<BBox> boxes;
};

struct EvalSample {
  std::string id;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  GroundTruth gt;
  GroundingOutput pred;
  /// The raw prediction could not be parsed at all. Scored as a non-empty,
  /// wrong answer.
  bool pred_invalid = false;

  /// Throws Error(kInvalidArgument) on inconsistent ground truth.
  void validate() const;
};

enum class EvalTask { kRec, kRes, kGrec, kGres };

std::string_view to_string(EvalTask task);
EvalTask parse_eval_task(std::string_view name);
/// Boxes for rec/grec, masks for res/gres.
ExpectKind expected_output(EvalTask task);

struct GeneralizedScores {
  double giou = 0.0;
  double n_acc = 1.0;
  double t_acc = 1.0;
  bool n_acc_vacuous = false;
  bool t_acc_vacuous = false;
  std::size_t no_target_samples = 0;
  std::size_t targeted_samples = 0;
};

struct EvalReport {
  EvalTask task = EvalTask::kRes;
  std::uint32_t sample_count = 0;
  std::optional<double> miou;
  std::optional<double> giou;
  std::optional<double> n_acc;
  std::optional<double> t_acc;
  bool n_acc_vacuous = false;
  bool t_acc_vacuous = false;
  std::map<double, double> pr_at;
};

/// Mask IoU of one sample: union of decoded predicted masks against the union
/// of ground-truth masks, both on the sample's width x height grid.
double sample_mask_iou(const EvalSample& sample, std::uint32_t n_bins = 1000);

/// Best single-box IoU for a REC sample; 0 unless exactly one box predicted.
double sample_box_iou(const EvalSample& sample, std::uint32_t n_bins = 1000);

/// Throws Error(kInvalidArgument) on an empty sample list.
double miou(std::span<const EvalSample> samples, std::uint32_t n_bins = 1000,
            unsigned jobs = 1);

GeneralizedScores giou_nacc_tacc(std::span<const EvalSample> samples,
                                 std::uint32_t n_bins = 1000, unsigned jobs = 1);

/// REC precision at each threshold (IoU >= t counts).
std::map<double, double> precision_at(std::span<const EvalSample> samples,
                                      std::span<const double> thresholds,
                                      std::uint32_t n_bins = 1000);

/// GREC per-sample success rate at each threshold.
std::map<double, double> grec_precision_at(std::span<const EvalSample> samples,
                                           std::span<const double> thresholds,
                                           std::uint32_t n_bins = 1000);

/// Whether one GREC sample succeeds at `threshold`.
bool grec_sample_success(const EvalSample& sample, double threshold, std::uint32_t n_bins = 1000);

/// Task-specific report: rec -> pr_at; res -> miou + pr_at (mask IoU);
/// grec -> pr_at + n_acc + t_acc; gres -> giou + n_acc + t_acc.
EvalReport evaluate(std::span<const EvalSample> samples, EvalTask task,
                    std::span<const double> thresholds, std::uint32_t n_bins = 1000,
                    unsigned jobs = 1);

// ---------------------------------------------------------------------------
// Upper bound of the sequence representation

struct UpperBoundOptions {
  std::uint32_t n_bins = 1000;
  std::uint32_t m_dense = 400;
  double theta_eps = 1e-6;
  double lattice_tolerance = 1.0;
  unsigned jobs = 1;
};

struct UpperBoundRow {
  std::uint32_t n = 0;
  SamplingMethod method = SamplingMethod::kAdaptive;
  double miou = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// Reconstruction IoU of one mask: encode with `n` points (image extent =
/// mask size), decode, compare with the original.
double reconstruction_iou(const BinaryMask& mask, std::uint32_t n, SamplingMethod method,
                          const UpperBoundOptions& options);

/// Mean reconstruction IoU per n. Masks without foreground are skipped (and
/// counted). The dense count used is max(m_dense, n). Results do not depend on
/// `options.jobs`.
std::vector<UpperBoundRow> upper_bound_eval(std::span<const BinaryMask> masks,
                                            std::span<const std::uint32_t> n_values,
                                            SamplingMethod method,
                                            const UpperBoundOptions& options = {});

/// Same, for `count` masks produced on demand by `mask_at` (called once per
/// mask, possibly from several threads).
std::vector<UpperBoundRow> upper_bound_eval(std::size_t count,
                                            const std::function<BinaryMask(std::size_t)>& mask_at,
                                            std::span<const std::uint32_t> n_values,
                                            SamplingMethod method,
                                            const UpperBoundOptions& options = {});

}  // namespace maskseq

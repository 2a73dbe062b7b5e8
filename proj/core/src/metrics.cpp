#include "maskseq/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <tuple>

#include "log_internal.hpp"
#include "maskseq/error.hpp"
#include "maskseq/parallel.hpp"

namespace maskseq {

std::string_view to_string(EvalTask task) {
  switch (task) {
    case EvalTask::kRec: return "rec";
    case EvalTask::kRes: return "res";
    case EvalTask::kGrec: return "grec";
    case EvalTask::kGres: return "gres";
  }
  return "unknown";
}

EvalTask parse_eval_task(std::string_view name) {
  if (name == "rec") return EvalTask::kRec;
  if (name == "res") return EvalTask::kRes;
  if (name == "grec") return EvalTask::kGrec;
  if (name == "gres") return EvalTask::kGres;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown task '" + std::string(name) + "' (expected rec|res|grec|gres)");
}

ExpectKind expected_output(EvalTask task) {
  return task == EvalTask::kRec || task == EvalTask::kGrec ? ExpectKind::kBoxes
                                                          : ExpectKind::kMasks;
}

void EvalSample::validate() const {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample '" + id + "' has zero image size");
  }
  if (gt.no_target && (!gt.masks.empty() || !gt.boxes.empty())) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample '" + id + "' is no-target but carries ground-truth geometry");
  }
  for (const auto& m : gt.masks) {
    if (m.width() != width || m.height() != height) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "sample '" + id + "' has a mask that does not match its image size");
    }
  }
}

namespace {

void require_samples(std::span<const EvalSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "no samples to evaluate");
}

bool predicted_no_target(const EvalSample& s) { return !s.pred_invalid && s.pred.is_no_target(); }

BinaryMask gt_union(const EvalSample& s) {
  BinaryMask out(s.width, s.height);
  for (const auto& m : s.gt.masks) out |= m;
  return out;
}

BinaryMask pred_union(const EvalSample& s, std::uint32_t n_bins) {
  BinaryMask out(s.width, s.height);
  if (s.pred_invalid) return out;
  const QuantConfig cfg{n_bins, static_cast<double>(s.width), static_cast<double>(s.height)};
  for (const auto& seq : s.pred.masks()) out |= decode_mask(seq, cfg);
  for (const auto& qb : s.pred.boxes()) {
    // Boxes answering a mask task are scored as filled rectangles.
    const BBox b = dequantize_box(qb, cfg);
    const std::vector<Point> ring = {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
    if (b.area() > 0.0) out |= rasterize_polygon(ring, s.width, s.height);
  }
  return out;
}

std::vector<BBox> pred_boxes(const EvalSample& s, std::uint32_t n_bins) {
  std::vector<BBox> out;
  if (s.pred_invalid) return out;
  const QuantConfig cfg{n_bins, static_cast<double>(s.width), static_cast<double>(s.height)};
  for (const auto& qb : s.pred.boxes()) out.push_back(dequantize_box(qb, cfg));
  return out;
}

double ordered_mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<double> per_sample(std::span<const EvalSample> samples, unsigned jobs,
                               const auto& score) {
  std::vector<double> values(samples.size(), 0.0);
  parallel_for(samples.size(), jobs, [&](std::size_t i) { values[i] = score(samples[i]); });
  return values;
}

GeneralizedScores acceptance_rates(std::span<const EvalSample> samples) {
  GeneralizedScores out;
  std::size_t no_target_hits = 0;
  std::size_t targeted_hits = 0;
  for (const auto& s : samples) {
    if (s.gt.no_target) {
      ++out.no_target_samples;
      if (predicted_no_target(s)) ++no_target_hits;
    } else {
      ++out.targeted_samples;
      if (!predicted_no_target(s)) ++targeted_hits;
    }
  }
  if (out.no_target_samples == 0) {
    out.n_acc_vacuous = true;
  } else {
    out.n_acc = static_cast<double>(no_target_hits) / static_cast<double>(out.no_target_samples);
  }
  if (out.targeted_samples == 0) {
    out.t_acc_vacuous = true;
  } else {
    out.t_acc = static_cast<double>(targeted_hits) / static_cast<double>(out.targeted_samples);
  }
  return out;
}

}  // namespace

double sample_mask_iou(const EvalSample& sample, std::uint32_t n_bins) {
  return mask_iou(pred_union(sample, n_bins), gt_union(sample));
}

double sample_box_iou(const EvalSample& sample, std::uint32_t n_bins) {
  const auto boxes = pred_boxes(sample, n_bins);
  if (boxes.size() != 1 || sample.gt.boxes.size() != 1) return 0.0;
  return box_iou(boxes[0], sample.gt.boxes[0]);
}

double miou(std::span<const EvalSample> samples, std::uint32_t n_bins, unsigned jobs) {
  require_samples(samples);
  return ordered_mean(per_sample(samples, jobs, [&](const EvalSample& s) {
    return sample_mask_iou(s, n_bins);
  }));
}

GeneralizedScores giou_nacc_tacc(std::span<const EvalSample> samples, std::uint32_t n_bins,
                                 unsigned jobs) {
  require_samples(samples);
  const std::vector<double> scores = per_sample(samples, jobs, [&](const EvalSample& s) {
    if (s.gt.no_target) return predicted_no_target(s) ? 1.0 : 0.0;
    if (predicted_no_target(s)) return 0.0;
    return sample_mask_iou(s, n_bins);
  });

  GeneralizedScores out = acceptance_rates(samples);
  out.giou = ordered_mean(scores);
  return out;
}

std::map<double, double> precision_at(std::span<const EvalSample> samples,
                                      std::span<const double> thresholds, std::uint32_t n_bins) {
  require_samples(samples);
  std::vector<double> ious;
  ious.reserve(samples.size());
  for (const auto& s : samples) ious.push_back(sample_box_iou(s, n_bins));
  std::map<double, double> out;
  for (const double t : thresholds) {
    const auto hits = std::count_if(ious.begin(), ious.end(), [&](double v) { return v >= t; });
    out[t] = static_cast<double>(hits) / static_cast<double>(samples.size());
  }
  return out;
}

bool grec_sample_success(const EvalSample& sample, double threshold, std::uint32_t n_bins) {
  if (sample.gt.no_target) return predicted_no_target(sample);
  if (predicted_no_target(sample)) return false;
  const std::vector<BBox> preds = pred_boxes(sample, n_bins);
  const auto& gts = sample.gt.boxes;
  if (preds.size() != gts.size()) return false;

  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = box_iou(preds[p], gts[g]);
      if (iou >= threshold) pairs.emplace_back(iou, p, g);
    }
  }
  // IoU descending; index order breaks ties so the matching is reproducible.
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  std::vector<bool> pred_used(preds.size(), false);
  std::vector<bool> gt_used(gts.size(), false);
  std::size_t matched = 0;
  for (const auto& [iou, p, g] : pairs) {
    if (pred_used[p] || gt_used[g]) continue;
    pred_used[p] = gt_used[g] = true;
    ++matched;
  }
  return matched == gts.size();
}

std::map<double, double> grec_precision_at(std::span<const EvalSample> samples,
                                           std::span<const double> thresholds,
                                           std::uint32_t n_bins) {
  require_samples(samples);
  std::map<double, double> out;
  for (const double t : thresholds) {
    std::size_t hits = 0;
    for (const auto& s : samples) hits += grec_sample_success(s, t, n_bins) ? 1 : 0;
    out[t] = static_cast<double>(hits) / static_cast<double>(samples.size());
  }
  return out;
}

EvalReport evaluate(std::span<const EvalSample> samples, EvalTask task,
                    std::span<const double> thresholds, std::uint32_t n_bins, unsigned jobs) {
  require_samples(samples);
  for (const auto& s : samples) s.validate();

  EvalReport report;
  report.task = task;
  report.sample_count = static_cast<std::uint32_t>(samples.size());
  switch (task) {
    case EvalTask::kRec:
      report.pr_at = precision_at(samples, thresholds, n_bins);
      break;
    case EvalTask::kRes: {
      const std::vector<double> ious = per_sample(
          samples, jobs, [&](const EvalSample& s) { return sample_mask_iou(s, n_bins); });
      report.miou = ordered_mean(ious);
      for (const double t : thresholds) {
        const auto hits = std::count_if(ious.begin(), ious.end(), [&](double v) { return v >= t; });
        report.pr_at[t] = static_cast<double>(hits) / static_cast<double>(ious.size());
      }
      break;
    }
    case EvalTask::kGrec: {
      report.pr_at = grec_precision_at(samples, thresholds, n_bins);
      const GeneralizedScores g = acceptance_rates(samples);
      report.n_acc = g.n_acc;
      report.t_acc = g.t_acc;
      report.n_acc_vacuous = g.n_acc_vacuous;
      report.t_acc_vacuous = g.t_acc_vacuous;
      break;
    }
    case EvalTask::kGres: {
      const GeneralizedScores g = giou_nacc_tacc(samples, n_bins, jobs);
      report.giou = g.giou;
      report.n_acc = g.n_acc;
      report.t_acc = g.t_acc;
      report.n_acc_vacuous = g.n_acc_vacuous;
      report.t_acc_vacuous = g.t_acc_vacuous;
      break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Upper bound

namespace {

double reconstruction_iou_from_contour(const BinaryMask& mask, const Contour& outer,
                                       std::uint32_t n, SamplingMethod method,
                                       const UpperBoundOptions& options) {
  const QuantConfig qcfg{options.n_bins, static_cast<double>(mask.width()),
                         static_cast<double>(mask.height())};
  SamplingConfig scfg;
  scfg.n_out = n;
  scfg.m_dense = std::max(options.m_dense, n);
  scfg.theta_eps = options.theta_eps;
  scfg.lattice_tolerance = options.lattice_tolerance;
  return mask_iou(decode_mask(encode_contour(outer, qcfg, scfg, method), qcfg), mask);
}

}  // namespace

double reconstruction_iou(const BinaryMask& mask, std::uint32_t n, SamplingMethod method,
                          const UpperBoundOptions& options) {
  const std::vector<Contour> contours = extract_contours(mask);
  if (contours.empty()) throw Error(ErrorCode::kEmptyMask, "no foreground");
  return reconstruction_iou_from_contour(mask, largest_contour(contours), n, method, options);
}

std::vector<UpperBoundRow> upper_bound_eval(std::span<const BinaryMask> masks,
                                            std::span<const std::uint32_t> n_values,
                                            SamplingMethod method,
                                            const UpperBoundOptions& options) {
  return upper_bound_eval(
      masks.size(), [&](std::size_t i) { return masks[i]; }, n_values, method, options);
}

std::vector<UpperBoundRow> upper_bound_eval(std::size_t count,
                                            const std::function<BinaryMask(std::size_t)>& mask_at,
                                            std::span<const std::uint32_t> n_values,
                                            SamplingMethod method,
                                            const UpperBoundOptions& options) {
  // ious[mask][n_index]; empty masks keep an empty row.
  std::vector<std::vector<double>> ious(count);
  parallel_for(count, options.jobs, [&](std::size_t i) {
    const BinaryMask mask = mask_at(i);
    const std::vector<Contour> contours = extract_contours(mask);
    if (contours.empty()) return;
    const Contour& outer = largest_contour(contours);
    ious[i].reserve(n_values.size());
    for (const std::uint32_t n : n_values) {
      ious[i].push_back(reconstruction_iou_from_contour(mask, outer, n, method, options));
    }
  });

  std::size_t skipped = 0;
  for (const auto& row : ious) skipped += row.empty() ? 1 : 0;
  if (skipped > 0) {
    detail::logger().warn("upper_bound_eval: skipped {} mask(s) without foreground", skipped);
  }

  std::vector<UpperBoundRow> rows;
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    UpperBoundRow row;
    row.n = n_values[k];
    row.method = method;
    row.skipped = skipped;
    double sum = 0.0;
    for (const auto& per_mask : ious) {
      if (per_mask.empty()) continue;
      sum += per_mask[k];
      ++row.evaluated;
    }
    row.miou = row.evaluated > 0 ? sum / static_cast<double>(row.evaluated) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace maskseq

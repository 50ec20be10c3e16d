#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xrsim/calib.hpp"
#include "xrsim/common.hpp"
#include "xrsim/task.hpp"

namespace xrsim {

// ISO effective-width multiplier: 4.133 * SD of task-axis endpoint error.
inline constexpr double kEffectiveWidthFactor = 4.133;
inline constexpr double kWeFloorPx = 1.0;

struct FittsFit {
  double a_s = 0.0;
  double b_s_per_bit = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

// Ordinary least squares of movement time on index of difficulty.
inline FittsFit fitts_regression(std::span<const std::pair<double, double>> points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw std::invalid_argument("fitts regression: need at least 3 points");

  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [x, y] : points) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mean_x) * (x - mean_x);
    sxy += (x - mean_x) * (y - mean_y);
    syy += (y - mean_y) * (y - mean_y);
  }
  if (sxx <= 0.0)
    throw std::invalid_argument("fitts regression: all difficulty values identical");

  FittsFit fit;
  fit.n_points = n;
  fit.b_s_per_bit = sxy / sxx;
  fit.a_s = mean_y - fit.b_s_per_bit * mean_x;

  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - (fit.a_s + fit.b_s_per_bit * x);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

inline DisplayCalibration calibration_from_record(const TrialRecord& r) {
  DisplayCalibration c;
  c.px_per_mm = r.px_per_mm;
  c.viewing_distance_mm = r.viewing_distance_mm;
  c.ppd = r.ppd;
  c.dpr = r.dpr;
  c.viewport_w_px = r.viewport_w_px;
  c.viewport_h_px = r.viewport_h_px;
  return c;
}

// Signed endpoint error along the task axis (start -> target center).
inline double projected_endpoint_error(const TrialRecord& r) {
  if (!r.endpoint_px) throw std::invalid_argument("projected error: trial has no endpoint");
  const auto calib = calibration_from_record(r);
  const Vec2 start = trial_start_point(r.spec, calib);
  const Vec2 goal = target_center(r.spec, calib);
  const Vec2 axis = goal - start;
  const double len = axis.norm();
  if (len <= 0.0) throw std::invalid_argument("projected error: degenerate task axis");
  const Vec2 err = *r.endpoint_px - goal;
  return (err.x * axis.x + err.y * axis.y) / len;
}

struct EffectiveCell {
  double sigma_x_px = 0.0;
  double we_px = 0.0;
  double ide_bits = 0.0;
  double throughput_bits_s = 0.0;
  double mean_mt_s = 0.0;
  int n_hits = 0;
  bool degenerate = false;  // zero endpoint variance, We floored
};

// Effective width, effective difficulty and throughput for one
// participant x condition x difficulty cell. Only hit trials with endpoints
// contribute; cells with fewer than 2 are skipped by the caller.
inline std::optional<EffectiveCell> effective_metrics(
    std::span<const TrialRecord* const> hits) {
  std::vector<double> errors;
  double mt_sum = 0.0;
  double distance_px = 0.0;
  for (const TrialRecord* r : hits) {
    if (r->outcome != Outcome::hit || !r->endpoint_px || !r->rt_ms) continue;
    errors.push_back(projected_endpoint_error(*r));
    mt_sum += *r->rt_ms / 1000.0;
    distance_px = r->spec.distance_px;
  }
  if (errors.size() < 2) return std::nullopt;

  // Welford, n-1 denominator.
  double mean = 0.0, m2 = 0.0;
  int n = 0;
  for (double e : errors) {
    ++n;
    const double d = e - mean;
    mean += d / n;
    m2 += d * (e - mean);
  }
  const double sigma = std::sqrt(m2 / (n - 1));

  EffectiveCell cell;
  cell.n_hits = n;
  cell.sigma_x_px = sigma;
  cell.we_px = kEffectiveWidthFactor * sigma;
  if (cell.we_px < kWeFloorPx) {
    cell.we_px = kWeFloorPx;
    cell.degenerate = true;
  }
  cell.ide_bits = std::log2(distance_px / cell.we_px + 1.0);
  cell.mean_mt_s = mt_sum / n;
  cell.throughput_bits_s = cell.ide_bits / cell.mean_mt_s;
  return cell;
}

struct ErrorComposition {
  double slip = 0.0;
  double miss = 0.0;
  double timeout = 0.0;
};

struct ConditionMetrics {
  int n_measured = 0;
  int n_errors = 0;
  double error_rate = 0.0;
  std::optional<ErrorComposition> composition;  // absent when no errors
  std::optional<double> throughput_bits_s;      // participant mean of means
  std::optional<double> mean_mt_s;
  std::optional<double> we_px;
  std::optional<double> sigma_x_px;
  std::optional<double> ide_bits;
  std::optional<double> mean_verification_ms;
  int n_participants = 0;
};

struct SkippedCell {
  int participant_id = 0;
  ConditionCell cell;
  double id_bits = 0.0;
  std::string reason;
};

namespace detail {

inline std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Pooled error statistics plus mean-of-means performance aggregation
// (participant x difficulty cell -> participant -> group).
inline ConditionMetrics group_metrics(const std::vector<const TrialRecord*>& records,
                                      std::vector<SkippedCell>* skipped = nullptr) {
  ConditionMetrics out;
  out.n_measured = static_cast<int>(records.size());

  int slips = 0, misses = 0, timeouts = 0;
  double verif_sum = 0.0;
  int verif_n = 0;
  std::map<int, std::map<double, std::vector<const TrialRecord*>>> cells;
  for (const TrialRecord* r : records) {
    switch (r->outcome) {
      case Outcome::slip: ++slips; break;
      case Outcome::miss: ++misses; break;
      case Outcome::timeout: ++timeouts; break;
      case Outcome::hit:
        cells[r->spec.participant_id][r->spec.id_bits].push_back(r);
        if (r->verification_ms) {
          verif_sum += *r->verification_ms;
          ++verif_n;
        }
        break;
    }
  }
  out.n_errors = slips + misses + timeouts;
  out.error_rate = out.n_measured > 0
                       ? static_cast<double>(out.n_errors) / out.n_measured
                       : 0.0;
  if (out.n_errors > 0) {
    const double e = out.n_errors;
    out.composition = ErrorComposition{slips / e, misses / e, timeouts / e};
  }
  if (verif_n > 0) out.mean_verification_ms = verif_sum / verif_n;

  std::vector<double> tp, mt, we, sigma, ide;
  for (const auto& [pid, by_id] : cells) {
    std::vector<double> p_tp, p_mt, p_we, p_sigma, p_ide;
    for (const auto& [id_bits, hits] : by_id) {
      const auto cell = effective_metrics(hits);
      if (!cell) {
        if (skipped && !hits.empty())
          skipped->push_back({pid, hits.front()->spec.cell(), id_bits,
                              "fewer than 2 hit endpoints"});
        continue;
      }
      p_tp.push_back(cell->throughput_bits_s);
      p_mt.push_back(cell->mean_mt_s);
      p_we.push_back(cell->we_px);
      p_sigma.push_back(cell->sigma_x_px);
      p_ide.push_back(cell->ide_bits);
    }
    if (const auto m = mean_of(p_tp)) {
      tp.push_back(*m);
      mt.push_back(*mean_of(p_mt));
      we.push_back(*mean_of(p_we));
      sigma.push_back(*mean_of(p_sigma));
      ide.push_back(*mean_of(p_ide));
    }
  }
  out.n_participants = static_cast<int>(tp.size());
  out.throughput_bits_s = mean_of(tp);
  out.mean_mt_s = mean_of(mt);
  out.we_px = mean_of(we);
  out.sigma_x_px = mean_of(sigma);
  out.ide_bits = mean_of(ide);
  return out;
}

}  // namespace detail

struct SummaryReport {
  std::map<ConditionCell, ConditionMetrics> by_condition;
  std::map<Modality, ConditionMetrics> by_modality;
  ConditionMetrics overall;
  std::vector<SkippedCell> skipped_cells;
};

// Condition-level summary over QC-passing records; warm-up trials are not
// measured and are dropped here.
inline SummaryReport summarize(std::span<const TrialRecord> records) {
  SummaryReport report;
  std::map<ConditionCell, std::vector<const TrialRecord*>> by_cell;
  std::map<Modality, std::vector<const TrialRecord*>> by_modality;
  std::vector<const TrialRecord*> all;
  for (const TrialRecord& r : records) {
    if (r.spec.is_warmup) continue;
    by_cell[r.spec.cell()].push_back(&r);
    by_modality[r.spec.modality].push_back(&r);
    all.push_back(&r);
  }
  for (const auto& [cell, recs] : by_cell)
    report.by_condition[cell] = detail::group_metrics(recs, &report.skipped_cells);
  for (const auto& [m, recs] : by_modality)
    report.by_modality[m] = detail::group_metrics(recs);
  report.overall = detail::group_metrics(all);
  return report;
}

// Per-condition regression of mean movement time on effective difficulty,
// pooling one point per participant x difficulty cell.
inline std::map<ConditionCell, FittsFit> fitts_by_condition(
    std::span<const TrialRecord> records) {
  std::map<ConditionCell, std::map<std::pair<int, double>, std::vector<const TrialRecord*>>>
      groups;
  for (const TrialRecord& r : records) {
    if (r.spec.is_warmup || r.outcome != Outcome::hit) continue;
    groups[r.spec.cell()][{r.spec.participant_id, r.spec.id_bits}].push_back(&r);
  }
  std::map<ConditionCell, FittsFit> fits;
  for (const auto& [cell, cells] : groups) {
    std::vector<std::pair<double, double>> points;
    for (const auto& [key, hits] : cells) {
      const auto eff = effective_metrics(hits);
      if (eff) points.emplace_back(eff->ide_bits, eff->mean_mt_s);
    }
    if (points.size() >= 3) fits[cell] = fitts_regression(points);
  }
  return fits;
}

}  // namespace xrsim

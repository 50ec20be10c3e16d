#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xrsim/csv.hpp"
#include "xrsim/lba.hpp"
#include "xrsim/metrics.hpp"
#include "xrsim/qc.hpp"
#include "xrsim/task.hpp"

namespace xrsim {

inline std::string cell_name(const ConditionCell& c) {
  return to_string(c.modality) + "-" + to_string(c.ui_mode) + "-" + to_string(c.pressure);
}

namespace detail {

inline nlohmann::json metrics_json(const ConditionMetrics& m) {
  nlohmann::json j;
  j["n_measured"] = m.n_measured;
  j["n_errors"] = m.n_errors;
  j["error_rate"] = m.error_rate;
  j["n_participants"] = m.n_participants;
  auto set_opt = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  set_opt("throughput_bits_s", m.throughput_bits_s);
  set_opt("mean_mt_s", m.mean_mt_s);
  set_opt("we_px", m.we_px);
  set_opt("sigma_x_px", m.sigma_x_px);
  set_opt("ide_bits", m.ide_bits);
  set_opt("mean_verification_ms", m.mean_verification_ms);
  if (m.composition) {
    j["error_composition"] = {{"slip", m.composition->slip},
                              {"miss", m.composition->miss},
                              {"timeout", m.composition->timeout}};
  }
  return j;
}

}  // namespace detail

// Metrics tree keyed by condition, plus modality and pooled rollups.
inline std::string metrics_report_json(const SummaryReport& summary,
                                       const std::map<ConditionCell, FittsFit>& fitts) {
  nlohmann::json j;
  for (const auto& [cell, m] : summary.by_condition)
    j["conditions"][cell_name(cell)] = detail::metrics_json(m);
  for (const auto& [modality, m] : summary.by_modality)
    j["modalities"][to_string(modality)] = detail::metrics_json(m);
  j["overall"] = detail::metrics_json(summary.overall);
  for (const auto& [cell, fit] : fitts)
    j["fitts"][cell_name(cell)] = {{"intercept_s", fit.a_s},
                                   {"slope_s_per_bit", fit.b_s_per_bit},
                                   {"r_squared", fit.r_squared},
                                   {"n_points", fit.n_points}};
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : summary.skipped_cells)
    skipped.push_back({{"participant_id", s.participant_id},
                       {"condition", cell_name(s.cell)},
                       {"id_bits", s.id_bits},
                       {"reason", s.reason}});
  j["skipped_cells"] = skipped;
  return j.dump(2) + "\n";
}

// Per-modality performance table (throughput, error rate, movement time).
inline std::string performance_table_csv(const SummaryReport& summary) {
  std::ostringstream os;
  csv_write_row(os, {"modality", "throughput_bits_s", "error_rate", "mean_mt_s",
                     "mean_verification_ms", "n_measured"});
  for (const auto& [modality, m] : summary.by_modality)
    csv_write_row(os, {to_string(modality), csv_format(m.throughput_bits_s),
                       csv_format(m.error_rate), csv_format(m.mean_mt_s),
                       csv_format(m.mean_verification_ms), std::to_string(m.n_measured)});
  return os.str();
}

// Per-modality error-type composition table.
inline std::string error_types_table_csv(const SummaryReport& summary) {
  std::ostringstream os;
  csv_write_row(os, {"modality", "slip_share", "miss_share", "timeout_share", "n_errors"});
  for (const auto& [modality, m] : summary.by_modality) {
    if (m.composition)
      csv_write_row(os, {to_string(modality), csv_format(m.composition->slip),
                         csv_format(m.composition->miss), csv_format(m.composition->timeout),
                         std::to_string(m.n_errors)});
    else
      csv_write_row(os, {to_string(modality), "", "", "", "0"});
  }
  return os.str();
}

// Full condition-cell table.
inline std::string conditions_table_csv(const SummaryReport& summary) {
  std::ostringstream os;
  csv_write_row(os, {"condition", "throughput_bits_s", "error_rate", "mean_mt_s", "we_px",
                     "sigma_x_px", "ide_bits", "mean_verification_ms", "slip_share",
                     "miss_share", "timeout_share", "n_measured", "n_participants"});
  for (const auto& [cell, m] : summary.by_condition) {
    std::vector<std::string> row = {cell_name(cell),
                                    csv_format(m.throughput_bits_s),
                                    csv_format(m.error_rate),
                                    csv_format(m.mean_mt_s),
                                    csv_format(m.we_px),
                                    csv_format(m.sigma_x_px),
                                    csv_format(m.ide_bits),
                                    csv_format(m.mean_verification_ms)};
    if (m.composition) {
      row.push_back(csv_format(m.composition->slip));
      row.push_back(csv_format(m.composition->miss));
      row.push_back(csv_format(m.composition->timeout));
    } else {
      row.insert(row.end(), {"", "", ""});
    }
    row.push_back(std::to_string(m.n_measured));
    row.push_back(std::to_string(m.n_participants));
    csv_write_row(os, row);
  }
  return os.str();
}

inline std::string fitts_table_csv(const std::map<ConditionCell, FittsFit>& fitts) {
  std::ostringstream os;
  csv_write_row(os, {"condition", "slope_s_per_bit", "intercept_s", "r_squared", "n_points"});
  for (const auto& [cell, fit] : fitts)
    csv_write_row(os, {cell_name(cell), csv_format(fit.b_s_per_bit), csv_format(fit.a_s),
                       csv_format(fit.r_squared), std::to_string(fit.n_points)});
  return os.str();
}

inline std::string lba_report_json(const LbaFitResult& fit,
                                   const std::vector<std::string>& cell_names) {
  nlohmann::json j;
  j["nll"] = fit.nll;
  j["best_start"] = fit.best_start;
  j["estimates"] = {{"a_start", fit.params.a_start},
                    {"k_gap", fit.params.k_gap},
                    {"v_commit_base", fit.params.v_commit_base},
                    {"beta_id", fit.params.beta_id},
                    {"beta_pressure", fit.params.beta_pressure},
                    {"v_alt_fixed", fit.params.v_alt},
                    {"s_drift_fixed", fit.params.s_drift}};
  for (std::size_t c = 0; c < fit.params.t0_s.size(); ++c) {
    const std::string name =
        c < cell_names.size() ? cell_names[c] : "cell_" + std::to_string(c);
    j["estimates"]["t0_s"][name] = fit.params.t0_s[c];
  }
  j["fitted_beta_id"] = fit.fitted_beta_id;
  j["fitted_beta_pressure"] = fit.fitted_beta_pressure;
  nlohmann::json starts = nlohmann::json::array();
  for (const auto& s : fit.starts)
    starts.push_back(
        {{"nll", s.nll}, {"converged", s.converged}, {"iterations", s.iterations}});
  j["starts"] = starts;
  j["warnings"] = fit.warnings;
  if (!fit.bootstrap_ci.empty()) {
    for (const auto& [name, ci] : fit.bootstrap_ci)
      j["bootstrap_ci"][name] = {ci.first, ci.second};
  }
  return j.dump(2) + "\n";
}

}  // namespace xrsim

#pragma once

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "xrsim/csv.hpp"
#include "xrsim/engine.hpp"
#include "xrsim/qc.hpp"
#include "xrsim/task.hpp"

namespace xrsim {

inline constexpr const char* kTrialLogSchemaVersion = "1";

struct ColumnSpec {
  const char* name;
  const char* type;  // string | int | real | bool
  const char* unit;
  const char* description;
};

// Ordered trial-log schema. The header row and the shipped schema file must
// both match this table exactly.
inline constexpr std::array<ColumnSpec, 43> kTrialLogColumns = {{
    {"schema_version", "string", "", "trial log schema version"},
    {"participant_id", "int", "", "synthetic participant index"},
    {"block_idx", "int", "", "block index within the session, 0-7"},
    {"trial_idx", "int", "", "trial index within the block, 0-26"},
    {"is_warmup", "bool", "", "leading practice trial, excluded from analysis"},
    {"modality", "string", "", "hand or gaze"},
    {"ui_mode", "string", "", "static or adaptive"},
    {"pressure", "string", "", "self_paced or time_limited"},
    {"target_angle_deg", "real", "deg", "target direction on the ring"},
    {"width_px", "real", "px", "nominal target width"},
    {"distance_px", "real", "px", "movement amplitude"},
    {"id_bits", "real", "bits", "Shannon index of difficulty"},
    {"rt_ms", "real", "ms", "trial start to selection; empty on timeout"},
    {"first_entry_ms", "real", "ms", "trial start to first goal entry; empty if never"},
    {"verification_ms", "real", "ms", "first goal entry to selection; empty if either absent"},
    {"hover_total_ms", "real", "ms", "total time the cursor spent inside the goal"},
    {"submovement_count", "int", "", "scripted submovements (hand) or saccades (gaze)"},
    {"endpoint_x_px", "real", "px", "selection endpoint x; empty on timeout"},
    {"endpoint_y_px", "real", "px", "selection endpoint y; empty on timeout"},
    {"outcome", "string", "", "hit, slip, miss or timeout"},
    {"selected_element", "string", "", "selected element id; empty if none"},
    {"width_scale_applied", "real", "", "hand effective-radius scale in force"},
    {"declutter_active", "bool", "", "HUD decoys hidden during the trial"},
    {"policy_triggered", "bool", "", "policy trigger condition held after the trial"},
    {"consecutive_errors_at_start", "int", "", "error run length entering the trial"},
    {"agent_profile", "string", "", "agent parameter profile name"},
    {"dpr", "real", "", "device pixel ratio"},
    {"zoom_level", "real", "", "browser zoom, 1.0 = 100%"},
    {"fullscreen", "bool", "", "fullscreen state during the trial"},
    {"tab_hidden_ms", "real", "ms", "time the tab was hidden during the trial"},
    {"px_per_mm", "real", "px/mm", "calibration scale"},
    {"ppd", "real", "px/deg", "pixels per degree of visual angle"},
    {"viewing_distance_mm", "real", "mm", "assumed viewing distance"},
    {"viewport_w_px", "int", "px", "viewport width"},
    {"viewport_h_px", "int", "px", "viewport height"},
    {"trial_seed", "int", "", "derived RNG seed of the trial"},
    {"tick_count", "int", "", "fixed-timestep ticks executed"},
    {"tlx_mental", "real", "", "optional workload pass-through"},
    {"tlx_physical", "real", "", "optional workload pass-through"},
    {"tlx_temporal", "real", "", "optional workload pass-through"},
    {"tlx_performance", "real", "", "optional workload pass-through"},
    {"tlx_effort", "real", "", "optional workload pass-through"},
    {"tlx_frustration", "real", "", "optional workload pass-through"},
}};

inline std::vector<std::string> trial_log_header() {
  std::vector<std::string> h;
  for (const auto& c : kTrialLogColumns) h.emplace_back(c.name);
  return h;
}

inline std::vector<std::string> serialize_record(const TrialRecord& r) {
  std::vector<std::string> f;
  f.reserve(kTrialLogColumns.size());
  f.push_back(kTrialLogSchemaVersion);
  f.push_back(std::to_string(r.spec.participant_id));
  f.push_back(std::to_string(r.spec.block_idx));
  f.push_back(std::to_string(r.spec.trial_idx));
  f.push_back(r.spec.is_warmup ? "1" : "0");
  f.push_back(to_string(r.spec.modality));
  f.push_back(to_string(r.spec.ui_mode));
  f.push_back(to_string(r.spec.pressure));
  f.push_back(csv_format(r.spec.target_angle_deg));
  f.push_back(csv_format(r.spec.width_px));
  f.push_back(csv_format(r.spec.distance_px));
  f.push_back(csv_format(r.spec.id_bits));
  f.push_back(csv_format(r.rt_ms));
  f.push_back(csv_format(r.first_entry_ms));
  f.push_back(csv_format(r.verification_ms));
  f.push_back(csv_format(r.hover_total_ms));
  f.push_back(std::to_string(r.submovement_count));
  f.push_back(r.endpoint_px ? csv_format(r.endpoint_px->x) : std::string{});
  f.push_back(r.endpoint_px ? csv_format(r.endpoint_px->y) : std::string{});
  f.push_back(to_string(r.outcome));
  f.push_back(r.selected_element);
  f.push_back(csv_format(r.width_scale_applied));
  f.push_back(r.declutter_active ? "1" : "0");
  f.push_back(r.policy_triggered ? "1" : "0");
  f.push_back(std::to_string(r.consecutive_errors_at_start));
  f.push_back(r.agent_profile);
  f.push_back(csv_format(r.dpr));
  f.push_back(csv_format(r.zoom_level));
  f.push_back(r.fullscreen ? "1" : "0");
  f.push_back(csv_format(r.tab_hidden_ms));
  f.push_back(csv_format(r.px_per_mm));
  f.push_back(csv_format(r.ppd));
  f.push_back(csv_format(r.viewing_distance_mm));
  f.push_back(std::to_string(r.viewport_w_px));
  f.push_back(std::to_string(r.viewport_h_px));
  f.push_back(std::to_string(r.trial_seed));
  f.push_back(std::to_string(r.tick_count));
  for (const auto& t : r.tlx) f.push_back(csv_format(t));
  return f;
}

namespace detail {

inline std::optional<double> opt_double(const std::string& s, const std::string& ctx) {
  if (s.empty()) return std::nullopt;
  return csv_parse_double(s, ctx);
}

inline bool parse_bool(const std::string& s, const std::string& ctx) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw DataError("malformed bool '" + s + "' in " + ctx);
}

}  // namespace detail

inline TrialRecord parse_record(const std::vector<std::string>& f, const std::string& ctx) {
  if (f.size() != kTrialLogColumns.size())
    throw DataError(ctx + ": expected " + std::to_string(kTrialLogColumns.size()) +
                    " fields, found " + std::to_string(f.size()));
  if (f[0] != kTrialLogSchemaVersion)
    throw DataError(ctx + ": schema version mismatch, expected " +
                    std::string(kTrialLogSchemaVersion) + ", found " + f[0]);
  TrialRecord r;
  std::size_t i = 1;
  r.spec.participant_id = static_cast<int>(csv_parse_int(f[i++], ctx));
  r.spec.block_idx = static_cast<int>(csv_parse_int(f[i++], ctx));
  r.spec.trial_idx = static_cast<int>(csv_parse_int(f[i++], ctx));
  r.spec.is_warmup = detail::parse_bool(f[i++], ctx);
  r.spec.modality = modality_from_string(f[i++]);
  r.spec.ui_mode = ui_mode_from_string(f[i++]);
  r.spec.pressure = pressure_from_string(f[i++]);
  r.spec.target_angle_deg = csv_parse_double(f[i++], ctx);
  r.spec.width_px = csv_parse_double(f[i++], ctx);
  r.spec.distance_px = csv_parse_double(f[i++], ctx);
  r.spec.id_bits = csv_parse_double(f[i++], ctx);
  r.rt_ms = detail::opt_double(f[i++], ctx);
  r.first_entry_ms = detail::opt_double(f[i++], ctx);
  r.verification_ms = detail::opt_double(f[i++], ctx);
  r.hover_total_ms = csv_parse_double(f[i++], ctx);
  r.submovement_count = static_cast<int>(csv_parse_int(f[i++], ctx));
  const auto ex = detail::opt_double(f[i++], ctx);
  const auto ey = detail::opt_double(f[i++], ctx);
  if (ex.has_value() != ey.has_value())
    throw DataError(ctx + ": endpoint coordinates must be both present or both absent");
  if (ex) r.endpoint_px = Vec2{*ex, *ey};
  r.outcome = outcome_from_string(f[i++]);
  r.selected_element = f[i++];
  r.width_scale_applied = csv_parse_double(f[i++], ctx);
  r.declutter_active = detail::parse_bool(f[i++], ctx);
  r.policy_triggered = detail::parse_bool(f[i++], ctx);
  r.consecutive_errors_at_start = static_cast<int>(csv_parse_int(f[i++], ctx));
  r.agent_profile = f[i++];
  r.dpr = csv_parse_double(f[i++], ctx);
  r.zoom_level = csv_parse_double(f[i++], ctx);
  r.fullscreen = detail::parse_bool(f[i++], ctx);
  r.tab_hidden_ms = csv_parse_double(f[i++], ctx);
  r.px_per_mm = csv_parse_double(f[i++], ctx);
  r.ppd = csv_parse_double(f[i++], ctx);
  r.viewing_distance_mm = csv_parse_double(f[i++], ctx);
  r.viewport_w_px = static_cast<int>(csv_parse_int(f[i++], ctx));
  r.viewport_h_px = static_cast<int>(csv_parse_int(f[i++], ctx));
  r.trial_seed = static_cast<std::uint64_t>(std::stoull(f[i++]));
  r.tick_count = static_cast<int>(csv_parse_int(f[i++], ctx));
  for (auto& t : r.tlx) t = detail::opt_double(f[i++], ctx);
  return r;
}

inline std::string export_trial_csv(std::span<const TrialRecord> records) {
  std::ostringstream os;
  csv_write_row(os, trial_log_header());
  for (const auto& r : records) csv_write_row(os, serialize_record(r));
  return os.str();
}

inline std::vector<TrialRecord> load_trial_csv_text(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> row;
  if (!csv_read_row(is, row)) throw DataError("trial log: empty file");
  const auto expected = trial_log_header();
  if (row != expected) {
    std::string found;
    for (std::size_t i = 0; i < row.size() && i < 4; ++i)
      found += (i ? "," : "") + row[i];
    throw DataError("trial log: header mismatch (schema version " +
                    std::string(kTrialLogSchemaVersion) + " expected; file starts with '" +
                    found + "...')");
  }
  std::vector<TrialRecord> records;
  int line = 1;
  while (csv_read_row(is, row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;  // trailing newline
    records.push_back(parse_record(row, "row " + std::to_string(line)));
  }
  return records;
}

// ---- sidecar files ----

inline std::string export_action_log_csv(std::span<const ActionLogEntry> actions) {
  std::ostringstream os;
  csv_write_row(os, {"participant_id", "block_idx", "trial_idx", "action", "value", "applied"});
  for (const auto& a : actions)
    csv_write_row(os, {std::to_string(a.participant_id), std::to_string(a.block_idx),
                       std::to_string(a.action.trial_idx), to_string(a.action.kind),
                       csv_format(a.action.value), a.applied ? "1" : "0"});
  return os.str();
}

inline std::string export_qc_ledger_csv(std::span<const QcExclusion> ledger) {
  std::ostringstream os;
  csv_write_row(os, {"participant_id", "block_idx", "trial_idx", "reason"});
  for (const auto& e : ledger)
    csv_write_row(os, {std::to_string(e.participant_id), std::to_string(e.block_idx),
                       std::to_string(e.trial_idx), to_string(e.reason)});
  return os.str();
}

// Verification-phase export for accumulator fitting; applies the RT validity
// window, which descriptive summaries deliberately do not.
inline constexpr double kVerificationExportMinMs = 200.0;
inline constexpr double kVerificationExportMaxMs = 5000.0;

struct VerificationRow {
  int participant_id = 0;
  Modality modality = Modality::hand;
  UiMode ui_mode = UiMode::static_ui;
  Pressure pressure = Pressure::self_paced;
  double id_bits = 0.0;
  double verification_rt_ms = 0.0;
};

inline std::vector<VerificationRow> verification_rows(std::span<const TrialRecord> records) {
  std::vector<VerificationRow> rows;
  for (const auto& r : records) {
    if (r.spec.is_warmup || r.outcome != Outcome::hit || !r.verification_ms) continue;
    if (*r.verification_ms < kVerificationExportMinMs ||
        *r.verification_ms > kVerificationExportMaxMs)
      continue;
    rows.push_back({r.spec.participant_id, r.spec.modality, r.spec.ui_mode, r.spec.pressure,
                    r.spec.id_bits, *r.verification_ms});
  }
  return rows;
}

inline const std::vector<std::string>& verification_header() {
  static const std::vector<std::string> h = {"participant_id", "modality",   "ui_mode",
                                             "pressure",       "id_bits",    "verification_rt_ms"};
  return h;
}

inline std::string export_verification_csv(std::span<const VerificationRow> rows) {
  std::ostringstream os;
  csv_write_row(os, verification_header());
  for (const auto& r : rows)
    csv_write_row(os, {std::to_string(r.participant_id), to_string(r.modality),
                       to_string(r.ui_mode), to_string(r.pressure), csv_format(r.id_bits),
                       csv_format(r.verification_rt_ms)});
  return os.str();
}

inline std::vector<VerificationRow> load_verification_csv_text(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> row;
  if (!csv_read_row(is, row)) throw DataError("verification export: empty file");
  if (row != verification_header())
    throw DataError("verification export: header mismatch");
  std::vector<VerificationRow> rows;
  int line = 1;
  while (csv_read_row(is, row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;
    const std::string ctx = "row " + std::to_string(line);
    if (row.size() != 6) throw DataError(ctx + ": expected 6 fields");
    rows.push_back({static_cast<int>(csv_parse_int(row[0], ctx)), modality_from_string(row[1]),
                    ui_mode_from_string(row[2]), pressure_from_string(row[3]),
                    csv_parse_double(row[4], ctx), csv_parse_double(row[5], ctx)});
  }
  return rows;
}

// Machine-readable schema document; the shipped schema/trial_log_schema.json
// is this exact text.
inline std::string trial_log_schema_json() {
  std::ostringstream os;
  os << "{\n  \"schema_version\": \"" << kTrialLogSchemaVersion << "\",\n  \"columns\": [\n";
  for (std::size_t i = 0; i < kTrialLogColumns.size(); ++i) {
    const auto& c = kTrialLogColumns[i];
    os << "    {\"name\": \"" << c.name << "\", \"type\": \"" << c.type << "\", \"unit\": \""
       << c.unit << "\", \"description\": \"" << c.description << "\"}"
       << (i + 1 < kTrialLogColumns.size() ? "," : "") << "\n";
  }
  os << "  ]\n}\n";
  return os.str();
}

}  // namespace xrsim

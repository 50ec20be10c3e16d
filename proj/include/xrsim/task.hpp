#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xrsim/calib.hpp"
#include "xrsim/common.hpp"
#include "xrsim/rng.hpp"
#include "xrsim/williams.hpp"

namespace xrsim {

enum class Modality { hand, gaze };
enum class UiMode { static_ui, adaptive };
enum class Pressure { self_paced, time_limited };
enum class Outcome { hit, slip, miss, timeout };

inline std::string to_string(Modality m) { return m == Modality::hand ? "hand" : "gaze"; }
inline std::string to_string(UiMode u) { return u == UiMode::static_ui ? "static" : "adaptive"; }
inline std::string to_string(Pressure p) {
  return p == Pressure::self_paced ? "self_paced" : "time_limited";
}
inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::hit: return "hit";
    case Outcome::slip: return "slip";
    case Outcome::miss: return "miss";
    default: return "timeout";
  }
}

inline Modality modality_from_string(const std::string& s) {
  if (s == "hand") return Modality::hand;
  if (s == "gaze") return Modality::gaze;
  throw DataError("unknown modality: " + s);
}
inline UiMode ui_mode_from_string(const std::string& s) {
  if (s == "static") return UiMode::static_ui;
  if (s == "adaptive") return UiMode::adaptive;
  throw DataError("unknown ui_mode: " + s);
}
inline Pressure pressure_from_string(const std::string& s) {
  if (s == "self_paced") return Pressure::self_paced;
  if (s == "time_limited") return Pressure::time_limited;
  throw DataError("unknown pressure: " + s);
}
inline Outcome outcome_from_string(const std::string& s) {
  if (s == "hit") return Outcome::hit;
  if (s == "slip") return Outcome::slip;
  if (s == "miss") return Outcome::miss;
  if (s == "timeout") return Outcome::timeout;
  throw DataError("unknown outcome: " + s);
}

// The full factorial cell a block runs under.
struct ConditionCell {
  Modality modality = Modality::hand;
  UiMode ui_mode = UiMode::static_ui;
  Pressure pressure = Pressure::self_paced;

  bool operator==(const ConditionCell&) const = default;
  auto operator<=>(const ConditionCell&) const = default;
};

inline int cell_index(const ConditionCell& c) {
  return static_cast<int>(c.modality) * 4 + static_cast<int>(c.ui_mode) * 2 +
         static_cast<int>(c.pressure);
}

inline ConditionCell cell_from_index(int idx) {
  if (idx < 0 || idx > 7) throw std::invalid_argument("cell index out of range");
  return {static_cast<Modality>(idx / 4), static_cast<UiMode>((idx / 2) % 2),
          static_cast<Pressure>(idx % 2)};
}

inline double shannon_id_bits(double distance_px, double width_px) {
  if (!(distance_px > 0.0) || !(width_px > 0.0))
    throw std::invalid_argument("shannon id: distance and width must be positive");
  return std::log2(distance_px / width_px + 1.0);
}

// One difficulty level; movement amplitude follows from the Shannon form.
struct IdLevel {
  double width_px = 0.0;
  double id_bits = 0.0;

  double distance_px() const { return width_px * (std::exp2(id_bits) - 1.0); }
};

struct TaskConfig {
  int blocks = 8;
  int trials_per_block = 27;
  int warmup_trials = 3;
  int directions = 8;
  std::vector<IdLevel> id_levels = {{80.0, 2.0}, {50.0, 4.0}, {30.0, 6.0}};
  double timeout_ms = 6000.0;
  double dwell_ms = 500.0;
  double dwell_tolerance_px = 10.0;
  double tick_hz = 60.0;
  // The trial deadline also applies in self-paced blocks by default; set
  // false to enforce it only under time pressure.
  bool timeout_in_self_paced = true;
  double hud_decoy_radius_px = 24.0;
};

inline void validate(const TaskConfig& t) {
  if (t.blocks != 8) throw ConfigError("task: the factorial design requires 8 blocks");
  if (t.directions <= 0) throw ConfigError("task: directions must be positive");
  if (t.warmup_trials < 0) throw ConfigError("task: warmup trials must be non-negative");
  if (t.trials_per_block !=
      t.warmup_trials + t.directions * static_cast<int>(t.id_levels.size()))
    throw ConfigError("task: trials_per_block must equal warmups + directions * id levels");
  if (t.id_levels.empty()) throw ConfigError("task: at least one id level");
  for (const auto& lv : t.id_levels) {
    if (!(lv.width_px >= 30.0 && lv.width_px <= 80.0))
      throw ConfigError("task: target width must lie in [30, 80] px");
    if (!(lv.id_bits >= 2.0 && lv.id_bits <= 6.0))
      throw ConfigError("task: index of difficulty must lie in [2, 6] bits");
  }
  if (!(t.timeout_ms > 0.0) || !(t.dwell_ms > 0.0) || !(t.tick_hz > 0.0))
    throw ConfigError("task: timeout, dwell and tick rate must be positive");
}

// Planned condition of one trial.
struct TrialSpec {
  int participant_id = 0;
  int block_idx = 0;
  int trial_idx = 0;
  bool is_warmup = false;
  Modality modality = Modality::hand;
  UiMode ui_mode = UiMode::static_ui;
  Pressure pressure = Pressure::self_paced;
  double target_angle_deg = 0.0;
  double width_px = 0.0;
  double distance_px = 0.0;
  double id_bits = 0.0;

  ConditionCell cell() const { return {modality, ui_mode, pressure}; }
  bool operator==(const TrialSpec&) const = default;
};

inline bool spec_invariants_hold(const TrialSpec& s) {
  if (!(s.width_px >= 30.0 && s.width_px <= 80.0)) return false;
  if (!(s.id_bits >= 2.0 && s.id_bits <= 6.0)) return false;
  const double recomputed = std::log2(s.distance_px / s.width_px + 1.0);
  return std::abs(recomputed - s.id_bits) <= 1e-9 * std::max(1.0, std::abs(s.id_bits));
}

// Ring layout centered in the viewport. Target sits at radius D/2 along the
// trial direction; the cursor starts diametrically opposite, one amplitude
// away.
inline Vec2 layout_center(const DisplayCalibration& calib) {
  return {0.5 * calib.viewport_w_px, 0.5 * calib.viewport_h_px};
}

inline Vec2 direction_unit(double angle_deg) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  return {std::cos(a), std::sin(a)};
}

inline Vec2 target_center(const TrialSpec& s, const DisplayCalibration& calib) {
  return layout_center(calib) + direction_unit(s.target_angle_deg) * (0.5 * s.distance_px);
}

inline Vec2 trial_start_point(const TrialSpec& s, const DisplayCalibration& calib) {
  return layout_center(calib) + direction_unit(s.target_angle_deg) * (-0.5 * s.distance_px);
}

// Two always-present HUD elements on the right edge; selectable decoys unless
// hidden by declutter.
inline std::array<Vec2, 2> hud_decoy_positions(const DisplayCalibration& calib) {
  const double x = calib.viewport_w_px - 240.0;
  const double cy = 0.5 * calib.viewport_h_px;
  return {Vec2{x, cy - 260.0}, Vec2{x, cy + 260.0}};
}

// Complete logged outcome of one executed trial.
struct TrialRecord {
  TrialSpec spec;

  std::optional<double> rt_ms;           // trial start -> selection
  std::optional<double> first_entry_ms;  // trial start -> first goal entry
  std::optional<double> verification_ms;  // first entry -> selection
  double hover_total_ms = 0.0;
  int submovement_count = 0;
  std::optional<Vec2> endpoint_px;
  Outcome outcome = Outcome::timeout;
  std::string selected_element;  // element id, empty if none
  double width_scale_applied = 1.0;
  bool declutter_active = false;
  bool policy_triggered = false;
  int consecutive_errors_at_start = 0;
  std::string agent_profile;

  // Display metadata consumed by QC.
  double dpr = 1.0;
  double zoom_level = 1.0;
  bool fullscreen = true;
  double tab_hidden_ms = 0.0;

  // Calibration echo.
  double px_per_mm = 0.0;
  double ppd = 0.0;
  double viewing_distance_mm = 0.0;
  int viewport_w_px = 0;
  int viewport_h_px = 0;

  std::uint64_t trial_seed = 0;
  int tick_count = 0;

  // Optional workload pass-through (mental, physical, temporal, performance,
  // effort, frustration); not produced by the simulator.
  std::array<std::optional<double>, 6> tlx;

  bool is_error() const { return outcome != Outcome::hit; }
  bool operator==(const TrialRecord&) const = default;
};

struct BlockPlan {
  int block_idx = 0;
  ConditionCell cell;
  std::vector<TrialSpec> trials;
};

struct SessionPlan {
  int participant_id = 0;
  int williams_row_idx = 0;
  std::vector<BlockPlan> blocks;
};

// Deterministic session plan: block order is the participant's Williams row
// over the 8 factorial cells; each block runs warm-up trials then one trial
// per direction x id-level, with per-direction level order drawn from the
// seed.
inline SessionPlan plan_session(int participant_id, const TaskConfig& task,
                                std::uint64_t seed) {
  validate(task);
  const auto square = generate_williams_square(task.blocks);
  const int row = participant_id % task.blocks;

  SessionPlan plan;
  plan.participant_id = participant_id;
  plan.williams_row_idx = row;

  const int n_levels = static_cast<int>(task.id_levels.size());

  for (int b = 0; b < task.blocks; ++b) {
    BlockPlan block;
    block.block_idx = b;
    block.cell = cell_from_index(square[row][b]);

    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(participant_id),
                               static_cast<std::uint64_t>(b), 0x706c616eull}));

    // Per-direction permutation of id levels: every direction sees every
    // level exactly once across the measured repetitions.
    std::vector<std::vector<int>> level_order(task.directions);
    for (int d = 0; d < task.directions; ++d) {
      std::vector<int> perm(n_levels);
      for (int i = 0; i < n_levels; ++i) perm[i] = i;
      for (int i = n_levels - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(0, i));
        std::swap(perm[i], perm[j]);
      }
      level_order[d] = perm;
    }

    const double angle_step = 360.0 / task.directions;
    for (int t = 0; t < task.trials_per_block; ++t) {
      TrialSpec spec;
      spec.participant_id = participant_id;
      spec.block_idx = b;
      spec.trial_idx = t;
      spec.modality = block.cell.modality;
      spec.ui_mode = block.cell.ui_mode;
      spec.pressure = block.cell.pressure;

      int direction;
      int level_idx;
      if (t < task.warmup_trials) {
        spec.is_warmup = true;
        direction = t % task.directions;
        level_idx = t % n_levels;
      } else {
        const int m = t - task.warmup_trials;
        direction = m % task.directions;
        const int rep = m / task.directions;
        level_idx = level_order[direction][rep];
      }
      const IdLevel& lv = task.id_levels[level_idx];
      spec.target_angle_deg = direction * angle_step;
      spec.width_px = lv.width_px;
      spec.id_bits = lv.id_bits;
      spec.distance_px = lv.distance_px();
      block.trials.push_back(spec);
    }
    plan.blocks.push_back(std::move(block));
  }
  return plan;
}

}  // namespace xrsim

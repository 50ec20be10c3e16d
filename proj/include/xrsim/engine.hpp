#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xrsim/agents.hpp"
#include "xrsim/calib.hpp"
#include "xrsim/common.hpp"
#include "xrsim/gaze.hpp"
#include "xrsim/policy.hpp"
#include "xrsim/rng.hpp"
#include "xrsim/task.hpp"

namespace xrsim {

struct SelectableElement {
  std::string id;
  Vec2 center;
  double radius = 0.0;
};

// The trial's selectable surface: the full target ring plus the HUD decoys
// (hidden while declutter is active).
inline std::vector<SelectableElement> trial_elements(const TrialSpec& spec,
                                                     const TaskConfig& task,
                                                     const DisplayCalibration& calib,
                                                     bool declutter_active) {
  std::vector<SelectableElement> elements;
  const double step = 360.0 / task.directions;
  for (int d = 0; d < task.directions; ++d) {
    TrialSpec at = spec;
    at.target_angle_deg = d * step;
    elements.push_back({"target_" + std::to_string(d), target_center(at, calib),
                        0.5 * spec.width_px});
  }
  if (!declutter_active) {
    const auto decoys = hud_decoy_positions(calib);
    elements.push_back({"hud_0", decoys[0], task.hud_decoy_radius_px});
    elements.push_back({"hud_1", decoys[1], task.hud_decoy_radius_px});
  }
  return elements;
}

inline std::string goal_element_id(const TrialSpec& spec, const TaskConfig& task) {
  const double step = 360.0 / task.directions;
  const int idx =
      static_cast<int>(std::llround(spec.target_angle_deg / step)) % task.directions;
  return "target_" + std::to_string(idx);
}

struct SelectionEvent {
  std::string element_id;  // empty for a click that hit nothing
  bool by_dwell = false;
  Vec2 point;
  double time_ms = 0.0;
};

// hit: selection on the goal; slip: dwell completed on a non-goal element;
// miss: click committed outside the goal bounds; timeout: no selection.
inline Outcome classify_outcome(const std::optional<SelectionEvent>& selection,
                                const std::string& goal_id) {
  if (!selection) return Outcome::timeout;
  if (selection->element_id == goal_id) return Outcome::hit;
  return selection->by_dwell ? Outcome::slip : Outcome::miss;
}

struct EngineContext {
  TaskConfig task;
  DisplayCalibration calib;
  GazeSimParams gaze_params;
  HandAgentParams hand_agent;
  GazeAgentParams gaze_agent;
  PolicyConfig policy;
};

namespace detail {

// Continuous-dwell tracker: the accumulator arms on entry within the element
// radius, counts time inside radius + tolerance from the entry timestamp on,
// and resets to zero on any excursion beyond the tolerance ring. Arming
// credits no time, so a completed dwell sits exactly dwell_ms after entry.
struct DwellTracker {
  bool engaged = false;
  double accum_ms = 0.0;

  void tick(double d_px, double radius, double tolerance, double dt_ms) {
    if (engaged) {
      if (d_px <= radius + tolerance) {
        accum_ms += dt_ms;
      } else {
        engaged = false;
        accum_ms = 0.0;
      }
    } else if (d_px <= radius) {
      engaged = true;
      accum_ms = 0.0;
    }
  }
};

}  // namespace detail

// Runs one trial tick by tick at the fixed task rate. Gaze trials route the
// raw script through the gaze transform and select by continuous dwell on any
// selectable element; hand trials use the raw pointer and select on the
// scripted click. No selection within the trial window is a timeout.
inline TrialRecord run_trial(const TrialSpec& spec, const RawInputScript& script,
                             const EngineContext& ctx, const UiState& ui,
                             std::uint64_t trial_seed) {
  if (script.samples.empty()) throw DataError("run_trial: empty input script");
  for (const Vec2& s : script.samples)
    if (!s.finite()) throw DataError("run_trial: non-finite script sample");

  const bool is_gaze = spec.modality == Modality::gaze;
  const double dt_ms = 1000.0 / ctx.task.tick_hz;
  const double dt_s = dt_ms / 1000.0;

  const bool deadline_active =
      spec.pressure == Pressure::time_limited || ctx.task.timeout_in_self_paced;
  const double window_ms = deadline_active ? ctx.task.timeout_ms : 4.0 * ctx.task.timeout_ms;
  const int max_ticks = static_cast<int>(std::llround(window_ms / dt_ms));

  const auto elements = trial_elements(spec, ctx.task, ctx.calib, ui.declutter_active);
  const std::string goal_id = goal_element_id(spec, ctx.task);
  const Vec2 goal = target_center(spec, ctx.calib);
  const double goal_radius =
      0.5 * spec.width_px * (is_gaze ? 1.0 : ui.width_scale);

  GazeSimState gaze_state(derive_seed(trial_seed, {2}));
  std::vector<detail::DwellTracker> dwell(elements.size());

  TrialRecord rec;
  rec.spec = spec;
  rec.trial_seed = trial_seed;
  rec.width_scale_applied = ui.width_scale;
  rec.declutter_active = ui.declutter_active;
  rec.submovement_count = script.submovement_count;
  rec.dpr = ctx.calib.dpr;
  rec.px_per_mm = ctx.calib.px_per_mm;
  rec.ppd = ctx.calib.ppd;
  rec.viewing_distance_mm = ctx.calib.viewing_distance_mm;
  rec.viewport_w_px = ctx.calib.viewport_w_px;
  rec.viewport_h_px = ctx.calib.viewport_h_px;

  std::optional<SelectionEvent> selection;
  int ticks_run = 0;

  for (int k = 0; k < max_ticks && !selection; ++k) {
    ++ticks_run;
    const double now_ms = (k + 1) * dt_ms;
    const Vec2 raw = script_position(script, k);
    const Vec2 cursor =
        is_gaze ? gaze_step(gaze_state, raw, dt_s, ctx.gaze_params, ctx.calib) : raw;

    const double goal_dist = dist(cursor, goal);
    if (goal_dist <= goal_radius) {
      rec.hover_total_ms += dt_ms;
      if (!rec.first_entry_ms) rec.first_entry_ms = now_ms;
    }

    if (is_gaze) {
      for (std::size_t e = 0; e < elements.size(); ++e) {
        dwell[e].tick(dist(cursor, elements[e].center), elements[e].radius,
                      ctx.task.dwell_tolerance_px, dt_ms);
        if (dwell[e].accum_ms >= ctx.task.dwell_ms) {
          selection = SelectionEvent{elements[e].id, true, cursor, now_ms};
          break;
        }
      }
    } else if (script.click_tick && *script.click_tick == k) {
      const bool on_goal = goal_dist <= goal_radius;
      selection = SelectionEvent{on_goal ? goal_id : std::string{}, false, cursor, now_ms};
    }
  }

  rec.tick_count = ticks_run;
  rec.outcome = classify_outcome(selection, goal_id);
  if (selection) {
    rec.rt_ms = selection->time_ms;
    rec.endpoint_px = selection->point;
    rec.selected_element = selection->element_id;
    if (rec.first_entry_ms) rec.verification_ms = *rec.rt_ms - *rec.first_entry_ms;
  }
  return rec;
}

struct ActionLogEntry {
  int participant_id = 0;
  int block_idx = 0;
  PolicyAction action;
  bool applied = false;
};

struct SessionResult {
  std::vector<TrialRecord> records;
  std::vector<ActionLogEntry> actions;
};

// Runs one block: scripts each trial from the agent, executes it, then folds
// the outcome through the policy controller (adaptive blocks only). UI state
// changes take effect from the next trial.
inline void run_block(const BlockPlan& block, const EngineContext& ctx,
                      std::uint64_t master_seed, SessionResult& out) {
  const bool adaptive = block.cell.ui_mode == UiMode::adaptive;
  PolicyState policy;
  UiState ui;
  int consecutive_errors = 0;

  for (const TrialSpec& spec : block.trials) {
    const std::uint64_t trial_seed =
        derive_seed(master_seed, {static_cast<std::uint64_t>(spec.participant_id),
                                  static_cast<std::uint64_t>(spec.block_idx),
                                  static_cast<std::uint64_t>(spec.trial_idx)});
    Rng agent_rng(derive_seed(trial_seed, {1}));

    RawInputScript script;
    if (spec.modality == Modality::hand) {
      script = simulate_hand_trial(spec, ctx.hand_agent, ctx.task, ctx.calib, agent_rng);
    } else {
      script = simulate_gaze_intent(spec, ctx.gaze_agent, ui.declutter_active, ctx.task,
                                    ctx.calib, agent_rng);
    }

    TrialRecord rec = run_trial(spec, script, ctx, ui, trial_seed);
    rec.consecutive_errors_at_start = consecutive_errors;
    rec.agent_profile =
        spec.modality == Modality::hand ? ctx.hand_agent.profile : ctx.gaze_agent.profile;
    consecutive_errors = rec.is_error() ? consecutive_errors + 1 : 0;

    if (adaptive) {
      const ObserveResult observed = observe_trial(policy, rec, ctx.policy);
      rec.policy_triggered = observed.trigger;
      apply_actions(observed.actions, ui, ctx.policy.faithful_bug);
      for (const PolicyAction& action : observed.actions) {
        const bool width_action = action.kind == PolicyActionKind::inflate_width ||
                                  action.kind == PolicyActionKind::reset_width;
        out.actions.push_back({spec.participant_id, spec.block_idx, action,
                               !(width_action && ctx.policy.faithful_bug)});
      }
    }
    out.records.push_back(std::move(rec));
  }
}

inline SessionResult run_session(const SessionPlan& plan, const EngineContext& ctx,
                                 std::uint64_t master_seed) {
  SessionResult result;
  for (const BlockPlan& block : plan.blocks) run_block(block, ctx, master_seed, result);
  return result;
}

}  // namespace xrsim

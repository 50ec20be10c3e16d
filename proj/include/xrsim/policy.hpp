#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xrsim/common.hpp"
#include "xrsim/task.hpp"

namespace xrsim {

enum class PolicyActionKind { declutter_on, declutter_off, inflate_width, reset_width };

inline std::string to_string(PolicyActionKind k) {
  switch (k) {
    case PolicyActionKind::declutter_on: return "declutter_on";
    case PolicyActionKind::declutter_off: return "declutter_off";
    case PolicyActionKind::inflate_width: return "inflate_width";
    case PolicyActionKind::reset_width: return "reset_width";
  }
  throw std::invalid_argument("unknown policy action kind");
}

struct PolicyAction {
  PolicyActionKind kind;
  double value = 0.0;  // width scale for inflate_width, otherwise unused
  int trial_idx = -1;
};

struct PolicyConfig {
  int error_burst = 2;       // consecutive errors that arm the trigger
  int hysteresis_n = 2;      // consecutive trigger-true/false trials to toggle
  int rt_window = 20;        // ring buffer of recent valid RTs
  int rt_min_samples = 8;    // RT trigger stays disarmed below this
  double width_scale = 1.5;  // inflation magnitude for hand adaptation
  bool faithful_bug = false;  // emit inflate_width but never apply it
};

inline void validate(const PolicyConfig& c) {
  if (c.error_burst < 1 || c.hysteresis_n < 1)
    throw ConfigError("policy: burst and hysteresis thresholds must be >= 1");
  if (c.rt_window < 1 || c.rt_min_samples < 1 || c.rt_min_samples > c.rt_window)
    throw ConfigError("policy: need 1 <= rt_min_samples <= rt_window");
  if (!(c.width_scale >= 1.0)) throw ConfigError("policy: width scale must be >= 1.0");
}

// Rolling per-block controller state; mutated only between trials.
struct PolicyState {
  int consecutive_errors = 0;
  std::deque<double> rt_window_ms;
  int hysteresis_on_count = 0;
  int hysteresis_off_count = 0;
  bool adaptation_active = false;
  std::vector<PolicyAction> actions_emitted;
};

// Nearest-rank percentile on a copy of the window.
inline double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw std::invalid_argument("percentile of empty window");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values[rank - 1];
}

struct ObserveResult {
  std::vector<PolicyAction> actions;
  bool trigger = false;
};

// Folds one finished trial into the controller. The trigger condition is an
// error burst or an RT above the 75th percentile of the recent window; the
// hysteresis gate requires N consecutive trigger-consistent trials before the
// modality's adaptation toggles. Emitted actions are recorded whether or not
// they are later applied.
inline ObserveResult observe_trial(PolicyState& state, const TrialRecord& record,
                                   const PolicyConfig& config) {
  validate(config);
  ObserveResult result;

  if (record.is_error())
    ++state.consecutive_errors;
  else
    state.consecutive_errors = 0;

  bool rt_trigger = false;
  if (record.rt_ms &&
      state.rt_window_ms.size() >= static_cast<std::size_t>(config.rt_min_samples)) {
    const double p75 = nearest_rank_percentile(
        {state.rt_window_ms.begin(), state.rt_window_ms.end()}, 75.0);
    rt_trigger = *record.rt_ms > p75;
  }
  if (record.rt_ms) {
    state.rt_window_ms.push_back(*record.rt_ms);
    while (state.rt_window_ms.size() > static_cast<std::size_t>(config.rt_window))
      state.rt_window_ms.pop_front();
  }

  result.trigger = state.consecutive_errors >= config.error_burst || rt_trigger;

  if (result.trigger) {
    ++state.hysteresis_on_count;
    state.hysteresis_off_count = 0;
  } else {
    ++state.hysteresis_off_count;
    state.hysteresis_on_count = 0;
  }

  const bool gaze = record.spec.modality == Modality::gaze;
  if (!state.adaptation_active && state.hysteresis_on_count >= config.hysteresis_n) {
    state.adaptation_active = true;
    PolicyAction action{gaze ? PolicyActionKind::declutter_on : PolicyActionKind::inflate_width,
                        gaze ? 0.0 : config.width_scale, record.spec.trial_idx};
    state.actions_emitted.push_back(action);
    result.actions.push_back(action);
  } else if (state.adaptation_active && state.hysteresis_off_count >= config.hysteresis_n) {
    state.adaptation_active = false;
    PolicyAction action{gaze ? PolicyActionKind::declutter_off : PolicyActionKind::reset_width,
                        0.0, record.spec.trial_idx};
    state.actions_emitted.push_back(action);
    result.actions.push_back(action);
  }
  return result;
}

// What the task surface currently applies; changes only at trial boundaries.
struct UiState {
  double width_scale = 1.0;
  bool declutter_active = false;
};

// Applies emitted actions. In faithful-bug mode width actions are accepted
// but the applied scale stays 1.0; declutter is unaffected.
inline void apply_actions(std::span<const PolicyAction> actions, UiState& ui,
                          bool faithful_bug) {
  for (const auto& action : actions) {
    switch (action.kind) {
      case PolicyActionKind::declutter_on:
        ui.declutter_active = true;
        break;
      case PolicyActionKind::declutter_off:
        ui.declutter_active = false;
        break;
      case PolicyActionKind::inflate_width:
        if (!faithful_bug) ui.width_scale = action.value;
        break;
      case PolicyActionKind::reset_width:
        ui.width_scale = 1.0;
        break;
      default:
        throw std::invalid_argument("apply_actions: unknown action kind");
    }
  }
}

}  // namespace xrsim

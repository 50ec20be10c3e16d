#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "xrsim/calib.hpp"
#include "xrsim/common.hpp"
#include "xrsim/rng.hpp"

namespace xrsim {

// Three-stage pointer-to-gaze proxy: saccadic suppression above the saccade
// velocity threshold, first-order lag toward the raw point below it, and
// Gaussian fixation jitter at fixation velocities.
struct GazeSimParams {
  double v_saccade_deg_s = 120.0;
  double v_fixation_deg_s = 30.0;
  double jitter_sigma_deg = 0.12;
  double lerp_alpha = 0.15;  // in (0, 1]
  double tick_hz = 60.0;
};

inline void validate(const GazeSimParams& p) {
  if (!(p.v_fixation_deg_s > 0.0) || !(p.v_fixation_deg_s < p.v_saccade_deg_s))
    throw std::invalid_argument("gaze params: need 0 < v_fixation < v_saccade");
  if (!(p.jitter_sigma_deg >= 0.0))
    throw std::invalid_argument("gaze params: jitter sigma must be non-negative");
  if (!(p.lerp_alpha > 0.0) || !(p.lerp_alpha <= 1.0))
    throw std::invalid_argument("gaze params: lerp alpha must be in (0, 1]");
  if (!(p.tick_hz > 0.0))
    throw std::invalid_argument("gaze params: tick rate must be positive");
}

enum class GazeMode { fixation, intermediate, saccade };

inline GazeMode classify_gaze_mode(double v_deg_s, const GazeSimParams& p) {
  if (v_deg_s > p.v_saccade_deg_s) return GazeMode::saccade;
  if (v_deg_s < p.v_fixation_deg_s) return GazeMode::fixation;
  return GazeMode::intermediate;
}

// Per-stream state. `filtered` is the lag output before jitter injection;
// jitter is not fed back into the filter, so the long-run output SD during a
// stationary fixation is exactly jitter_sigma_deg * ppd.
struct GazeSimState {
  Vec2 last_raw;
  Vec2 filtered;
  Vec2 last_out;
  double last_velocity_deg_s = 0.0;
  GazeMode mode = GazeMode::fixation;
  Rng rng;
  bool started = false;

  explicit GazeSimState(std::uint64_t seed) : rng(seed) {}
};

// Advances the transform by one tick and returns the output cursor position.
// Velocity is estimated from raw-input displacement. The first tick of a
// stream has velocity 0 by definition.
inline Vec2 gaze_step(GazeSimState& state, Vec2 raw, double dt_s,
                      const GazeSimParams& params, const DisplayCalibration& calib) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("gaze_step: dt must be positive");
  if (!raw.finite()) throw std::invalid_argument("gaze_step: non-finite raw coordinates");

  if (!state.started) {
    state.started = true;
    state.last_raw = raw;
    state.filtered = raw;
  }

  const double v_deg_s = px_to_deg(dist(raw, state.last_raw), calib) / dt_s;
  const GazeMode mode = classify_gaze_mode(v_deg_s, params);

  Vec2 out;
  switch (mode) {
    case GazeMode::saccade:
      // Suppressed: cursor holds the previous output; the filter re-targets
      // the post-saccade raw point from here, producing the ballistic jump.
      out = state.last_out;
      state.filtered = state.last_out;
      break;
    case GazeMode::intermediate:
      state.filtered = lerp(state.filtered, raw, params.lerp_alpha);
      out = state.filtered;
      break;
    case GazeMode::fixation: {
      state.filtered = lerp(state.filtered, raw, params.lerp_alpha);
      const double sigma_px = params.jitter_sigma_deg * calib.ppd;
      out = state.filtered;
      if (sigma_px > 0.0) {
        out.x += state.rng.normal(0.0, sigma_px);
        out.y += state.rng.normal(0.0, sigma_px);
      }
      break;
    }
  }

  state.last_raw = raw;
  state.last_out = out;
  state.last_velocity_deg_s = v_deg_s;
  state.mode = mode;
  return out;
}

// First-order lag time constant implied by per-tick interpolation.
inline double effective_time_constant_ms(const GazeSimParams& p) {
  if (p.lerp_alpha >= 1.0) return 0.0;
  return -(1000.0 / p.tick_hz) / std::log(1.0 - p.lerp_alpha);
}

}  // namespace xrsim

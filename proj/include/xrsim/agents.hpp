#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "xrsim/calib.hpp"
#include "xrsim/common.hpp"
#include "xrsim/rng.hpp"
#include "xrsim/task.hpp"

namespace xrsim {

// Timed raw input for one trial, sampled at the engine tick rate. Ticks past
// the end of `samples` hold the last position (the agent keeps pointing).
struct RawInputScript {
  std::vector<Vec2> samples;
  std::optional<int> click_tick;
  int submovement_count = 0;
  int saccade_count = 0;
  int distractor_episodes = 0;
};

inline Vec2 script_position(const RawInputScript& script, int tick) {
  if (script.samples.empty()) return {};
  const int idx = std::min<int>(tick, static_cast<int>(script.samples.size()) - 1);
  return script.samples[static_cast<std::size_t>(std::max(idx, 0))];
}

struct HandAgentParams {
  std::string profile = "hand-default";
  double fitts_a_s = 0.30;
  double fitts_b_s_per_bit = 0.15;
  double mt_sigma_s = 0.08;           // additive noise on movement duration
  double endpoint_sigma_ratio = 0.09;  // endpoint scatter SD as fraction of W
  double click_latency_mean_ms = 100.0;
  double click_latency_sd_ms = 30.0;
  std::array<double, 3> submovement_probs = {0.35, 0.45, 0.20};  // counts 1..3
  double pressure_sigma_mult = 2.2;  // >1: time pressure loosens endpoints
};

inline void validate(const HandAgentParams& p) {
  if (!(p.fitts_b_s_per_bit > 0.0))
    throw ConfigError("hand agent: fitts slope must be positive");
  if (!(p.endpoint_sigma_ratio >= 0.0))
    throw ConfigError("hand agent: endpoint sigma ratio must be non-negative");
  if (!(p.mt_sigma_s >= 0.0) || !(p.click_latency_sd_ms >= 0.0) ||
      !(p.click_latency_mean_ms >= 0.0))
    throw ConfigError("hand agent: noise parameters must be non-negative");
}

struct GazeAgentParams {
  std::string profile = "gaze-default";
  // Main-sequence affine model of saccade duration vs amplitude.
  double saccade_dur_slope_ms_per_deg = 2.2;
  double saccade_dur_intercept_ms = 21.0;
  double landing_sigma_ratio = 0.08;  // landing scatter SD vs amplitude
  double corrective_threshold_px = 12.0;
  double verification_hold_mean_ms = 1200.0;  // intentional hold after arrival
  double verification_hold_sd_ms = 150.0;
  double distractor_fixation_prob = 0.30;  // per search episode
  double distractor_dwell_mean_ms = 790.0;
  double distractor_dwell_sd_ms = 250.0;
  double reacquire_loop_prob = 0.01;        // disturbance after a clean episode
  double distractor_reacquire_prob = 0.95;  // extra disturbance after clutter capture
  double declutter_distractor_factor = 0.3;
  double pressure_hold_mult = 0.75;  // <1: time pressure shortens holds
  int max_search_episodes = 8;
};

inline void validate(const GazeAgentParams& p) {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!prob(p.distractor_fixation_prob) || !prob(p.reacquire_loop_prob) ||
      !prob(p.distractor_reacquire_prob) || !prob(p.declutter_distractor_factor))
    throw ConfigError("gaze agent: probabilities must lie in [0, 1]");
  if (!(p.verification_hold_mean_ms >= 0.0) || !(p.distractor_dwell_mean_ms >= 0.0) ||
      !(p.saccade_dur_intercept_ms >= 0.0))
    throw ConfigError("gaze agent: durations must be non-negative");
  if (!(p.landing_sigma_ratio >= 0.0))
    throw ConfigError("gaze agent: landing sigma ratio must be non-negative");
}

namespace detail {

// Segment-based script builder rasterized to the tick grid at the end.
class ScriptBuilder {
 public:
  ScriptBuilder(Vec2 start, double tick_hz) : pos_(start), tick_ms_(1000.0 / tick_hz) {
    segments_.push_back({0.0, start, start, false});
  }

  void hold(double duration_ms) {
    if (duration_ms <= 0.0) return;
    segments_.push_back({duration_ms, pos_, pos_, false});
    total_ms_ += duration_ms;
  }

  // Straight move; min-jerk easing for hand paths, linear for saccades.
  void move_to(Vec2 to, double duration_ms, bool min_jerk) {
    duration_ms = std::max(duration_ms, tick_ms_);
    segments_.push_back({duration_ms, pos_, to, min_jerk});
    total_ms_ += duration_ms;
    pos_ = to;
  }

  Vec2 position() const { return pos_; }
  double total_ms() const { return total_ms_; }

  std::vector<Vec2> rasterize(double max_ms) const {
    const double end_ms = std::min(total_ms_, max_ms);
    const int n_ticks = std::max(1, static_cast<int>(std::ceil(end_ms / tick_ms_)) + 1);
    std::vector<Vec2> samples;
    samples.reserve(static_cast<std::size_t>(n_ticks));
    std::size_t seg = 0;
    double seg_start = 0.0;
    for (int k = 0; k < n_ticks; ++k) {
      const double t = k * tick_ms_;
      while (seg + 1 < segments_.size() && t >= seg_start + segments_[seg].duration_ms) {
        seg_start += segments_[seg].duration_ms;
        ++seg;
      }
      const auto& s = segments_[seg];
      if (s.duration_ms <= 0.0) {
        samples.push_back(s.to);
        continue;
      }
      double u = std::clamp((t - seg_start) / s.duration_ms, 0.0, 1.0);
      if (s.min_jerk) u = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
      samples.push_back(lerp(s.from, s.to, u));
    }
    return samples;
  }

 private:
  struct Segment {
    double duration_ms;
    Vec2 from;
    Vec2 to;
    bool min_jerk;
  };
  std::vector<Segment> segments_;
  Vec2 pos_;
  double tick_ms_;
  double total_ms_ = 0.0;
};

}  // namespace detail

// Plans the pointer path and click for one hand trial. Movement duration is
// sampled from the agent's own speed/difficulty tradeoff; the endpoint is
// scattered around the target center with SD proportional to target width.
inline RawInputScript simulate_hand_trial(const TrialSpec& spec, const HandAgentParams& params,
                                          const TaskConfig& task,
                                          const DisplayCalibration& calib, Rng& rng) {
  validate(params);
  const Vec2 start = trial_start_point(spec, calib);
  const Vec2 goal = target_center(spec, calib);

  double sigma_ratio = params.endpoint_sigma_ratio;
  if (spec.pressure == Pressure::time_limited) sigma_ratio *= params.pressure_sigma_mult;
  const double sigma_px = sigma_ratio * spec.width_px;

  Vec2 endpoint = goal;
  if (sigma_px > 0.0) {
    endpoint.x += rng.normal(0.0, sigma_px);
    endpoint.y += rng.normal(0.0, sigma_px);
  }

  const double mt_s =
      std::max(0.05, params.fitts_a_s + params.fitts_b_s_per_bit * spec.id_bits +
                         (params.mt_sigma_s > 0.0 ? rng.normal(0.0, params.mt_sigma_s) : 0.0));
  const double mt_ms = mt_s * 1000.0;

  const int submovements = 1 + static_cast<int>(rng.discrete(params.submovement_probs));

  detail::ScriptBuilder builder(start, task.tick_hz);
  const Vec2 span = endpoint - start;
  if (submovements == 1) {
    builder.move_to(endpoint, mt_ms, true);
  } else if (submovements == 2) {
    Vec2 via = start + span * 0.93;
    via.x += rng.normal(0.0, 0.035 * spec.distance_px);
    via.y += rng.normal(0.0, 0.035 * spec.distance_px);
    builder.move_to(via, 0.75 * mt_ms, true);
    builder.move_to(endpoint, 0.25 * mt_ms, true);
  } else {
    Vec2 via1 = start + span * 0.90;
    via1.x += rng.normal(0.0, 0.045 * spec.distance_px);
    via1.y += rng.normal(0.0, 0.045 * spec.distance_px);
    Vec2 via2 = start + span * 0.98;
    via2.x += rng.normal(0.0, 0.015 * spec.distance_px);
    via2.y += rng.normal(0.0, 0.015 * spec.distance_px);
    builder.move_to(via1, 0.65 * mt_ms, true);
    builder.move_to(via2, 0.22 * mt_ms, true);
    builder.move_to(endpoint, 0.13 * mt_ms, true);
  }

  const double latency_ms =
      std::max(0.0, rng.normal(params.click_latency_mean_ms, params.click_latency_sd_ms));
  const double click_ms = builder.total_ms() + latency_ms;
  builder.hold(latency_ms + 50.0);

  RawInputScript script;
  script.samples = builder.rasterize(task.timeout_ms + 500.0);
  script.click_tick = static_cast<int>(std::llround(click_ms / (1000.0 / task.tick_hz)));
  script.submovement_count = submovements;
  return script;
}

namespace detail {

inline void gaze_saccade(ScriptBuilder& builder, Vec2 to, const GazeAgentParams& p,
                         const DisplayCalibration& calib, RawInputScript& meta) {
  const double amp_px = dist(builder.position(), to);
  const double amp_deg = px_to_deg(amp_px, calib);
  const double dur_ms =
      p.saccade_dur_slope_ms_per_deg * amp_deg + p.saccade_dur_intercept_ms;
  builder.move_to(to, dur_ms, false);
  ++meta.saccade_count;
}

inline Vec2 scatter(Vec2 center, double sigma_px, Rng& rng) {
  if (sigma_px <= 0.0) return center;
  return {center.x + rng.normal(0.0, sigma_px), center.y + rng.normal(0.0, sigma_px)};
}

// Primary saccade plus corrective saccades until the residual landing error
// drops under the corrective threshold (at most three correctives, each with
// scatter proportional to its own amplitude).
inline void gaze_fixate(ScriptBuilder& builder, Vec2 goal, const GazeAgentParams& p,
                        const DisplayCalibration& calib, Rng& rng, RawInputScript& meta) {
  double amp = dist(builder.position(), goal);
  Vec2 landing = scatter(goal, p.landing_sigma_ratio * amp, rng);
  gaze_saccade(builder, landing, p, calib, meta);
  for (int c = 0; c < 3; ++c) {
    const double err = dist(landing, goal);
    if (err <= p.corrective_threshold_px) break;
    landing = scatter(goal, p.landing_sigma_ratio * err, rng);
    gaze_saccade(builder, landing, p, calib, meta);
  }
}

}  // namespace detail

// Plans the raw gaze path for one trial: optional attention capture by a
// distractor element, a primary saccade with amplitude-proportional landing
// scatter, a corrective saccade for large landing errors, then a verification
// hold. Disturbed holds restart the search loop; chains of disturbances are
// what exhaust the trial clock. Selection itself is dwell-driven downstream,
// so the script carries no click.
inline RawInputScript simulate_gaze_intent(const TrialSpec& spec, const GazeAgentParams& params,
                                           bool declutter_active, const TaskConfig& task,
                                           const DisplayCalibration& calib, Rng& rng) {
  validate(params);
  const Vec2 start = trial_start_point(spec, calib);
  const Vec2 goal = target_center(spec, calib);
  const Vec2 center = layout_center(calib);
  const auto decoys = hud_decoy_positions(calib);

  const double distractor_p =
      params.distractor_fixation_prob *
      (declutter_active ? params.declutter_distractor_factor : 1.0);
  const double hold_mult =
      spec.pressure == Pressure::time_limited ? params.pressure_hold_mult : 1.0;

  RawInputScript script;
  detail::ScriptBuilder builder(start, task.tick_hz);
  const double budget_ms = task.timeout_ms + 1000.0;

  for (int episode = 0; episode < params.max_search_episodes; ++episode) {
    bool captured = false;
    if (builder.total_ms() < budget_ms && rng.bernoulli(distractor_p)) {
      captured = true;
      ++script.distractor_episodes;
      // Attention goes to the nearest ring neighbor or a HUD element; with
      // the HUD decluttered away only the neighbor can capture it.
      Vec2 distractor;
      if (declutter_active || rng.bernoulli(0.5)) {
        const double step = 360.0 / task.directions;
        const double side = rng.bernoulli(0.5) ? step : -step;
        TrialSpec neighbor = spec;
        neighbor.target_angle_deg = spec.target_angle_deg + side;
        distractor = target_center(neighbor, calib);
      } else {
        distractor = decoys[rng.bernoulli(0.5) ? 1 : 0];
      }
      detail::gaze_fixate(builder, distractor, params, calib, rng, script);
      builder.hold(std::max(100.0, rng.normal(params.distractor_dwell_mean_ms,
                                              params.distractor_dwell_sd_ms)));
    }

    detail::gaze_fixate(builder, goal, params, calib, rng, script);

    const double disturb_p =
        params.reacquire_loop_prob + (captured ? params.distractor_reacquire_prob : 0.0);
    const bool last_episode = episode + 1 >= params.max_search_episodes;
    if (!last_episode && builder.total_ms() < budget_ms && rng.bernoulli(disturb_p)) {
      // Fixation disturbed mid-verification: glance away, re-orient, retry.
      builder.hold(rng.uniform(200.0, 600.0));
      const double wander_angle = rng.uniform(0.0, 360.0);
      const Vec2 wander =
          center + direction_unit(wander_angle) * rng.uniform(100.0, 400.0);
      detail::gaze_saccade(builder, wander, params, calib, script);
      builder.hold(rng.uniform(800.0, 2000.0));
      continue;
    }

    builder.hold(std::max(200.0, rng.normal(params.verification_hold_mean_ms * hold_mult,
                                            params.verification_hold_sd_ms)));
    break;
  }

  script.samples = builder.rasterize(budget_ms);
  script.submovement_count = script.saccade_count;
  return script;
}

}  // namespace xrsim

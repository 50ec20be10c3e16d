#pragma once

#include <cstdint>
#include <set>
#include <string>

#include <json.hpp>

#include "xrsim/agents.hpp"
#include "xrsim/calib.hpp"
#include "xrsim/common.hpp"
#include "xrsim/gaze.hpp"
#include "xrsim/policy.hpp"
#include "xrsim/task.hpp"

namespace xrsim {

struct CalibrationInput {
  double card_w_px = 342.40;
  double card_h_px = 215.92;
  double viewing_distance_mm = 600.0;
  double dpr = 1.0;
  int viewport_w_px = 3840;
  int viewport_h_px = 2160;

  DisplayCalibration resolve() const {
    return calibrate_from_card(card_w_px, card_h_px, viewing_distance_mm, dpr,
                               {viewport_w_px, viewport_h_px});
  }
};

// One file fully determines a run; all defaults are the platform's canonical
// values.
struct RunConfig {
  std::uint64_t master_seed = 1;
  int participants = 16;
  CalibrationInput calibration;
  TaskConfig task;
  GazeSimParams gaze_transform;  // tick_hz follows task.tick_hz
  HandAgentParams hand_agent;
  GazeAgentParams gaze_agent;
  PolicyConfig policy;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + where);
}

template <typename T>
void read_into(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  detail::check_keys(j, {"seed", "participants", "calibration", "task", "gaze_transform",
                         "hand_agent", "gaze_agent", "policy"},
                     "root");
  RunConfig cfg;
  detail::read_into(j, "seed", cfg.master_seed);
  detail::read_into(j, "participants", cfg.participants);
  if (cfg.participants <= 0) throw ConfigError("config: participants must be positive");

  if (j.contains("calibration")) {
    const auto& c = j.at("calibration");
    detail::check_keys(c, {"card_w_px", "card_h_px", "viewing_distance_mm", "dpr",
                           "viewport_w_px", "viewport_h_px"},
                       "calibration");
    detail::read_into(c, "card_w_px", cfg.calibration.card_w_px);
    detail::read_into(c, "card_h_px", cfg.calibration.card_h_px);
    detail::read_into(c, "viewing_distance_mm", cfg.calibration.viewing_distance_mm);
    detail::read_into(c, "dpr", cfg.calibration.dpr);
    detail::read_into(c, "viewport_w_px", cfg.calibration.viewport_w_px);
    detail::read_into(c, "viewport_h_px", cfg.calibration.viewport_h_px);
  }

  if (j.contains("task")) {
    const auto& t = j.at("task");
    detail::check_keys(t,
                       {"blocks", "trials_per_block", "warmup_trials", "directions",
                        "id_levels", "timeout_ms", "dwell_ms", "dwell_tolerance_px", "tick_hz",
                        "timeout_in_self_paced", "hud_decoy_radius_px"},
                       "task");
    detail::read_into(t, "blocks", cfg.task.blocks);
    detail::read_into(t, "trials_per_block", cfg.task.trials_per_block);
    detail::read_into(t, "warmup_trials", cfg.task.warmup_trials);
    detail::read_into(t, "directions", cfg.task.directions);
    detail::read_into(t, "timeout_ms", cfg.task.timeout_ms);
    detail::read_into(t, "dwell_ms", cfg.task.dwell_ms);
    detail::read_into(t, "dwell_tolerance_px", cfg.task.dwell_tolerance_px);
    detail::read_into(t, "tick_hz", cfg.task.tick_hz);
    detail::read_into(t, "timeout_in_self_paced", cfg.task.timeout_in_self_paced);
    detail::read_into(t, "hud_decoy_radius_px", cfg.task.hud_decoy_radius_px);
    if (t.contains("id_levels")) {
      cfg.task.id_levels.clear();
      for (const auto& lv : t.at("id_levels")) {
        detail::check_keys(lv, {"width_px", "id_bits"}, "task.id_levels[]");
        IdLevel level;
        detail::read_into(lv, "width_px", level.width_px);
        detail::read_into(lv, "id_bits", level.id_bits);
        cfg.task.id_levels.push_back(level);
      }
    }
  }

  if (j.contains("gaze_transform")) {
    const auto& g = j.at("gaze_transform");
    detail::check_keys(
        g, {"v_saccade_deg_s", "v_fixation_deg_s", "jitter_sigma_deg", "lerp_alpha"},
        "gaze_transform");
    detail::read_into(g, "v_saccade_deg_s", cfg.gaze_transform.v_saccade_deg_s);
    detail::read_into(g, "v_fixation_deg_s", cfg.gaze_transform.v_fixation_deg_s);
    detail::read_into(g, "jitter_sigma_deg", cfg.gaze_transform.jitter_sigma_deg);
    detail::read_into(g, "lerp_alpha", cfg.gaze_transform.lerp_alpha);
  }

  if (j.contains("hand_agent")) {
    const auto& h = j.at("hand_agent");
    detail::check_keys(h,
                       {"profile", "fitts_a_s", "fitts_b_s_per_bit", "mt_sigma_s",
                        "endpoint_sigma_ratio", "click_latency_mean_ms", "click_latency_sd_ms",
                        "submovement_probs", "pressure_sigma_mult"},
                       "hand_agent");
    detail::read_into(h, "profile", cfg.hand_agent.profile);
    detail::read_into(h, "fitts_a_s", cfg.hand_agent.fitts_a_s);
    detail::read_into(h, "fitts_b_s_per_bit", cfg.hand_agent.fitts_b_s_per_bit);
    detail::read_into(h, "mt_sigma_s", cfg.hand_agent.mt_sigma_s);
    detail::read_into(h, "endpoint_sigma_ratio", cfg.hand_agent.endpoint_sigma_ratio);
    detail::read_into(h, "click_latency_mean_ms", cfg.hand_agent.click_latency_mean_ms);
    detail::read_into(h, "click_latency_sd_ms", cfg.hand_agent.click_latency_sd_ms);
    detail::read_into(h, "submovement_probs", cfg.hand_agent.submovement_probs);
    detail::read_into(h, "pressure_sigma_mult", cfg.hand_agent.pressure_sigma_mult);
  }

  if (j.contains("gaze_agent")) {
    const auto& g = j.at("gaze_agent");
    detail::check_keys(g,
                       {"profile", "saccade_dur_slope_ms_per_deg", "saccade_dur_intercept_ms",
                        "landing_sigma_ratio", "corrective_threshold_px",
                        "verification_hold_mean_ms", "verification_hold_sd_ms",
                        "distractor_fixation_prob", "distractor_dwell_mean_ms",
                        "distractor_dwell_sd_ms", "reacquire_loop_prob",
                        "distractor_reacquire_prob", "declutter_distractor_factor",
                        "pressure_hold_mult", "max_search_episodes"},
                       "gaze_agent");
    detail::read_into(g, "profile", cfg.gaze_agent.profile);
    detail::read_into(g, "saccade_dur_slope_ms_per_deg",
                      cfg.gaze_agent.saccade_dur_slope_ms_per_deg);
    detail::read_into(g, "saccade_dur_intercept_ms", cfg.gaze_agent.saccade_dur_intercept_ms);
    detail::read_into(g, "landing_sigma_ratio", cfg.gaze_agent.landing_sigma_ratio);
    detail::read_into(g, "corrective_threshold_px", cfg.gaze_agent.corrective_threshold_px);
    detail::read_into(g, "verification_hold_mean_ms", cfg.gaze_agent.verification_hold_mean_ms);
    detail::read_into(g, "verification_hold_sd_ms", cfg.gaze_agent.verification_hold_sd_ms);
    detail::read_into(g, "distractor_fixation_prob", cfg.gaze_agent.distractor_fixation_prob);
    detail::read_into(g, "distractor_dwell_mean_ms", cfg.gaze_agent.distractor_dwell_mean_ms);
    detail::read_into(g, "distractor_dwell_sd_ms", cfg.gaze_agent.distractor_dwell_sd_ms);
    detail::read_into(g, "reacquire_loop_prob", cfg.gaze_agent.reacquire_loop_prob);
    detail::read_into(g, "distractor_reacquire_prob", cfg.gaze_agent.distractor_reacquire_prob);
    detail::read_into(g, "declutter_distractor_factor",
                      cfg.gaze_agent.declutter_distractor_factor);
    detail::read_into(g, "pressure_hold_mult", cfg.gaze_agent.pressure_hold_mult);
    detail::read_into(g, "max_search_episodes", cfg.gaze_agent.max_search_episodes);
  }

  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    detail::check_keys(p,
                       {"error_burst", "hysteresis_n", "rt_window", "rt_min_samples",
                        "width_scale", "faithful_bug"},
                       "policy");
    detail::read_into(p, "error_burst", cfg.policy.error_burst);
    detail::read_into(p, "hysteresis_n", cfg.policy.hysteresis_n);
    detail::read_into(p, "rt_window", cfg.policy.rt_window);
    detail::read_into(p, "rt_min_samples", cfg.policy.rt_min_samples);
    detail::read_into(p, "width_scale", cfg.policy.width_scale);
    detail::read_into(p, "faithful_bug", cfg.policy.faithful_bug);
  }

  cfg.gaze_transform.tick_hz = cfg.task.tick_hz;

  validate(cfg.task);
  validate(cfg.gaze_transform);
  validate(cfg.hand_agent);
  validate(cfg.gaze_agent);
  validate(cfg.policy);
  cfg.calibration.resolve();  // throws on invalid measurements
  return cfg;
}

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.master_seed;
  j["participants"] = cfg.participants;
  j["calibration"] = {{"card_w_px", cfg.calibration.card_w_px},
                      {"card_h_px", cfg.calibration.card_h_px},
                      {"viewing_distance_mm", cfg.calibration.viewing_distance_mm},
                      {"dpr", cfg.calibration.dpr},
                      {"viewport_w_px", cfg.calibration.viewport_w_px},
                      {"viewport_h_px", cfg.calibration.viewport_h_px}};
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lv : cfg.task.id_levels)
    levels.push_back({{"width_px", lv.width_px}, {"id_bits", lv.id_bits}});
  j["task"] = {{"blocks", cfg.task.blocks},
               {"trials_per_block", cfg.task.trials_per_block},
               {"warmup_trials", cfg.task.warmup_trials},
               {"directions", cfg.task.directions},
               {"id_levels", levels},
               {"timeout_ms", cfg.task.timeout_ms},
               {"dwell_ms", cfg.task.dwell_ms},
               {"dwell_tolerance_px", cfg.task.dwell_tolerance_px},
               {"tick_hz", cfg.task.tick_hz},
               {"timeout_in_self_paced", cfg.task.timeout_in_self_paced},
               {"hud_decoy_radius_px", cfg.task.hud_decoy_radius_px}};
  j["gaze_transform"] = {{"v_saccade_deg_s", cfg.gaze_transform.v_saccade_deg_s},
                         {"v_fixation_deg_s", cfg.gaze_transform.v_fixation_deg_s},
                         {"jitter_sigma_deg", cfg.gaze_transform.jitter_sigma_deg},
                         {"lerp_alpha", cfg.gaze_transform.lerp_alpha}};
  j["hand_agent"] = {{"profile", cfg.hand_agent.profile},
                     {"fitts_a_s", cfg.hand_agent.fitts_a_s},
                     {"fitts_b_s_per_bit", cfg.hand_agent.fitts_b_s_per_bit},
                     {"mt_sigma_s", cfg.hand_agent.mt_sigma_s},
                     {"endpoint_sigma_ratio", cfg.hand_agent.endpoint_sigma_ratio},
                     {"click_latency_mean_ms", cfg.hand_agent.click_latency_mean_ms},
                     {"click_latency_sd_ms", cfg.hand_agent.click_latency_sd_ms},
                     {"submovement_probs", cfg.hand_agent.submovement_probs},
                     {"pressure_sigma_mult", cfg.hand_agent.pressure_sigma_mult}};
  j["gaze_agent"] = {
      {"profile", cfg.gaze_agent.profile},
      {"saccade_dur_slope_ms_per_deg", cfg.gaze_agent.saccade_dur_slope_ms_per_deg},
      {"saccade_dur_intercept_ms", cfg.gaze_agent.saccade_dur_intercept_ms},
      {"landing_sigma_ratio", cfg.gaze_agent.landing_sigma_ratio},
      {"corrective_threshold_px", cfg.gaze_agent.corrective_threshold_px},
      {"verification_hold_mean_ms", cfg.gaze_agent.verification_hold_mean_ms},
      {"verification_hold_sd_ms", cfg.gaze_agent.verification_hold_sd_ms},
      {"distractor_fixation_prob", cfg.gaze_agent.distractor_fixation_prob},
      {"distractor_dwell_mean_ms", cfg.gaze_agent.distractor_dwell_mean_ms},
      {"distractor_dwell_sd_ms", cfg.gaze_agent.distractor_dwell_sd_ms},
      {"reacquire_loop_prob", cfg.gaze_agent.reacquire_loop_prob},
      {"distractor_reacquire_prob", cfg.gaze_agent.distractor_reacquire_prob},
      {"declutter_distractor_factor", cfg.gaze_agent.declutter_distractor_factor},
      {"pressure_hold_mult", cfg.gaze_agent.pressure_hold_mult},
      {"max_search_episodes", cfg.gaze_agent.max_search_episodes}};
  j["policy"] = {{"error_burst", cfg.policy.error_burst},
                 {"hysteresis_n", cfg.policy.hysteresis_n},
                 {"rt_window", cfg.policy.rt_window},
                 {"rt_min_samples", cfg.policy.rt_min_samples},
                 {"width_scale", cfg.policy.width_scale},
                 {"faithful_bug", cfg.policy.faithful_bug}};
  return j;
}

inline RunConfig run_config_from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return run_config_from_json(j);
}

// Stable hash of the normalized config; nlohmann objects serialize with
// sorted keys, so formatting and key order in the source file do not matter.
inline std::string config_hash_hex(const RunConfig& cfg) {
  const std::uint64_t h = fnv1a64(run_config_to_json(cfg).dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace xrsim

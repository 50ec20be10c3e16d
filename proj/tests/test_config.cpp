#include <catch2/catch_amalgamated.hpp>

#include "xrsim/config.hpp"
#include "xrsim/csv.hpp"

using namespace xrsim;

TEST_CASE("defaults parse and resolve", "[config]") {
  const RunConfig cfg = run_config_from_text("{}");
  CHECK(cfg.participants == 16);
  CHECK(cfg.master_seed == 1);
  CHECK(cfg.task.timeout_ms == 6000.0);
  CHECK(cfg.task.dwell_ms == 500.0);
  CHECK(cfg.task.dwell_tolerance_px == 10.0);
  CHECK(cfg.gaze_transform.v_saccade_deg_s == 120.0);
  CHECK(cfg.gaze_transform.v_fixation_deg_s == 30.0);
  CHECK(cfg.gaze_transform.jitter_sigma_deg == 0.12);
  CHECK(cfg.gaze_transform.lerp_alpha == 0.15);
  CHECK(cfg.policy.error_burst == 2);
  CHECK(cfg.policy.hysteresis_n == 2);
  CHECK(cfg.policy.width_scale == 1.5);
  CHECK_FALSE(cfg.policy.faithful_bug);
  const auto calib = cfg.calibration.resolve();
  CHECK(calib.px_per_mm == Catch::Approx(4.0));
}

TEST_CASE("partial configs override only their keys", "[config]") {
  const auto cfg = run_config_from_text(R"({
    "seed": 99,
    "policy": {"width_scale": 2.0},
    "gaze_transform": {"lerp_alpha": 0.25}
  })");
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.policy.width_scale == 2.0);
  CHECK(cfg.policy.hysteresis_n == 2);  // untouched default
  CHECK(cfg.gaze_transform.lerp_alpha == 0.25);
  CHECK(cfg.gaze_transform.jitter_sigma_deg == 0.12);
}

TEST_CASE("unknown keys are rejected", "[config]") {
  CHECK_THROWS_AS(run_config_from_text(R"({"sedd": 1})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_text(R"({"policy": {"hysterisis_n": 3}})"), ConfigError);
}

TEST_CASE("invalid values are rejected", "[config]") {
  CHECK_THROWS_AS(run_config_from_text(R"({"participants": 0})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_text(R"({"gaze_transform": {"lerp_alpha": 0.0}})"),
                  std::exception);
  CHECK_THROWS_AS(run_config_from_text(R"({"task": {"trials_per_block": 12}})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_text("not json"), ConfigError);
}

TEST_CASE("config hash ignores formatting and key order", "[config]") {
  const auto a = run_config_from_text(R"({"seed": 5, "participants": 4})");
  const auto b = run_config_from_text(R"({
      "participants": 4,
      "seed": 5
  })");
  CHECK(config_hash_hex(a) == config_hash_hex(b));
  const auto c = run_config_from_text(R"({"seed": 6, "participants": 4})");
  CHECK(config_hash_hex(a) != config_hash_hex(c));
}

TEST_CASE("config round-trips through its json form", "[config]") {
  RunConfig cfg;
  cfg.master_seed = 1234;
  cfg.policy.faithful_bug = true;
  cfg.gaze_agent.distractor_fixation_prob = 0.22;
  const auto round = run_config_from_json(run_config_to_json(cfg));
  CHECK(round.master_seed == 1234);
  CHECK(round.policy.faithful_bug);
  CHECK(round.gaze_agent.distractor_fixation_prob == 0.22);
  CHECK(config_hash_hex(round) == config_hash_hex(cfg));
}

TEST_CASE("the committed default config matches the built-in defaults", "[config]") {
  const auto path = std::string(XRSIM_SOURCE_DIR) + "/configs/default.json";
  const auto cfg = run_config_from_text(read_file(path));
  CHECK(config_hash_hex(cfg) == config_hash_hex(RunConfig{}));
}

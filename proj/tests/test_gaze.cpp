#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "xrsim/calib.hpp"
#include "xrsim/gaze.hpp"
#include "xrsim/rng.hpp"

using namespace xrsim;

namespace {

DisplayCalibration reference_calib() {
  return calibrate_from_card(342.40, 215.92, 600.0, 1.0, {3840, 2160});
}

constexpr double kDt = 1.0 / 60.0;

}  // namespace

TEST_CASE("effective lag time constant", "[gaze]") {
  GazeSimParams p;
  CHECK(effective_time_constant_ms(p) == Catch::Approx(102.55).margin(0.01));

  p.lerp_alpha = 1.0;
  CHECK(effective_time_constant_ms(p) == 0.0);

  p.lerp_alpha = 0.15;
  p.tick_hz = 120.0;
  CHECK(effective_time_constant_ms(p) == Catch::Approx(51.28).margin(0.01));
}

TEST_CASE("mode classification uses strict thresholds", "[gaze]") {
  const GazeSimParams p;
  CHECK(classify_gaze_mode(0.0, p) == GazeMode::fixation);
  CHECK(classify_gaze_mode(29.999, p) == GazeMode::fixation);
  CHECK(classify_gaze_mode(30.0, p) == GazeMode::intermediate);
  CHECK(classify_gaze_mode(120.0, p) == GazeMode::intermediate);
  CHECK(classify_gaze_mode(120.001, p) == GazeMode::saccade);
}

TEST_CASE("stationary input jitter statistics", "[gaze]") {
  const auto calib = reference_calib();
  const GazeSimParams params;
  GazeSimState state(20240601);

  const Vec2 raw{1000.0, 800.0};
  const int n = 10000;
  std::vector<Vec2> out(n);
  for (int i = 0; i < n; ++i) out[i] = gaze_step(state, raw, kDt, params, calib);

  double mx = 0.0, my = 0.0;
  for (const auto& o : out) {
    mx += o.x - raw.x;
    my += o.y - raw.y;
  }
  mx /= n;
  my /= n;

  double sx = 0.0, sy = 0.0;
  for (const auto& o : out) {
    sx += (o.x - raw.x - mx) * (o.x - raw.x - mx);
    sy += (o.y - raw.y - my) * (o.y - raw.y - my);
  }
  sx = std::sqrt(sx / (n - 1));
  sy = std::sqrt(sy / (n - 1));

  const double target = params.jitter_sigma_deg * calib.ppd;  // ~5.03 px
  CHECK(sx > 0.95 * target);
  CHECK(sx < 1.05 * target);
  CHECK(sy > 0.95 * target);
  CHECK(sy < 1.05 * target);
  CHECK(std::abs(mx) < 0.1);
  CHECK(std::abs(my) < 0.1);
}

TEST_CASE("cursor freezes during supra-threshold motion", "[gaze]") {
  const auto calib = reference_calib();
  const GazeSimParams params;
  GazeSimState state(7);

  // 150 deg/s: displacement per tick well above the saccade threshold.
  const double step_px = deg_to_px(150.0 * kDt, calib);
  Vec2 raw{100.0, 100.0};
  const Vec2 first = gaze_step(state, raw, kDt, params, calib);
  for (int i = 0; i < 200; ++i) {
    raw.x += step_px;
    const Vec2 out = gaze_step(state, raw, kDt, params, calib);
    CHECK(out == first);
    CHECK(state.mode == GazeMode::saccade);
  }
}

TEST_CASE("freeze invariant on randomized supra-threshold streams", "[gaze]") {
  const auto calib = reference_calib();
  const GazeSimParams params;
  Rng stream_rng(99);
  const double min_step = deg_to_px(params.v_saccade_deg_s * kDt, calib) * 1.001;

  for (int s = 0; s < 50; ++s) {
    GazeSimState state(1000 + s);
    Vec2 raw{stream_rng.uniform(0.0, 2000.0), stream_rng.uniform(0.0, 2000.0)};
    Vec2 prev_out = gaze_step(state, raw, kDt, params, calib);
    for (int i = 0; i < 100; ++i) {
      const double angle = stream_rng.uniform(0.0, 2.0 * 3.14159265358979);
      const double mag = min_step * stream_rng.uniform(1.0, 5.0);
      raw.x += mag * std::cos(angle);
      raw.y += mag * std::sin(angle);
      const Vec2 out = gaze_step(state, raw, kDt, params, calib);
      REQUIRE(out == prev_out);
      prev_out = out;
    }
  }
}

TEST_CASE("degenerate transform is the identity", "[gaze]") {
  const auto calib = reference_calib();
  GazeSimParams params;
  params.jitter_sigma_deg = 0.0;
  params.lerp_alpha = 1.0;
  GazeSimState state(3);

  Vec2 raw{500.0, 500.0};
  for (int i = 0; i < 20; ++i) {
    raw.x += 2.0;  // ~7 deg/s, fixation band
    const Vec2 out = gaze_step(state, raw, kDt, params, calib);
    CHECK(out == raw);
  }
}

TEST_CASE("step response settles within three time constants", "[gaze]") {
  const auto calib = reference_calib();
  GazeSimParams params;
  params.jitter_sigma_deg = 0.0;
  GazeSimState state(3);

  const Vec2 origin{400.0, 400.0};
  gaze_step(state, origin, kDt, params, calib);

  // 15 px step stays inside the fixation velocity band.
  const double step_px = 15.0;
  const Vec2 target{origin.x + step_px, origin.y};
  int ticks = 0;
  Vec2 out = origin;
  while (std::abs(out.x - target.x) >= 0.05 * step_px) {
    out = gaze_step(state, target, kDt, params, calib);
    ++ticks;
    REQUIRE(ticks < 100);
  }
  const double three_tau_ticks =
      3.0 * effective_time_constant_ms(params) / (1000.0 * kDt);
  CHECK(ticks <= static_cast<int>(three_tau_ticks) + 2);
  CHECK(ticks >= static_cast<int>(three_tau_ticks) - 1);
}

TEST_CASE("identical seeds give bit-identical streams", "[gaze]") {
  const auto calib = reference_calib();
  const GazeSimParams params;
  Rng path_rng(5);

  std::vector<Vec2> raws;
  Vec2 raw{300.0, 300.0};
  for (int i = 0; i < 500; ++i) {
    raw.x += path_rng.uniform(-40.0, 40.0);
    raw.y += path_rng.uniform(-40.0, 40.0);
    raws.push_back(raw);
  }

  GazeSimState a(42), b(42);
  for (const Vec2& r : raws) {
    const Vec2 oa = gaze_step(a, r, kDt, params, calib);
    const Vec2 ob = gaze_step(b, r, kDt, params, calib);
    REQUIRE(oa == ob);
  }
}

TEST_CASE("step rejects invalid inputs", "[gaze]") {
  const auto calib = reference_calib();
  const GazeSimParams params;
  GazeSimState state(1);
  CHECK_THROWS_AS(gaze_step(state, {0, 0}, 0.0, params, calib), std::invalid_argument);
  CHECK_THROWS_AS(gaze_step(state, {0, 0}, -kDt, params, calib), std::invalid_argument);
  const double nan = std::nan("");
  CHECK_THROWS_AS(gaze_step(state, {nan, 0}, kDt, params, calib), std::invalid_argument);
}

TEST_CASE("parameter validation", "[gaze]") {
  GazeSimParams p;
  p.v_fixation_deg_s = 130.0;  // above the saccade threshold
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = {};
  p.lerp_alpha = 0.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = {};
  p.jitter_sigma_deg = -0.1;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  CHECK_NOTHROW(validate(GazeSimParams{}));
}

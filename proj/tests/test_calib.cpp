#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "xrsim/calib.hpp"

using namespace xrsim;

namespace {
DisplayCalibration reference_calib() {
  return calibrate_from_card(342.40, 215.92, 600.0, 1.0, {3840, 2160});
}
}  // namespace

TEST_CASE("card calibration recovers the pixel scale", "[calib]") {
  const auto c = reference_calib();
  CHECK(c.px_per_mm == Catch::Approx(4.0).epsilon(1e-12));

  // Independent recomputation of pixels per degree.
  const double mm_per_deg = 2.0 * 600.0 * std::tan(0.5 * std::numbers::pi / 180.0);
  CHECK(c.ppd == Catch::Approx(mm_per_deg * 4.0).epsilon(1e-12));
  CHECK(c.ppd == Catch::Approx(41.89).margin(0.01));
  CHECK_FALSE(c.aspect_warning);
  CHECK(calibration_consistent(c));
}

TEST_CASE("card measured at native size gives unit scale", "[calib]") {
  for (double d : {300.0, 600.0, 1200.0}) {
    const auto c = calibrate_from_card(85.60, 53.98, d, 1.0, {1920, 1080});
    CHECK(c.px_per_mm == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("calibration rejects non-positive inputs", "[calib]") {
  CHECK_THROWS_AS(calibrate_from_card(0.0, 215.92, 600.0, 1.0, {1920, 1080}),
                  std::invalid_argument);
  CHECK_THROWS_AS(calibrate_from_card(342.4, -1.0, 600.0, 1.0, {1920, 1080}),
                  std::invalid_argument);
  CHECK_THROWS_AS(calibrate_from_card(342.4, 215.92, 0.0, 1.0, {1920, 1080}),
                  std::invalid_argument);
  CHECK_THROWS_AS(calibrate_from_card(342.4, 215.92, 600.0, 0.0, {1920, 1080}),
                  std::invalid_argument);
}

TEST_CASE("aspect mismatch beyond 10 percent flags a warning", "[calib]") {
  // 342.40 x 240 is ~12% off the card aspect.
  const auto warned = calibrate_from_card(342.40, 240.0, 600.0, 1.0, {1920, 1080});
  CHECK(warned.aspect_warning);
  // 5% off stays unflagged.
  const auto ok = calibrate_from_card(342.40, 215.92 * 1.05, 600.0, 1.0, {1920, 1080});
  CHECK_FALSE(ok.aspect_warning);
}

TEST_CASE("degree/pixel conversion", "[calib]") {
  const auto c = reference_calib();
  CHECK(deg_to_px(0.0, c) == 0.0);
  CHECK(deg_to_px(0.12, c) == Catch::Approx(5.03).margin(0.01));
  for (double x : {0.01, 1.0, 30.0, 120.0}) {
    CHECK(px_to_deg(deg_to_px(x, c), c) == Catch::Approx(x).epsilon(1e-12));
    CHECK(deg_to_px(px_to_deg(x, c), c) == Catch::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("calibration is scale-covariant", "[calib]") {
  const auto c1 = reference_calib();
  const auto c2 = calibrate_from_card(2.0 * 342.40, 2.0 * 215.92, 600.0, 1.0, {3840, 2160});
  CHECK(c2.px_per_mm == Catch::Approx(2.0 * c1.px_per_mm).epsilon(1e-15));
  CHECK(c2.ppd == Catch::Approx(2.0 * c1.ppd).epsilon(1e-15));
}

TEST_CASE("consistency check detects a tampered ppd", "[calib]") {
  auto c = reference_calib();
  c.ppd *= 1.0 + 1e-6;
  CHECK_FALSE(calibration_consistent(c));
}

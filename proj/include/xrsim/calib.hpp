#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "xrsim/common.hpp"

namespace xrsim {

// ISO/IEC 7810 ID-1 card dimensions, the physical reference object.
inline constexpr double kCardWidthMm = 85.60;
inline constexpr double kCardHeightMm = 53.98;

struct ViewportDims {
  int w_px = 0;
  int h_px = 0;
};

// Display-geometry anchor for all mm/deg/px conversions. Immutable after
// construction; safe to share across threads.
struct DisplayCalibration {
  double px_per_mm = 0.0;
  double viewing_distance_mm = 0.0;
  double ppd = 0.0;  // pixels per degree of visual angle
  double dpr = 1.0;
  int viewport_w_px = 0;
  int viewport_h_px = 0;
  bool aspect_warning = false;  // measured card aspect off by more than 10%
};

// Exact tangent form; one degree of visual angle spans
// 2 * d * tan(0.5 deg) millimeters at viewing distance d.
inline double ppd_from(double viewing_distance_mm, double px_per_mm) {
  const double half_deg_rad = 0.5 * std::numbers::pi / 180.0;
  return 2.0 * viewing_distance_mm * std::tan(half_deg_rad) * px_per_mm;
}

inline DisplayCalibration calibrate_from_card(double card_w_px, double card_h_px,
                                              double viewing_distance_mm, double dpr,
                                              ViewportDims viewport) {
  if (!(card_w_px > 0.0) || !(card_h_px > 0.0))
    throw std::invalid_argument("calibrate_from_card: card measurements must be positive");
  if (!(viewing_distance_mm > 0.0))
    throw std::invalid_argument("calibrate_from_card: viewing distance must be positive");
  if (!(dpr > 0.0))
    throw std::invalid_argument("calibrate_from_card: device pixel ratio must be positive");

  const double scale_w = card_w_px / kCardWidthMm;
  const double scale_h = card_h_px / kCardHeightMm;

  DisplayCalibration c;
  c.px_per_mm = 0.5 * (scale_w + scale_h);
  c.viewing_distance_mm = viewing_distance_mm;
  c.ppd = ppd_from(viewing_distance_mm, c.px_per_mm);
  c.dpr = dpr;
  c.viewport_w_px = viewport.w_px;
  c.viewport_h_px = viewport.h_px;

  const double ref_aspect = kCardWidthMm / kCardHeightMm;
  const double measured_aspect = card_w_px / card_h_px;
  c.aspect_warning = std::abs(measured_aspect - ref_aspect) > 0.10 * ref_aspect;
  return c;
}

inline bool calibration_consistent(const DisplayCalibration& c, double rel_tol = 1e-9) {
  if (!(c.px_per_mm > 0.0) || !(c.ppd > 0.0) || !(c.viewing_distance_mm > 0.0)) return false;
  const double expected = ppd_from(c.viewing_distance_mm, c.px_per_mm);
  return std::abs(c.ppd - expected) <= rel_tol * expected;
}

inline double deg_to_px(double deg, const DisplayCalibration& c) { return deg * c.ppd; }
inline double px_to_deg(double px, const DisplayCalibration& c) { return px / c.ppd; }

}  // namespace xrsim

#pragma once

#include <cmath>

#include "errors.hpp"

namespace turreteval {

inline constexpr double kPi = 3.14159265358979323846;

// NATO mil: 1/6400 of a full circle.
inline constexpr double kRadPerMil = 2.0 * kPi / 6400.0;
inline constexpr double kGravity = 9.80665; // m/s^2

inline constexpr double mil_to_rad(double mil) { return mil * kRadPerMil; }
inline constexpr double rad_to_mil(double rad) { return rad / kRadPerMil; }
inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }
inline constexpr double hz_to_rad(double hz) { return hz * 2.0 * kPi; }
inline constexpr double rad_to_hz(double rad) { return rad / (2.0 * kPi); }

// Image scale and viewing geometry shared by every pixel <-> angle conversion.
struct Calibration {
    double pixels_per_meter = 34.0; // object-plane scale
    double range_m = 1000.0;        // distance to the target plane
    double image_width_px = 1280.0;
    double image_height_px = 720.0;

    void validate() const {
        if (!(pixels_per_meter > 0.0) || !(range_m > 0.0) ||
            !(image_width_px > 0.0) || !(image_height_px > 0.0)) {
            throw ValidationError("calibration fields must be strictly positive");
        }
    }
};

inline double px_to_m(double px, const Calibration& cal) { return px / cal.pixels_per_meter; }
inline double m_to_px(double m, const Calibration& cal) { return m * cal.pixels_per_meter; }

// Small-angle (linear) map used for aimpoints: angle = offset / range.
inline double offset_to_angle(double offset_m, double range_m) { return offset_m / range_m; }
inline double angle_to_offset(double angle_rad, double range_m) { return angle_rad * range_m; }

// Exact angular subtense; coincides with the linear map to <1e-6 relative at
// the offsets and ranges this suite works with.
inline double offset_to_angle_exact(double offset_m, double range_m) {
    return std::atan2(offset_m, range_m);
}

// Linear mils <-> meters at range (used for dispersion bookkeeping).
inline double mil_to_m(double mil, double range_m) { return mil_to_rad(mil) * range_m; }
inline double m_to_mil(double m, double range_m) { return rad_to_mil(m / range_m); }

} // namespace turreteval

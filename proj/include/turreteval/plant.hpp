#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "errors.hpp"
#include "poly.hpp"
#include "units.hpp"

namespace turreteval {

// Rigid-body turret parameters: platform mass m1 (radius R) and gun-barrel
// mass m2 (length L), with viscous friction b1/b2 on the two axes.
struct TurretParams {
    double m1 = 8.67e3; // kg
    double m2 = 4.97e3; // kg
    double b1 = 6.00e4; // N*m*s
    double b2 = 6.00e4; // N*m*s
    double R = 2.70;    // m
    double L = 5.40;    // m

    void validate() const {
        if (!(m1 > 0 && m2 > 0 && b1 > 0 && b2 > 0 && R > 0 && L > 0))
            throw ValidationError("turret parameters must be strictly positive");
    }
};

enum class Axis { Azimuth, Elevation };

inline const char* axis_name(Axis a) { return a == Axis::Azimuth ? "azimuth" : "elevation"; }

struct Inertias {
    double azimuth = 0.0;   // platform + barrel about the vertical axis
    double elevation = 0.0; // barrel about the trunnion
};

// Azimuth inertia carries a cos^2(alpha) factor on the barrel term; the
// low-elevation assumption (alpha <= 30 deg in the model) takes it as 1.
// Deliberately permissive about limiting cases (m2 = 0 gives a zero elevation
// inertia, rejected downstream by plant_tf); full validation happens at
// ingestion.
inline Inertias compute_inertias(const TurretParams& p, double alpha_rad = 0.0) {
    const double c2 = std::cos(alpha_rad) * std::cos(alpha_rad);
    Inertias j;
    j.azimuth = 0.5 * p.m1 * p.R * p.R + (p.m2 * p.L * p.L / 3.0) * c2;
    j.elevation = p.m2 * p.L * p.L / 3.0;
    return j;
}

// One axis reduced to G(s) = 1 / (J s (s + c)) with c = b/J.
struct PlantModel {
    double J = 1.0; // kg*m^2
    double c = 1.0; // 1/s
    Axis axis = Axis::Azimuth;

    void validate() const {
        if (!(J > 0 && c > 0)) throw ValidationError("plant requires J > 0 and c > 0");
    }
};

inline PlantModel plant_tf(const TurretParams& p, Axis axis) {
    const Inertias j = compute_inertias(p);
    if (axis == Axis::Azimuth) return {j.azimuth, p.b1 / j.azimuth, axis};
    if (!(j.elevation > 0)) throw ValidationError("elevation inertia must be positive");
    return {j.elevation, p.b2 / j.elevation, axis};
}

struct FrequencyResponse {
    double magnitude = 0.0;
    double phase_deg = 0.0;
};

// |G| = 1/(J w sqrt(w^2 + c^2)), phase = -90 - atan(w/c); both continuous in w.
inline FrequencyResponse plant_response(const PlantModel& m, double w) {
    if (!(w > 0.0)) throw NumericError("plant_response: frequency must be positive (pole at s = 0)");
    FrequencyResponse fr;
    fr.magnitude = 1.0 / (m.J * w * std::sqrt(w * w + m.c * m.c));
    fr.phase_deg = -90.0 - rad_to_deg(std::atan(w / m.c));
    return fr;
}

// Ascending-power numerator/denominator of G(s).
inline std::pair<Poly, Poly> plant_poly(const PlantModel& m) {
    return {Poly{1.0}, Poly{0.0, m.J * m.c, m.J}};
}

// Gravity torque on the elevation axis: -(1/2) m2 g L cos(alpha). Disabled by
// default to match the linear model.
struct GravityParams {
    double m2 = 0.0;
    double L = 0.0;
};

struct AxisState {
    double angle = 0.0; // rad
    double rate = 0.0;  // rad/s
};

inline AxisState eom_rhs(const AxisState& s, double u, const PlantModel& m,
                         const std::optional<GravityParams>& gravity = std::nullopt) {
    const double b = m.c * m.J;
    double torque = u - b * s.rate;
    if (gravity && m.axis == Axis::Elevation)
        torque -= 0.5 * gravity->m2 * kGravity * gravity->L * std::cos(s.angle);
    return {s.rate, torque / m.J};
}

// RK4 integration of the axis equation of motion under a torque schedule.
inline AxisState simulate_eom(const PlantModel& m, const std::function<double(double)>& u,
                              double t_end, double dt,
                              const std::optional<GravityParams>& gravity = std::nullopt,
                              AxisState s0 = {}) {
    AxisState s = s0;
    double t = 0.0;
    auto deriv = [&](const AxisState& st, double tt) { return eom_rhs(st, u(tt), m, gravity); };
    while (t < t_end - 1e-12) {
        const double h = std::min(dt, t_end - t);
        const AxisState k1 = deriv(s, t);
        const AxisState k2 = deriv({s.angle + h / 2 * k1.angle, s.rate + h / 2 * k1.rate}, t + h / 2);
        const AxisState k3 = deriv({s.angle + h / 2 * k2.angle, s.rate + h / 2 * k2.rate}, t + h / 2);
        const AxisState k4 = deriv({s.angle + h * k3.angle, s.rate + h * k3.rate}, t + h);
        s.angle += h / 6.0 * (k1.angle + 2 * k2.angle + 2 * k3.angle + k4.angle);
        s.rate += h / 6.0 * (k1.rate + 2 * k2.rate + 2 * k3.rate + k4.rate);
        t += h;
    }
    return s;
}

} // namespace turreteval

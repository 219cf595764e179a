#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "errors.hpp"
#include "plant.hpp"
#include "poly.hpp"
#include "units.hpp"

namespace turreteval {

// C(s) = K_P ((s + 1/T_I)/s) ((T_D s + 1)/(gamma T_D s + 1)).
struct PiLeadController {
    double kp = 1.0;
    double ti = 1.0;    // s
    double td = 1.0;    // s
    double gamma = 0.5; // in (0,1)

    void validate() const {
        if (!(kp > 0) || !(ti > 0) || !(td > 0) || !(gamma > 0.0) || !(gamma < 1.0))
            throw ValidationError("controller requires kp, ti, td > 0 and 0 < gamma < 1");
    }
};

// Ascending-power numerator/denominator of C(s).
inline std::pair<Poly, Poly> controller_poly(const PiLeadController& c) {
    return {Poly{c.kp / c.ti, c.kp * (1.0 + c.td / c.ti), c.kp * c.td},
            Poly{0.0, 1.0, c.gamma * c.td}};
}

// Magnitude/phase from the factored form; the phase is a sum of arctangents,
// continuous in w (no unwrapping step).
inline FrequencyResponse controller_response(const PiLeadController& c, double w) {
    if (!(w > 0.0)) throw NumericError("controller_response: frequency must be positive");
    const double pi_mag = std::sqrt(1.0 + 1.0 / (w * c.ti * w * c.ti));
    const double lead_mag =
        std::sqrt((1.0 + w * c.td * w * c.td) / (1.0 + w * c.gamma * c.td * w * c.gamma * c.td));
    const double phase = -std::atan(1.0 / (w * c.ti)) + std::atan(w * c.td) -
                         std::atan(w * c.gamma * c.td);
    return {c.kp * pi_mag * lead_mag, rad_to_deg(phase)};
}

// Open-loop L(jw) = C(jw) G(jw): magnitudes multiply, phases add.
inline FrequencyResponse loop_response(const PlantModel& plant, const PiLeadController& c,
                                       double w) {
    const FrequencyResponse g = plant_response(plant, w);
    const FrequencyResponse k = controller_response(c, w);
    return {g.magnitude * k.magnitude, g.phase_deg + k.phase_deg};
}

struct LoopAnalysis {
    double omega_gc = 0.0;    // rad/s
    double omega_gc_hz = 0.0;
    double pm_deg = 0.0;
};

// Gain crossover by log-spaced bracketing of |L| - 1 followed by bisection in
// log w; |L| falls through unity once for the loops this suite builds.
inline LoopAnalysis analyze_loop(const PlantModel& plant, const PiLeadController& c,
                                 double w_lo = 1e-3, double w_hi = 1e5) {
    c.validate();
    plant.validate();
    auto mag = [&](double w) { return loop_response(plant, c, w).magnitude; };

    const int grid = 600;
    double lo = 0.0, hi = 0.0;
    double prev_w = w_lo, prev_m = mag(w_lo);
    for (int i = 1; i <= grid; ++i) {
        const double w = w_lo * std::pow(w_hi / w_lo, static_cast<double>(i) / grid);
        const double m = mag(w);
        if (prev_m >= 1.0 && m < 1.0) {
            lo = prev_w;
            hi = w;
            break;
        }
        prev_w = w;
        prev_m = m;
    }
    if (hi == 0.0) throw NumericError("analyze_loop: no gain crossover in search window");

    while ((hi - lo) / lo > 1e-12) {
        const double mid = std::sqrt(lo * hi);
        (mag(mid) >= 1.0 ? lo : hi) = mid;
    }
    const double wgc = std::sqrt(lo * hi);
    LoopAnalysis out;
    out.omega_gc = wgc;
    out.omega_gc_hz = rad_to_hz(wgc);
    out.pm_deg = 180.0 + loop_response(plant, c, wgc).phase_deg;
    return out;
}

struct DesignSpec {
    double omega_gc = 1.0; // rad/s target crossover
    double pm_deg = 60.0;  // target phase margin

    void validate() const {
        if (!(omega_gc > 0) || !(pm_deg > 0) || !(pm_deg < 180))
            throw ValidationError("design spec requires omega_gc > 0 and 0 < PM < 180");
    }
};

// Loop-shaping procedure: place the lead's maximum-phase frequency at the
// target crossover, size gamma from the phase deficit (with a 6 deg allowance
// for the PI lag), set T_I a decade below, and normalize K_P so the loop gain
// is exactly 1 at the target crossover. The 6 deg allowance overshoots the
// 5.71 deg PI lag at w T_I = 10, so the achieved margin lands at
// PM + 6 - atan(0.1) in degrees.
inline PiLeadController design_pi_lead(const PlantModel& plant, const DesignSpec& spec) {
    spec.validate();
    plant.validate();
    const double w = spec.omega_gc;
    const FrequencyResponse g = plant_response(plant, w);

    const double phi_add_deg = spec.pm_deg - 180.0 - g.phase_deg + 6.0;
    if (phi_add_deg >= 90.0)
        throw NumericError("design_pi_lead: required lead phase >= 90 deg is infeasible");
    if (phi_add_deg <= 0.0)
        throw NumericError("design_pi_lead: non-positive lead phase requested; no lead needed");

    const double sphi = std::sin(deg_to_rad(phi_add_deg));
    PiLeadController c;
    c.gamma = (1.0 - sphi) / (1.0 + sphi);
    c.td = 1.0 / (std::sqrt(c.gamma) * w);
    c.ti = 10.0 / w;
    // |PI(jw)| = sqrt(1 + 1/(w T_I)^2); |lead(jw)| = 1/sqrt(gamma) at its peak.
    const double pi_mag = std::sqrt(1.0 + 1.0 / (w * c.ti * w * c.ti));
    c.kp = std::sqrt(c.gamma) / (g.magnitude * pi_mag);
    c.validate();
    return c;
}

inline PiLeadController boost_gain(const PiLeadController& c, double factor) {
    if (!(factor > 0.0)) throw ValidationError("boost_gain: factor must be positive");
    PiLeadController out = c;
    out.kp = c.kp * factor;
    return out;
}

// Reference coefficient sets for the two axes (the documented working point).
inline PiLeadController reference_azimuth_controller() { return {3.33e7, 0.22, 0.17, 0.017}; }
inline PiLeadController reference_elevation_controller() { return {4.48e6, 0.50, 0.32, 0.024}; }

// Design targets reverse-fitted so the boosted design lands on the reference
// coefficients (T_I pins the crossover at 10/T_I; PM chosen to match gamma).
inline DesignSpec reference_azimuth_spec() { return {10.0 / 0.22, 70.09}; }
inline DesignSpec reference_elevation_spec() { return {10.0 / 0.50, 69.93}; }

inline constexpr double kReferenceBoost = 1.5;

} // namespace turreteval

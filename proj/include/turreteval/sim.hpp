#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "box.hpp"
#include "design.hpp"
#include "errors.hpp"
#include "plant.hpp"
#include "poly.hpp"
#include "rng.hpp"
#include "units.hpp"

namespace turreteval {

// Move-and-settle command: ramp at slope sign(P)*V for |P|/V seconds, then
// hold at P. Zero before t = 0.
struct ReferenceCommand {
    double P = 0.0; // rad
    double V = 1.0; // rad/s, positive slope magnitude

    double duration() const { return std::abs(P) / V; }

    double value(double t) const {
        if (t < 0.0) return 0.0;
        const double d = duration();
        if (t <= d) return (P < 0.0 ? -V : V) * t;
        return P;
    }
};

inline ReferenceCommand make_reference(double P, double V) {
    if (!(V > 0.0)) throw ValidationError("make_reference: slope V must be positive");
    return {P, V};
}

// Aimpoint updates arrive through a first-order lag (tau from the update
// rate); sigma_w is the per-sample white-noise std in mils.
struct NoiseModel {
    double tau = 2.0;          // s
    double sigma_w_mils = 0.5; // NATO mils
    bool enabled = false;

    void validate() const {
        if (!(tau > 0.0) || !(sigma_w_mils >= 0.0))
            throw ValidationError("noise model requires tau > 0 and sigma_w >= 0");
    }
};

struct SimConfig {
    double fs = 200.0;          // Hz
    double fire_delay = 0.5;    // s
    Origin start_origin = Origin::BottomLeft;
    Calibration calibration{};
    NoiseModel noise{};
    double settle_band = 0.001; // fraction of |P|
    double slew_rate = deg_to_rad(40.0); // rad/s ramp slope
    double horizon_pad = 1.0;   // s past firing time
    int decimation = 1;         // trajectory storage stride
    std::uint64_t seed = 0;

    void validate() const {
        if (!(fs > 0.0)) throw ValidationError("sim config: fs must be positive");
        if (!(fire_delay >= 0.0)) throw ValidationError("sim config: fire_delay must be >= 0");
        if (!(settle_band > 0.0 && settle_band < 1.0))
            throw ValidationError("sim config: settle_band must lie in (0,1)");
        if (!(slew_rate > 0.0)) throw ValidationError("sim config: slew rate must be positive");
        if (decimation < 1) throw ValidationError("sim config: decimation must be >= 1");
        calibration.validate();
        noise.validate();
    }
};

struct Trajectory {
    double fs = 0.0;
    std::vector<double> t, r, y, e, u;
};

// Closed unity-feedback loop assembled in the z domain from separately
// discretized controller and plant:
//   E/R = denL / (denL + numL), U/R = (bc * ag) / (denL + numL).
struct LoopTfs {
    DiscreteTF err; // e from r
    DiscreteTF ctl; // u from r
};

inline LoopTfs closed_loop_tfs(const PlantModel& plant, const PiLeadController& c, double fs) {
    const auto [bc_s, ac_s] = controller_poly(c);
    const auto [bg_s, ag_s] = plant_poly(plant);
    const DiscreteTF cz = bilinear(bc_s, ac_s, fs);
    const DiscreteTF gz = bilinear(bg_s, ag_s, fs);
    const Poly numL = poly_mul(cz.b, gz.b);
    const Poly denL = poly_mul(cz.a, gz.a);
    const Poly den_cl = poly_add(denL, numL);
    if (den_cl[0] == 0.0) throw NumericError("closed loop: zero leading denominator coefficient");

    auto normalized = [&](Poly num) {
        DiscreteTF tf{std::move(num), den_cl};
        const double a0 = tf.a[0];
        for (double& x : tf.b) x /= a0;
        for (double& x : tf.a) x /= a0;
        return tf;
    };
    return {normalized(denL), normalized(poly_mul(cz.b, gz.a))};
}

// Simulate one axis. When noise is enabled the reference is perturbed by white
// noise shaped through 1/(tau s + 1) before entering the loop.
inline Trajectory simulate_axis(const PlantModel& plant, const PiLeadController& c,
                                const ReferenceCommand& ref, const SimConfig& cfg,
                                double horizon, Rng* noise_rng = nullptr) {
    cfg.validate();
    if (!(horizon >= 0.0)) throw ValidationError("simulate_axis: horizon must be >= 0");
    const LoopTfs loop = closed_loop_tfs(plant, c, cfg.fs);

    const std::size_t n = static_cast<std::size_t>(std::floor(horizon * cfg.fs)) + 1;
    Trajectory tr;
    tr.fs = cfg.fs;
    tr.t.resize(n);
    tr.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tr.t[i] = static_cast<double>(i) / cfg.fs;
        tr.r[i] = ref.value(tr.t[i]);
    }

    if (cfg.noise.enabled) {
        if (noise_rng == nullptr)
            throw ValidationError("simulate_axis: noise enabled but no RNG supplied");
        const DiscreteTF shaping = bilinear(Poly{1.0}, Poly{1.0, cfg.noise.tau}, cfg.fs);
        Filter f(shaping);
        const double sw = mil_to_rad(cfg.noise.sigma_w_mils);
        for (std::size_t i = 0; i < n; ++i) tr.r[i] += f.step(noise_rng->normal(0.0, sw));
    }

    Filter fe(loop.err), fu(loop.ctl);
    tr.e.resize(n);
    tr.u.resize(n);
    tr.y.resize(n);
    const double bound = 1e6 * std::abs(ref.P) + 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        tr.e[i] = fe.step(tr.r[i]);
        tr.u[i] = fu.step(tr.r[i]);
        tr.y[i] = tr.r[i] - tr.e[i];
        if (!(std::abs(tr.y[i]) <= bound))
            throw NumericError("simulate_axis: response diverged (closed loop unstable?)");
    }
    return tr;
}

// First sample time after which |e| stays within band*|P|. Returns nullopt if
// the trajectory never settles; P = 0 settles at t = 0 by convention.
inline std::optional<double> settling_time(const Trajectory& tr, double P, double band) {
    if (P == 0.0) return 0.0;
    const double tol = band * std::abs(P);
    std::size_t last_violation = tr.e.size(); // sentinel: none
    for (std::size_t i = tr.e.size(); i-- > 0;) {
        if (std::abs(tr.e[i]) > tol) {
            last_violation = i;
            break;
        }
    }
    if (last_violation == tr.e.size()) return 0.0; // never violated
    if (last_violation + 1 >= tr.t.size()) return std::nullopt;
    return tr.t[last_violation + 1];
}

inline double firing_time(double p_az, double p_el, double V, double fire_delay) {
    if (!(V > 0.0)) throw ValidationError("firing_time: slope V must be positive");
    return std::max(std::abs(p_az), std::abs(p_el)) / V + fire_delay;
}

// Linear interpolation of y at an arbitrary time inside the trajectory.
inline double sample_at(const Trajectory& tr, const std::vector<double>& series, double t) {
    if (tr.t.empty()) throw ValidationError("sample_at: empty trajectory");
    if (t <= tr.t.front()) return series.front();
    if (t >= tr.t.back()) return series.back();
    const double idx = t * tr.fs;
    const std::size_t i0 = static_cast<std::size_t>(std::floor(idx));
    const std::size_t i1 = std::min(i0 + 1, series.size() - 1);
    const double frac = idx - static_cast<double>(i0);
    return series[i0] + (series[i1] - series[i0]) * frac;
}

// Pixel centroid -> start-origin frame with y up -> angles via the linear map.
struct Aimpoint {
    double az = 0.0; // rad
    double el = 0.0; // rad
};

inline Aimpoint aimpoint_from_centroid(const PixelVector& centroid_px, const Calibration& cal,
                                       Origin start_origin) {
    const PixelVector v = convert_origin(centroid_px, Origin::TopLeft, start_origin, cal);
    return {offset_to_angle(px_to_m(v.x, cal), cal.range_m),
            offset_to_angle(px_to_m(v.y, cal), cal.range_m)};
}

inline Aimpoint aimpoints_from_detection(const DetectionRecord& det, const Calibration& cal,
                                         Origin start_origin) {
    return aimpoint_from_centroid(centroid(det.box), cal, start_origin);
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    double norm() const { return std::hypot(x, y); }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
};

struct SimulationResult {
    Aimpoint aim_detected{};   // commanded (from detection)
    Aimpoint aim_true{};       // from ground truth
    Aimpoint shot{};           // achieved at firing time
    Vec2 r_bg{}, r_br{}, r_rg{}; // error vectors in linear mils
    double t_f = 0.0;
    std::optional<double> t_s_az, t_s_el;
    Trajectory az, el; // decimated; empty when keep_trajectories = false
};

inline Trajectory decimate(const Trajectory& tr, int stride) {
    if (stride <= 1) return tr;
    Trajectory d;
    d.fs = tr.fs / stride;
    for (std::size_t i = 0; i < tr.t.size(); i += static_cast<std::size_t>(stride)) {
        d.t.push_back(tr.t[i]);
        d.r.push_back(tr.r[i]);
        d.y.push_back(tr.y[i]);
        d.e.push_back(tr.e[i]);
        d.u.push_back(tr.u[i]);
    }
    return d;
}

// One engagement: drive both axes to the detected aimpoint, fire at t_f, and
// report the error triangle (detected vs truth vs shot) in linear mils.
//   R_bg = detected - truth, R_br = detected - shot, R_rg = shot - truth,
// so R_rg = R_bg - R_br holds exactly in floating point.
inline SimulationResult run_targeting(const DetectionRecord& det, const GroundTruthRecord& gt,
                                      const PlantModel& plant_az, const PlantModel& plant_el,
                                      const PiLeadController& ctrl_az,
                                      const PiLeadController& ctrl_el, const SimConfig& cfg,
                                      std::uint64_t run_index = 0,
                                      bool keep_trajectories = true) {
    if (det.image_id != gt.image_id)
        throw ValidationError("run_targeting: detection and ground truth image_id differ");
    cfg.validate();

    SimulationResult res;
    res.aim_detected = aimpoints_from_detection(det, cfg.calibration, cfg.start_origin);
    res.aim_true = aimpoint_from_centroid(centroid(gt.box), cfg.calibration, cfg.start_origin);
    res.t_f = firing_time(res.aim_detected.az, res.aim_detected.el, cfg.slew_rate, cfg.fire_delay);
    const double horizon = res.t_f + cfg.horizon_pad;

    Rng rng_az(derive_seed(cfg.seed, run_index, 0));
    Rng rng_el(derive_seed(cfg.seed, run_index, 1));
    const Trajectory taz =
        simulate_axis(plant_az, ctrl_az, make_reference(res.aim_detected.az, cfg.slew_rate), cfg,
                      horizon, cfg.noise.enabled ? &rng_az : nullptr);
    const Trajectory tel =
        simulate_axis(plant_el, ctrl_el, make_reference(res.aim_detected.el, cfg.slew_rate), cfg,
                      horizon, cfg.noise.enabled ? &rng_el : nullptr);

    res.shot = {sample_at(taz, taz.y, res.t_f), sample_at(tel, tel.y, res.t_f)};
    res.t_s_az = settling_time(taz, res.aim_detected.az, cfg.settle_band);
    res.t_s_el = settling_time(tel, res.aim_detected.el, cfg.settle_band);

    const Vec2 b{rad_to_mil(res.aim_detected.az), rad_to_mil(res.aim_detected.el)};
    const Vec2 g{rad_to_mil(res.aim_true.az), rad_to_mil(res.aim_true.el)};
    const Vec2 r{rad_to_mil(res.shot.az), rad_to_mil(res.shot.el)};
    res.r_bg = b - g;
    res.r_br = b - r;
    res.r_rg = res.r_bg - res.r_br; // == shot - truth; written this way so the
                                    // vector identity is bit-exact per run


    if (keep_trajectories) {
        res.az = decimate(taz, cfg.decimation);
        res.el = decimate(tel, cfg.decimation);
    }
    return res;
}

// Standard deviation of the tracking error driven by white aim-update noise:
// H(z) = shaping * sensitivity, ||H||_2 over the Nyquist band by trapezoid
// quadrature, sigma_e = ||H||_2 sigma_w / sqrt(fs).
inline double noise_error_std(const PlantModel& plant, const PiLeadController& c,
                              const NoiseModel& noise, double fs,
                              std::size_t quad_points = (1u << 16)) {
    noise.validate();
    if (!(fs > 0.0)) throw ValidationError("noise_error_std: fs must be positive");
    if (quad_points < (1u << 15)) quad_points = 1u << 15;

    const LoopTfs loop = closed_loop_tfs(plant, c, fs);
    if (!impulse_stable(loop.err)) throw NumericError("noise_error_std: closed loop unstable");
    const DiscreteTF shaping = bilinear(Poly{1.0}, Poly{1.0, noise.tau}, fs);

    const double wn = kPi * fs; // Nyquist, rad/s
    double sum = 0.0;
    for (std::size_t i = 0; i <= quad_points; ++i) {
        const double w = wn * static_cast<double>(i) / static_cast<double>(quad_points);
        const std::complex<double> h =
            dtf_response(shaping, w, fs) * dtf_response(loop.err, w, fs);
        const double v = std::norm(h);
        sum += (i == 0 || i == quad_points) ? 0.5 * v : v;
    }
    const double integral = 2.0 * sum * (wn / static_cast<double>(quad_points)); // +/- band
    const double h2 = std::sqrt(integral / (2.0 * kPi));
    return h2 * noise.sigma_w_mils / std::sqrt(fs);
}

} // namespace turreteval

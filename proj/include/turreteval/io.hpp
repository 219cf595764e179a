#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "box.hpp"
#include "design.hpp"
#include "errors.hpp"
#include "hitprob.hpp"
#include "metrics.hpp"
#include "plant.hpp"
#include "sim.hpp"
#include "units.hpp"

namespace turreteval {

// Shortest round-trip decimal form of a double.
inline std::string fmt_num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline bool is_header(const std::string& line) {
    std::string low;
    for (char c : line)
        if (c != ' ' && c != '\t') low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return low.rfind("image_id,", 0) == 0 || low.rfind("range_m,", 0) == 0;
}

class LineErrors {
public:
    void add(std::size_t line_no, const std::string& msg) {
        if (msgs_.size() < 12) msgs_.push_back("line " + std::to_string(line_no) + ": " + msg);
        ++count_;
    }
    void raise_if_any(const std::string& path) const {
        if (count_ == 0) return;
        std::string all = path + ": " + std::to_string(count_) + " invalid row(s)";
        for (const auto& m : msgs_) all += "\n  " + m;
        if (count_ > msgs_.size()) all += "\n  ...";
        throw ValidationError(all);
    }

private:
    std::vector<std::string> msgs_;
    std::size_t count_ = 0;
};

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

inline bool box_fields_ok(const BoundingBox& b, std::string& why) {
    if (!(std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) && std::isfinite(b.y2))) {
        why = "non-finite coordinate";
        return false;
    }
    if (b.x1 < 0 || b.y1 < 0) {
        why = "negative coordinate";
        return false;
    }
    if (b.x2 < b.x1 || b.y2 < b.y1) {
        why = "inverted box corners";
        return false;
    }
    return true;
}

} // namespace detail

// Rows: image_id, x1, y1, x2, y2, confidence. '#' comments and an optional
// header row are skipped. All bad rows are reported together.
inline std::vector<DetectionRecord> read_detections(const std::string& path) {
    std::vector<DetectionRecord> out;
    detail::LineErrors errs;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = detail::trim(lines[i]);
        if (line.empty() || line[0] == '#' || detail::is_header(line)) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 6) {
            errs.add(i + 1, "expected 6 fields, got " + std::to_string(f.size()));
            continue;
        }
        DetectionRecord d;
        d.image_id = f[0];
        double vals[5];
        bool ok = !d.image_id.empty();
        if (!ok) errs.add(i + 1, "empty image_id");
        for (int k = 0; k < 5 && ok; ++k) {
            if (!detail::parse_double(f[k + 1], vals[k])) {
                errs.add(i + 1, "field " + std::to_string(k + 2) + " is not a number");
                ok = false;
            }
        }
        if (!ok) continue;
        d.box = {vals[0], vals[1], vals[2], vals[3]};
        d.confidence = vals[4];
        std::string why;
        if (!detail::box_fields_ok(d.box, why)) {
            errs.add(i + 1, why);
            continue;
        }
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
            errs.add(i + 1, "confidence outside [0,1]");
            continue;
        }
        out.push_back(std::move(d));
    }
    errs.raise_if_any(path);
    return out;
}

// Rows: image_id, x1, y1, x2, y2. Zero-area boxes are rejected here; they have
// no usable IoU denominator downstream.
inline std::vector<GroundTruthRecord> read_ground_truth(const std::string& path) {
    std::vector<GroundTruthRecord> out;
    detail::LineErrors errs;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = detail::trim(lines[i]);
        if (line.empty() || line[0] == '#' || detail::is_header(line)) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 5) {
            errs.add(i + 1, "expected 5 fields, got " + std::to_string(f.size()));
            continue;
        }
        GroundTruthRecord g;
        g.image_id = f[0];
        double vals[4];
        bool ok = !g.image_id.empty();
        if (!ok) errs.add(i + 1, "empty image_id");
        for (int k = 0; k < 4 && ok; ++k) {
            if (!detail::parse_double(f[k + 1], vals[k])) {
                errs.add(i + 1, "field " + std::to_string(k + 2) + " is not a number");
                ok = false;
            }
        }
        if (!ok) continue;
        g.box = {vals[0], vals[1], vals[2], vals[3]};
        std::string why;
        if (!detail::box_fields_ok(g.box, why)) {
            errs.add(i + 1, why);
            continue;
        }
        if (!(g.box.area() > 0.0)) {
            errs.add(i + 1, "zero-area ground-truth box");
            continue;
        }
        out.push_back(std::move(g));
    }
    errs.raise_if_any(path);
    return out;
}

// Rows: range_m, mu_x_m, mu_y_m, sigma_x_m, sigma_y_m; ascending ranges.
inline BudgetTable read_budget(const std::string& path) {
    BudgetTable table;
    detail::LineErrors errs;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = detail::trim(lines[i]);
        if (line.empty() || line[0] == '#' || detail::is_header(line)) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 5) {
            errs.add(i + 1, "expected 5 fields, got " + std::to_string(f.size()));
            continue;
        }
        double vals[5];
        bool ok = true;
        for (int k = 0; k < 5 && ok; ++k) {
            if (!detail::parse_double(f[k], vals[k])) {
                errs.add(i + 1, "field " + std::to_string(k + 1) + " is not a number");
                ok = false;
            }
        }
        if (!ok) continue;
        if (!(vals[0] > 0.0)) {
            errs.add(i + 1, "range must be positive");
            continue;
        }
        if (!(vals[3] > 0.0 && vals[4] > 0.0)) {
            errs.add(i + 1, "dispersions must be positive");
            continue;
        }
        table.rows.push_back({vals[0], vals[1], vals[2], vals[3], vals[4]});
    }
    errs.raise_if_any(path);
    if (table.rows.empty()) throw ValidationError(path + ": budget table has no rows");
    table.validate();
    return table;
}

inline void write_detections(const std::string& path, const std::vector<DetectionRecord>& dets) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "image_id,x1,y1,x2,y2,confidence\n";
    for (const auto& d : dets)
        out << d.image_id << ',' << fmt_num(d.box.x1) << ',' << fmt_num(d.box.y1) << ','
            << fmt_num(d.box.x2) << ',' << fmt_num(d.box.y2) << ',' << fmt_num(d.confidence)
            << '\n';
}

inline void write_ground_truth(const std::string& path,
                               const std::vector<GroundTruthRecord>& gts) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "image_id,x1,y1,x2,y2\n";
    for (const auto& g : gts)
        out << g.image_id << ',' << fmt_num(g.box.x1) << ',' << fmt_num(g.box.y1) << ','
            << fmt_num(g.box.x2) << ',' << fmt_num(g.box.y2) << '\n';
}

inline void write_budget(const std::string& path, const BudgetTable& table) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "range_m,mu_x_m,mu_y_m,sigma_x_m,sigma_y_m\n";
    for (const auto& r : table.rows)
        out << fmt_num(r.range_m) << ',' << fmt_num(r.mu_x) << ',' << fmt_num(r.mu_y) << ','
            << fmt_num(r.sigma_x) << ',' << fmt_num(r.sigma_y) << '\n';
}

// ---- configuration -------------------------------------------------------

enum class Dimension { Plain, Time, Frequency, Angle, AngularRate };

// Accepts a bare number (base unit) or a string "value unit". Base units:
// s, Hz, rad, rad/s.
inline double parse_quantity(const nlohmann::json& j, Dimension dim, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string())
        throw ValidationError("config field '" + field + "' must be a number or 'value unit' string");
    const std::string s = detail::trim(j.get<std::string>());
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ValidationError("config field '" + field + "': cannot parse number in '" + s + "'");
    }
    std::string unit = detail::trim(s.substr(pos));
    if (unit.empty()) return value;

    auto fail = [&]() -> double {
        throw ValidationError("config field '" + field + "': unit '" + unit + "' not valid here");
    };
    switch (dim) {
        case Dimension::Plain:
            return fail();
        case Dimension::Time:
            if (unit == "s") return value;
            if (unit == "ms") return value * 1e-3;
            if (unit == "min") return value * 60.0;
            return fail();
        case Dimension::Frequency:
            if (unit == "Hz" || unit == "hz") return value;
            if (unit == "kHz" || unit == "khz") return value * 1e3;
            return fail();
        case Dimension::Angle:
            if (unit == "rad") return value;
            if (unit == "deg") return deg_to_rad(value);
            if (unit == "mil" || unit == "mils") return mil_to_rad(value);
            return fail();
        case Dimension::AngularRate:
            if (unit == "rad/s") return value;
            if (unit == "deg/s") return deg_to_rad(value);
            if (unit == "mil/s" || unit == "mils/s") return mil_to_rad(value);
            return fail();
    }
    return fail();
}

struct ControllerSetup {
    bool design_mode = false; // false: preset coefficients
    PiLeadController preset_az = reference_azimuth_controller();
    PiLeadController preset_el = reference_elevation_controller();
    DesignSpec spec_az = reference_azimuth_spec();
    DesignSpec spec_el = reference_elevation_spec();
    double boost = kReferenceBoost;
};

struct RunConfig {
    Calibration calibration{};
    TurretParams turret{};
    ControllerSetup controllers{};
    SimConfig sim{};
    std::vector<Origin> scenarios{Origin::BottomLeft, Origin::Center};
    std::vector<double> ranges_m{500, 1000, 1500, 2000, 2500, 3000};
    Binning binning = default_binning();
    double area_fraction = 0.025;
    double histogram_bin_mils = 0.25;
    std::string detections_path, ground_truth_path, budget_path;
    std::string out_dir = "out";
    std::uint64_t seed = 20260815ULL;

    void validate() const {
        calibration.validate();
        turret.validate();
        sim.validate();
        if (scenarios.empty()) throw ValidationError("config: at least one scenario required");
        if (ranges_m.empty()) throw ValidationError("config: at least one range required");
        for (double r : ranges_m)
            if (!(r > 0)) throw ValidationError("config: ranges must be positive");
        if (binning.edges.empty()) throw ValidationError("config: empty binning");
        if (!(area_fraction >= 0.0 && area_fraction < 1.0))
            throw ValidationError("config: area_fraction must lie in [0,1)");
        if (!(histogram_bin_mils > 0.0))
            throw ValidationError("config: histogram bin width must be positive");
    }
};

inline PiLeadController parse_controller(const nlohmann::json& j, const std::string& where) {
    PiLeadController c;
    if (!j.contains("kp") || !j.contains("ti") || !j.contains("td") || !j.contains("gamma"))
        throw ValidationError("config: controller '" + where + "' needs kp, ti, td, gamma");
    c.kp = j.at("kp").get<double>();
    c.ti = parse_quantity(j.at("ti"), Dimension::Time, where + ".ti");
    c.td = parse_quantity(j.at("td"), Dimension::Time, where + ".td");
    c.gamma = j.at("gamma").get<double>();
    c.validate();
    return c;
}

inline RunConfig parse_config_json(const nlohmann::json& j) {
    RunConfig cfg;
    if (j.contains("calibration")) {
        const auto& c = j.at("calibration");
        if (c.contains("pixels_per_meter")) cfg.calibration.pixels_per_meter = c.at("pixels_per_meter").get<double>();
        if (c.contains("range_m")) cfg.calibration.range_m = c.at("range_m").get<double>();
        if (c.contains("image_width_px")) cfg.calibration.image_width_px = c.at("image_width_px").get<double>();
        if (c.contains("image_height_px")) cfg.calibration.image_height_px = c.at("image_height_px").get<double>();
    }
    if (j.contains("turret")) {
        const auto& t = j.at("turret");
        if (t.contains("m1_kg")) cfg.turret.m1 = t.at("m1_kg").get<double>();
        if (t.contains("m2_kg")) cfg.turret.m2 = t.at("m2_kg").get<double>();
        if (t.contains("b1_Nms")) cfg.turret.b1 = t.at("b1_Nms").get<double>();
        if (t.contains("b2_Nms")) cfg.turret.b2 = t.at("b2_Nms").get<double>();
        if (t.contains("R_m")) cfg.turret.R = t.at("R_m").get<double>();
        if (t.contains("L_m")) cfg.turret.L = t.at("L_m").get<double>();
    }
    if (j.contains("controllers")) {
        const auto& c = j.at("controllers");
        const std::string mode = c.value("mode", std::string("preset"));
        if (mode == "design") cfg.controllers.design_mode = true;
        else if (mode != "preset") throw ValidationError("config: controllers.mode must be preset|design");
        if (c.contains("azimuth")) cfg.controllers.preset_az = parse_controller(c.at("azimuth"), "azimuth");
        if (c.contains("elevation")) cfg.controllers.preset_el = parse_controller(c.at("elevation"), "elevation");
        if (c.contains("boost")) cfg.controllers.boost = c.at("boost").get<double>();
        auto spec = [&](const char* key, DesignSpec& out) {
            if (!c.contains(key)) return;
            const auto& s = c.at(key);
            if (s.contains("omega_gc"))
                out.omega_gc = parse_quantity(s.at("omega_gc"), Dimension::AngularRate,
                                              std::string(key) + ".omega_gc");
            if (s.contains("phase_margin")) {
                const auto& pm = s.at("phase_margin");
                // bare numbers mean degrees here; strings carry their unit
                out.pm_deg = pm.is_number()
                                 ? pm.get<double>()
                                 : rad_to_deg(parse_quantity(pm, Dimension::Angle,
                                                             std::string(key) + ".phase_margin"));
            }
        };
        spec("azimuth_spec", cfg.controllers.spec_az);
        spec("elevation_spec", cfg.controllers.spec_el);
    }
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        if (s.contains("fs")) cfg.sim.fs = parse_quantity(s.at("fs"), Dimension::Frequency, "sim.fs");
        if (s.contains("fire_delay"))
            cfg.sim.fire_delay = parse_quantity(s.at("fire_delay"), Dimension::Time, "sim.fire_delay");
        if (s.contains("settle_band")) cfg.sim.settle_band = s.at("settle_band").get<double>();
        if (s.contains("slew_rate"))
            cfg.sim.slew_rate = parse_quantity(s.at("slew_rate"), Dimension::AngularRate, "sim.slew_rate");
        if (s.contains("horizon_pad"))
            cfg.sim.horizon_pad = parse_quantity(s.at("horizon_pad"), Dimension::Time, "sim.horizon_pad");
        if (s.contains("decimation")) cfg.sim.decimation = s.at("decimation").get<int>();
    }
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        if (n.contains("enabled")) cfg.sim.noise.enabled = n.at("enabled").get<bool>();
        if (n.contains("tau")) cfg.sim.noise.tau = parse_quantity(n.at("tau"), Dimension::Time, "noise.tau");
        if (n.contains("sigma_w"))
            cfg.sim.noise.sigma_w_mils =
                rad_to_mil(parse_quantity(n.at("sigma_w"), Dimension::Angle, "noise.sigma_w"));
    }
    if (j.contains("scenarios")) {
        cfg.scenarios.clear();
        for (const auto& s : j.at("scenarios")) cfg.scenarios.push_back(parse_origin(s.get<std::string>()));
        for (Origin o : cfg.scenarios)
            if (o == Origin::TopLeft)
                throw ValidationError("config: scenarios must be bottom-left or center");
    }
    if (j.contains("ranges_m")) {
        cfg.ranges_m.clear();
        for (const auto& r : j.at("ranges_m")) cfg.ranges_m.push_back(r.get<double>());
    }
    if (j.contains("bins")) {
        cfg.binning.edges.clear();
        for (const auto& b : j.at("bins")) {
            if (!b.is_array() || b.size() != 2)
                throw ValidationError("config: each bin must be [lo, hi]");
            cfg.binning.edges.emplace_back(b[0].get<double>(), b[1].get<double>());
        }
    }
    if (j.contains("area_fraction")) cfg.area_fraction = j.at("area_fraction").get<double>();
    if (j.contains("histogram_bin_mils")) cfg.histogram_bin_mils = j.at("histogram_bin_mils").get<double>();
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        if (p.contains("detections")) cfg.detections_path = p.at("detections").get<std::string>();
        if (p.contains("ground_truth")) cfg.ground_truth_path = p.at("ground_truth").get<std::string>();
        if (p.contains("budget")) cfg.budget_path = p.at("budget").get<std::string>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    cfg.sim.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("config parse error in " + path + ": " + e.what());
    }
    return parse_config_json(j);
}

// Normalized echo of the effective configuration (deterministic key order).
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["calibration"] = {{"pixels_per_meter", cfg.calibration.pixels_per_meter},
                        {"range_m", cfg.calibration.range_m},
                        {"image_width_px", cfg.calibration.image_width_px},
                        {"image_height_px", cfg.calibration.image_height_px}};
    j["turret"] = {{"m1_kg", cfg.turret.m1}, {"m2_kg", cfg.turret.m2},
                   {"b1_Nms", cfg.turret.b1}, {"b2_Nms", cfg.turret.b2},
                   {"R_m", cfg.turret.R},     {"L_m", cfg.turret.L}};
    j["controllers"] = {
        {"mode", cfg.controllers.design_mode ? "design" : "preset"},
        {"azimuth",
         {{"kp", cfg.controllers.preset_az.kp}, {"ti", cfg.controllers.preset_az.ti},
          {"td", cfg.controllers.preset_az.td}, {"gamma", cfg.controllers.preset_az.gamma}}},
        {"elevation",
         {{"kp", cfg.controllers.preset_el.kp}, {"ti", cfg.controllers.preset_el.ti},
          {"td", cfg.controllers.preset_el.td}, {"gamma", cfg.controllers.preset_el.gamma}}},
        {"azimuth_spec",
         {{"omega_gc", cfg.controllers.spec_az.omega_gc}, {"phase_margin_deg", cfg.controllers.spec_az.pm_deg}}},
        {"elevation_spec",
         {{"omega_gc", cfg.controllers.spec_el.omega_gc}, {"phase_margin_deg", cfg.controllers.spec_el.pm_deg}}},
        {"boost", cfg.controllers.boost}};
    j["sim"] = {{"fs", cfg.sim.fs},
                {"fire_delay", cfg.sim.fire_delay},
                {"settle_band", cfg.sim.settle_band},
                {"slew_rate", cfg.sim.slew_rate},
                {"horizon_pad", cfg.sim.horizon_pad},
                {"decimation", cfg.sim.decimation}};
    j["noise"] = {{"enabled", cfg.sim.noise.enabled},
                  {"tau", cfg.sim.noise.tau},
                  {"sigma_w_mils", cfg.sim.noise.sigma_w_mils}};
    nlohmann::json sc = nlohmann::json::array();
    for (Origin o : cfg.scenarios) sc.push_back(origin_name(o));
    j["scenarios"] = sc;
    j["ranges_m"] = cfg.ranges_m;
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& [lo, hi] : cfg.binning.edges) bins.push_back({lo, hi});
    j["bins"] = bins;
    j["area_fraction"] = cfg.area_fraction;
    j["histogram_bin_mils"] = cfg.histogram_bin_mils;
    j["paths"] = {{"detections", cfg.detections_path},
                  {"ground_truth", cfg.ground_truth_path},
                  {"budget", cfg.budget_path}};
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    return j;
}

// Built-in placeholder budget used when no table is supplied: dispersions grow
// with range, biases stay small. Synthetic values, not calibrated to any
// weapon system.
inline BudgetTable default_budget_table() {
    BudgetTable t;
    for (int i = 1; i <= 6; ++i) {
        const double r = 500.0 * i;
        t.rows.push_back({r, 0.02 * r / 1000.0, -0.03 * r / 1000.0,
                          0.10 + 0.25 * r / 1000.0, 0.12 + 0.30 * r / 1000.0});
    }
    return t;
}

} // namespace turreteval

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "box.hpp"
#include "design.hpp"
#include "errors.hpp"
#include "hitprob.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "plant.hpp"
#include "report.hpp"
#include "sim.hpp"
#include "stats.hpp"
#include "units.hpp"

namespace turreteval {

struct DesignOutputs {
    Inertias inertias{};
    PlantModel plant_az{}, plant_el{};
    PiLeadController ctrl_az{}, ctrl_el{};
    LoopAnalysis loop_az{}, loop_el{};
    double sigma_e_az_mils = 0.0, sigma_e_el_mils = 0.0;
};

// Plants from the turret parameters; controllers either as configured presets
// or freshly designed (then boosted); loop analysis and the noise-driven error
// std for both axes.
inline DesignOutputs run_design(const RunConfig& cfg) {
    DesignOutputs out;
    out.inertias = compute_inertias(cfg.turret);
    out.plant_az = plant_tf(cfg.turret, Axis::Azimuth);
    out.plant_el = plant_tf(cfg.turret, Axis::Elevation);
    if (cfg.controllers.design_mode) {
        out.ctrl_az = boost_gain(design_pi_lead(out.plant_az, cfg.controllers.spec_az),
                                 cfg.controllers.boost);
        out.ctrl_el = boost_gain(design_pi_lead(out.plant_el, cfg.controllers.spec_el),
                                 cfg.controllers.boost);
    } else {
        out.ctrl_az = cfg.controllers.preset_az;
        out.ctrl_el = cfg.controllers.preset_el;
    }
    out.loop_az = analyze_loop(out.plant_az, out.ctrl_az);
    out.loop_el = analyze_loop(out.plant_el, out.ctrl_el);
    // The analytic noise term always uses the configured tau/sigma_w; the
    // `enabled` flag only switches time-domain injection.
    out.sigma_e_az_mils = noise_error_std(out.plant_az, out.ctrl_az, cfg.sim.noise, cfg.sim.fs);
    out.sigma_e_el_mils = noise_error_std(out.plant_el, out.ctrl_el, cfg.sim.noise, cfg.sim.fs);
    return out;
}

// Per-detection ground-truth association: best IoU, falling back to the
// nearest-centroid ground truth of the image when every IoU is zero. Nullopt
// when the image has no ground truth at all.
struct Association {
    std::size_t gt_index = 0;
    double iou = 0.0;
};

inline std::vector<std::optional<Association>> associate(const MetricsDataset& ds) {
    std::vector<std::optional<Association>> out(ds.detections.size());
    const auto gts = detail::ground_truths_by_image(ds);
    for (std::size_t i = 0; i < ds.detections.size(); ++i) {
        const auto git = gts.find(ds.detections[i].image_id);
        if (git == gts.end() || git->second.empty()) continue;
        Association a;
        double best_iou = -1.0, best_dist = 0.0;
        bool have = false;
        for (std::size_t gi : git->second) {
            const double v = iou(ds.detections[i].box, ds.ground_truths[gi].box);
            const double dist =
                (centroid(ds.detections[i].box) - centroid(ds.ground_truths[gi].box)).norm();
            const bool better = !have || v > best_iou || (v == best_iou && best_iou == 0.0 && dist < best_dist);
            if (better) {
                best_iou = v;
                best_dist = dist;
                a = {gi, v};
                have = true;
            }
        }
        out[i] = a;
    }
    return out;
}

struct ScenarioSims {
    Origin origin = Origin::BottomLeft;
    double range_m = 0.0;
    std::vector<std::size_t> det_indices;
    std::vector<SimulationResult> results; // aligned with det_indices
};

inline ScenarioSims simulate_scenario(const MetricsDataset& ds,
                                      const std::vector<std::optional<Association>>& assoc,
                                      const DesignOutputs& des, const RunConfig& cfg,
                                      Origin origin, double range_m,
                                      bool keep_trajectories = false) {
    ScenarioSims out;
    out.origin = origin;
    out.range_m = range_m;
    SimConfig scfg = cfg.sim;
    scfg.calibration = cfg.calibration;
    scfg.calibration.range_m = range_m;
    scfg.start_origin = origin;
    for (std::size_t i = 0; i < ds.detections.size(); ++i) {
        if (!assoc[i]) continue;
        out.det_indices.push_back(i);
        out.results.push_back(run_targeting(ds.detections[i], ds.ground_truths[assoc[i]->gt_index],
                                            des.plant_az, des.plant_el, des.ctrl_az, des.ctrl_el,
                                            scfg, i, keep_trajectories));
    }
    return out;
}

// ---- correlation study -----------------------------------------------------

struct CorrelationRow {
    std::string pair;
    std::string filter;
    std::size_t n = 0;
    std::optional<double> r;
};

// AI error against confidence / IoU / normalized detected-box area, and IoU
// against confidence, for the whole set and under the two standard filters.
inline std::vector<CorrelationRow> correlation_study(const MetricsDataset& ds,
                                                     const Calibration& cal) {
    const auto assoc = associate(ds);
    std::vector<double> ai, conf, iou_v, area;
    double max_area = 0.0;
    for (std::size_t i = 0; i < ds.detections.size(); ++i)
        max_area = std::max(max_area, ds.detections[i].box.area());
    for (std::size_t i = 0; i < ds.detections.size(); ++i) {
        if (!assoc[i]) continue;
        ai.push_back(ai_error(ds.ground_truths[assoc[i]->gt_index], ds.detections[i], cal));
        conf.push_back(ds.detections[i].confidence);
        iou_v.push_back(assoc[i]->iou);
        area.push_back(max_area > 0.0 ? ds.detections[i].box.area() / max_area : 0.0);
    }

    struct Filter {
        std::string name;
        bool (*keep)(double iou, double conf);
    };
    const std::vector<Filter> filters = {
        {"all", [](double, double) { return true; }},
        {"iou>=0.5", [](double i, double) { return i >= 0.5; }},
        {"conf>=0.99", [](double, double c) { return c >= 0.99; }},
    };
    struct Pair {
        std::string name;
        const std::vector<double>* x;
        const std::vector<double>* y;
    };
    const std::vector<Pair> pairs = {{"ai_error_vs_confidence", &ai, &conf},
                                     {"ai_error_vs_iou", &ai, &iou_v},
                                     {"ai_error_vs_norm_area", &ai, &area},
                                     {"iou_vs_confidence", &iou_v, &conf}};

    std::vector<CorrelationRow> rows;
    for (const auto& p : pairs) {
        for (const auto& f : filters) {
            std::vector<double> xs, ys;
            for (std::size_t k = 0; k < ai.size(); ++k) {
                if (f.keep(iou_v[k], conf[k])) {
                    xs.push_back((*p.x)[k]);
                    ys.push_back((*p.y)[k]);
                }
            }
            CorrelationRow row;
            row.pair = p.name;
            row.filter = f.name;
            row.n = xs.size();
            if (xs.size() >= 2) row.r = correlation(xs, ys);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// ---- error distributions ----------------------------------------------------

struct ErrorKindStats {
    std::string kind; // ai | controller | total
    Origin origin = Origin::BottomLeft;
    SampleStats stats{};
    Histogram hist{};
};

inline std::vector<double> error_norms(const ScenarioSims& sims, const std::string& kind) {
    std::vector<double> v;
    v.reserve(sims.results.size());
    for (const auto& r : sims.results) {
        if (kind == "ai") v.push_back(r.r_bg.norm());
        else if (kind == "controller") v.push_back(r.r_br.norm());
        else v.push_back(r.r_rg.norm());
    }
    return v;
}

inline std::vector<ErrorKindStats> error_distribution_study(
    const std::vector<ScenarioSims>& scenarios, double bin_width_mils) {
    std::vector<ErrorKindStats> out;
    for (const auto& sc : scenarios) {
        for (const std::string kind : {"ai", "controller", "total"}) {
            ErrorKindStats e;
            e.kind = kind;
            e.origin = sc.origin;
            const std::vector<double> v = error_norms(sc, kind);
            if (!v.empty()) {
                e.stats = basic_stats(v);
                e.hist = make_histogram(v, bin_width_mils);
            }
            out.push_back(std::move(e));
        }
    }
    return out;
}

// ---- probability-of-hit sweep ----------------------------------------------

struct PhCell {
    std::string bin;
    double range_m = 0.0;
    Origin origin = Origin::BottomLeft;
    std::size_t n = 0;
    double mean_ph = 0.0;
};

// For every (bin, range, origin): simulate each binned detection at that range
// and origin, compose the budget with the shot offset and the noise term, and
// average the hit probability over the bin.
inline std::vector<PhCell> ph_range_sweep(const MetricsDataset& ds,
                                          const StratifiedSample& strata,
                                          const std::vector<std::optional<Association>>& assoc,
                                          const DesignOutputs& des, const RunConfig& cfg,
                                          const BudgetTable& budget) {
    std::vector<PhCell> cells;
    for (Origin origin : cfg.scenarios) {
        for (double range : cfg.ranges_m) {
            SimConfig scfg = cfg.sim;
            scfg.calibration = cfg.calibration;
            scfg.calibration.range_m = range;
            scfg.start_origin = origin;
            const double se_x = mil_to_m(des.sigma_e_az_mils, range);
            const double se_y = mil_to_m(des.sigma_e_el_mils, range);

            std::vector<double> sums(strata.bins.size(), 0.0);
            std::vector<std::size_t> counts(strata.bins.size(), 0);
            for (std::size_t i = 0; i < ds.detections.size(); ++i) {
                const std::size_t bin = strata.bin_of_detection[i];
                if (bin >= strata.bins.size() || !assoc[i]) continue;
                const GroundTruthRecord& gt = ds.ground_truths[assoc[i]->gt_index];
                const SimulationResult res =
                    run_targeting(ds.detections[i], gt, des.plant_az, des.plant_el, des.ctrl_az,
                                  des.ctrl_el, scfg, i, false);
                TurretErrorTerms terms;
                terms.bias_x = mil_to_m(res.r_rg.x, range);
                terms.bias_y = mil_to_m(res.r_rg.y, range);
                terms.sigma_x = se_x;
                terms.sigma_y = se_y;
                const ErrorBudget eb = compose_budget(budget, range, terms);
                sums[bin] += probability_of_hit(eb, gt, scfg.calibration).p_h;
                ++counts[bin];
            }
            for (std::size_t b = 0; b < strata.bins.size(); ++b) {
                PhCell cell;
                cell.bin = bin_label(b);
                cell.range_m = range;
                cell.origin = origin;
                cell.n = counts[b];
                cell.mean_ph = counts[b] > 0 ? sums[b] / static_cast<double>(counts[b]) : 0.0;
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

// ---- full run ----------------------------------------------------------------

class ReportSink {
public:
    explicit ReportSink(std::string dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::string path(const std::string& name) {
        files_.push_back(name);
        return (std::filesystem::path(dir_) / name).string();
    }

    void write_manifest() {
        files_.push_back("manifest.csv");
        std::vector<std::string> sorted = files_;
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::vector<std::string>> rows;
        for (const auto& f : sorted) rows.push_back({f});
        write_csv((std::filesystem::path(dir_) / "manifest.csv").string(), {"file"}, rows);
    }

private:
    std::string dir_;
    std::vector<std::string> files_;
};

inline std::string opt_str(const std::optional<double>& v, int sig = 9) {
    return v ? fmt_sig(*v, sig) : std::string("undefined");
}

inline void emit_metrics(const MetricsDataset& ds, const RunConfig& cfg, ReportSink& sink) {
    const ApReport overall = make_ap_report(ds);
    write_csv(sink.path("metrics_overall.csv"),
              {"n_detections", "n_ground_truths", "ap50", "ap75", "ap_50_5_95", "ar1", "ar10",
               "mean_confidence", "mean_iou"},
              {{std::to_string(overall.n_detections), std::to_string(overall.n_ground_truths),
                fmt_sig(overall.ap50, 9), fmt_sig(overall.ap75, 9), fmt_sig(overall.ap_50_5_95, 9),
                fmt_sig(overall.ar1, 9), fmt_sig(overall.ar10, 9),
                fmt_sig(overall.mean_confidence, 9), fmt_sig(overall.mean_iou, 9)}});

    const StratifiedSample strata = stratified_sample(ds, cfg.binning, cfg.area_fraction);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t b = 0; b < strata.bins.size(); ++b) {
        const ApReport r = make_ap_report(strata.bins[b]);
        rows.push_back({bin_label(b), fmt_sig(cfg.binning.edges[b].first, 6),
                        fmt_sig(cfg.binning.edges[b].second, 6), std::to_string(r.n_detections),
                        std::to_string(r.n_ground_truths), fmt_sig(r.ap50, 9), fmt_sig(r.ap75, 9),
                        fmt_sig(r.ap_50_5_95, 9), fmt_sig(r.ar1, 9), fmt_sig(r.ar10, 9),
                        fmt_sig(r.mean_confidence, 9), fmt_sig(r.mean_iou, 9)});
    }
    rows.push_back({"excluded", "", "", std::to_string(strata.excluded.detections.size()), "0",
                    "", "", "", "", "", "", ""});
    write_csv(sink.path("metrics_bins.csv"),
              {"bin", "iou_lo", "iou_hi", "n_detections", "n_ground_truths", "ap50", "ap75",
               "ap_50_5_95", "ar1", "ar10", "mean_confidence", "mean_iou"},
              rows);

    for (double t : {0.5, 0.75}) {
        const PRCurve curve = build_pr_curve(ds, t);
        std::vector<std::vector<std::string>> crows;
        std::vector<double> rx, py;
        for (const auto& p : curve.points) {
            crows.push_back({fmt_sig(p.tau, 9), fmt_sig(p.recall, 9), fmt_sig(p.precision, 9)});
            rx.push_back(p.recall);
            py.push_back(p.precision);
        }
        const std::string tag = t == 0.5 ? "50" : "75";
        write_csv(sink.path("pr_curve_iou" + tag + ".csv"), {"tau", "recall", "precision"}, crows);
        SvgPlot plot("precision vs recall (IoU " + fmt_fixed(t, 2) + ")", "recall", "precision");
        plot.add_line("PR", rx, py);
        std::vector<double> ir, ip;
        for (int i = 0; i <= 100; ++i) {
            ir.push_back(i / 100.0);
            ip.push_back(interpolate_precision(curve, i / 100.0));
        }
        plot.add_line("interpolated", ir, ip);
        plot.write(sink.path("pr_curve_iou" + tag + ".svg"));
    }
}

inline void emit_design(const DesignOutputs& des, ReportSink& sink) {
    write_csv(sink.path("design.csv"),
              {"axis", "J_kgm2", "c_1_per_s", "kp", "ti_s", "td_s", "gamma", "omega_gc_hz",
               "pm_deg", "sigma_e_mils"},
              {{"azimuth", fmt_sig(des.plant_az.J, 9), fmt_sig(des.plant_az.c, 9),
                fmt_sig(des.ctrl_az.kp, 9), fmt_sig(des.ctrl_az.ti, 9), fmt_sig(des.ctrl_az.td, 9),
                fmt_sig(des.ctrl_az.gamma, 9), fmt_sig(des.loop_az.omega_gc_hz, 9),
                fmt_sig(des.loop_az.pm_deg, 9), fmt_sig(des.sigma_e_az_mils, 9)},
               {"elevation", fmt_sig(des.plant_el.J, 9), fmt_sig(des.plant_el.c, 9),
                fmt_sig(des.ctrl_el.kp, 9), fmt_sig(des.ctrl_el.ti, 9), fmt_sig(des.ctrl_el.td, 9),
                fmt_sig(des.ctrl_el.gamma, 9), fmt_sig(des.loop_el.omega_gc_hz, 9),
                fmt_sig(des.loop_el.pm_deg, 9), fmt_sig(des.sigma_e_el_mils, 9)}});
}

inline void emit_sims(const MetricsDataset& ds, const ScenarioSims& sims, ReportSink& sink) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < sims.results.size(); ++k) {
        const SimulationResult& r = sims.results[k];
        const std::size_t i = sims.det_indices[k];
        rows.push_back({std::to_string(i), ds.detections[i].image_id,
                        fmt_sig(rad_to_mil(r.aim_detected.az), 9),
                        fmt_sig(rad_to_mil(r.aim_detected.el), 9), fmt_sig(r.t_f, 9),
                        opt_str(r.t_s_az), opt_str(r.t_s_el), fmt_sig(r.r_bg.x, 9),
                        fmt_sig(r.r_bg.y, 9), fmt_sig(r.r_br.x, 9), fmt_sig(r.r_br.y, 9),
                        fmt_sig(r.r_rg.x, 9), fmt_sig(r.r_rg.y, 9), fmt_sig(r.r_bg.norm(), 9),
                        fmt_sig(r.r_br.norm(), 9), fmt_sig(r.r_rg.norm(), 9)});
    }
    write_csv(sink.path(std::string("sims_") + origin_name(sims.origin) + ".csv"),
              {"det_index", "image_id", "aim_az_mils", "aim_el_mils", "t_f_s", "t_s_az_s",
               "t_s_el_s", "r_bg_x", "r_bg_y", "r_br_x", "r_br_y", "r_rg_x", "r_rg_y",
               "ai_error_mils", "controller_error_mils", "total_error_mils"},
              rows);
}

inline void emit_histograms(const std::vector<ErrorKindStats>& study, ReportSink& sink) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : study) {
        for (std::size_t b = 0; b < e.hist.counts.size(); ++b) {
            rows.push_back({e.kind, origin_name(e.origin), fmt_sig(e.hist.bin_lo(b), 9),
                            fmt_sig(e.hist.bin_lo(b) + e.hist.bin_width, 9),
                            std::to_string(e.hist.counts[b])});
        }
    }
    write_csv(sink.path("histograms.csv"),
              {"kind", "origin", "bin_lo_mils", "bin_hi_mils", "count"}, rows);

    std::vector<std::vector<std::string>> srows;
    for (const auto& e : study)
        srows.push_back({e.kind, origin_name(e.origin), std::to_string(e.stats.n),
                         fmt_sig(e.stats.mean, 9), fmt_sig(e.stats.stddev, 9)});
    write_csv(sink.path("error_stats.csv"), {"kind", "origin", "n", "mean_mils", "std_mils"},
              srows);

    for (const std::string kind : {"ai", "controller", "total"}) {
        SvgPlot plot(kind + std::string(" error histogram"), "error (mils)", "count");
        for (const auto& e : study) {
            if (e.kind != kind || e.hist.counts.empty()) continue;
            std::vector<double> xs, ys;
            for (std::size_t b = 0; b < e.hist.counts.size(); ++b) {
                xs.push_back(e.hist.bin_lo(b) + e.hist.bin_width / 2.0);
                ys.push_back(static_cast<double>(e.hist.counts[b]));
            }
            plot.add_bars(origin_name(e.origin), xs, ys, e.hist.bin_width * 0.9);
        }
        plot.write(sink.path("histogram_" + kind + ".svg"));
    }
}

inline void emit_correlations(const std::vector<CorrelationRow>& rows, ReportSink& sink) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({r.pair, r.filter, std::to_string(r.n), opt_str(r.r)});
    write_csv(sink.path("correlations.csv"), {"pair", "filter", "n", "r"}, out);
}

inline void emit_decomposition(const std::vector<ScenarioSims>& scenarios, ReportSink& sink) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& sc : scenarios) {
        if (sc.results.empty()) continue;
        const DecompositionReport d =
            variance_decomposition(error_norms(sc, "ai"), error_norms(sc, "controller"),
                                   error_norms(sc, "total"));
        rows.push_back({origin_name(sc.origin), std::to_string(d.n), fmt_sig(d.var_rg, 12),
                        fmt_sig(d.var_bg, 12), fmt_sig(d.var_br, 12), fmt_sig(d.var_eps, 12),
                        fmt_sig(d.cov_bg_br, 12), fmt_sig(d.cov_bg_eps, 12),
                        fmt_sig(d.cov_br_eps, 12), fmt_sig(d.two_term, 12),
                        fmt_sig(d.residual, 6), fmt_sig(d.approx_rel_err, 6)});
    }
    write_csv(sink.path("decomposition.csv"),
              {"origin", "n", "var_total", "var_ai", "var_controller", "var_eps", "cov_ai_ctl",
               "cov_ai_eps", "cov_ctl_eps", "two_term_sum", "identity_residual",
               "two_term_rel_err"},
              rows);
}

inline void emit_ph_matrix(const std::vector<PhCell>& cells, const RunConfig& cfg,
                           ReportSink& sink) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : cells)
        rows.push_back({c.bin, fmt_sig(c.range_m, 9), origin_name(c.origin), std::to_string(c.n),
                        fmt_sig(c.mean_ph, 9)});
    write_csv(sink.path("ph_matrix.csv"), {"bin", "range_m", "origin", "n", "mean_ph"}, rows);

    for (Origin origin : cfg.scenarios) {
        SvgPlot plot(std::string("mean P_h vs range (") + origin_name(origin) + " start)",
                     "range (m)", "mean P_h");
        std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
        for (const auto& c : cells) {
            if (c.origin != origin || c.n == 0) continue;
            series[c.bin].first.push_back(c.range_m);
            series[c.bin].second.push_back(c.mean_ph);
        }
        for (const auto& [bin, xy] : series) plot.add_line("bin " + bin, xy.first, xy.second);
        plot.write(sink.path(std::string("ph_vs_range_") + origin_name(origin) + ".svg"));
    }
}

inline void emit_trajectory_sample(const std::vector<ScenarioSims>& scenarios, ReportSink& sink) {
    for (const auto& sc : scenarios) {
        if (sc.results.empty() || sc.results.front().az.t.empty()) continue;
        const Trajectory& tr = sc.results.front().az;
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < tr.t.size(); ++i)
            rows.push_back({fmt_sig(tr.t[i], 9), fmt_sig(tr.r[i], 9), fmt_sig(tr.y[i], 9),
                            fmt_sig(tr.e[i], 9), fmt_sig(tr.u[i], 9)});
        write_csv(sink.path("trajectory_sample.csv"), {"t_s", "r_rad", "y_rad", "e_rad", "u_Nm"},
                  rows);
        SvgPlot plot("sample azimuth trajectory", "t (s)", "angle (rad)");
        plot.add_line("reference", tr.t, tr.r);
        plot.add_line("response", tr.t, tr.y);
        plot.write(sink.path("trajectory_sample.svg"));
        return;
    }
}

struct PipelineInputs {
    MetricsDataset dataset;
    BudgetTable budget;
};

inline PipelineInputs load_inputs(const RunConfig& cfg) {
    PipelineInputs in;
    if (cfg.detections_path.empty() || cfg.ground_truth_path.empty())
        throw ValidationError("detections and ground-truth paths are required");
    in.dataset.detections = read_detections(cfg.detections_path);
    in.dataset.ground_truths = read_ground_truth(cfg.ground_truth_path);
    in.budget = cfg.budget_path.empty() ? default_budget_table() : read_budget(cfg.budget_path);
    return in;
}

// Full pipeline: metrics, design, per-origin simulations at the calibration
// range, statistics, and the P_h sweep; everything written into out_dir.
inline void run_all(const RunConfig& cfg) {
    cfg.validate();
    const PipelineInputs in = load_inputs(cfg);
    ReportSink sink(cfg.out_dir);

    {
        std::ofstream out(sink.path("config_echo.json"));
        out << config_to_json(cfg).dump(2) << '\n';
    }

    emit_metrics(in.dataset, cfg, sink);
    const DesignOutputs des = run_design(cfg);
    emit_design(des, sink);

    const auto assoc = associate(in.dataset);
    std::vector<ScenarioSims> scenarios;
    for (Origin origin : cfg.scenarios) {
        ScenarioSims sims = simulate_scenario(in.dataset, assoc, des, cfg, origin,
                                              cfg.calibration.range_m,
                                              origin == cfg.scenarios.front());
        emit_sims(in.dataset, sims, sink);
        scenarios.push_back(std::move(sims));
    }

    emit_histograms(error_distribution_study(scenarios, cfg.histogram_bin_mils), sink);
    emit_correlations(correlation_study(in.dataset, cfg.calibration), sink);
    emit_decomposition(scenarios, sink);
    emit_trajectory_sample(scenarios, sink);

    const StratifiedSample strata = stratified_sample(in.dataset, cfg.binning, cfg.area_fraction);
    emit_ph_matrix(ph_range_sweep(in.dataset, strata, assoc, des, cfg, in.budget), cfg, sink);

    sink.write_manifest();
}

} // namespace turreteval

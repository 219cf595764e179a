// Command-line front end: metrics / design / simulate / sweep / analyze / all.
// Exit codes: 0 success, 2 validation failure, 3 numeric failure.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "turreteval/pipeline.hpp"

namespace {

using namespace turreteval;

struct CliFlags {
    std::string config, detections, ground_truth, budget, out;
    std::string origin, ranges;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

// "start:stop:step", inclusive of stop when it lands on the grid
std::vector<double> parse_ranges(const std::string& text) {
    double start = 0, stop = 0, step = 0;
    char trailing = 0;
    const int got = std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &trailing);
    if (got != 3) throw ValidationError("--ranges must look like start:stop:step");
    if (!(step > 0.0) || !(start > 0.0) || stop < start)
        throw ValidationError("--ranges needs positive start/step and stop >= start");
    std::vector<double> out;
    for (double r = start; r <= stop + step * 1e-9; r += step) out.push_back(r);
    return out;
}

RunConfig make_config(const CliFlags& f) {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (!f.detections.empty()) cfg.detections_path = f.detections;
    if (!f.ground_truth.empty()) cfg.ground_truth_path = f.ground_truth;
    if (!f.budget.empty()) cfg.budget_path = f.budget;
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (f.seed_set) {
        cfg.seed = f.seed;
        cfg.sim.seed = f.seed;
    }
    if (!f.origin.empty()) {
        const Origin o = parse_origin(f.origin);
        if (o == Origin::TopLeft)
            throw ValidationError("--origin must be bottom-left or center");
        cfg.scenarios = {o};
    }
    if (!f.ranges.empty()) cfg.ranges_m = parse_ranges(f.ranges);
    cfg.validate();
    return cfg;
}

void cmd_metrics(const RunConfig& cfg) {
    const PipelineInputs in = load_inputs(cfg);
    ReportSink sink(cfg.out_dir);
    emit_metrics(in.dataset, cfg, sink);
    std::printf("metrics written to %s\n", cfg.out_dir.c_str());
}

void cmd_design(const RunConfig& cfg) {
    const DesignOutputs des = run_design(cfg);
    ReportSink sink(cfg.out_dir);
    emit_design(des, sink);
    std::printf("azimuth:   w_gc %.4f Hz  PM %.3f deg  sigma_e %.6f mils\n",
                des.loop_az.omega_gc_hz, des.loop_az.pm_deg, des.sigma_e_az_mils);
    std::printf("elevation: w_gc %.4f Hz  PM %.3f deg  sigma_e %.6f mils\n",
                des.loop_el.omega_gc_hz, des.loop_el.pm_deg, des.sigma_e_el_mils);
}

void cmd_simulate(const RunConfig& cfg) {
    const PipelineInputs in = load_inputs(cfg);
    const DesignOutputs des = run_design(cfg);
    const auto assoc = associate(in.dataset);
    ReportSink sink(cfg.out_dir);
    std::vector<ScenarioSims> scenarios;
    for (Origin origin : cfg.scenarios) {
        ScenarioSims sims = simulate_scenario(in.dataset, assoc, des, cfg, origin,
                                              cfg.calibration.range_m,
                                              origin == cfg.scenarios.front());
        emit_sims(in.dataset, sims, sink);
        scenarios.push_back(std::move(sims));
    }
    emit_trajectory_sample(scenarios, sink);
    std::printf("simulations written to %s\n", cfg.out_dir.c_str());
}

void cmd_sweep(const RunConfig& cfg) {
    const PipelineInputs in = load_inputs(cfg);
    const DesignOutputs des = run_design(cfg);
    const auto assoc = associate(in.dataset);
    const StratifiedSample strata = stratified_sample(in.dataset, cfg.binning, cfg.area_fraction);
    ReportSink sink(cfg.out_dir);
    emit_ph_matrix(ph_range_sweep(in.dataset, strata, assoc, des, cfg, in.budget), cfg, sink);
    std::printf("P_h sweep written to %s\n", cfg.out_dir.c_str());
}

void cmd_analyze(const RunConfig& cfg) {
    const PipelineInputs in = load_inputs(cfg);
    const DesignOutputs des = run_design(cfg);
    const auto assoc = associate(in.dataset);
    ReportSink sink(cfg.out_dir);
    std::vector<ScenarioSims> scenarios;
    for (Origin origin : cfg.scenarios)
        scenarios.push_back(
            simulate_scenario(in.dataset, assoc, des, cfg, origin, cfg.calibration.range_m));
    emit_histograms(error_distribution_study(scenarios, cfg.histogram_bin_mils), sink);
    emit_correlations(correlation_study(in.dataset, cfg.calibration), sink);
    emit_decomposition(scenarios, sink);
    std::printf("analysis written to %s\n", cfg.out_dir.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ATR-to-turret error propagation suite"};
    app.require_subcommand(1);

    CliFlags flags;
    std::string verb;
    const std::map<std::string, std::string> verb_help = {
        {"metrics", "detection metrics, PR curves, IoU-stratified bins"},
        {"design", "inertias, controller design, loop analysis, noise error std"},
        {"simulate", "closed-loop servo runs per associated detection"},
        {"sweep", "hit-probability matrix over ranges x origins x bins"},
        {"analyze", "error histograms, correlations, variance decomposition"},
        {"all", "full pipeline with output manifest"},
    };
    for (const char* name : {"metrics", "design", "simulate", "sweep", "analyze", "all"}) {
        CLI::App* sub = app.add_subcommand(name, verb_help.at(name));
        sub->add_option("--config", flags.config, "JSON run configuration");
        sub->add_option("--detections", flags.detections, "detections CSV");
        sub->add_option("--ground-truth", flags.ground_truth, "ground-truth CSV");
        sub->add_option("--budget", flags.budget, "per-range error-budget CSV");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--seed", flags.seed, "RNG seed")->each([&](const std::string&) {
            flags.seed_set = true;
        });
        sub->add_option("--origin", flags.origin, "start origin: bottom-left or center");
        sub->add_option("--ranges", flags.ranges, "range sweep start:stop:step in meters");
        sub->callback([&verb, name] { verb = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const RunConfig cfg = make_config(flags);
        if (verb == "metrics") cmd_metrics(cfg);
        else if (verb == "design") cmd_design(cfg);
        else if (verb == "simulate") cmd_simulate(cfg);
        else if (verb == "sweep") cmd_sweep(cfg);
        else if (verb == "analyze") cmd_analyze(cfg);
        else run_all(cfg);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}

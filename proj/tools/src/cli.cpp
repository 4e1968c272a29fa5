#include "phaseid/cli/cli.hpp"

#include "phaseid/cli/run_report.hpp"
#include "phaseid/cli/settings.hpp"

#include <phaseid/errors.hpp>
#include <phaseid/ingest.hpp>
#include <phaseid/search.hpp>
#include <phaseid/synthfeeder.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace phaseid::cli {
namespace {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InsufficientOverlap:
        case ErrorKind::InsufficientData:
        case ErrorKind::InsufficientVariance:
        case ErrorKind::Alignment:
        case ErrorKind::SolverDivergence:
            return kInsufficientData;
        case ErrorKind::InvalidInput:
        case ErrorKind::Io:
        case ErrorKind::Parse:
        case ErrorKind::DuplicateSample:
        case ErrorKind::Validation:
            break;
    }
    return kIoOrParse;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, "'" + path + "': " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

/// Flags shared by identify and sweep. CLI11 binds plain storage; each
/// option's count decides whether it enters the flag layer.
struct ScoringFlags {
    std::string data;
    std::string config;
    std::string out;
    std::string preset;
    double alpha = 0.0;
    double beta = 0.0;
    std::string magnitude_mode;
    std::string angle_mode;
    std::string sign_convention;
    double margin_threshold = 0.0;
    std::int64_t tolerance_us = 0;
    double min_overlap = 0.0;
    std::string ref;
    std::string tgt;
    double ref_nominal_v = 0.0;
    double tgt_nominal_v = 0.0;
    std::size_t windows = 0;
    std::string schedule;
    std::string plot;

    std::vector<std::pair<CLI::Option*, std::string>> options;

    void bind(CLI::App& app, bool sweep) {
        app.add_option("data", data, "Phasor CSV (timestamp_us,bus_id,phase,magnitude_v,angle_deg)")->required();
        options = {
            {app.add_option("--ref", ref, "Reference bus id"), "ref"},
            {app.add_option("--tgt", tgt, "Target bus id"), "tgt"},
            {app.add_option("--preset", preset, "sim (alpha=1, beta=1) or field (alpha=10000, beta=1)"), "preset"},
            {app.add_option("--alpha", alpha, "Magnitude-score weight"), "alpha"},
            {app.add_option("--beta", beta, "Angle-score weight"), "beta"},
            {app.add_option("--magnitude-mode", magnitude_mode, "pearson | inner-product"), "magnitude_mode"},
            {app.add_option("--angle-mode", angle_mode, "raw | shift-removed"), "angle_mode"},
            {app.add_option("--sign-convention", sign_convention, "penalize-angle | reward-angle"), "sign_convention"},
            {app.add_option("--margin-threshold", margin_threshold, "Margins below this exit with code 3"), "margin_threshold"},
            {app.add_option("--tolerance-us", tolerance_us, "Timestamp matching tolerance (default quarter period)"), "tolerance_us"},
            {app.add_option("--min-overlap", min_overlap, "Minimum aligned fraction (default 0.9)"), "min_overlap"},
            {app.add_option("--ref-nominal-v", ref_nominal_v, "Reference per-unit base in volts (default: mean magnitude)"), "ref_nominal_v"},
            {app.add_option("--tgt-nominal-v", tgt_nominal_v, "Target per-unit base in volts (default: mean magnitude)"), "tgt_nominal_v"},
        };
        if (sweep) {
            options.emplace_back(app.add_option("--windows", windows, "Number of window lengths (default 21)"), "windows");
            options.emplace_back(app.add_option("--schedule", schedule, "Window schedule (linear)"), "schedule");
            app.add_option("--plot", plot, "Write per-window, per-assignment objective CSV here");
        }
        app.add_option("--config", config, "JSON configuration file; flags override it");
        app.add_option("--out", out, "Write the JSON report here instead of stdout");
    }

    SettingsLayer layer() const {
        SettingsLayer l;
        auto given = [&](const char* name) {
            return std::any_of(options.begin(), options.end(),
                               [&](const auto& o) { return o.second == name && o.first->count() > 0; });
        };
        if (given("ref")) l.ref_bus = ref;
        if (given("tgt")) l.tgt_bus = tgt;
        if (given("preset")) l.preset = preset;
        if (given("alpha")) l.alpha = alpha;
        if (given("beta")) l.beta = beta;
        if (given("magnitude_mode")) l.magnitude_mode = magnitude_mode;
        if (given("angle_mode")) l.angle_mode = angle_mode;
        if (given("sign_convention")) l.sign_convention = sign_convention;
        if (given("margin_threshold")) l.margin_threshold = margin_threshold;
        if (given("tolerance_us")) l.tolerance_us = tolerance_us;
        if (given("min_overlap")) l.min_overlap = min_overlap;
        if (given("ref_nominal_v")) l.ref_nominal_v = ref_nominal_v;
        if (given("tgt_nominal_v")) l.tgt_nominal_v = tgt_nominal_v;
        if (given("windows")) l.windows = windows;
        if (given("schedule")) l.schedule = schedule;
        return l;
    }
};

struct LoadedPair {
    RunSettings settings;
    AlignedPair aligned;
    nlohmann::json inputs;
};

LoadedPair load_pair(const ScoringFlags& flags) {
    SettingsLayer file_layer;
    nlohmann::json config_input = nullptr;
    if (!flags.config.empty()) {
        file_layer = layer_from_json(read_json_file(flags.config));
        config_input = {{"path", flags.config}, {"sha256", sha256_file(flags.config)}};
    }
    RunSettings settings = resolve_settings(file_layer, flags.layer());

    ParseOptions parse;
    const auto records = parse_phasor_csv(flags.data, parse);
    BusRecord ref = find_bus(records, settings.ref_bus);
    BusRecord tgt = find_bus(records, settings.tgt_bus);
    if (settings.ref_nominal_v) ref = ref.with_nominal_voltage(*settings.ref_nominal_v);
    if (settings.tgt_nominal_v) tgt = tgt.with_nominal_voltage(*settings.tgt_nominal_v);

    AlignmentOptions align;
    align.tolerance_us = settings.tolerance_us;
    align.min_overlap = settings.min_overlap;
    auto aligned = align_records(ref, tgt, align);

    nlohmann::json inputs = {{"data", {{"path", flags.data}, {"sha256", sha256_file(flags.data)}}},
                             {"config_file", config_input},
                             {"ref_base_v", ref.nominal_voltage()},
                             {"tgt_base_v", tgt.nominal_voltage()}};
    return LoadedPair{std::move(settings), std::move(aligned), std::move(inputs)};
}

void emit_report(nlohmann::json report, const std::string& out_path, std::ostream& out,
                 std::chrono::steady_clock::time_point started) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    report["timing"] = {{"wall_seconds", elapsed.count()}};
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        out << text;
    } else {
        write_text_file(out_path, text);
        out << render_report(report);
    }
}

int cmd_identify(const ScoringFlags& flags, std::ostream& out) {
    const auto started = std::chrono::steady_clock::now();
    auto loaded = load_pair(flags);
    const auto& [ref, tgt, alignment] = loaded.aligned;
    const auto result = identify(ref, tgt, loaded.settings.scoring);

    nlohmann::json report;
    report["schema_version"] = kReportSchemaVersion;
    report["command"] = "identify";
    report["config"] = settings_to_json(loaded.settings);
    report["inputs"] = loaded.inputs;
    report["alignment"] = alignment_json(alignment);
    report["result"] = identification_json(result, ref, tgt, loaded.settings.margin_threshold);
    emit_report(std::move(report), flags.out, out, started);
    return result.margin < loaded.settings.margin_threshold ? kLowMargin : kSuccess;
}

int cmd_sweep(const ScoringFlags& flags, std::ostream& out) {
    const auto started = std::chrono::steady_clock::now();
    auto loaded = load_pair(flags);
    const auto& [ref, tgt, alignment] = loaded.aligned;
    const auto lengths = linear_schedule(ref.sample_count(), loaded.settings.windows);
    const auto sweep = window_sweep(ref, tgt, loaded.settings.scoring, lengths);

    if (!flags.plot.empty()) {
        std::ostringstream csv;
        write_sweep_plot_csv(csv, sweep, ref);
        write_text_file(flags.plot, csv.str());
    }

    nlohmann::json report;
    report["schema_version"] = kReportSchemaVersion;
    report["command"] = "sweep";
    report["config"] = settings_to_json(loaded.settings);
    report["config"]["windows"] = loaded.settings.windows;
    report["config"]["schedule"] = loaded.settings.schedule;
    report["inputs"] = loaded.inputs;
    report["alignment"] = alignment_json(alignment);
    report["result"] = sweep_json(sweep, ref, tgt, loaded.settings.margin_threshold);
    report["plot_csv"] = flags.plot.empty() ? nlohmann::json(nullptr) : nlohmann::json(flags.plot);
    const bool low = report["result"]["ambiguous"].get<bool>();
    emit_report(std::move(report), flags.out, out, started);
    return low ? kLowMargin : kSuccess;
}

struct SimulateFlags {
    std::string scenario;
    std::string out_csv;
    std::string echo;
    std::uint64_t seed = 0;
    std::size_t snapshots = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* snapshots_opt = nullptr;
};

int cmd_simulate(const SimulateFlags& flags, std::ostream& out) {
    FeederScenario scenario = load_scenario(flags.scenario);
    if (flags.seed_opt->count() > 0) scenario.seed = flags.seed;
    if (flags.snapshots_opt->count() > 0) scenario.snapshots = flags.snapshots;

    const auto sim = generate_timeseries(scenario);
    {
        std::ofstream csv(flags.out_csv, std::ios::binary);
        if (!csv) throw Error(ErrorKind::Io, "cannot write '" + flags.out_csv + "'");
        write_phasor_csv(csv, sim.records);
        if (!csv) throw Error(ErrorKind::Io, "write failed for '" + flags.out_csv + "'");
    }
    if (!flags.echo.empty()) write_text_file(flags.echo, scenario_to_json(scenario) + "\n");

    nlohmann::json buses = nlohmann::json::array();
    for (const auto& rec : sim.records) {
        std::string phases;
        for (const auto& ch : rec.channels()) phases.push_back(phase_letter(ch.phase()));
        buses.push_back({{"bus", rec.bus_id()},
                         {"channels", phases},
                         {"samples", rec.sample_count()},
                         {"nominal_v", rec.nominal_voltage()}});
    }
    nlohmann::json summary = {{"scenario", scenario.name},
                              {"seed", scenario.seed},
                              {"snapshots", scenario.snapshots},
                              {"csv", {{"path", flags.out_csv}, {"sha256", sha256_file(flags.out_csv)}}},
                              {"solver", {{"max_iterations", sim.max_iterations}, {"max_mismatch_pu", sim.max_mismatch_pu}}},
                              {"buses", buses}};
    out << summary.dump(2) << "\n";
    return kSuccess;
}

int cmd_report(const std::vector<std::string>& paths, std::ostream& out) {
    for (const auto& path : paths) out << render_report(read_json_file(path));
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Phase identification from synchronised voltage phasors"};
    app.name("phaseid");
    app.require_subcommand(1);

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Run a synthetic feeder scenario and write phasor CSV");
    simulate->add_option("scenario", sim.scenario, "Scenario JSON")->required();
    simulate->add_option("out", sim.out_csv, "Output CSV path")->required();
    sim.seed_opt = simulate->add_option("--seed", sim.seed, "Override the scenario seed");
    sim.snapshots_opt = simulate->add_option("--snapshots", sim.snapshots, "Override the snapshot count");
    simulate->add_option("--echo-scenario", sim.echo, "Write the resolved scenario JSON here");

    ScoringFlags id_flags;
    auto* identify_cmd = app.add_subcommand("identify", "Rank phase assignments between two buses");
    id_flags.bind(*identify_cmd, false);

    ScoringFlags sweep_flags;
    auto* sweep_cmd = app.add_subcommand("sweep", "Identify over increasing window lengths");
    sweep_flags.bind(*sweep_cmd, true);

    std::vector<std::string> report_paths;
    auto* report_cmd = app.add_subcommand("report", "Summarise JSON run reports");
    report_cmd->add_option("reports", report_paths, "Report files")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kSuccess : kIoOrParse;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out);
        if (identify_cmd->parsed()) return cmd_identify(id_flags, out);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags, out);
        if (report_cmd->parsed()) return cmd_report(report_paths, out);
    } catch (const Error& e) {
        err << "phaseid: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "phaseid: " << e.what() << "\n";
        return kIoOrParse;
    }
    return kIoOrParse;
}

}  // namespace phaseid::cli

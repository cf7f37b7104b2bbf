// Copyright 2026 The surfacelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// surfacelab: layout, simulate, detect, decode, analyze, xeb and fit.
//
// Configuration precedence: command-line flag > --config JSON file >
// SURFACELAB_CALIBRATION (calibration path only) > built-in defaults.
// Exit status: 0 success, 2 configuration error, 3 data error.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "run_io.hpp"
#include "surfacelab/analysis.hpp"
#include "surfacelab/calibration.hpp"
#include "surfacelab/decoder.hpp"
#include "surfacelab/detection.hpp"
#include "surfacelab/engine.hpp"
#include "surfacelab/experiment.hpp"
#include "surfacelab/layout.hpp"
#include "surfacelab/memory.hpp"
#include "surfacelab/xeb.hpp"

using nlohmann::json;
using namespace surfacelab;
using namespace surfacelab::cli;

namespace {

constexpr const char *kCalibrationEnv = "SURFACELAB_CALIBRATION";
constexpr const char *kShotFile = "shots.qshot";
constexpr uint64_t kXebInstanceStream = 0xE0B;

struct RunConfig {
    std::string command;
    std::string calibration;  // empty: built-in table
    int distance = 3;
    std::string basis = "z";
    size_t cycles = 11;
    size_t shots = 10000;
    uint64_t seed = 1;
    std::string engine = "frame";
    std::string noise = "on";
    double noise_scale = 1.0;
    bool errors_are_pauli = false;
    bool all_ancillas = false;
    std::string out = "surfacelab_out";
    size_t workers = 1;
    std::string interval = "wald";
    size_t max_cycles = 5;
    size_t samples = 100000;
    size_t trajectories = 128;
    size_t instances = 9;
    std::string weighting = "likelihood";
    bool reweight = false;
    std::vector<std::string> inputs;
    std::string graph;
    std::string curve;
    double tau_us = 0;  // 0: from calibration durations
};

json to_json(const RunConfig &c) {
    return json{{"command", c.command},
                {"calibration", c.calibration},
                {"distance", c.distance},
                {"basis", c.basis},
                {"cycles", c.cycles},
                {"shots", c.shots},
                {"seed", c.seed},
                {"engine", c.engine},
                {"noise", c.noise},
                {"noise_scale", c.noise_scale},
                {"errors_are_pauli", c.errors_are_pauli},
                {"all_ancillas", c.all_ancillas},
                {"out", c.out},
                {"workers", c.workers},
                {"interval", c.interval},
                {"max_cycles", c.max_cycles},
                {"samples", c.samples},
                {"trajectories", c.trajectories},
                {"instances", c.instances},
                {"weighting", c.weighting},
                {"reweight", c.reweight},
                {"inputs", c.inputs},
                {"graph", c.graph},
                {"curve", c.curve},
                {"tau_us", c.tau_us}};
}

template <class T>
void take(const json &j, const char *key, T &field) {
    if (!j.contains(key)) {
        return;
    }
    try {
        field = j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

/// Applies a config document over `c`. Unknown keys are rejected.
void apply_config(const json &j, RunConfig &c) {
    if (!j.is_object()) {
        throw ConfigError("config file must hold a JSON object");
    }
    const json known = to_json(RunConfig{});
    for (const auto &[k, v] : j.items()) {
        if (!known.contains(k) && k != "config_file") {
            throw ConfigError("unknown config key '" + k + "'");
        }
    }
    take(j, "calibration", c.calibration);
    take(j, "distance", c.distance);
    take(j, "basis", c.basis);
    take(j, "cycles", c.cycles);
    take(j, "shots", c.shots);
    take(j, "seed", c.seed);
    take(j, "engine", c.engine);
    take(j, "noise", c.noise);
    take(j, "noise_scale", c.noise_scale);
    take(j, "errors_are_pauli", c.errors_are_pauli);
    take(j, "all_ancillas", c.all_ancillas);
    take(j, "out", c.out);
    take(j, "workers", c.workers);
    take(j, "interval", c.interval);
    take(j, "max_cycles", c.max_cycles);
    take(j, "samples", c.samples);
    take(j, "trajectories", c.trajectories);
    take(j, "instances", c.instances);
    take(j, "weighting", c.weighting);
    take(j, "reweight", c.reweight);
    take(j, "inputs", c.inputs);
    take(j, "graph", c.graph);
    take(j, "curve", c.curve);
    take(j, "tau_us", c.tau_us);
}

void validate(const RunConfig &c) {
    if (c.distance < 3 || c.distance % 2 == 0) {
        throw ConfigError("distance must be odd and at least 3");
    }
    parse_basis(c.basis);
    parse_engine(c.engine);
    if (c.noise != "on" && c.noise != "off") {
        throw ConfigError("noise must be 'on' or 'off'");
    }
    if (c.cycles < 1 || c.max_cycles < 1) {
        throw ConfigError("cycle counts must be positive");
    }
    if (c.shots < 1 || c.samples < 1 || c.trajectories < 1 || c.instances < 1) {
        throw ConfigError("shot, sample, trajectory and instance counts must be positive");
    }
    if (c.workers < 1) {
        throw ConfigError("workers must be at least 1");
    }
    if (!(c.noise_scale >= 0) || !std::isfinite(c.noise_scale)) {
        throw ConfigError("noise_scale must be a finite non-negative number");
    }
    if (c.interval != "wald" && c.interval != "wilson") {
        throw ConfigError("interval must be 'wald' or 'wilson'");
    }
    if (c.weighting != "likelihood" && c.weighting != "unit") {
        throw ConfigError("weighting must be 'likelihood' or 'unit'");
    }
    if (c.tau_us < 0) {
        throw ConfigError("tau_us must be non-negative");
    }
}

/// Flag bindings: each option writes into its own holder and is copied into
/// the config only when given on the command line.
class Flags {
public:
    template <class T>
    CLI::Option *add(CLI::App *app, const std::string &name, T RunConfig::*field, const std::string &desc) {
        auto holder = std::make_shared<T>();
        auto *opt = app->add_option(name, *holder, desc);
        binds_.push_back({opt, [holder, field](RunConfig &c) { c.*field = *holder; }});
        return opt;
    }

    CLI::Option *add_flag(CLI::App *app, const std::string &name, bool RunConfig::*field, const std::string &desc) {
        auto holder = std::make_shared<bool>(false);
        auto *opt = app->add_flag(name, *holder, desc);
        binds_.push_back({opt, [holder, field](RunConfig &c) { c.*field = *holder; }});
        return opt;
    }

    void apply(RunConfig &c) const {
        for (const auto &[opt, fn] : binds_) {
            if (opt->count() > 0) {
                fn(c);
            }
        }
    }

private:
    std::vector<std::pair<CLI::Option *, std::function<void(RunConfig &)>>> binds_;
};

// ---- shared helpers --------------------------------------------------------------

CalibrationTable load_cal(const RunConfig &c, Manifest *m) {
    if (c.calibration.empty()) {
        if (m) {
            m->add_builtin_input("calibration");
        }
        return default_calibration();
    }
    const std::string bytes = read_file(c.calibration);
    if (m) {
        m->add_input("calibration", c.calibration, bytes);
    }
    return parse_calibration(bytes);
}

NoiseOptions noise_options(const RunConfig &c) {
    NoiseOptions o;
    o.scale = c.noise_scale;
    o.errors_are_pauli = c.errors_are_pauli;
    return o;
}

Interval interval_of(const RunConfig &c) { return c.interval == "wilson" ? Interval::Wilson : Interval::Wald; }

/// Config of a previous simulate run, with its calibration re-checked.
struct SimulateInput {
    RunDir dir;
    RunConfig cfg;
    CalibrationTable cal;
    ShotBatch shots;
};

SimulateInput open_simulation(const std::string &path, Manifest &m) {
    RunDir dir(path);
    if (dir.command() != "simulate") {
        throw DataError(path + " is not the output of simulate");
    }
    RunConfig sc;
    apply_config(dir.config(), sc);
    const std::string bytes = dir.read_verified(kShotFile);
    m.add_input("shots", dir.dir() + "/" + kShotFile, bytes);
    CalibrationTable cal = load_cal(sc, &m);
    return {std::move(dir), sc, std::move(cal), deserialize_shots(bytes)};
}

json fit_json(const FitResult &f, double tau_us) {
    json j = fit_to_json(f);
    if (f.fittable && f.epsilon <= 0.5) {
        const auto lt = logical_lifetime(f.epsilon, tau_us);
        j["tau_cycle_us"] = tau_us;
        if (lt.infinite) {
            j["T_L_us"] = "infinite";
        } else {
            j["T_L_us"] = lt.T_L_us;
        }
    }
    return j;
}

// ---- commands ------------------------------------------------------------------------

void cmd_layout(const RunConfig &c, Manifest &m) {
    const auto cal = load_cal(c, &m);
    const auto L = build_layout(c.distance);
    const std::string audit = audit_layout(L);
    if (!audit.empty()) {
        throw DataError("layout audit failed: " + audit);
    }
    m.emit("layout.json", layout_to_json(L).dump(2) + "\n");
    m.emit("cycle.txt", build_cycle_circuit(L, cal.durations).to_text());
    m.set_summary({{"data_qubits", L.n_data()},
                   {"ancillas", L.n_ancillas()},
                   {"couplings", L.couplings.size()},
                   {"tau_cycle_us", cycle_duration_us(cal)}});
    std::cout << "d=" << L.d << ": " << L.n_data() << " data, " << L.n_ancillas() << " ancillas, cycle "
              << cycle_duration_us(cal) << " us\n";
}

void cmd_simulate(const RunConfig &c, Manifest &m) {
    const auto cal = load_cal(c, &m);
    const auto L = build_layout(c.distance);
    const auto nc = noisy_memory_circuit(L, cal, parse_basis(c.basis), c.cycles, noise_options(c));
    RunOptions ro;
    ro.engine = parse_engine(c.engine);
    ro.workers = c.workers;
    ro.noiseless = c.noise == "off";
    const auto t0 = std::chrono::steady_clock::now();
    const auto shots = run_circuit(nc.circuit, &nc.model, c.shots, c.seed, ro);
    m.time("simulate_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    m.emit(kShotFile, serialize_shots(shots));
    m.set_summary({{"shots", shots.n_shots()},
                   {"measurements", shots.n_measurements()},
                   {"instructions", nc.circuit.size()},
                   {"noise_channels", nc.model.channels().size()},
                   {"clamped_idle_channels", nc.model.clamped_idle_channels}});
    std::cout << "wrote " << shots.n_shots() << " shots of " << shots.n_measurements() << " bits to "
              << m.path(kShotFile) << "\n";
}

DetectionContext context_for(const SimulateInput &in, bool all_ancillas) {
    const auto L = build_layout(in.cfg.distance);
    const auto basis = parse_basis(in.cfg.basis);
    const auto mc = build_memory_circuit(L, basis, in.cfg.cycles, in.cal.durations);
    DetectionOptions dopts;
    dopts.include_inconsistent = all_ancillas;
    return DetectionContext(L, mc.records, basis, dopts);
}

void need_one_input(const RunConfig &c) {
    if (c.inputs.size() != 1) {
        throw ConfigError(c.command + " needs exactly one --input run directory");
    }
}

void cmd_detect(const RunConfig &c, Manifest &m) {
    need_one_input(c);
    const auto in = open_simulation(c.inputs[0], m);
    const auto ctx = context_for(in, c.all_ancillas);
    const auto dm = detect(in.shots, ctx);
    const auto st = event_stats(dm);
    const auto def = def_curve(dm.index, st);
    const auto corr = correlation_matrix(dm.index, st);
    m.emit("def.csv", def_to_csv(def));
    m.emit("def.json", def_to_json(def).dump(2) + "\n");
    m.emit("correlation.csv", correlation_to_csv(corr));
    m.emit("correlation.json", correlation_to_json(corr).dump(2) + "\n");
    size_t events = 0;
    for (auto e : dm.events) {
        events += e;
    }
    m.set_summary({{"detectors", dm.index.size()}, {"events", events}, {"mid_round_def", def.mid_round_mean()}});
    std::cout << dm.index.size() << " detectors, " << events << " events, mid-round DEF " << def.mid_round_mean()
              << "\n";
}

void cmd_decode(const RunConfig &c, Manifest &m) {
    need_one_input(c);
    const auto in = open_simulation(c.inputs[0], m);
    const auto L = build_layout(in.cfg.distance);
    const auto basis = parse_basis(in.cfg.basis);
    const auto ctx = context_for(in, false);
    const auto dm = detect(in.shots, ctx);
    DetectorGraph g;
    if (!c.graph.empty()) {
        const std::string bytes = read_file(c.graph);
        m.add_input("graph", c.graph, bytes);
        try {
            g = graph_from_json(json::parse(bytes));
        } catch (const json::parse_error &e) {
            throw DataError(c.graph + ": " + e.what());
        }
        if (g.n_detectors != dm.index.size()) {
            throw DataError("graph has " + std::to_string(g.n_detectors) + " detectors, the run has " +
                            std::to_string(dm.index.size()));
        }
    } else {
        const auto nc = noisy_memory_circuit(L, in.cal, basis, in.cfg.cycles, noise_options(in.cfg));
        GraphOptions go;
        go.weighting = c.weighting == "unit" ? EdgeWeighting::Unit : EdgeWeighting::Likelihood;
        g = build_detector_graph(enumerate_faults(nc.circuit, nc.model, ctx), ctx.index(), go);
    }
    if (c.reweight) {
        g = reweight_from_correlations(std::move(g), event_stats(dm));
    }
    for (const auto &w : g.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    MatchingDecoder dec(g);
    if (!dec.unreachable().empty()) {
        throw DataError("detector graph leaves " + std::to_string(dec.unreachable().size()) +
                        " detectors without a path to the boundary");
    }
    const auto corrected = decode_all(dm, dec, c.workers);
    m.emit("graph.json", graph_to_json(g).dump(2) + "\n");
    m.emit("decode.csv", decode_to_csv(dm, corrected));
    const uint8_t target = logical_target(L, basis, in.cfg.cycles, in.cal.durations);
    const auto raw = fidelity_point(in.cfg.cycles, dm.raw_logical, {}, target);
    const auto fixed = fidelity_point(in.cfg.cycles, corrected, {}, target);
    m.set_summary({{"target", target},
                   {"raw_fidelity", raw.fidelity},
                   {"decoded_fidelity", fixed.fidelity},
                   {"edges", g.edges.size()},
                   {"warnings", g.warnings.size()}});
    std::cout << "fidelity raw " << raw.fidelity << ", decoded " << fixed.fidelity << "\n";
}

void cmd_analyze(const RunConfig &c, Manifest &m) {
    std::vector<MemoryPoint> points;
    CalibrationTable cal;
    MemoryRunOptions mo;
    mo.run.workers = c.workers;
    mo.graph.weighting = c.weighting == "unit" ? EdgeWeighting::Unit : EdgeWeighting::Likelihood;
    std::string basis_label;
    if (!c.inputs.empty()) {
        for (const auto &path : c.inputs) {
            const auto in = open_simulation(path, m);
            if (!basis_label.empty() && in.cfg.basis != basis_label) {
                throw DataError("analyze inputs mix bases");
            }
            basis_label = in.cfg.basis;
            cal = in.cal;
            mo.noise = noise_options(in.cfg);
            points.push_back(analyze_memory_shots(build_layout(in.cfg.distance), in.cal, parse_basis(in.cfg.basis),
                                                  in.cfg.cycles, in.shots, mo));
        }
        std::sort(points.begin(), points.end(),
                  [](const MemoryPoint &a, const MemoryPoint &b) { return a.n_cycles < b.n_cycles; });
    } else {
        cal = load_cal(c, &m);
        const auto L = build_layout(c.distance);
        const auto basis = parse_basis(c.basis);
        basis_label = c.basis;
        mo.run.engine = parse_engine(c.engine);
        mo.noise = noise_options(c);
        mo.noiseless = c.noise == "off";
        for (size_t k = 1; k <= c.max_cycles; ++k) {
            points.push_back(run_memory_point(L, cal, basis, k, c.shots, point_seed(c.seed, basis, k), mo));
        }
    }
    const auto curves = memory_curves(points, interval_of(c));
    const double tau = c.tau_us > 0 ? c.tau_us : cycle_duration_us(cal);
    json fits = json::object();
    for (const auto &cv : curves) {
        fits[cv.label] = fit_json(fit_logical_error(cv), tau);
    }
    std::ostringstream ref;
    ref.precision(10);
    ref << "k,fidelity\n";
    for (const auto &pt : points) {
        ref << pt.n_cycles << ',' << physical_reference_curve(cal.best_t1_us(), tau, static_cast<double>(pt.n_cycles))
            << '\n';
    }
    m.emit("curves.csv", curves_to_csv(curves));
    m.emit("curves.json", curves_to_json(curves).dump(2) + "\n");
    m.emit("fits.json", fits.dump(2) + "\n");
    m.emit("reference.csv", ref.str());
    json summary{{"basis", basis_label}, {"points", points.size()}};
    if (fits["none"].value("fittable", false) && fits["decoded"].value("fittable", false)) {
        const double raw = fits["none"]["epsilon"], dec = fits["decoded"]["epsilon"];
        summary["epsilon_undecoded"] = raw;
        summary["epsilon_decoded"] = dec;
        summary["relative_reduction"] = raw > 0 ? (raw - dec) / raw : 0.0;
        std::cout << "eps undecoded " << raw << ", decoded " << dec << "\n";
    }
    m.set_summary(summary);
}

void cmd_xeb(const RunConfig &c, Manifest &m) {
    const auto cal = load_cal(c, &m);
    const auto L = build_layout(c.distance);
    XebOptions xo;
    xo.samples = c.samples;
    xo.trajectories = c.trajectories;
    xo.workers = c.workers;
    std::vector<std::pair<uint64_t, NoisyXebResult>> rows;
    for (size_t i = 0; i < c.instances; ++i) {
        const uint64_t s = derive_key(c.seed, {kXebInstanceStream, i});
        const auto rc = generate_random_circuit(L, s, cal.durations);
        NoisyXebResult r;
        if (c.noise == "off") {
            const auto ideal = ideal_probabilities(rc.circuit);
            r.xeb = xeb_fidelity(sample_ideal(ideal, c.samples, s), ideal, rc.circuit.n_qubits());
            r.predicted = 1.0;
        } else {
            r = noisy_xeb(rc, cal, s, xo, noise_options(c));
        }
        rows.push_back({s, r});
        std::cout << "instance " << i << ": F = " << r.xeb.fidelity << " (predicted " << r.predicted << ")\n";
    }
    double mean = 0, pred = 0;
    for (const auto &[s, r] : rows) {
        mean += r.xeb.fidelity;
        pred += r.predicted;
    }
    mean /= static_cast<double>(rows.size());
    pred /= static_cast<double>(rows.size());
    double var = 0;
    for (const auto &[s, r] : rows) {
        var += (r.xeb.fidelity - mean) * (r.xeb.fidelity - mean);
    }
    const double sem = rows.size() > 1 ? std::sqrt(var / static_cast<double>(rows.size() - 1) /
                                                   static_cast<double>(rows.size()))
                                       : 0.0;
    m.emit("xeb.csv", xeb_to_csv(rows));
    json summary{{"mean_fidelity", mean}, {"sem", sem}, {"predicted", pred}, {"ratio", pred > 0 ? mean / pred : 0.0}};
    m.emit("xeb.json", summary.dump(2) + "\n");
    m.set_summary(summary);
}

void cmd_fit(const RunConfig &c, Manifest &m) {
    need_one_input(c);
    const std::string bytes = read_file(c.inputs[0]);
    m.add_input("curves", c.inputs[0], bytes);
    const auto curves = curves_from_csv(bytes);
    double tau = c.tau_us;
    if (tau <= 0) {
        tau = cycle_duration_us(load_cal(c, &m));
    }
    json out = json::object();
    for (const auto &cv : curves) {
        if (!c.curve.empty() && cv.label != c.curve) {
            continue;
        }
        out[cv.label] = fit_json(fit_logical_error(cv), tau);
    }
    if (out.empty()) {
        throw DataError("no curve named '" + c.curve + "' in " + c.inputs[0]);
    }
    m.emit("fit.json", out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"surfacelab: surface-code memory and XEB experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));
    Flags flags;
    std::string config_path;

    struct Cmd {
        const char *name;
        const char *help;
        void (*run)(const RunConfig &, Manifest &);
    };
    const Cmd cmds[] = {
        {"layout", "Write the code layout and one annotated cycle", cmd_layout},
        {"simulate", "Sample shots of the memory experiment", cmd_simulate},
        {"detect", "Detection events, DEF and correlation matrix of a simulate run", cmd_detect},
        {"decode", "Matching-decode a simulate run", cmd_decode},
        {"analyze", "Post-selection and decoded fidelity curves with fits", cmd_analyze},
        {"xeb", "Random-circuit cross-entropy benchmarking", cmd_xeb},
        {"fit", "Fit logical error per cycle to a fidelity CSV", cmd_fit},
    };
    std::vector<CLI::App *> subs;
    for (const auto &cmd : cmds) {
        auto *s = app.add_subcommand(cmd.name, cmd.help);
        s->add_option("--config", config_path, "JSON config file (flags override it)");
        flags.add(s, "--calibration", &RunConfig::calibration, std::string("Calibration JSON (default: $") +
                                                                     kCalibrationEnv + " or the built-in table)");
        flags.add(s, "--out", &RunConfig::out, "Output directory");
        flags.add(s, "--seed", &RunConfig::seed, "Root seed; sub-seeds come from a hash split");
        flags.add(s, "--workers", &RunConfig::workers, "Worker threads (results do not depend on it)");
        flags.add(s, "--distance", &RunConfig::distance, "Code distance");
        flags.add(s, "--input", &RunConfig::inputs, "Input run directory or file");
        subs.push_back(s);
    }
    auto sub = [&](const char *name) { return app.get_subcommand(name); };
    for (const char *n : {"simulate", "analyze"}) {
        flags.add(sub(n), "--basis", &RunConfig::basis, "z (|0_L>) or x (|-_L>)");
        flags.add(sub(n), "--shots", &RunConfig::shots, "Shots per run");
        flags.add(sub(n), "--engine", &RunConfig::engine, "tableau, statevector or frame");
    }
    for (const char *n : {"simulate", "analyze", "xeb"}) {
        flags.add(sub(n), "--noise", &RunConfig::noise, "on or off");
        flags.add(sub(n), "--noise-scale", &RunConfig::noise_scale, "Multiply every error probability");
        flags.add_flag(sub(n), "--errors-are-pauli", &RunConfig::errors_are_pauli,
                       "Use calibrated gate errors as Pauli probabilities");
    }
    flags.add(sub("simulate"), "--cycles", &RunConfig::cycles, "Error-correction cycles");
    flags.add_flag(sub("detect"), "--all-ancillas", &RunConfig::all_ancillas,
                   "Also report ancillas of the other stabilizer type");
    for (const char *n : {"decode", "analyze"}) {
        flags.add(sub(n), "--weighting", &RunConfig::weighting, "likelihood or unit edge weights");
    }
    flags.add(sub("decode"), "--graph", &RunConfig::graph, "Detector graph JSON to use instead of deriving one");
    flags.add_flag(sub("decode"), "--reweight", &RunConfig::reweight,
                   "Re-estimate edge probabilities from measured event correlations");
    flags.add(sub("analyze"), "--max-cycles", &RunConfig::max_cycles, "Simulate cycles 1..N when no --input");
    flags.add(sub("analyze"), "--interval", &RunConfig::interval, "wald or wilson error bars");
    for (const char *n : {"analyze", "fit"}) {
        flags.add(sub(n), "--tau-us", &RunConfig::tau_us, "Cycle time for the lifetime (default: calibration)");
    }
    flags.add(sub("fit"), "--curve", &RunConfig::curve, "Only fit this curve");
    flags.add(sub("xeb"), "--samples", &RunConfig::samples, "Samples per circuit instance");
    flags.add(sub("xeb"), "--trajectories", &RunConfig::trajectories, "Noisy trajectories per instance");
    flags.add(sub("xeb"), "--instances", &RunConfig::instances, "Random circuit instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg;
        for (auto *s : subs) {
            if (s->parsed()) {
                cfg.command = s->get_name();
            }
        }
        if (const char *env = std::getenv(kCalibrationEnv); env && *env) {
            cfg.calibration = env;
        }
        if (!config_path.empty()) {
            json doc;
            try {
                doc = json::parse(read_file(config_path));
            } catch (const json::parse_error &e) {
                throw ConfigError(config_path + ": " + e.what());
            } catch (const DataError &e) {
                throw ConfigError(e.what());
            }
            apply_config(doc, cfg);
        }
        flags.apply(cfg);
        validate(cfg);
        Manifest manifest(cfg.command, cfg.out);
        json echo = to_json(cfg);
        echo["config_file"] = config_path;
        manifest.set_config(echo);
        for (const auto &cmd : cmds) {
            if (cfg.command == cmd.name) {
                cmd.run(cfg, manifest);
            }
        }
        manifest.finish();
        return 0;
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError &e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

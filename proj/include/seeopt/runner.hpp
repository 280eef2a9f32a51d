// runner.hpp — configuration-driven experiment entry points shared by the
// command-line tool and the test suites.
//
// Exit code contract: 0 success, 1 usage/config error, 2 verification or
// tolerance failure.

#pragma once

#include "seeopt/config.hpp"
#include "seeopt/io.hpp"
#include "seeopt/report.hpp"
#include "seeopt/version.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace seeopt {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 1;
inline constexpr int exit_verification_failure = 2;

/// Reproducibility record for one run.  Timings vary between runs by
/// nature; every other field, and every CSV/JSON data file, is a pure
/// function of the configuration.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::string version = version_string;
    double wall_ms = 0.0;
    std::vector<std::pair<std::string, double>> stage_ms;
    std::vector<std::string> outputs;
};

namespace detail {

class StageTimer {
public:
    explicit StageTimer(RunManifest& m) : manifest_(m), t0_(clock::now()) {}

    void stage(const std::string& name) {
        const auto now = clock::now();
        manifest_.stage_ms.emplace_back(
            name, std::chrono::duration<double, std::milli>(now - last_).count());
        last_ = now;
    }

    void finish() {
        manifest_.wall_ms =
            std::chrono::duration<double, std::milli>(clock::now() - t0_).count();
    }

private:
    using clock = std::chrono::steady_clock;
    RunManifest& manifest_;
    clock::time_point t0_;
    clock::time_point last_ = clock::now();
};

inline std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

inline void prepare_output_dir(const ExperimentConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + cfg.output_dir +
                                 "': " + ec.message());
}

inline void write_manifest(const ExperimentConfig& cfg, const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["config_hash"] = m.config_hash;
    j["toolkit_version"] = m.version;
    j["wall_ms"] = m.wall_ms;
    json stages = json::array();
    for (const auto& [name, ms] : m.stage_ms) {
        json s;
        s["stage"] = name;
        s["ms"] = ms;
        stages.push_back(s);
    }
    j["stages"] = stages;
    j["outputs"] = m.outputs;
    auto out = io::open_out(out_path(cfg, "manifest.json"));
    out << j.dump(2) << "\n";
}

} // namespace detail

/// Writes JSON and/or text renderings of a verification report.
/// `formats` may contain "json" and "txt".
inline std::vector<std::string> emit_report(const VerificationReport& report,
                                            const std::vector<std::string>& formats,
                                            const std::string& dir) {
    std::vector<std::string> written;
    for (const auto& f : formats) {
        if (f == "json") {
            const std::string p = (std::filesystem::path(dir) / "report.json").string();
            auto out = io::open_out(p);
            out << to_json(report).dump(2) << "\n";
            written.push_back(p);
        } else if (f == "txt") {
            const std::string p = (std::filesystem::path(dir) / "report.txt").string();
            auto out = io::open_out(p);
            out << render_text(report);
            written.push_back(p);
        } else {
            throw std::invalid_argument("emit_report: unknown format '" + f + "'");
        }
    }
    return written;
}

/// LQ benchmark: verify the (Riccati, by default) candidate and compare its
/// cost against perturbed alternatives plus the Riccati feedback itself.
inline int run_lq_benchmark(const ExperimentConfig& cfg) {
    if (cfg.preset != "lq_diagonal")
        throw ConfigError("lq-bench requires preset = lq_diagonal");
    exec::max_threads() = cfg.threads;
    detail::prepare_output_dir(cfg);

    RunManifest manifest;
    manifest.command = "lq-bench";
    manifest.config_hash = cfg.hash();
    detail::StageTimer timer(manifest);

    const Preset preset = cfg.build_preset();
    const TimeGrid grid = cfg.grid();
    const ControlProcess candidate = cfg.build_candidate(preset, grid);
    const VerifierConfig vcfg = cfg.verifier_config(preset);
    timer.stage("setup");

    const VerificationReport report = verify_sufficient_conditions(
        preset.problem, preset.x0, candidate, cfg.n_paths, vcfg, preset.lq);
    timer.stage("verify");

    std::vector<ControlProcess> alternatives;
    std::vector<std::string> labels;
    alternatives.push_back(
        lq_riccati_feedback(*preset.lq, preset.problem.control_set, grid));
    labels.push_back("riccati_feedback");
    for (int a = 0; a < cfg.compare_n_alternatives; ++a) {
        alternatives.push_back(perturbed_control(
            candidate, preset.problem.control_set, cfg.compare_amplitude,
            rng::derive_key(cfg.seed, rng::Stream::cost_compare,
                            static_cast<std::uint64_t>(a))));
        labels.push_back("perturbation_" + std::to_string(a));
    }
    const CostComparison comparison = compare_costs(
        preset.problem, preset.x0, candidate, alternatives, cfg.n_paths, cfg.seed);
    timer.stage("compare_costs");

    for (const auto& p : emit_report(report, {"json", "txt"}, cfg.output_dir))
        manifest.outputs.push_back(p);
    write_costs_csv(detail::out_path(cfg, "costs.csv"), comparison, labels);
    manifest.outputs.push_back(detail::out_path(cfg, "costs.csv"));

    const ForwardPathEnsemble realized =
        simulate_forward(preset.problem, candidate, preset.x0, cfg.n_paths, cfg.seed);
    write_control_csv(detail::out_path(cfg, "control.csv"), realized);
    manifest.outputs.push_back(detail::out_path(cfg, "control.csv"));
    if (cfg.dump_forward) {
        write_forward_csv(detail::out_path(cfg, "forward.csv"), realized);
        manifest.outputs.push_back(detail::out_path(cfg, "forward.csv"));
    }
    timer.stage("write_outputs");
    timer.finish();
    detail::write_manifest(cfg, manifest);

    return (report.overall && !comparison.any_better()) ? exit_ok
                                                        : exit_verification_failure;
}

/// Duality experiment: check the identity for n_alt perturbed alternatives
/// against the preset candidate.
inline int run_duality_experiment(const ExperimentConfig& cfg) {
    exec::max_threads() = cfg.threads;
    detail::prepare_output_dir(cfg);

    RunManifest manifest;
    manifest.command = "duality";
    manifest.config_hash = cfg.hash();
    detail::StageTimer timer(manifest);

    const Preset preset = cfg.build_preset();
    const TimeGrid grid = cfg.grid();
    const ControlProcess candidate = cfg.build_candidate(preset, grid);
    const VerifierConfig vcfg = cfg.verifier_config(preset);
    timer.stage("setup");

    const DualityBaseline base = duality_baseline(
        preset.problem, preset.x0, candidate, cfg.n_paths, cfg.seed, vcfg, preset.lq);
    timer.stage("baseline");

    std::vector<DualityCheckResult> rows;
    bool all_pass = true;
    for (int a = 0; a < vcfg.n_alt; ++a) {
        const ControlProcess alt = perturbed_control(
            candidate, preset.problem.control_set, vcfg.alt_amplitude,
            rng::derive_key(cfg.seed, rng::Stream::alt_control,
                            static_cast<std::uint64_t>(a)));
        rows.push_back(check_duality_against(preset.problem, preset.x0, base, alt, vcfg));
        all_pass = all_pass && rows.back().pass();
    }
    timer.stage("duality_checks");

    write_duality_csv(detail::out_path(cfg, "duality.csv"), rows);
    manifest.outputs.push_back(detail::out_path(cfg, "duality.csv"));
    if (cfg.dump_forward) {
        write_forward_csv(detail::out_path(cfg, "forward.csv"), base.forward);
        manifest.outputs.push_back(detail::out_path(cfg, "forward.csv"));
    }
    if (cfg.dump_adjoint) {
        write_adjoint_csv(detail::out_path(cfg, "adjoint.csv"), base.adjoint);
        manifest.outputs.push_back(detail::out_path(cfg, "adjoint.csv"));
    }
    timer.stage("write_outputs");
    timer.finish();
    detail::write_manifest(cfg, manifest);

    return all_pass ? exit_ok : exit_verification_failure;
}

/// Full verification of a candidate control supplied as control.csv.
inline int run_verification(const ExperimentConfig& cfg, const std::string& control_file) {
    exec::max_threads() = cfg.threads;
    detail::prepare_output_dir(cfg);

    RunManifest manifest;
    manifest.command = "verify";
    manifest.config_hash = cfg.hash();
    detail::StageTimer timer(manifest);

    const Preset preset = cfg.build_preset();
    const TimeGrid grid = cfg.grid();
    ControlProcess candidate = [&]() -> ControlProcess {
        try {
            return read_control_csv(control_file, grid, preset.problem.control_set,
                                    cfg.n_paths);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }();
    const VerifierConfig vcfg = cfg.verifier_config(preset);
    timer.stage("setup");

    const VerificationReport report = verify_sufficient_conditions(
        preset.problem, preset.x0, candidate, cfg.n_paths, vcfg, preset.lq);
    timer.stage("verify");

    for (const auto& p : emit_report(report, {"json", "txt"}, cfg.output_dir))
        manifest.outputs.push_back(p);
    if (cfg.dump_forward) {
        const ForwardPathEnsemble fwd = simulate_forward(
            preset.problem, candidate, preset.x0, cfg.n_paths, cfg.seed);
        write_forward_csv(detail::out_path(cfg, "forward.csv"), fwd);
        manifest.outputs.push_back(detail::out_path(cfg, "forward.csv"));
    }
    timer.stage("write_outputs");
    timer.finish();
    detail::write_manifest(cfg, manifest);

    return report.overall ? exit_ok : exit_verification_failure;
}

} // namespace seeopt

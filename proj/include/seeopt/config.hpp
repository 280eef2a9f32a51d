// config.hpp — experiment configuration: flat key = value text with strict
// parsing (unknown keys are errors), plus the reproducibility manifest.

#pragma once

#include "seeopt/presets.hpp"
#include "seeopt/verify.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace seeopt {

/// Raised on malformed configuration (maps to exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CandidateKind { preset_default, riccati, feedback, zero };

struct ExperimentConfig {
    // problem
    std::string preset = "lq_diagonal";
    PresetParams params;
    CandidateKind candidate = CandidateKind::preset_default;

    // grid
    double T = 1.0;
    int n_steps = 20;

    // monte carlo
    int n_paths = 4096;
    std::uint64_t seed = 20240901;

    // regression (degree < 0 means preset default)
    int degree = -1;
    double ridge = 1e-8;

    VerifierConfig verifier;

    // cost comparison
    int compare_n_alternatives = 20;
    double compare_amplitude = 0.25;

    // output
    std::string output_dir = "out";
    int threads = 0;
    bool dump_forward = false;
    bool dump_adjoint = false;

    // -- helpers -----------------------------------------------------------

    Preset build_preset() const { return make_preset(preset, params); }

    TimeGrid grid() const { return uniform_grid(T, n_steps); }

    RegressionConfig regression(const Preset& pr) const {
        RegressionConfig rc;
        rc.degree = degree > 0 ? degree : pr.default_degree;
        rc.ridge = ridge;
        return rc;
    }

    VerifierConfig verifier_config(const Preset& pr) const {
        VerifierConfig v = verifier;
        v.seed = seed;
        v.regression = regression(pr);
        return v;
    }

    ControlProcess build_candidate(const Preset& pr, const TimeGrid& g) const {
        switch (candidate) {
        case CandidateKind::zero:
            return ControlProcess::constant(
                g, pr.problem.control_set,
                ControlPoint::Zero(pr.problem.control_dim()));
        case CandidateKind::riccati:
            if (!pr.lq)
                throw ConfigError("candidate = riccati requires the lq_diagonal preset");
            return lq_riccati_feedback(*pr.lq, pr.problem.control_set, g);
        case CandidateKind::feedback: {
            const double gain = pr.feedback_gain;
            return ControlProcess::feedback(
                g, pr.problem.control_set,
                [gain](double, const SpectralVector& x) -> ControlPoint {
                    return -gain * x;
                });
        }
        case CandidateKind::preset_default:
            return preset_candidate(pr, g);
        }
        throw ConfigError("unreachable candidate kind");
    }

    /// Canonical effective key = value text, sorted by key.  Two configs
    /// with the same canonical text produce the same numeric outputs.
    std::string canonical_text() const;

    /// FNV-1a hash of the canonical text, as fixed-width hex.
    std::string hash() const {
        const std::string text = canonical_text();
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : text) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return std::string(buf);
    }

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

namespace detail {

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "preset", "n_modes", "kappa", "sigma0", "sigma1", "alpha", "gamma",
        "c_cos", "l_drift", "b_gain", "r_control", "q_weight", "g_weight",
        "box_halfwidth", "feedback_gain", "x0_scale", "candidate",
        "T", "n_steps", "n_paths", "seed",
        "regression.degree", "regression.ridge",
        "verifier.n_convexity_pairs", "verifier.sample_radius",
        "verifier.tol_convexity", "verifier.n_fd_samples", "verifier.tol_fd",
        "verifier.n_bound_samples", "verifier.growth_threshold",
        "verifier.n_min_paths", "verifier.n_var_samples", "verifier.tol_gap",
        "verifier.tol_var", "verifier.n_alt", "verifier.alt_amplitude",
        "verifier.bias_tol", "verifier.adjoint",
        "compare.n_alternatives", "compare.amplitude",
        "output_dir", "threads", "dump.forward", "dump.adjoint",
    };
    return keys;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as number");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as integer");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as bool");
}

} // namespace detail

inline ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (!detail::known_config_keys().count(key))
            throw ConfigError("unknown config key '" + key + "' on line " +
                              std::to_string(lineno));
        if (kv.count(key))
            throw ConfigError("duplicate config key '" + key + "' on line " +
                              std::to_string(lineno));
        kv[key] = val;
    }

    ExperimentConfig c;
    const auto geti = [&](const char* k, long long lo, long long hi, long long dflt) {
        if (!kv.count(k)) return dflt;
        const long long v = detail::parse_int(k, kv.at(k));
        if (v < lo || v > hi)
            throw ConfigError(std::string("config key '") + k + "' out of range");
        return v;
    };
    const auto getd = [&](const char* k, double dflt) {
        return kv.count(k) ? detail::parse_double(k, kv.at(k)) : dflt;
    };

    if (kv.count("preset")) c.preset = kv.at("preset");
    if (c.preset != "lq_diagonal" && c.preset != "nonlinear_sine" &&
        c.preset != "control_diffusion")
        throw ConfigError("unknown preset '" + c.preset + "'");

    c.params.n_modes = static_cast<int>(geti("n_modes", 1, 4096, c.params.n_modes));
    c.params.kappa = getd("kappa", c.params.kappa);
    c.params.sigma0 = getd("sigma0", c.params.sigma0);
    c.params.sigma1 = getd("sigma1", c.params.sigma1);
    c.params.alpha = getd("alpha", c.params.alpha);
    c.params.gamma = getd("gamma", c.params.gamma);
    c.params.c_cos = getd("c_cos", c.params.c_cos);
    c.params.l_drift = getd("l_drift", c.params.l_drift);
    c.params.b_gain = getd("b_gain", c.params.b_gain);
    c.params.r_control = getd("r_control", c.params.r_control);
    c.params.q_weight = getd("q_weight", c.params.q_weight);
    c.params.g_weight = getd("g_weight", c.params.g_weight);
    c.params.box_halfwidth = getd("box_halfwidth", c.params.box_halfwidth);
    c.params.feedback_gain = getd("feedback_gain", c.params.feedback_gain);
    c.params.x0_scale = getd("x0_scale", c.params.x0_scale);

    if (kv.count("candidate")) {
        const std::string& v = kv.at("candidate");
        if (v == "riccati") c.candidate = CandidateKind::riccati;
        else if (v == "feedback") c.candidate = CandidateKind::feedback;
        else if (v == "zero") c.candidate = CandidateKind::zero;
        else if (v == "default") c.candidate = CandidateKind::preset_default;
        else throw ConfigError("config key 'candidate': expected riccati|feedback|zero|default");
    }

    c.T = getd("T", c.T);
    if (!(c.T > 0.0)) throw ConfigError("config key 'T' must be > 0");
    c.n_steps = static_cast<int>(geti("n_steps", 1, 1000000, c.n_steps));
    c.n_paths = static_cast<int>(geti("n_paths", 1, 100000000, c.n_paths));
    if (kv.count("seed")) {
        const long long s = detail::parse_int("seed", kv.at("seed"));
        if (s < 0) throw ConfigError("config key 'seed' must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }

    c.degree = static_cast<int>(geti("regression.degree", 1, 2, c.degree));
    c.ridge = getd("regression.ridge", c.ridge);
    if (c.ridge < 0.0) throw ConfigError("config key 'regression.ridge' must be >= 0");

    c.verifier.n_convexity_pairs = static_cast<int>(
        geti("verifier.n_convexity_pairs", 1, 100000000, c.verifier.n_convexity_pairs));
    c.verifier.sample_radius = getd("verifier.sample_radius", c.verifier.sample_radius);
    c.verifier.tol_convexity = getd("verifier.tol_convexity", c.verifier.tol_convexity);
    c.verifier.n_fd_samples = static_cast<int>(
        geti("verifier.n_fd_samples", 1, 1000000, c.verifier.n_fd_samples));
    c.verifier.tol_fd = getd("verifier.tol_fd", c.verifier.tol_fd);
    c.verifier.n_bound_samples = static_cast<int>(
        geti("verifier.n_bound_samples", 1, 1000000, c.verifier.n_bound_samples));
    c.verifier.growth_threshold = getd("verifier.growth_threshold", c.verifier.growth_threshold);
    c.verifier.n_min_paths = static_cast<int>(
        geti("verifier.n_min_paths", 1, 1000000, c.verifier.n_min_paths));
    c.verifier.n_var_samples = static_cast<int>(
        geti("verifier.n_var_samples", 1, 1000000, c.verifier.n_var_samples));
    c.verifier.tol_gap = getd("verifier.tol_gap", c.verifier.tol_gap);
    c.verifier.tol_var = getd("verifier.tol_var", c.verifier.tol_var);
    c.verifier.n_alt = static_cast<int>(geti("verifier.n_alt", 0, 10000, c.verifier.n_alt));
    c.verifier.alt_amplitude = getd("verifier.alt_amplitude", c.verifier.alt_amplitude);
    c.verifier.bias_tol = getd("verifier.bias_tol", c.verifier.bias_tol);
    if (kv.count("verifier.adjoint")) {
        const std::string& v = kv.at("verifier.adjoint");
        if (v == "auto") c.verifier.adjoint = AdjointSolver::automatic;
        else if (v == "regression") c.verifier.adjoint = AdjointSolver::regression;
        else if (v == "riccati") c.verifier.adjoint = AdjointSolver::riccati;
        else throw ConfigError("config key 'verifier.adjoint': expected auto|regression|riccati");
    }

    c.compare_n_alternatives = static_cast<int>(
        geti("compare.n_alternatives", 0, 10000, c.compare_n_alternatives));
    c.compare_amplitude = getd("compare.amplitude", c.compare_amplitude);

    if (kv.count("output_dir")) c.output_dir = kv.at("output_dir");
    c.threads = static_cast<int>(geti("threads", 0, 4096, c.threads));
    if (kv.count("dump.forward")) c.dump_forward = detail::parse_bool("dump.forward", kv.at("dump.forward"));
    if (kv.count("dump.adjoint")) c.dump_adjoint = detail::parse_bool("dump.adjoint", kv.at("dump.adjoint"));

    // surface invalid preset parameters as config errors
    try {
        c.build_preset();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

inline std::string ExperimentConfig::canonical_text() const {
    std::map<std::string, std::string> kv;
    char buf[64];
    const auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    kv["preset"] = preset;
    kv["n_modes"] = std::to_string(params.n_modes);
    kv["kappa"] = fmt(params.kappa);
    kv["sigma0"] = fmt(params.sigma0);
    kv["sigma1"] = fmt(params.sigma1);
    kv["alpha"] = fmt(params.alpha);
    kv["gamma"] = fmt(params.gamma);
    kv["c_cos"] = fmt(params.c_cos);
    kv["l_drift"] = fmt(params.l_drift);
    kv["b_gain"] = fmt(params.b_gain);
    kv["r_control"] = fmt(params.r_control);
    kv["q_weight"] = fmt(params.q_weight);
    kv["g_weight"] = fmt(params.g_weight);
    kv["box_halfwidth"] = fmt(params.box_halfwidth);
    kv["feedback_gain"] = fmt(params.feedback_gain);
    kv["x0_scale"] = fmt(params.x0_scale);
    switch (candidate) {
    case CandidateKind::preset_default: kv["candidate"] = "default"; break;
    case CandidateKind::riccati: kv["candidate"] = "riccati"; break;
    case CandidateKind::feedback: kv["candidate"] = "feedback"; break;
    case CandidateKind::zero: kv["candidate"] = "zero"; break;
    }
    kv["T"] = fmt(T);
    kv["n_steps"] = std::to_string(n_steps);
    kv["n_paths"] = std::to_string(n_paths);
    kv["seed"] = std::to_string(seed);
    kv["regression.degree"] = std::to_string(degree);
    kv["regression.ridge"] = fmt(ridge);
    kv["verifier.n_convexity_pairs"] = std::to_string(verifier.n_convexity_pairs);
    kv["verifier.sample_radius"] = fmt(verifier.sample_radius);
    kv["verifier.tol_convexity"] = fmt(verifier.tol_convexity);
    kv["verifier.n_fd_samples"] = std::to_string(verifier.n_fd_samples);
    kv["verifier.tol_fd"] = fmt(verifier.tol_fd);
    kv["verifier.n_bound_samples"] = std::to_string(verifier.n_bound_samples);
    kv["verifier.growth_threshold"] = fmt(verifier.growth_threshold);
    kv["verifier.n_min_paths"] = std::to_string(verifier.n_min_paths);
    kv["verifier.n_var_samples"] = std::to_string(verifier.n_var_samples);
    kv["verifier.tol_gap"] = fmt(verifier.tol_gap);
    kv["verifier.tol_var"] = fmt(verifier.tol_var);
    kv["verifier.n_alt"] = std::to_string(verifier.n_alt);
    kv["verifier.alt_amplitude"] = fmt(verifier.alt_amplitude);
    kv["verifier.bias_tol"] = fmt(verifier.bias_tol);
    switch (verifier.adjoint) {
    case AdjointSolver::automatic: kv["verifier.adjoint"] = "auto"; break;
    case AdjointSolver::regression: kv["verifier.adjoint"] = "regression"; break;
    case AdjointSolver::riccati: kv["verifier.adjoint"] = "riccati"; break;
    }
    kv["compare.n_alternatives"] = std::to_string(compare_n_alternatives);
    kv["compare.amplitude"] = fmt(compare_amplitude);

    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

} // namespace seeopt

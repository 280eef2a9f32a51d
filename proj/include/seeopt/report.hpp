// report.hpp — machine (JSON) and human (text) renderings of verification
// reports.  JSON uses insertion-ordered keys so identical reports serialize
// byte-identically.

#pragma once

#include "seeopt/verify.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace seeopt {

using json = nlohmann::ordered_json;

inline json to_json(const ConvexityResult& r) {
    json j;
    j["pass"] = r.pass();
    j["tolerance"] = r.tol;
    j["n_tests"] = r.n_tests;
    j["worst_midpoint_violation"] = r.worst_violation;
    j["worst_gradient_violation"] = r.worst_gradient_violation;
    if (!r.pass()) {
        json w;
        w["a"] = std::vector<double>(r.witness_a.begin(), r.witness_a.end());
        w["b"] = std::vector<double>(r.witness_b.begin(), r.witness_b.end());
        if (r.witness_nu_a.size() > 0) {
            w["nu_a"] = std::vector<double>(r.witness_nu_a.begin(), r.witness_nu_a.end());
            w["nu_b"] = std::vector<double>(r.witness_nu_b.begin(), r.witness_nu_b.end());
        }
        j["witness"] = w;
    }
    return j;
}

inline json to_json(const FiniteDiffReport& r) {
    json j;
    j["pass"] = r.pass();
    j["tolerance"] = r.tol;
    j["n_samples"] = r.n_samples;
    json errs;
    for (const auto& [k, v] : r.max_rel_error) errs[k] = v;
    j["max_rel_error"] = errs;
    json lin;
    for (const auto& [k, v] : r.max_linearity_err) lin[k] = v;
    j["max_linearity_error"] = lin;
    return j;
}

inline json to_json(const DerivativeBoundsReport& r) {
    json j;
    j["radii"] = r.radii;
    j["growth_threshold"] = r.growth_threshold;
    json norms, growth, flags;
    for (const auto& [k, v] : r.norm_max) norms[k] = v;
    for (const auto& [k, v] : r.growth_factor) growth[k] = v;
    for (const auto& [k, v] : r.flagged) flags[k] = v;
    j["sampled_norm_max"] = norms;
    j["growth_factor"] = growth;
    j["growth_flag"] = flags;
    j["phi_growth_ratio"] = r.phi_growth_ratio;
    j["note"] = "sampled audit of uniform boundedness; flags are warnings";
    return j;
}

inline json to_json(const MinimumConditionResult& r) {
    json j;
    j["pass"] = r.pass();
    j["tol_gap"] = r.tol_gap;
    j["tol_var"] = r.tol_var;
    j["n_steps"] = r.n_steps;
    j["n_sampled_paths"] = r.n_sampled_paths;
    j["max_gap"] = r.max_gap;
    j["variational_residual"] = r.variational_residual;
    j["step_max_gap"] = r.step_max_gap;
    j["step_mean_gap"] = r.step_mean_gap;
    if (r.witness_step >= 0) {
        j["witness_step"] = r.witness_step;
        j["witness_path"] = r.witness_path;
    }
    return j;
}

inline json to_json(const DualityCheckResult& r) {
    json j;
    j["pass"] = r.pass();
    j["lhs"] = r.lhs;
    j["lhs_stderr"] = r.lhs_stderr;
    j["rhs"] = r.rhs;
    j["rhs_stderr"] = r.rhs_stderr;
    j["gap"] = r.gap;
    j["combined_stderr"] = r.combined_stderr;
    j["bias_tol"] = r.bias_tol;
    j["tolerance"] = 3.0 * r.combined_stderr + r.bias_tol;
    j["n_paths"] = r.n_paths;
    return j;
}

inline json to_json(const VerificationReport& r) {
    json j;
    j["overall_pass"] = r.overall;
    json conds;
    {
        json ci = to_json(r.cond_i);
        conds["i_phi_convex"] = ci;
    }
    {
        json cii;
        cii["pass"] = r.pass_ii;
        cii["finite_difference"] = to_json(r.fd);
        cii["boundedness"] = to_json(r.bounds);
        conds["ii_derivatives"] = cii;
    }
    conds["iii_hamiltonian_convex"] = to_json(r.cond_iii);
    conds["iv_minimum_condition"] = to_json(r.cond_iv);
    j["conditions"] = conds;
    json dual = json::array();
    for (const auto& d : r.duality) dual.push_back(to_json(d));
    j["duality"] = dual;
    j["duality_pass"] = r.pass_duality;
    j["j_candidate"] = r.j_candidate;
    j["j_candidate_stderr"] = r.j_stderr;
    j["issues"] = r.issues;
    return j;
}

inline json to_json(const CostComparison& c, const std::vector<std::string>& labels) {
    json j;
    j["j_candidate"] = c.j_candidate;
    j["j_candidate_stderr"] = c.j_candidate_stderr;
    json rows = json::array();
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        const auto& r = c.rows[i];
        json row;
        row["label"] = i < labels.size() ? labels[i] : std::to_string(i);
        row["j"] = r.j_alt;
        row["j_stderr"] = r.j_alt_stderr;
        row["diff_vs_candidate"] = r.diff;
        row["diff_stderr"] = r.diff_stderr;
        row["flagged_better"] = r.better;
        rows.push_back(row);
    }
    j["alternatives"] = rows;
    j["any_better"] = c.any_better();
    return j;
}

namespace detail {

inline const char* pf(bool b) { return b ? "pass" : "FAIL"; }

} // namespace detail

/// Human-readable rendering of the verification report.
inline std::string render_text(const VerificationReport& r) {
    std::string s;
    char buf[256];
    const auto line = [&s, &buf](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        s += buf;
        s += "\n";
    };
    s += "verification report\n";
    line("  overall: %s", detail::pf(r.overall));
    line("  (i)   terminal cost convex:      %s  (worst midpoint %.3e, gradient %.3e, %d pairs)",
         detail::pf(r.pass_i), r.cond_i.worst_violation, r.cond_i.worst_gradient_violation,
         r.cond_i.n_tests);
    line("  (ii)  derivative audit:          %s  (max FD error %.3e at tol %.1e)",
         detail::pf(r.pass_ii), r.fd.worst(), r.fd.tol);
    for (const auto& [k, flagged] : r.bounds.flagged)
        if (flagged)
            line("        warning: sampled norm of %s grows with radius (factor %.2f)",
                 k.c_str(), r.bounds.growth_factor.at(k));
    line("        phi gradient growth ratio: %.3f", r.bounds.phi_growth_ratio);
    line("  (iii) Hamiltonian convex:        %s  (worst midpoint %.3e, gradient %.3e)",
         detail::pf(r.pass_iii), r.cond_iii.worst_violation,
         r.cond_iii.worst_gradient_violation);
    line("  (iv)  minimum condition:         %s  (max gap %.3e at tol %.1e, variational residual %.3e)",
         detail::pf(r.pass_iv), r.cond_iv.max_gap, r.cond_iv.tol_gap,
         r.cond_iv.variational_residual);
    line("  duality identity:                %s  (%zu alternatives)",
         detail::pf(r.pass_duality), r.duality.size());
    for (std::size_t i = 0; i < r.duality.size(); ++i) {
        const auto& d = r.duality[i];
        line("        alt %zu: lhs %.6e  rhs %.6e  gap %.3e  (3 sigma + bias = %.3e) %s",
             i, d.lhs, d.rhs, d.gap, 3.0 * d.combined_stderr + d.bias_tol,
             detail::pf(d.pass()));
    }
    line("  J(candidate) = %.8g +- %.3g", r.j_candidate, r.j_stderr);
    for (const auto& is : r.issues) line("  issue: %s", is.c_str());
    return s;
}

} // namespace seeopt

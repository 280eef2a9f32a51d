// presets.hpp — the three shipped test problems.
//
//   lq_diagonal       diagonal linear-quadratic problem with a Riccati
//                     feedback candidate (analytic oracle throughout)
//   nonlinear_sine    bounded smooth nonlinearity in drift and running cost,
//                     state-dependent diffusion; exercises the degree-2
//                     regression backward solve
//   control_diffusion sigma(x, nu) = sigma0 I + sigma1 diag(nu): the
//                     diffusion responds to the control
//
// All presets share the Dirichlet-Laplacian spectrum lambda_k = -kappa (k pi)^2
// and the initial state x0_k = x0_scale / k.

#pragma once

#include "seeopt/lq.hpp"
#include "seeopt/problem.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace seeopt {

/// Tunable preset parameters; NaN box halfwidth picks the preset default.
struct PresetParams {
    int n_modes = 8;
    double kappa = 0.05;         // spectrum scale
    double sigma0 = 0.2;         // constant diffusion level
    double sigma1 = 0.1;         // control-diffusion coupling
    double alpha = 0.5;          // sine drift amplitude
    double gamma = 0.1;          // sine diffusion amplitude
    double c_cos = 0.5;          // 1 - cos running-cost weight
    double l_drift = 0.0;        // extra diagonal drift
    double b_gain = 1.0;         // control-to-state gain
    double r_control = 1.0;      // control cost weight
    double q_weight = 1.0;       // running state cost weight
    double g_weight = 1.0;       // terminal cost weight
    double box_halfwidth = std::numeric_limits<double>::quiet_NaN();
    double feedback_gain = 0.5;  // default candidate nu = -gain x
    double x0_scale = 1.0;
};

/// A shipped problem with its initial state and solver defaults.
struct Preset {
    std::string name;
    ProblemDefinition problem;
    SpectralVector x0;
    std::optional<LqSpec> lq;  // present iff the problem is exactly diagonal LQ
    int default_degree = 1;
    double feedback_gain = 0.5;
};

inline SpectralVector preset_initial_state(const PresetParams& p) {
    SpectralVector x0(p.n_modes);
    for (int k = 1; k <= p.n_modes; ++k) x0[k - 1] = p.x0_scale / k;
    return x0;
}

namespace detail {

inline double box_or(const PresetParams& p, double fallback) {
    return std::isnan(p.box_halfwidth) ? fallback : p.box_halfwidth;
}

inline void check_params(const PresetParams& p) {
    if (p.n_modes < 1) throw std::invalid_argument("preset: n_modes >= 1");
    if (!(p.kappa > 0.0)) throw std::invalid_argument("preset: kappa > 0");
    if (!(p.r_control > 0.0)) throw std::invalid_argument("preset: r_control > 0");
    if (p.q_weight < 0.0 || p.g_weight < 0.0)
        throw std::invalid_argument("preset: q_weight, g_weight >= 0");
    if (p.sigma0 < 0.0) throw std::invalid_argument("preset: sigma0 >= 0");
}

} // namespace detail

inline Preset make_lq_diagonal(const PresetParams& p = {}) {
    detail::check_params(p);
    const int n = p.n_modes;
    LqSpec lq{SpectralBasis::dirichlet_laplacian(n, p.kappa),
              Eigen::VectorXd::Constant(n, p.l_drift),
              Eigen::VectorXd::Constant(n, p.b_gain),
              Eigen::VectorXd::Constant(n, p.q_weight),
              Eigen::VectorXd::Constant(n, p.g_weight),
              p.r_control,
              p.sigma0 * HSMatrix::Identity(n, n)};
    const ControlSet U = ControlSet::centered_box(n, detail::box_or(p, 10.0));
    Preset out{"lq_diagonal", lq_problem(lq, U), preset_initial_state(p), lq, 1,
               p.feedback_gain};
    return out;
}

inline Preset make_nonlinear_sine(const PresetParams& p = {}) {
    detail::check_params(p);
    const int n = p.n_modes;
    const double alpha = p.alpha, gamma = p.gamma, c_cos = p.c_cos;
    const double b_gain = p.b_gain, r = p.r_control, q = p.q_weight, g = p.g_weight;
    const double sigma0 = p.sigma0;

    CoefficientBundle c;
    c.b = [alpha, b_gain](const SpectralVector& x, const ControlPoint& nu) -> SpectralVector {
        return (alpha * x.array().sin() + b_gain * nu.array()).matrix();
    };
    c.sigma = [sigma0, gamma, n](const SpectralVector& x, const ControlPoint&) -> HSMatrix {
        HSMatrix s = sigma0 * HSMatrix::Identity(n, n);
        s.diagonal() += (gamma * x.array().sin()).matrix();
        return s;
    };
    c.ell = [q, c_cos, r](const SpectralVector& x, const ControlPoint& nu) {
        return 0.5 * q * x.squaredNorm() + c_cos * (1.0 - x.array().cos()).sum() +
               0.5 * r * nu.squaredNorm();
    };
    c.phi = [g](const SpectralVector& x) { return 0.5 * g * x.squaredNorm(); };

    c.b_x = [alpha](const SpectralVector& x, const ControlPoint&,
                    const SpectralVector& h) -> SpectralVector {
        return (alpha * x.array().cos() * h.array()).matrix();
    };
    c.b_nu = [b_gain](const SpectralVector&, const ControlPoint&,
                      const ControlPoint& h) -> SpectralVector {
        return b_gain * h;
    };
    c.sigma_x = [gamma, n](const SpectralVector& x, const ControlPoint&,
                           const SpectralVector& h) -> HSMatrix {
        HSMatrix s = HSMatrix::Zero(n, n);
        s.diagonal() = (gamma * x.array().cos() * h.array()).matrix();
        return s;
    };
    c.sigma_nu = [n](const SpectralVector&, const ControlPoint&, const ControlPoint&) {
        return HSMatrix::Zero(n, n);
    };
    c.ell_x = [q, c_cos](const SpectralVector& x, const ControlPoint&,
                         const SpectralVector& h) {
        return ((q * x.array() + c_cos * x.array().sin()) * h.array()).sum();
    };
    c.ell_nu = [r](const SpectralVector&, const ControlPoint& nu, const ControlPoint& h) {
        return r * nu.dot(h);
    };
    c.phi_grad = [g](const SpectralVector& x) -> SpectralVector { return g * x; };

    const ControlSet U = ControlSet::centered_box(n, detail::box_or(p, 2.0));
    ProblemDefinition prob(SpectralBasis::dirichlet_laplacian(n, p.kappa), std::move(c), U);
    return Preset{"nonlinear_sine", std::move(prob), preset_initial_state(p), std::nullopt,
                  2, p.feedback_gain};
}

inline Preset make_control_diffusion(const PresetParams& p = {}) {
    detail::check_params(p);
    const int n = p.n_modes;
    const double sigma0 = p.sigma0, sigma1 = p.sigma1;
    const double l_drift = p.l_drift, b_gain = p.b_gain;
    const double r = p.r_control, q = p.q_weight, g = p.g_weight;

    CoefficientBundle c;
    c.b = [l_drift, b_gain](const SpectralVector& x, const ControlPoint& nu) -> SpectralVector {
        return (l_drift * x.array() + b_gain * nu.array()).matrix();
    };
    c.sigma = [sigma0, sigma1, n](const SpectralVector&, const ControlPoint& nu) -> HSMatrix {
        HSMatrix s = sigma0 * HSMatrix::Identity(n, n);
        s.diagonal() += (sigma1 * nu.array()).matrix();
        return s;
    };
    c.ell = [q, r](const SpectralVector& x, const ControlPoint& nu) {
        return 0.5 * q * x.squaredNorm() + 0.5 * r * nu.squaredNorm();
    };
    c.phi = [g](const SpectralVector& x) { return 0.5 * g * x.squaredNorm(); };

    c.b_x = [l_drift](const SpectralVector&, const ControlPoint&,
                      const SpectralVector& h) -> SpectralVector {
        return l_drift * h;
    };
    c.b_nu = [b_gain](const SpectralVector&, const ControlPoint&,
                      const ControlPoint& h) -> SpectralVector {
        return b_gain * h;
    };
    c.sigma_x = [n](const SpectralVector&, const ControlPoint&, const SpectralVector&) {
        return HSMatrix::Zero(n, n);
    };
    c.sigma_nu = [sigma1, n](const SpectralVector&, const ControlPoint&,
                             const ControlPoint& h) -> HSMatrix {
        HSMatrix s = HSMatrix::Zero(n, n);
        s.diagonal() = (sigma1 * h.array()).matrix();
        return s;
    };
    c.ell_x = [q](const SpectralVector& x, const ControlPoint&, const SpectralVector& h) {
        return q * x.dot(h);
    };
    c.ell_nu = [r](const SpectralVector&, const ControlPoint& nu, const ControlPoint& h) {
        return r * nu.dot(h);
    };
    c.phi_grad = [g](const SpectralVector& x) -> SpectralVector { return g * x; };

    const ControlSet U = ControlSet::centered_box(n, detail::box_or(p, 1.0));
    ProblemDefinition prob(SpectralBasis::dirichlet_laplacian(n, p.kappa), std::move(c), U);
    return Preset{"control_diffusion", std::move(prob), preset_initial_state(p),
                  std::nullopt, 1, p.feedback_gain};
}

inline Preset make_preset(const std::string& name, const PresetParams& p = {}) {
    if (name == "lq_diagonal") return make_lq_diagonal(p);
    if (name == "nonlinear_sine") return make_nonlinear_sine(p);
    if (name == "control_diffusion") return make_control_diffusion(p);
    throw std::invalid_argument("unknown preset '" + name +
                                "' (expected lq_diagonal, nonlinear_sine or control_diffusion)");
}

/// Default candidate for a preset on a grid: the Riccati feedback for the
/// LQ problem, otherwise the proportional feedback nu = proj_U(-gain x).
inline ControlProcess preset_candidate(const Preset& preset, const TimeGrid& grid) {
    if (preset.lq)
        return lq_riccati_feedback(*preset.lq, preset.problem.control_set, grid);
    const double gain = preset.feedback_gain;
    return ControlProcess::feedback(
        grid, preset.problem.control_set,
        [gain](double, const SpectralVector& x) -> ControlPoint { return -gain * x; });
}

} // namespace seeopt

// problem.hpp — coefficients, cost, Hamiltonian and its gradients.
//
// The Hamiltonian is
//   H(x, nu, y, z) = l(x, nu) + <b(x, nu), y> + <sigma(x, nu), z>_2
// and its gradients are assembled from user-supplied directional-derivative
// evaluators by Riesz representation: coordinate k of grad_x H pairs the
// basis perturbation e_k through each derivative map.

#pragma once

#include "seeopt/control.hpp"
#include "seeopt/rng.hpp"
#include "seeopt/spectral.hpp"
#include "seeopt/types.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seeopt {

/// Coefficient maps of the controlled equation and their derivatives.
/// Derivative entries are directional: f_x(x, nu, h) is the derivative of f
/// at (x, nu) in the state direction h (and f_nu in a control direction).
/// All evaluators must be reentrant.
struct CoefficientBundle {
    std::function<SpectralVector(const SpectralVector&, const ControlPoint&)> b;
    std::function<HSMatrix(const SpectralVector&, const ControlPoint&)> sigma;
    std::function<double(const SpectralVector&, const ControlPoint&)> ell;
    std::function<double(const SpectralVector&)> phi;

    std::function<SpectralVector(const SpectralVector&, const ControlPoint&,
                                 const SpectralVector&)> b_x;
    std::function<SpectralVector(const SpectralVector&, const ControlPoint&,
                                 const ControlPoint&)> b_nu;
    std::function<HSMatrix(const SpectralVector&, const ControlPoint&,
                           const SpectralVector&)> sigma_x;
    std::function<HSMatrix(const SpectralVector&, const ControlPoint&,
                           const ControlPoint&)> sigma_nu;
    std::function<double(const SpectralVector&, const ControlPoint&,
                         const SpectralVector&)> ell_x;
    std::function<double(const SpectralVector&, const ControlPoint&,
                         const ControlPoint&)> ell_nu;
    std::function<SpectralVector(const SpectralVector&)> phi_grad;

    bool complete() const {
        return b && sigma && ell && phi && b_x && b_nu && sigma_x && sigma_nu &&
               ell_x && ell_nu && phi_grad;
    }
};

/// Problem bundle: generator spectrum, coefficients, control constraint set.
struct ProblemDefinition {
    SpectralBasis basis;
    CoefficientBundle coeffs;
    ControlSet control_set;

    ProblemDefinition(SpectralBasis basis_, CoefficientBundle coeffs_,
                      ControlSet control_set_)
        : basis(std::move(basis_)), coeffs(std::move(coeffs_)),
          control_set(std::move(control_set_)) {
        if (!coeffs.complete())
            throw std::invalid_argument(
                "ProblemDefinition: coefficient bundle is missing evaluators "
                "(b, sigma, ell, phi and all derivative maps are required)");
    }

    int n_modes() const { return basis.n_modes(); }
    int control_dim() const { return control_set.dim(); }
};

inline void check_problem_dims(const ProblemDefinition& p, const SpectralVector& x,
                               const ControlPoint& nu) {
    if (x.size() != p.n_modes())
        throw std::invalid_argument("state dimension does not match basis");
    if (nu.size() != p.control_dim())
        throw std::invalid_argument("control dimension does not match control set");
}

/// H(x, nu, y, z) = l + <b, y> + <sigma, z>_2.
inline double hamiltonian_eval(const CoefficientBundle& coeffs, const SpectralVector& x,
                               const ControlPoint& nu, const SpectralVector& y,
                               const HSMatrix& z) {
    const SpectralVector bv = coeffs.b(x, nu);
    if (bv.size() != y.size())
        throw std::invalid_argument("hamiltonian_eval: drift/adjoint dimension mismatch");
    const HSMatrix sv = coeffs.sigma(x, nu);
    return coeffs.ell(x, nu) + bv.dot(y) + hs_inner(sv, z);
}

/// grad_x H: Riesz representative of h -> l_x h + <b_x h, y> + <sigma_x h, z>_2.
/// Costs n_modes evaluations of each derivative map.
inline SpectralVector hamiltonian_grad_x(const CoefficientBundle& coeffs,
                                         const SpectralVector& x, const ControlPoint& nu,
                                         const SpectralVector& y, const HSMatrix& z) {
    const int n = static_cast<int>(x.size());
    SpectralVector g(n);
    SpectralVector e = SpectralVector::Zero(n);
    for (int k = 0; k < n; ++k) {
        e[k] = 1.0;
        g[k] = coeffs.ell_x(x, nu, e) + coeffs.b_x(x, nu, e).dot(y) +
               hs_inner(coeffs.sigma_x(x, nu, e), z);
        e[k] = 0.0;
    }
    return g;
}

/// grad_nu H in R^m, assembled the same way over control directions.
inline ControlPoint hamiltonian_grad_nu(const CoefficientBundle& coeffs,
                                        const SpectralVector& x, const ControlPoint& nu,
                                        const SpectralVector& y, const HSMatrix& z) {
    const int m = static_cast<int>(nu.size());
    ControlPoint g(m);
    ControlPoint e = ControlPoint::Zero(m);
    for (int j = 0; j < m; ++j) {
        e[j] = 1.0;
        g[j] = coeffs.ell_nu(x, nu, e) + coeffs.b_nu(x, nu, e).dot(y) +
               hs_inner(coeffs.sigma_nu(x, nu, e), z);
        e[j] = 0.0;
    }
    return g;
}

/// Settings for the pointwise Hamiltonian minimization over U.
struct MinimizeConfig {
    int max_iters = 300;
    double tol = 1e-12;        // squared step / projected-gradient scale
    int n_restarts = 3;        // random restarts in addition to center + hint
    std::uint64_t seed = 0x4D494E;
    double init_step = 1.0;
};

/// Minimizes nu -> H(x, nu, y, z) over U by projected gradient descent with
/// Armijo backtracking and multi-start.  Returns (argmin, min value).
inline std::pair<ControlPoint, double>
minimize_hamiltonian(const CoefficientBundle& coeffs, const SpectralVector& x,
                     const SpectralVector& y, const HSMatrix& z, const ControlSet& U,
                     const MinimizeConfig& cfg = {},
                     const ControlPoint* hint = nullptr) {
    const auto value = [&](const ControlPoint& nu) {
        const double h = hamiltonian_eval(coeffs, x, nu, y, z);
        if (!std::isfinite(h)) {
            std::string s;
            for (Eigen::Index i = 0; i < nu.size(); ++i)
                s += (i ? ", " : "") + std::to_string(nu[i]);
            throw std::runtime_error("minimize_hamiltonian: non-finite H at nu = [" + s + "]");
        }
        return h;
    };

    std::vector<ControlPoint> starts;
    starts.push_back(U.center());
    if (hint) starts.push_back(U.project(*hint));
    rng::StreamRng gen(rng::derive_key(cfg.seed, rng::Stream::minimizer));
    for (int r = 0; r < cfg.n_restarts; ++r) starts.push_back(U.sample(gen));

    ControlPoint best;
    double best_val = std::numeric_limits<double>::infinity();

    for (const auto& start : starts) {
        ControlPoint nu = start;
        double f = value(nu);
        double step = cfg.init_step;
        for (int it = 0; it < cfg.max_iters; ++it) {
            const ControlPoint g = hamiltonian_grad_nu(coeffs, x, nu, y, z);
            // Armijo backtracking on the projected step
            bool moved = false;
            for (int bt = 0; bt < 60; ++bt) {
                const ControlPoint cand = U.project(nu - step * g);
                const ControlPoint d = cand - nu;
                const double dn2 = d.squaredNorm();
                if (dn2 <= cfg.tol * cfg.tol) break;
                const double fc = value(cand);
                if (fc <= f + 1e-4 * g.dot(d)) {
                    nu = cand;
                    f = fc;
                    moved = true;
                    step *= 1.3;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        if (f < best_val) {
            best_val = f;
            best = nu;
        }
    }
    return {best, best_val};
}

/// Report of the derivative audit: max relative deviation of each supplied
/// derivative map from central finite differences, plus a sampled linearity
/// check of the directional evaluators.
struct FiniteDiffReport {
    std::map<std::string, double> max_rel_error;     // per derivative
    std::map<std::string, double> max_linearity_err; // per derivative
    int n_samples = 0;
    double tol = 0.0;

    bool pass() const {
        for (const auto& [k, v] : max_rel_error)
            if (!(v <= tol)) return false;
        return true;
    }
    double worst() const {
        double w = 0.0;
        for (const auto& [k, v] : max_rel_error) w = std::max(w, v);
        return w;
    }
};

namespace detail {

inline double rel_err(double a, double bref) {
    const double denom = std::max({std::abs(a), std::abs(bref), 1e-8});
    return std::abs(a - bref) / denom;
}

inline double rel_err_vec(const Eigen::MatrixXd& a, const Eigen::MatrixXd& bref) {
    const double denom = std::max({a.norm(), bref.norm(), 1e-8});
    return (a - bref).norm() / denom;
}

} // namespace detail

/// Audits every supplied derivative evaluator against central finite
/// differences of its base map at random points and directions around
/// (radius-scaled) standard normal samples.  Failures are report entries,
/// never exceptions.
inline FiniteDiffReport finite_diff_check(const ProblemDefinition& problem, int n_samples,
                                          double tol, double radius = 1.0,
                                          std::uint64_t seed = 0xFD) {
    if (!(tol > 0.0))
        throw std::invalid_argument("finite_diff_check: tol must be > 0");
    const int n = problem.n_modes();
    const int m = problem.control_dim();
    const auto& c = problem.coeffs;
    rng::StreamRng gen(rng::derive_key(seed, rng::Stream::finite_diff));

    FiniteDiffReport rep;
    rep.n_samples = n_samples;
    rep.tol = tol;
    auto& err = rep.max_rel_error;
    auto& lin = rep.max_linearity_err;
    for (const char* k :
         {"b_x", "b_nu", "sigma_x", "sigma_nu", "ell_x", "ell_nu", "phi_grad"}) {
        err[k] = 0.0;
        lin[k] = 0.0;
    }

    const double fd_h = std::cbrt(std::numeric_limits<double>::epsilon());

    for (int s = 0; s < n_samples; ++s) {
        SpectralVector x(n);
        for (int i = 0; i < n; ++i) x[i] = radius * gen.normal();
        ControlPoint nu = problem.control_set.project([&] {
            ControlPoint v(m);
            for (int i = 0; i < m; ++i) v[i] = radius * gen.normal();
            return v;
        }());

        SpectralVector hx(n);
        for (int i = 0; i < n; ++i) hx[i] = gen.normal();
        hx.normalize();
        ControlPoint hn(m);
        for (int i = 0; i < m; ++i) hn[i] = gen.normal();
        hn.normalize();

        const double hs = fd_h * (1.0 + x.norm());
        const double hc = fd_h * (1.0 + nu.norm());

        // central differences in the state direction
        const SpectralVector xp = x + hs * hx, xm = x - hs * hx;
        err["b_x"] = std::max(err["b_x"], detail::rel_err_vec(
            c.b_x(x, nu, hx), (c.b(xp, nu) - c.b(xm, nu)) / (2 * hs)));
        err["sigma_x"] = std::max(err["sigma_x"], detail::rel_err_vec(
            c.sigma_x(x, nu, hx), (c.sigma(xp, nu) - c.sigma(xm, nu)) / (2 * hs)));
        err["ell_x"] = std::max(err["ell_x"], detail::rel_err(
            c.ell_x(x, nu, hx), (c.ell(xp, nu) - c.ell(xm, nu)) / (2 * hs)));
        err["phi_grad"] = std::max(err["phi_grad"], detail::rel_err(
            c.phi_grad(x).dot(hx), (c.phi(xp) - c.phi(xm)) / (2 * hs)));

        // central differences in the control direction
        const ControlPoint np_ = nu + hc * hn, nm_ = nu - hc * hn;
        err["b_nu"] = std::max(err["b_nu"], detail::rel_err_vec(
            c.b_nu(x, nu, hn), (c.b(x, np_) - c.b(x, nm_)) / (2 * hc)));
        err["sigma_nu"] = std::max(err["sigma_nu"], detail::rel_err_vec(
            c.sigma_nu(x, nu, hn), (c.sigma(x, np_) - c.sigma(x, nm_)) / (2 * hc)));
        err["ell_nu"] = std::max(err["ell_nu"], detail::rel_err(
            c.ell_nu(x, nu, hn), (c.ell(x, np_) - c.ell(x, nm_)) / (2 * hc)));

        // linearity of the directional evaluators in the direction argument
        const double alpha = 0.5 + gen.uniform();
        SpectralVector hx2(n);
        for (int i = 0; i < n; ++i) hx2[i] = gen.normal();
        ControlPoint hn2(m);
        for (int i = 0; i < m; ++i) hn2[i] = gen.normal();

        lin["b_x"] = std::max(lin["b_x"], detail::rel_err_vec(
            c.b_x(x, nu, alpha * hx + hx2),
            alpha * c.b_x(x, nu, hx) + c.b_x(x, nu, hx2)));
        lin["sigma_x"] = std::max(lin["sigma_x"], detail::rel_err_vec(
            c.sigma_x(x, nu, alpha * hx + hx2),
            alpha * c.sigma_x(x, nu, hx) + c.sigma_x(x, nu, hx2)));
        lin["ell_x"] = std::max(lin["ell_x"], detail::rel_err(
            c.ell_x(x, nu, alpha * hx + hx2),
            alpha * c.ell_x(x, nu, hx) + c.ell_x(x, nu, hx2)));
        lin["b_nu"] = std::max(lin["b_nu"], detail::rel_err_vec(
            c.b_nu(x, nu, alpha * hn + hn2),
            alpha * c.b_nu(x, nu, hn) + c.b_nu(x, nu, hn2)));
        lin["sigma_nu"] = std::max(lin["sigma_nu"], detail::rel_err_vec(
            c.sigma_nu(x, nu, alpha * hn + hn2),
            alpha * c.sigma_nu(x, nu, hn) + c.sigma_nu(x, nu, hn2)));
        lin["ell_nu"] = std::max(lin["ell_nu"], detail::rel_err(
            c.ell_nu(x, nu, alpha * hn + hn2),
            alpha * c.ell_nu(x, nu, hn) + c.ell_nu(x, nu, hn2)));
    }
    return rep;
}

} // namespace seeopt

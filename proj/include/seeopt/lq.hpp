// lq.hpp — diagonal linear-quadratic benchmark: problem builder, per-mode
// Riccati recursion, feedback candidate, and the closed-form adjoint pair.
//
// Dynamics  dX = (A X + L X + B nu) dt + sigma0 dW  with A, L, B diagonal,
// cost      J  = E[ int 1/2 (<Q x, x> + r |nu|^2) dt + 1/2 <G x, x> ].
// The adjoint is Y(t) = P(t) X(t), Z(t) = P(t) sigma0 in feedback form,
// where each mode solves
//   P_k' = -2 (lambda_k + L_k) P_k + P_k^2 B_k^2 / r - Q_k,   P_k(T) = G_k.

#pragma once

#include "seeopt/backward_types.hpp"
#include "seeopt/forward.hpp"
#include "seeopt/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace seeopt {

/// Diagonal LQ problem data (control dimension equals mode count).
struct LqSpec {
    SpectralBasis basis;
    Eigen::VectorXd L;  // extra diagonal drift
    Eigen::VectorXd B;  // diagonal control gain
    Eigen::VectorXd Q;  // running state weight (>= 0)
    Eigen::VectorXd G;  // terminal state weight (>= 0)
    double r = 1.0;     // control weight (> 0)
    HSMatrix sigma0;    // constant diffusion

    void validate() const {
        const int n = basis.n_modes();
        if (L.size() != n || B.size() != n || Q.size() != n || G.size() != n)
            throw std::invalid_argument("LqSpec: diagonal coefficient size mismatch");
        if (sigma0.rows() != n || sigma0.cols() != n)
            throw std::invalid_argument("LqSpec: sigma0 must be n_modes x n_modes");
        if (!(r > 0.0))
            throw std::invalid_argument("LqSpec: r must be > 0");
        if ((Q.array() < 0.0).any() || (G.array() < 0.0).any())
            throw std::invalid_argument("LqSpec: Q, G must be nonnegative");
    }
};

/// Per-mode Riccati solution sampled at the grid nodes.
struct RiccatiSolution {
    TimeGrid grid;
    Eigen::MatrixXd P; // (n_nodes x n_modes), row i = P(t_i)

    Eigen::VectorXd at(int node) const { return P.row(node).transpose(); }
};

/// Solves the per-mode Riccati terminal-value problems backward with
/// classical RK4 on each grid cell split into `substeps` pieces.
inline RiccatiSolution solve_riccati(const LqSpec& lq, const TimeGrid& grid,
                                     int substeps = 10) {
    lq.validate();
    check_grid(grid);
    if (substeps < 1) throw std::invalid_argument("solve_riccati: substeps >= 1");

    const int n = lq.basis.n_modes();
    const int n_nodes = static_cast<int>(grid.size());
    RiccatiSolution sol;
    sol.grid = grid;
    sol.P.resize(n_nodes, n);

    for (int k = 0; k < n; ++k) {
        const double a = lq.basis.eigenvalues[k] + lq.L[k];
        const double beta = lq.B[k] * lq.B[k] / lq.r;
        const double q = lq.Q[k];
        const auto f = [=](double p) { return -2.0 * a * p + beta * p * p - q; };

        double p = lq.G[k];
        sol.P(n_nodes - 1, k) = p;
        for (int i = n_nodes - 1; i > 0; --i) {
            const double h = -(grid[i] - grid[i - 1]) / substeps; // backward
            for (int s = 0; s < substeps; ++s) {
                const double k1 = f(p);
                const double k2 = f(p + 0.5 * h * k1);
                const double k3 = f(p + 0.5 * h * k2);
                const double k4 = f(p + h * k3);
                p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            if (!std::isfinite(p))
                throw std::runtime_error("solve_riccati: blow-up in mode " + std::to_string(k));
            sol.P(i - 1, k) = p;
        }
    }
    return sol;
}

/// Coefficient bundle for the LQ data (all derivatives analytic).
inline CoefficientBundle lq_coefficients(const LqSpec& lq) {
    lq.validate();
    CoefficientBundle c;
    const Eigen::VectorXd L = lq.L, B = lq.B, Q = lq.Q, G = lq.G;
    const HSMatrix sigma0 = lq.sigma0;
    const double r = lq.r;
    const int n = lq.basis.n_modes();

    c.b = [L, B](const SpectralVector& x, const ControlPoint& nu) -> SpectralVector {
        return (L.array() * x.array() + B.array() * nu.array()).matrix();
    };
    c.sigma = [sigma0](const SpectralVector&, const ControlPoint&) { return sigma0; };
    c.ell = [Q, r](const SpectralVector& x, const ControlPoint& nu) {
        return 0.5 * (Q.array() * x.array().square()).sum() + 0.5 * r * nu.squaredNorm();
    };
    c.phi = [G](const SpectralVector& x) {
        return 0.5 * (G.array() * x.array().square()).sum();
    };

    c.b_x = [L](const SpectralVector&, const ControlPoint&, const SpectralVector& h)
        -> SpectralVector { return (L.array() * h.array()).matrix(); };
    c.b_nu = [B](const SpectralVector&, const ControlPoint&, const ControlPoint& h)
        -> SpectralVector { return (B.array() * h.array()).matrix(); };
    c.sigma_x = [n](const SpectralVector&, const ControlPoint&, const SpectralVector&) {
        return HSMatrix::Zero(n, n);
    };
    c.sigma_nu = [n](const SpectralVector&, const ControlPoint&, const ControlPoint&) {
        return HSMatrix::Zero(n, n);
    };
    c.ell_x = [Q](const SpectralVector& x, const ControlPoint&, const SpectralVector& h) {
        return (Q.array() * x.array() * h.array()).sum();
    };
    c.ell_nu = [r](const SpectralVector&, const ControlPoint& nu, const ControlPoint& h) {
        return r * nu.dot(h);
    };
    c.phi_grad = [G](const SpectralVector& x) -> SpectralVector {
        return (G.array() * x.array()).matrix();
    };
    return c;
}

inline ProblemDefinition lq_problem(const LqSpec& lq, const ControlSet& U) {
    if (U.dim() != lq.basis.n_modes())
        throw std::invalid_argument("lq_problem: control dimension must equal n_modes");
    return ProblemDefinition(lq.basis, lq_coefficients(lq), U);
}

/// Feedback candidate nu*(t_i, x) = proj_U( -(1/r) B P(t_i) x ).
inline ControlProcess lq_riccati_feedback(const LqSpec& lq, const ControlSet& U,
                                          const TimeGrid& grid, int substeps = 10) {
    const RiccatiSolution ric = solve_riccati(lq, grid, substeps);
    const Eigen::VectorXd B = lq.B;
    const double r = lq.r;
    const TimeGrid g = grid;
    const Eigen::MatrixXd P = ric.P;
    FeedbackRule rule = [B, r, g, P](double t, const SpectralVector& x) -> ControlPoint {
        // grid-node lookup; simulation only queries node times
        const double dt = g[1] - g[0];
        int i = static_cast<int>(std::lround(t / dt));
        if (i < 0) i = 0;
        if (i >= static_cast<int>(g.size())) i = static_cast<int>(g.size()) - 1;
        return (-(B.array() * P.row(i).transpose().array() * x.array()) / r).matrix();
    };
    return ControlProcess::feedback(grid, U, std::move(rule));
}

/// Closed-form adjoint pair along a forward ensemble simulated under the
/// Riccati feedback: Y_i = P(t_i) X_i, Z_i = P(t_i) sigma0.
inline AdjointPairEnsemble solve_bsee_riccati_lq(const LqSpec& lq,
                                                 const ForwardPathEnsemble& forward,
                                                 int substeps = 10) {
    lq.validate();
    if (forward.n_modes() != lq.basis.n_modes())
        throw std::invalid_argument("solve_bsee_riccati_lq: mode count mismatch");
    const RiccatiSolution ric = solve_riccati(lq, forward.grid, substeps);

    const int n_paths = forward.n_paths();
    const int n_steps = forward.n_steps();
    const int n = lq.basis.n_modes();

    AdjointPairEnsemble adj;
    adj.grid = forward.grid;
    adj.Y.resize(static_cast<std::size_t>(n_paths));
    adj.Z.resize(static_cast<std::size_t>(n_paths));
    std::vector<HSMatrix> z_nodes(static_cast<std::size_t>(n_steps));
    for (int i = 0; i < n_steps; ++i) {
        const Eigen::VectorXd pi = ric.P.row(i).transpose();
        z_nodes[static_cast<std::size_t>(i)] = pi.asDiagonal() * lq.sigma0;
    }
    for (int p = 0; p < n_paths; ++p) {
        Eigen::MatrixXd y(n_steps + 1, n);
        for (int i = 0; i <= n_steps; ++i) {
            const Eigen::VectorXd pi = ric.P.row(i).transpose();
            y.row(i) = (pi.array() * forward.state(p, i).array()).matrix().transpose();
        }
        adj.Y[static_cast<std::size_t>(p)] = std::move(y);
        adj.Z[static_cast<std::size_t>(p)] = z_nodes;
    }
    return adj;
}

} // namespace seeopt

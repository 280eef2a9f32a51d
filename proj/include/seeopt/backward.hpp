// backward.hpp — least-squares Monte Carlo solution of the adjoint backward
// equation along a forward ensemble.
//
// One backward sweep over the grid.  At each step the conditional
// expectations in the discretized mild form are replaced by regressions on
// polynomial features of the current state:
//
//   Z_i : regress  S*(dt) Y_{i+1} (dW_i)^T / dt          on features(X_i)
//   Y_i : regress  S*(dt) [ Y_{i+1} + dt grad_x H(X_i, nu_i, Yhat_i, Zhat_i) ]
//                                                        on features(X_i)
//
// where (Yhat, Zhat) are the regressed proxies of the same step (predict
// with the Y_{i+1}-based conditional mean, correct once).  The semigroup
// factor is exact per mode, mirroring the S*(s - t) kernel of the mild form.

#pragma once

#include "seeopt/backward_types.hpp"
#include "seeopt/forward.hpp"
#include "seeopt/problem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seeopt {

/// Number of polynomial features of degree <= d over n coordinates.
inline int regression_feature_count(int n_modes, int degree) {
    if (degree == 1) return 1 + n_modes;
    if (degree == 2) return 1 + n_modes + n_modes * (n_modes + 1) / 2;
    throw std::invalid_argument("regression_feature_count: degree must be 1 or 2");
}

/// Feature row [1, x_1..x_n, {x_a x_b : a <= b}] for one state.
template <typename RowXpr>
inline void regression_features_into(const SpectralVector& x, int degree, RowXpr row) {
    const int n = static_cast<int>(x.size());
    row[0] = 1.0;
    for (int k = 0; k < n; ++k) row[1 + k] = x[k];
    if (degree >= 2) {
        int c = 1 + n;
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) row[c++] = x[a] * x[b];
    }
}

/// Feature matrix for one grid step over all paths.
inline Eigen::MatrixXd regression_features(const ForwardPathEnsemble& forward, int step,
                                           int degree) {
    const int n_paths = forward.n_paths();
    const int k = regression_feature_count(forward.n_modes(), degree);
    Eigen::MatrixXd phi(n_paths, k);
    for (int p = 0; p < n_paths; ++p)
        regression_features_into(forward.state(p, step), degree, phi.row(p));
    return phi;
}

/// Ridge-regularized normal-equation solver reused for every target column
/// of one step.  Constant feature columns carry no conditioning information
/// (at t = 0 every state equals x0, so the estimator degenerates to the
/// plain mean, which is the right conditional expectation there); they are
/// dropped and the remaining columns are standardized before the
/// condition-number guard.  Reduction order is fixed (single Eigen GEMM),
/// so results do not depend on scheduling.
class StepRegressor {
public:
    StepRegressor(const Eigen::MatrixXd& phi, const RegressionConfig& cfg) {
        const int n = static_cast<int>(phi.rows());
        const int k = static_cast<int>(phi.cols());

        std::vector<int> active;
        active.push_back(0); // intercept
        std::vector<double> mean(static_cast<std::size_t>(k), 0.0);
        std::vector<double> scale(static_cast<std::size_t>(k), 1.0);
        for (int j = 1; j < k; ++j) {
            const double mu = phi.col(j).mean();
            const double sd =
                std::sqrt((phi.col(j).array() - mu).square().sum() / n);
            mean[static_cast<std::size_t>(j)] = mu;
            if (sd > 1e-12 * (1.0 + std::abs(mu))) {
                scale[static_cast<std::size_t>(j)] = sd;
                active.push_back(j);
            }
        }

        z_.resize(n, static_cast<Eigen::Index>(active.size()));
        z_.col(0).setOnes();
        for (std::size_t c = 1; c < active.size(); ++c) {
            const int j = active[c];
            z_.col(static_cast<Eigen::Index>(c)) =
                (phi.col(j).array() - mean[static_cast<std::size_t>(j)]) /
                scale[static_cast<std::size_t>(j)];
        }

        Eigen::MatrixXd gram = z_.transpose() * z_;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > cfg.cond_threshold)
            throw std::runtime_error(
                "regression is rank-deficient (condition number " +
                std::to_string(lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()) +
                "); use more paths or a lower feature degree");

        const double eff_ridge =
            cfg.ridge * gram.trace() / static_cast<double>(active.size());
        gram.diagonal().array() += eff_ridge;
        ldlt_.compute(gram);
        effective_ridge_ = eff_ridge;
    }

    /// Fitted values Z (Z^T Z + ridge I)^-1 Z^T targets on the reduced
    /// standardized design.
    Eigen::MatrixXd fit(const Eigen::MatrixXd& targets) const {
        return z_ * ldlt_.solve(z_.transpose() * targets);
    }

    double effective_ridge() const { return effective_ridge_; }

private:
    Eigen::MatrixXd z_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    double effective_ridge_ = 0.0;
};

/// Terminal condition Y(T) = grad phi(X(T)) per path.
inline std::vector<SpectralVector> terminal_condition(const ProblemDefinition& problem,
                                                      const ForwardPathEnsemble& forward) {
    const int n_paths = forward.n_paths();
    const int n_steps = forward.n_steps();
    std::vector<SpectralVector> out(static_cast<std::size_t>(n_paths));
    for (int p = 0; p < n_paths; ++p)
        out[static_cast<std::size_t>(p)] = problem.coeffs.phi_grad(forward.state(p, n_steps));
    return out;
}

/// One backward regression step.  Inputs are only the current-step state
/// features, the next-step Y values, and the increments over this cell, so
/// the estimator is adapted by construction.  Returns fitted (Y_i, Z_i).
inline std::pair<Eigen::MatrixXd, std::vector<HSMatrix>>
bsee_regression_step(const ProblemDefinition& problem, const Eigen::MatrixXd& phi,
                     const Eigen::MatrixXd& y_next, const Eigen::MatrixXd& dw,
                     const Eigen::MatrixXd& states, const Eigen::MatrixXd& controls,
                     double dt, const RegressionConfig& cfg) {
    const int n_paths = static_cast<int>(phi.rows());
    const int n = problem.n_modes();

    const StepRegressor reg(phi, cfg);

    // S*(dt) factors, exact per mode
    const Eigen::ArrayXd decay = (problem.basis.eigenvalues.array() * dt).exp();

    // propagated next-step values S*(dt) Y_{i+1}
    Eigen::MatrixXd propagated(n_paths, n);
    for (int p = 0; p < n_paths; ++p)
        propagated.row(p) = (y_next.row(p).transpose().array() * decay).matrix().transpose();

    // Z: conditional cross-moment  E[ S*(dt) Y_{i+1} dW^T ] / dt
    Eigen::MatrixXd z_targets(n_paths, n * n);
    for (int p = 0; p < n_paths; ++p)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                z_targets(p, a * n + b) = propagated(p, a) * dw(p, b) / dt;
    const Eigen::MatrixXd z_fit = reg.fit(z_targets);

    // predictor for Y_i: conditional mean of the propagated values
    const Eigen::MatrixXd y_pred = reg.fit(propagated);

    // corrector: driver at the left endpoint with the regressed proxies
    Eigen::MatrixXd y_targets(n_paths, n);
    for (int p = 0; p < n_paths; ++p) {
        const SpectralVector xp = states.row(p).transpose();
        const ControlPoint nup = controls.row(p).transpose();
        const SpectralVector yp = y_pred.row(p).transpose();
        HSMatrix zp(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) zp(a, b) = z_fit(p, a * n + b);
        const SpectralVector driver = hamiltonian_grad_x(problem.coeffs, xp, nup, yp, zp);
        y_targets.row(p) =
            ((y_next.row(p).transpose() + dt * driver).array() * decay).matrix().transpose();
    }
    const Eigen::MatrixXd y_fit = reg.fit(y_targets);

    if (!all_finite(y_fit) || !all_finite(z_fit))
        throw std::runtime_error("bsee_regression_step: non-finite regression output");

    std::vector<HSMatrix> z_mats(static_cast<std::size_t>(n_paths));
    for (int p = 0; p < n_paths; ++p) {
        HSMatrix zp(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) zp(a, b) = z_fit(p, a * n + b);
        z_mats[static_cast<std::size_t>(p)] = std::move(zp);
    }
    return {y_fit, std::move(z_mats)};
}

/// Backward sweep over the whole grid.  Requires
/// n_paths >= 10 x feature count (rank guard).
inline AdjointPairEnsemble solve_bsee_regression(const ProblemDefinition& problem,
                                                 const ForwardPathEnsemble& forward,
                                                 const ControlProcess& control,
                                                 const RegressionConfig& cfg = {}) {
    cfg.validate();
    if (!same_grid(forward.grid, control.grid()))
        throw std::invalid_argument("solve_bsee_regression: ensemble/control grid mismatch");
    const int n_paths = forward.n_paths();
    const int n_steps = forward.n_steps();
    const int n = problem.n_modes();
    const int k = regression_feature_count(n, cfg.degree);
    if (n_paths < 10 * k)
        throw std::invalid_argument(
            "solve_bsee_regression: need at least 10 x " + std::to_string(k) +
            " paths for degree " + std::to_string(cfg.degree) + " features");

    AdjointPairEnsemble adj;
    adj.grid = forward.grid;
    adj.Y.assign(static_cast<std::size_t>(n_paths),
                 Eigen::MatrixXd::Zero(n_steps + 1, n));
    adj.Z.assign(static_cast<std::size_t>(n_paths),
                 std::vector<HSMatrix>(static_cast<std::size_t>(n_steps)));

    // terminal condition, exact per path
    const auto yT = terminal_condition(problem, forward);
    Eigen::MatrixXd y_next(n_paths, n);
    for (int p = 0; p < n_paths; ++p) {
        y_next.row(p) = yT[static_cast<std::size_t>(p)].transpose();
        adj.Y[static_cast<std::size_t>(p)].row(n_steps) = y_next.row(p);
    }

    Eigen::MatrixXd states(n_paths, n);
    Eigen::MatrixXd controls(n_paths, problem.control_dim());
    Eigen::MatrixXd dw(n_paths, n);

    for (int i = n_steps - 1; i >= 0; --i) {
        const double dt = forward.grid[i + 1] - forward.grid[i];
        for (int p = 0; p < n_paths; ++p) {
            states.row(p) = forward.states[static_cast<std::size_t>(p)].row(i);
            controls.row(p) = forward.realized_control[static_cast<std::size_t>(p)].row(i);
            dw.row(p) = forward.increments.path(p).row(i);
        }
        const Eigen::MatrixXd phi = regression_features(forward, i, cfg.degree);

        std::pair<Eigen::MatrixXd, std::vector<HSMatrix>> step;
        try {
            step = bsee_regression_step(problem, phi, y_next, dw, states, controls, dt, cfg);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("solve_bsee_regression: step " + std::to_string(i) +
                                     ": " + e.what());
        }

        for (int p = 0; p < n_paths; ++p) {
            adj.Y[static_cast<std::size_t>(p)].row(i) = step.first.row(p);
            adj.Z[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] =
                std::move(step.second[static_cast<std::size_t>(p)]);
        }
        y_next = step.first;
    }
    return adj;
}

} // namespace seeopt

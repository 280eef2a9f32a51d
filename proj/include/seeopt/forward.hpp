// forward.hpp — Monte Carlo simulation of the controlled equation in mild
// form, plus cost evaluation and shared-noise grid refinement.
//
// Default scheme is exponential Euler on the mild formulation:
//   X_{i+1} = S(dt) ( X_i + b(X_i, nu_i) dt + sigma(X_i, nu_i) dW_i )
// with drift, diffusion and control frozen at the left endpoint.  The
// semigroup factor on all three terms mirrors the S(t - s) kernel of the
// variation-of-constants integrals.

#pragma once

#include "seeopt/control.hpp"
#include "seeopt/problem.hpp"
#include "seeopt/spectral.hpp"
#include "seeopt/types.hpp"

#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seeopt {

enum class ForwardScheme { exponential_euler, semi_implicit_euler };

/// Simulated state paths on a time grid, together with the noise and the
/// realized control values that produced them.
struct ForwardPathEnsemble {
    TimeGrid grid;
    // states[p] is (n_steps+1) x n_modes; row i = X(t_i) on path p
    std::vector<Eigen::MatrixXd> states;
    WienerIncrements increments;
    // realized[p] is n_steps x m (feedback rules materialized per path;
    // stored-value controls copied through)
    std::vector<Eigen::MatrixXd> realized_control;

    int n_paths() const { return static_cast<int>(states.size()); }
    int n_steps() const { return static_cast<int>(grid.size()) - 1; }
    int n_modes() const {
        return states.empty() ? 0 : static_cast<int>(states.front().cols());
    }

    SpectralVector state(int path, int step) const {
        return states.at(static_cast<std::size_t>(path)).row(step).transpose();
    }
    ControlPoint control(int path, int step) const {
        return realized_control.at(static_cast<std::size_t>(path)).row(step).transpose();
    }
};

/// Simulates n_paths trajectories from x0 under the given control.  Noise is
/// drawn from counter-based streams keyed by `seed`, so equal arguments give
/// bit-identical ensembles for any worker count.
inline ForwardPathEnsemble simulate_forward(const ProblemDefinition& problem,
                                            const ControlProcess& control,
                                            const SpectralVector& x0,
                                            const WienerIncrements& increments,
                                            ForwardScheme scheme = ForwardScheme::exponential_euler) {
    const TimeGrid& grid = control.grid();
    check_grid(grid);
    const int n_steps = control.n_steps();
    const int n = problem.n_modes();
    const int m = problem.control_dim();
    const int n_paths = increments.n_paths();

    if (x0.size() != n)
        throw std::invalid_argument("simulate_forward: x0 size does not match basis");
    if (control.dim() != m)
        throw std::invalid_argument("simulate_forward: control dimension mismatch");
    if (increments.n_steps() != n_steps || increments.n_modes != n)
        throw std::invalid_argument("simulate_forward: increments do not match grid/basis");
    if (!control.is_feedback() && control.n_stored_paths() != 1 &&
        control.n_stored_paths() != n_paths)
        throw std::invalid_argument("simulate_forward: control path count mismatch");

    ForwardPathEnsemble ens;
    ens.grid = grid;
    ens.increments = increments;
    ens.states.resize(static_cast<std::size_t>(n_paths));
    ens.realized_control.resize(static_cast<std::size_t>(n_paths));

    // per-cell semigroup factors (grids may be non-uniform after refinement)
    Eigen::MatrixXd decay(n_steps, n);
    Eigen::MatrixXd semi(n_steps, n); // 1 / (1 - lambda dt), semi-implicit
    for (int i = 0; i < n_steps; ++i) {
        const double dt = grid[i + 1] - grid[i];
        decay.row(i) = (problem.basis.eigenvalues.array() * dt).exp().transpose();
        semi.row(i) =
            (1.0 / (1.0 - problem.basis.eigenvalues.array() * dt)).transpose();
    }

    std::string failure;
    std::mutex fail_mu;
    exec::parallel_for(n_paths, [&](std::int64_t p) {
        Eigen::MatrixXd xs(n_steps + 1, n);
        Eigen::MatrixXd cs(n_steps, m);
        xs.row(0) = x0.transpose();
        SpectralVector x = x0;
        for (int i = 0; i < n_steps; ++i) {
            const double dt = grid[i + 1] - grid[i];
            const ControlPoint nu = control.is_feedback()
                                        ? control.evaluate_feedback(grid[i], x)
                                        : control.value(static_cast<int>(p), i);
            cs.row(i) = nu.transpose();

            const SpectralVector drift = problem.coeffs.b(x, nu);
            const HSMatrix diff = problem.coeffs.sigma(x, nu);
            const SpectralVector noise =
                diff * increments.path(static_cast<int>(p)).row(i).transpose();
            SpectralVector pre = x + dt * drift + noise;
            if (scheme == ForwardScheme::exponential_euler)
                x = (decay.row(i).transpose().array() * pre.array()).matrix();
            else
                x = (semi.row(i).transpose().array() * pre.array()).matrix();

            if (!all_finite(x)) {
                std::lock_guard<std::mutex> lock(fail_mu);
                if (failure.empty())
                    failure = "simulate_forward: non-finite state at path " +
                              std::to_string(p) + ", step " + std::to_string(i + 1);
                return;
            }
            xs.row(i + 1) = x.transpose();
        }
        ens.states[static_cast<std::size_t>(p)] = std::move(xs);
        ens.realized_control[static_cast<std::size_t>(p)] = std::move(cs);
    });
    if (!failure.empty()) throw std::runtime_error(failure);
    return ens;
}

/// Convenience overload drawing fresh increments from `seed`.
inline ForwardPathEnsemble simulate_forward(const ProblemDefinition& problem,
                                            const ControlProcess& control,
                                            const SpectralVector& x0, int n_paths,
                                            std::uint64_t seed,
                                            ForwardScheme scheme = ForwardScheme::exponential_euler) {
    const TimeGrid& grid = control.grid();
    check_grid(grid);
    const int n_steps = control.n_steps();
    const double dt = grid[1] - grid[0];
    for (int i = 0; i < n_steps; ++i)
        if (std::abs((grid[i + 1] - grid[i]) - dt) > 1e-12 * std::max(1.0, dt))
            throw std::invalid_argument(
                "simulate_forward: seed-based sampling needs a uniform grid");
    const WienerIncrements inc =
        sample_wiener_increments(problem.basis, dt, n_steps, n_paths, seed);
    return simulate_forward(problem, control, x0, inc, scheme);
}

/// Splits every increment cell into `factor` sub-cells whose sums reproduce
/// the parent cell exactly (conditional Brownian bridge).  Fresh bridge
/// randomness is derived from the parent tensor's seed, so refinement is
/// deterministic.
inline WienerIncrements refine_same_noise(const WienerIncrements& inc, int factor) {
    if (factor < 2 || (factor & (factor - 1)) != 0)
        throw std::invalid_argument("refine_same_noise: factor must be a power of two >= 2");
    const int n_steps = inc.n_steps();
    const int n_modes = inc.n_modes;
    const int n_paths = inc.n_paths();
    if (n_steps == 0)
        throw std::invalid_argument("refine_same_noise: empty increment tensor");

    WienerIncrements fine;
    fine.dt = inc.dt / factor;
    // derived seed marks the refinement level so chained calls stay distinct
    fine.seed = rng::splitmix64(inc.seed ^ (0x524566ULL + static_cast<std::uint64_t>(factor)));
    fine.n_modes = n_modes;
    fine.paths.resize(static_cast<std::size_t>(n_paths));

    const double sub_sd = std::sqrt(inc.dt / factor);
    exec::parallel_for(n_paths, [&](std::int64_t p) {
        Eigen::MatrixXd f(static_cast<Eigen::Index>(n_steps) * factor, n_modes);
        for (int i = 0; i < n_steps; ++i) {
            for (int k = 0; k < n_modes; ++k) {
                // independent N(0, dt/factor) draws, then shift so the cell
                // sums telescope to the parent increment
                double s = 0.0;
                for (int j = 0; j < factor; ++j) {
                    const double xi =
                        sub_sd * rng::standard_normal(rng::derive_key(
                                     fine.seed, rng::Stream::refine,
                                     static_cast<std::uint64_t>(p),
                                     static_cast<std::uint64_t>(i) * factor + j,
                                     static_cast<std::uint64_t>(k)));
                    f(static_cast<Eigen::Index>(i) * factor + j, k) = xi;
                    s += xi;
                }
                const double shift = (inc.path(static_cast<int>(p))(i, k) - s) / factor;
                for (int j = 0; j < factor; ++j)
                    f(static_cast<Eigen::Index>(i) * factor + j, k) += shift;
            }
        }
        fine.paths[static_cast<std::size_t>(p)] = std::move(f);
    });
    return fine;
}

/// Monte Carlo estimate of the cost
///   J = E[ sum_i l(X_i, nu_i) dt_i + phi(X_n) ]
/// with left-endpoint quadrature.  Returns (estimate, standard error).
inline std::pair<double, double> cost_eval(const CoefficientBundle& coeffs,
                                           const ForwardPathEnsemble& forward,
                                           const ControlProcess& control) {
    if (!same_grid(forward.grid, control.grid()))
        throw std::invalid_argument("cost_eval: ensemble/control grid mismatch");
    if (!control.is_feedback() && control.n_stored_paths() != 1 &&
        control.n_stored_paths() != forward.n_paths())
        throw std::invalid_argument("cost_eval: control path count mismatch");

    const int n_paths = forward.n_paths();
    const int n_steps = forward.n_steps();
    double sum = 0.0, sum2 = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        double jp = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            const double dt = forward.grid[i + 1] - forward.grid[i];
            jp += dt * coeffs.ell(forward.state(p, i), forward.control(p, i));
        }
        jp += coeffs.phi(forward.state(p, n_steps));
        sum += jp;
        sum2 += jp * jp;
    }
    const double mean = sum / n_paths;
    double stderr_ = 0.0;
    if (n_paths > 1) {
        const double var = std::max(0.0, (sum2 - n_paths * mean * mean) / (n_paths - 1));
        stderr_ = std::sqrt(var / n_paths);
    }
    return {mean, stderr_};
}

/// Per-path cost samples (left-endpoint quadrature), for paired estimators.
inline Eigen::VectorXd cost_per_path(const CoefficientBundle& coeffs,
                                     const ForwardPathEnsemble& forward) {
    const int n_paths = forward.n_paths();
    const int n_steps = forward.n_steps();
    Eigen::VectorXd out(n_paths);
    for (int p = 0; p < n_paths; ++p) {
        double jp = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            const double dt = forward.grid[i + 1] - forward.grid[i];
            jp += dt * coeffs.ell(forward.state(p, i), forward.control(p, i));
        }
        jp += coeffs.phi(forward.state(p, n_steps));
        out[p] = jp;
    }
    return out;
}

} // namespace seeopt

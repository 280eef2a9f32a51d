// spectral.hpp — truncated spectral realization of the state space.
//
// The generator is diagonal in a fixed eigenbasis, so the semigroup acts as
// exact per-mode exponentials and all discretization error is left to the
// time stepping and Monte Carlo sampling.  The cylindrical Wiener process is
// truncated to one independent scalar Brownian motion per mode.

#pragma once

#include "seeopt/rng.hpp"
#include "seeopt/types.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace seeopt {

/// Eigenvalues of the generator in a fixed orthonormal eigenbasis.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues; // lambda_k, units 1/time

    int n_modes() const { return static_cast<int>(eigenvalues.size()); }

    explicit SpectralBasis(Eigen::VectorXd lambdas)
        : eigenvalues(std::move(lambdas)) {
        if (eigenvalues.size() < 1)
            throw std::invalid_argument("SpectralBasis: need at least one mode");
        if (!all_finite(eigenvalues))
            throw std::invalid_argument("SpectralBasis: eigenvalues must be finite");
    }

    /// Dirichlet Laplacian on L2(0,1) scaled by diffusivity kappa:
    /// lambda_k = -kappa (k pi)^2, eigenfunctions sqrt(2) sin(k pi xi).
    static SpectralBasis dirichlet_laplacian(int n_modes, double kappa = 1.0) {
        if (n_modes < 1)
            throw std::invalid_argument("dirichlet_laplacian: n_modes >= 1");
        if (!(kappa > 0.0))
            throw std::invalid_argument("dirichlet_laplacian: kappa > 0");
        Eigen::VectorXd lam(n_modes);
        const double pi = 3.14159265358979323846;
        for (int k = 1; k <= n_modes; ++k)
            lam[k - 1] = -kappa * (k * pi) * (k * pi);
        return SpectralBasis(std::move(lam));
    }
};

/// S(t) v: per-mode exponential scaling, exact on the truncated basis.
inline SpectralVector semigroup_apply(const SpectralBasis& basis, double t,
                                      const SpectralVector& v) {
    if (t < 0.0)
        throw std::invalid_argument("semigroup_apply: t must be >= 0");
    if (v.size() != basis.eigenvalues.size())
        throw std::invalid_argument("semigroup_apply: vector/basis size mismatch");
    if (t == 0.0) return v;
    return ((basis.eigenvalues.array() * t).exp() * v.array()).matrix();
}

/// S*(t) v.  Equal to S(t) v for the real diagonal spectra handled here;
/// kept separate so non-self-adjoint extensions have a seam.
inline SpectralVector adjoint_semigroup_apply(const SpectralBasis& basis, double t,
                                              const SpectralVector& v) {
    if (t < 0.0)
        throw std::invalid_argument("adjoint_semigroup_apply: t must be >= 0");
    return semigroup_apply(basis, t, v);
}

/// Hilbert-Schmidt (Frobenius) inner product <m1, m2>_2.
inline double hs_inner(const HSMatrix& m1, const HSMatrix& m2) {
    if (m1.rows() != m2.rows() || m1.cols() != m2.cols())
        throw std::invalid_argument("hs_inner: shape mismatch");
    return (m1.array() * m2.array()).sum();
}

inline double hs_norm(const HSMatrix& m) { return m.norm(); }

/// Brownian increments, one scalar motion per mode, on a uniform grid.
/// Entry (path, step, mode) is Normal(0, dt), a pure function of
/// (seed, path, step, mode) via counter-based streams.
struct WienerIncrements {
    double dt = 0.0;
    std::uint64_t seed = 0;
    int n_modes = 0;
    // per path: n_steps x n_modes, row i = increments over [t_i, t_{i+1})
    std::vector<Eigen::MatrixXd> paths;

    int n_steps() const {
        return paths.empty() ? 0 : static_cast<int>(paths.front().rows());
    }
    int n_paths() const { return static_cast<int>(paths.size()); }

    const Eigen::MatrixXd& path(int p) const { return paths.at(static_cast<std::size_t>(p)); }
};

/// Samples the increment tensor.  Deterministic in (seed, dimensions);
/// the entry for a given (path, step, mode) does not depend on the tensor
/// shape, so enlarging a tensor preserves the shared cells.
inline WienerIncrements sample_wiener_increments(const SpectralBasis& basis, double dt,
                                                 int n_steps, int n_paths,
                                                 std::uint64_t seed) {
    if (!(dt > 0.0))
        throw std::invalid_argument("sample_wiener_increments: dt must be > 0");
    if (n_steps < 1 || n_paths < 1)
        throw std::invalid_argument("sample_wiener_increments: need n_steps >= 1 and n_paths >= 1");

    WienerIncrements w;
    w.dt = dt;
    w.seed = seed;
    w.n_modes = basis.n_modes();
    w.paths.resize(static_cast<std::size_t>(n_paths));

    const double scale = std::sqrt(dt);
    const int n_modes = w.n_modes;
    exec::parallel_for(n_paths, [&](std::int64_t p) {
        Eigen::MatrixXd m(n_steps, n_modes);
        for (int i = 0; i < n_steps; ++i)
            for (int k = 0; k < n_modes; ++k)
                m(i, k) = scale * rng::standard_normal(rng::derive_key(
                                      seed, rng::Stream::wiener,
                                      static_cast<std::uint64_t>(p),
                                      static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(k)));
        w.paths[static_cast<std::size_t>(p)] = std::move(m);
    });
    return w;
}

} // namespace seeopt

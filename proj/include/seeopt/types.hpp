// types.hpp — shared aliases and small utilities for the seeopt toolkit.
//
// States, adjoint variables and controls are coordinate vectors in the
// truncated eigenbasis of the generator; Hilbert-Schmidt operators are
// dense N x N matrices in the same basis.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace seeopt {

/// State / adjoint coordinates in the truncated eigenbasis.
using SpectralVector = Eigen::VectorXd;

/// Truncated Hilbert-Schmidt operator, e_j -> e_i coordinates.
using HSMatrix = Eigen::MatrixXd;

/// Point in the control space O = R^m.
using ControlPoint = Eigen::VectorXd;

/// Time grid 0 = t_0 < ... < t_n = T.
using TimeGrid = Eigen::VectorXd;

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    return m.allFinite();
}

/// Uniform grid with n_steps cells on [0, T].
inline TimeGrid uniform_grid(double T, int n_steps) {
    if (T <= 0.0 || n_steps < 1)
        throw std::invalid_argument("uniform_grid: need T > 0 and n_steps >= 1");
    TimeGrid g(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i)
        g[i] = T * static_cast<double>(i) / static_cast<double>(n_steps);
    g[n_steps] = T;
    return g;
}

inline void check_grid(const TimeGrid& g) {
    if (g.size() < 2)
        throw std::invalid_argument("time grid needs at least two nodes");
    if (g[0] != 0.0)
        throw std::invalid_argument("time grid must start at 0");
    for (Eigen::Index i = 0; i + 1 < g.size(); ++i)
        if (!(g[i + 1] > g[i]))
            throw std::invalid_argument("time grid must be strictly increasing");
}

inline bool same_grid(const TimeGrid& a, const TimeGrid& b) {
    return a.size() == b.size() && a == b;
}

namespace exec {

/// Worker cap for path-parallel loops. 0 picks hardware concurrency.
inline int& max_threads() {
    static int n = 0;
    return n;
}

inline int effective_threads(std::int64_t n_items) {
    int n = max_threads();
    if (n <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        n = hw == 0 ? 1 : static_cast<int>(hw);
    }
    if (static_cast<std::int64_t>(n) > n_items)
        n = static_cast<int>(n_items);
    return n < 1 ? 1 : n;
}

/// Runs body(i) for i in [0, n). Results must not depend on the partition:
/// callers only write to disjoint slots, so any worker count gives the
/// same output.
inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
    const int workers = effective_threads(n);
    if (workers == 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::int64_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace exec

} // namespace seeopt

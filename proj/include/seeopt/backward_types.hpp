// backward_types.hpp — adjoint pair storage shared by the regression solver
// and the LQ closed form.

#pragma once

#include "seeopt/types.hpp"

#include <stdexcept>
#include <vector>

namespace seeopt {

/// Adjoint pair (Y, Z) along a forward ensemble.  Y lives on all grid nodes
/// with Y(T) = grad phi(X(T)) exactly; Z is a left-endpoint process on the
/// n_steps cells.
struct AdjointPairEnsemble {
    TimeGrid grid;
    // Y[p] is (n_steps+1) x n_modes
    std::vector<Eigen::MatrixXd> Y;
    // Z[p][i] is n_modes x n_modes for cell [t_i, t_{i+1})
    std::vector<std::vector<HSMatrix>> Z;

    int n_paths() const { return static_cast<int>(Y.size()); }
    int n_steps() const { return static_cast<int>(grid.size()) - 1; }

    SpectralVector y(int path, int step) const {
        return Y.at(static_cast<std::size_t>(path)).row(step).transpose();
    }
    const HSMatrix& z(int path, int step) const {
        return Z.at(static_cast<std::size_t>(path)).at(static_cast<std::size_t>(step));
    }
};

/// Settings for the least-squares Monte Carlo backward sweep.
struct RegressionConfig {
    int degree = 1;          // polynomial feature degree over spectral coords (1 or 2)
    double ridge = 1e-8;     // relative ridge: effective = ridge * trace(G)/k
    double cond_threshold = 1e12;

    void validate() const {
        if (degree < 1 || degree > 2)
            throw std::invalid_argument("RegressionConfig: degree must be 1 or 2");
        if (ridge < 0.0)
            throw std::invalid_argument("RegressionConfig: ridge must be >= 0");
    }
};

} // namespace seeopt

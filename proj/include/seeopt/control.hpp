// control.hpp — convex control set and admissible control processes.

#pragma once

#include "seeopt/rng.hpp"
#include "seeopt/types.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace seeopt {

/// Convex constraint set U in O = R^m: a coordinate box or a Euclidean ball.
class ControlSet {
public:
    enum class Kind { box, ball };

    static ControlSet box(ControlPoint lower, ControlPoint upper) {
        if (lower.size() != upper.size() || lower.size() == 0)
            throw std::invalid_argument("ControlSet::box: bound size mismatch");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (!(lower[i] <= upper[i]))
                throw std::invalid_argument("ControlSet::box: lower > upper");
        ControlSet u;
        u.kind_ = Kind::box;
        u.lower_ = std::move(lower);
        u.upper_ = std::move(upper);
        return u;
    }

    /// Symmetric box [-h, h]^m.
    static ControlSet centered_box(int m, double halfwidth) {
        if (!(halfwidth >= 0.0))
            throw std::invalid_argument("ControlSet::centered_box: halfwidth >= 0");
        return box(ControlPoint::Constant(m, -halfwidth),
                   ControlPoint::Constant(m, halfwidth));
    }

    static ControlSet ball(ControlPoint center, double radius) {
        if (center.size() == 0 || !(radius >= 0.0))
            throw std::invalid_argument("ControlSet::ball: bad center or radius");
        ControlSet u;
        u.kind_ = Kind::ball;
        u.center_ = std::move(center);
        u.radius_ = radius;
        return u;
    }

    Kind kind() const { return kind_; }
    int dim() const {
        return static_cast<int>(kind_ == Kind::box ? lower_.size() : center_.size());
    }

    /// Euclidean projection onto U: coordinate clamp (box) or radial
    /// rescale (ball).  Idempotent and nonexpansive.
    ControlPoint project(const ControlPoint& raw) const {
        if (raw.size() != dim())
            throw std::invalid_argument("ControlSet::project: dimension mismatch");
        if (!all_finite(raw))
            throw std::invalid_argument("ControlSet::project: non-finite input");
        if (kind_ == Kind::box)
            return raw.cwiseMax(lower_).cwiseMin(upper_);
        const ControlPoint d = raw - center_;
        const double n = d.norm();
        if (n <= radius_) return raw;
        return center_ + (radius_ / n) * d;
    }

    bool contains(const ControlPoint& v, double tol = 0.0) const {
        if (v.size() != dim()) return false;
        if (kind_ == Kind::box)
            return (v.array() >= lower_.array() - tol).all() &&
                   (v.array() <= upper_.array() + tol).all();
        return (v - center_).norm() <= radius_ + tol;
    }

    ControlPoint center() const {
        return kind_ == Kind::box ? ControlPoint(0.5 * (lower_ + upper_)) : center_;
    }

    /// Uniform sample from U.
    ControlPoint sample(rng::StreamRng& gen) const {
        const int m = dim();
        ControlPoint v(m);
        if (kind_ == Kind::box) {
            for (int i = 0; i < m; ++i)
                v[i] = gen.uniform(lower_[i], upper_[i]);
            return v;
        }
        // isotropic direction, radius ~ r u^{1/m}
        for (int i = 0; i < m; ++i) v[i] = gen.normal();
        double n = v.norm();
        if (n == 0.0) return center_;
        const double r = radius_ * std::pow(gen.uniform(), 1.0 / m);
        return center_ + (r / n) * v;
    }

    const ControlPoint& lower() const { return lower_; }
    const ControlPoint& upper() const { return upper_; }
    double radius() const { return radius_; }

private:
    ControlSet() = default;
    Kind kind_ = Kind::box;
    ControlPoint lower_, upper_;   // box
    ControlPoint center_;          // ball
    double radius_ = 0.0;
};

/// Euclidean projection onto U (free-function form).
inline ControlPoint project_onto_U(const ControlSet& U, const ControlPoint& raw) {
    return U.project(raw);
}

/// Feedback law nu = rule(t, x); evaluated at grid nodes during simulation
/// and projected onto U, so it is adapted by construction.
using FeedbackRule = std::function<ControlPoint(double, const SpectralVector&)>;

/// Piecewise-constant admissible control on a time grid.  Values are stored
/// per (path, step) and projected onto U at construction; a feedback rule,
/// when present, overrides stored values.
class ControlProcess {
public:
    /// Deterministic control, one value per grid cell (broadcast over paths).
    static ControlProcess from_values(TimeGrid grid, const ControlSet& U,
                                      std::vector<ControlPoint> step_values) {
        check_grid(grid);
        const int n_steps = static_cast<int>(grid.size()) - 1;
        if (static_cast<int>(step_values.size()) != n_steps)
            throw std::invalid_argument("ControlProcess: need one value per grid cell");
        const int m = U.dim();
        Eigen::MatrixXd vals(n_steps, m);
        for (int i = 0; i < n_steps; ++i) {
            if (step_values[static_cast<std::size_t>(i)].size() != m)
                throw std::invalid_argument("ControlProcess: control dimension mismatch");
            vals.row(i) = U.project(step_values[static_cast<std::size_t>(i)]).transpose();
        }
        ControlProcess c(std::move(grid), U.dim());
        c.values_.push_back(std::move(vals));
        return c;
    }

    /// Constant-in-time deterministic control.
    static ControlProcess constant(TimeGrid grid, const ControlSet& U,
                                   const ControlPoint& value) {
        const int n_steps = static_cast<int>(grid.size()) - 1;
        return from_values(std::move(grid), U,
                           std::vector<ControlPoint>(static_cast<std::size_t>(n_steps),
                                                     value));
    }

    /// Per-path stored values; paths[p] is (n_steps x m).
    static ControlProcess from_paths(TimeGrid grid, const ControlSet& U,
                                     std::vector<Eigen::MatrixXd> path_values) {
        check_grid(grid);
        if (path_values.empty())
            throw std::invalid_argument("ControlProcess: no paths");
        const int n_steps = static_cast<int>(grid.size()) - 1;
        const int m = U.dim();
        for (auto& pv : path_values) {
            if (pv.rows() != n_steps || pv.cols() != m)
                throw std::invalid_argument("ControlProcess: path value shape mismatch");
            for (int i = 0; i < n_steps; ++i)
                pv.row(i) = U.project(pv.row(i).transpose()).transpose();
        }
        ControlProcess c(std::move(grid), m);
        c.values_ = std::move(path_values);
        return c;
    }

    /// Feedback control; values are materialized by the forward solver.
    static ControlProcess feedback(TimeGrid grid, const ControlSet& U, FeedbackRule rule) {
        check_grid(grid);
        if (!rule)
            throw std::invalid_argument("ControlProcess: empty feedback rule");
        ControlProcess c(std::move(grid), U.dim());
        c.rule_ = std::move(rule);
        c.set_ = U;
        return c;
    }

    bool is_feedback() const { return static_cast<bool>(rule_); }
    int dim() const { return m_; }
    const TimeGrid& grid() const { return grid_; }
    int n_steps() const { return static_cast<int>(grid_.size()) - 1; }
    int n_stored_paths() const { return static_cast<int>(values_.size()); }

    /// Stored value for (path, step); deterministic controls broadcast.
    ControlPoint value(int path, int step) const {
        if (is_feedback())
            throw std::logic_error("ControlProcess::value: feedback control has no stored values");
        const auto& v = values_.size() == 1 ? values_.front()
                                            : values_.at(static_cast<std::size_t>(path));
        return v.row(step).transpose();
    }

    /// Feedback evaluation, projected onto U.
    ControlPoint evaluate_feedback(double t, const SpectralVector& x) const {
        if (!is_feedback())
            throw std::logic_error("ControlProcess::evaluate_feedback: not a feedback control");
        return set_->project(rule_(t, x));
    }

    /// Same control on a grid refined by an integer factor (each cell split
    /// into `factor` equal cells); piecewise-constant values repeat.
    ControlProcess refined(int factor) const {
        if (factor < 1)
            throw std::invalid_argument("ControlProcess::refined: factor >= 1");
        const int n = n_steps();
        TimeGrid fine(static_cast<Eigen::Index>(n) * factor + 1);
        for (int i = 0; i < n; ++i) {
            const double a = grid_[i], b = grid_[i + 1];
            for (int j = 0; j < factor; ++j)
                fine[static_cast<Eigen::Index>(i) * factor + j] =
                    a + (b - a) * static_cast<double>(j) / factor;
        }
        fine[static_cast<Eigen::Index>(n) * factor] = grid_[n];
        ControlProcess c(std::move(fine), m_);
        c.rule_ = rule_;
        c.set_ = set_;
        for (const auto& pv : values_) {
            Eigen::MatrixXd fv(static_cast<Eigen::Index>(n) * factor, m_);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < factor; ++j)
                    fv.row(static_cast<Eigen::Index>(i) * factor + j) = pv.row(i);
            c.values_.push_back(std::move(fv));
        }
        return c;
    }

private:
    ControlProcess(TimeGrid grid, int m) : grid_(std::move(grid)), m_(m) {}

    TimeGrid grid_;
    int m_ = 0;
    std::vector<Eigen::MatrixXd> values_; // empty for pure feedback controls
    FeedbackRule rule_;
    std::optional<ControlSet> set_;       // projection set for feedback emission
};

} // namespace seeopt

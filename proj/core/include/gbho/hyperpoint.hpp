#pragma once

#include <Eigen/Core>

#include "gbho/errors.hpp"

namespace gbho {

/// Axis-aligned box of per-dimension (low, high) bounds.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int dims() const { return static_cast<int>(lower.size()); }

    static Box cube(int n, double low, double high) {
        Box b;
        b.lower = Eigen::VectorXd::Constant(n, low);
        b.upper = Eigen::VectorXd::Constant(n, high);
        return b;
    }

    bool contains(const Eigen::VectorXd& v, double tol = 0.0) const {
        if (v.size() != lower.size()) return false;
        return (v.array() >= lower.array() - tol).all() &&
               (v.array() <= upper.array() + tol).all();
    }

    Eigen::VectorXd clamp(Eigen::VectorXd v) const {
        return v.cwiseMax(lower).cwiseMin(upper);
    }

    Eigen::VectorXd range() const { return upper - lower; }
    double diagonal() const { return range().norm(); }
};

/// Upper-level variable: a log-domain hyperparameter vector together with
/// its box bounds. The effective regularization coefficient is exp(value).
struct HyperPoint {
    Eigen::VectorXd values;
    Box bounds;

    int dims() const { return static_cast<int>(values.size()); }
};

/// Validating constructor; throws OutOfBounds when v violates the box.
inline HyperPoint make_hyper_point(Eigen::VectorXd v, Box bounds) {
    if (v.size() != bounds.lower.size()) {
        throw DimensionMismatch("HyperPoint: value/bounds dimension mismatch");
    }
    if (!bounds.contains(v, 1e-12)) {
        throw OutOfBounds("HyperPoint: value outside box bounds");
    }
    return HyperPoint{std::move(v), std::move(bounds)};
}

} // namespace gbho

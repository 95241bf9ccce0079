#include "gbho/linalg.hpp"

#include <cmath>

namespace gbho::linalg {

namespace {

void check_symmetric(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("cholesky: matrix is not square");
    }
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale > 0.0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale + 1e-300) {
        throw Error("cholesky: matrix is not symmetric");
    }
}

bool try_cholesky(const Matrix& a, double jitter, Matrix& lower) {
    const Eigen::Index n = a.rows();
    lower.setZero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j) + jitter - lower.row(j).head(j).squaredNorm();
        if (!(d > 0.0) || !std::isfinite(d)) {
            return false;
        }
        lower(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double sum = lower.row(i).head(j).dot(lower.row(j).head(j));
            lower(i, j) = (a(i, j) + (i == j ? jitter : 0.0) - sum) / lower(j, j);
        }
    }
    return true;
}

} // namespace

CholeskyFactor cholesky(const Matrix& a, double jitter) {
    check_symmetric(a);
    CholeskyFactor factor;
    factor.jitter = jitter;
    if (!try_cholesky(a, jitter, factor.lower)) {
        throw NotPositiveDefinite("cholesky: matrix is not positive definite");
    }
    return factor;
}

CholeskyFactor robust_cholesky(const Matrix& a) {
    check_symmetric(a);
    CholeskyFactor factor;
    if (try_cholesky(a, 0.0, factor.lower)) {
        factor.jitter = 0.0;
        return factor;
    }
    const double mean_diag = a.diagonal().cwiseAbs().mean();
    const double base = (mean_diag > 0.0 ? mean_diag : 1.0);
    for (double jitter = 1e-10 * base; jitter <= 1e-4 * base; jitter *= 10.0) {
        if (try_cholesky(a, jitter, factor.lower)) {
            factor.jitter = jitter;
            return factor;
        }
    }
    throw NotPositiveDefinite("robust_cholesky: factorization failed after jitter escalation");
}

Vector solve_spd(const CholeskyFactor& factor, const Vector& b) {
    const Eigen::Index n = factor.dim();
    if (b.size() != n) {
        throw DimensionMismatch("solve_spd: rhs length does not match factor dimension");
    }
    const Matrix& l = factor.lower;
    // forward substitution: L y = b
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = (b(i) - l.row(i).head(i).dot(y.head(i))) / l(i, i);
    }
    // backward substitution: L^T x = y
    Vector x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        x(i) = (y(i) - l.col(i).tail(n - i - 1).dot(x.tail(n - i - 1))) / l(i, i);
    }
    return x;
}

Matrix solve_spd(const CholeskyFactor& factor, const Matrix& b) {
    if (b.rows() != factor.dim()) {
        throw DimensionMismatch("solve_spd: rhs rows do not match factor dimension");
    }
    Matrix x(b.rows(), b.cols());
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
        x.col(c) = solve_spd(factor, Vector(b.col(c)));
    }
    return x;
}

double log_det(const CholeskyFactor& factor) {
    return 2.0 * factor.lower.diagonal().array().log().sum();
}

} // namespace gbho::linalg

#pragma once

#include <Eigen/Core>

#include "gbho/errors.hpp"

// Minimal dense SPD linear algebra: Cholesky factorization, solves and
// log-determinant. Problem sizes here stay small (a few hundred at most),
// so everything is dense and single-threaded.
namespace gbho::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct CholeskyFactor {
    Matrix lower;        // L with L * L^T = A + jitter * I
    double jitter = 0.0; // diagonal shift actually applied

    Eigen::Index dim() const { return lower.rows(); }
};

/// Factor a symmetric positive-definite matrix as L L^T = a + jitter I.
/// Throws NotPositiveDefinite if a pivot is non-positive.
CholeskyFactor cholesky(const Matrix& a, double jitter = 0.0);

/// cholesky() with jitter escalation: starts at 1e-10 x mean diagonal and
/// multiplies by 10 up to 1e-4 x mean diagonal before giving up.
CholeskyFactor robust_cholesky(const Matrix& a);

/// Solve (A + jitter I) x = b for the factorized A.
Vector solve_spd(const CholeskyFactor& factor, const Vector& b);
Matrix solve_spd(const CholeskyFactor& factor, const Matrix& b);

/// log det(A + jitter I) = 2 * sum(log diag(L))
double log_det(const CholeskyFactor& factor);

} // namespace gbho::linalg

// linalg.hpp
//
// Covariance helpers shared by the expectation engines and the filter:
// symmetrization, PSD projection, and factorizations with a fixed jitter
// escalation policy (add 1e-12 * trace / d to the diagonal, then x10, at most
// three retries).
#pragma once

#include "fgf/core.hpp"

#include <algorithm>
#include <string>

namespace fgf {

inline constexpr double kJitterBase = 1e-12;
inline constexpr double kJitterGrowth = 10.0;
inline constexpr int kJitterRetries = 3;

template <typename Derived>
Matrix<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& m)
{
    return (m + m.transpose()) / typename Derived::Scalar(2);
}

template <typename Scalar>
Scalar jitter_base(const Matrix<Scalar>& m)
{
    const Scalar d = Scalar(std::max<Eigen::Index>(m.rows(), 1));
    Scalar t = std::abs(m.trace()) / d;
    if (!(t > Scalar(0))) {
        t = Scalar(1);
    }
    return Scalar(kJitterBase) * t;
}

/**
 * Symmetrizes m and clamps its negative eigenvalues to zero. Eigenvalues down
 * to -1e-10 * largest count as roundoff and leave the matrix untouched: the
 * eigen-reconstruction would cost more accuracy than it restores on badly
 * scaled matrices such as raw monomial covariances.
 */
template <typename Scalar>
Matrix<Scalar> project_psd(const Matrix<Scalar>& m)
{
    Matrix<Scalar> s = symmetrized(m);
    if (!s.allFinite()) {
        throw NumericalError("project_psd: non-finite covariance");
    }
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(s);
    const Scalar hi = std::max(eig.eigenvalues().maxCoeff(), Scalar(0));
    if (eig.eigenvalues().minCoeff() >= -Scalar(kCovarianceTolerance) * hi) {
        return s;
    }
    const Vector<Scalar> clamped = eig.eigenvalues().cwiseMax(Scalar(0));
    return symmetrized(eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose());
}

/**
 * Symmetric square root S = V sqrt(L) V^T of a covariance, so that S S^T = cov.
 *
 * Eigenvalues down to -1e-10 * largest are treated as roundoff and clamped.
 * Anything more negative triggers the jitter escalation; if that does not
 * recover a PSD matrix a NumericalError is thrown.
 */
template <typename Scalar>
Matrix<Scalar> symmetric_sqrt(const Matrix<Scalar>& cov)
{
    if (!cov.allFinite()) {
        throw NumericalError("symmetric_sqrt: non-finite covariance");
    }
    Matrix<Scalar> work = symmetrized(cov);
    Scalar jitter = jitter_base(work);
    for (int attempt = 0; attempt <= kJitterRetries; ++attempt) {
        Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(work);
        const auto& ev = eig.eigenvalues();
        const Scalar hi = std::max(ev.maxCoeff(), Scalar(0));
        if (eig.info() == Eigen::Success && ev.minCoeff() >= -Scalar(kCovarianceTolerance) * hi) {
            const Vector<Scalar> root = ev.cwiseMax(Scalar(0)).cwiseSqrt();
            return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
        }
        work.diagonal().array() += jitter;
        jitter *= Scalar(kJitterGrowth);
    }
    throw NumericalError("symmetric_sqrt: covariance is not positive semidefinite after jitter escalation");
}

/**
 * Solves A X = B for symmetric positive definite A.
 *
 * A is Jacobi-scaled (unit diagonal) before an LLT factorization, which keeps
 * monomial feature Gram matrices with widely spread scales factorizable.
 * On factorization failure the jitter escalation is applied to the scaled
 * matrix; `what` names the operation in the error message.
 */
template <typename Scalar>
Matrix<Scalar> solve_spd(const Matrix<Scalar>& a, const Matrix<Scalar>& b, const std::string& what)
{
    if (a.rows() != a.cols() || a.rows() != b.rows()) {
        throw std::invalid_argument(what + ": dimension mismatch in linear solve");
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw NumericalError(what + ": non-finite entries in linear system");
    }
    const Vector<Scalar> diag = a.diagonal();
    if ((diag.array() <= Scalar(0)).any()) {
        throw NumericalError(what + ": matrix has a non-positive diagonal entry (singular)");
    }
    const Vector<Scalar> inv_scale = diag.cwiseSqrt().cwiseInverse();
    Matrix<Scalar> scaled = inv_scale.asDiagonal() * symmetrized(a) * inv_scale.asDiagonal();
    const Matrix<Scalar> rhs = inv_scale.asDiagonal() * b;

    Scalar jitter = jitter_base(scaled);
    for (int attempt = 0; attempt <= kJitterRetries; ++attempt) {
        Eigen::LLT<Matrix<Scalar>> llt(scaled);
        if (llt.info() == Eigen::Success) {
            Matrix<Scalar> z = llt.solve(rhs);
            if (z.allFinite()) {
                return inv_scale.asDiagonal() * z;
            }
        }
        scaled.diagonal().array() += jitter;
        jitter *= Scalar(kJitterGrowth);
    }
    throw NumericalError(what + ": matrix is singular beyond the jitter budget");
}

}  // namespace fgf

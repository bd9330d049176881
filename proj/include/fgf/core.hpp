// core.hpp
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace fgf {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Batch of points, one per column. Row-major so that each variable is a
/// contiguous row: batches have few rows and many columns.
template <typename Scalar>
using Batch = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Raised when a computation leaves the numerically valid domain: non-finite
/// values, a factorization that fails after jitter escalation, divergence.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Relative tolerance used for the symmetry and PSD checks on covariances.
inline constexpr double kCovarianceTolerance = 1e-10;

/**
 * Gaussian belief over the state: mean vector and covariance matrix.
 *
 * Used both for the filtering posterior and for the predicted belief
 * produced by the process model.
 */
template <typename Scalar>
struct GaussianBelief {
    Vector<Scalar> mean;
    Matrix<Scalar> cov;

    GaussianBelief() = default;
    GaussianBelief(Vector<Scalar> m, Matrix<Scalar> c) : mean(std::move(m)), cov(std::move(c)) {}

    static GaussianBelief scalar(Scalar m, Scalar variance)
    {
        return GaussianBelief(Vector<Scalar>::Constant(1, m), Matrix<Scalar>::Constant(1, 1, variance));
    }

    Eigen::Index dim() const { return mean.size(); }

    /// Throws std::invalid_argument when the dimensions disagree, an entry is
    /// non-finite, or the covariance is not symmetric PSD within tolerance.
    void validate() const
    {
        if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
            throw std::invalid_argument("GaussianBelief: covariance is " + std::to_string(cov.rows()) + "x"
                                        + std::to_string(cov.cols()) + " but mean has "
                                        + std::to_string(mean.size()) + " entries");
        }
        if (mean.size() == 0) {
            throw std::invalid_argument("GaussianBelief: empty state");
        }
        if (!mean.allFinite() || !cov.allFinite()) {
            throw std::invalid_argument("GaussianBelief: non-finite entries");
        }
        const Scalar scale = std::max(cov.cwiseAbs().maxCoeff(), Scalar(1e-300));
        if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > Scalar(kCovarianceTolerance) * scale) {
            throw std::invalid_argument("GaussianBelief: covariance not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(cov, Eigen::EigenvaluesOnly);
        const Scalar lo = eig.eigenvalues().minCoeff();
        const Scalar hi = eig.eigenvalues().maxCoeff();
        if (lo < -Scalar(kCovarianceTolerance) * std::max(hi, Scalar(0))) {
            throw std::invalid_argument("GaussianBelief: covariance not positive semidefinite");
        }
    }
};

using GaussianBeliefd = GaussianBelief<double>;
using Vectord = Vector<double>;
using Matrixd = Matrix<double>;
using Batchd = Batch<double>;

}  // namespace fgf

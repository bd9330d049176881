// feature.hpp
#pragma once

#include "fgf/core.hpp"

#include <functional>
#include <string>

namespace fgf {

/**
 * Measurement feature phi(y). The map is batched (meas_dim x N in,
 * out_dim x N out). Row 0 is the constant 1; out_dim >= 2.
 */
template <typename Scalar>
struct FeatureFunction {
    using Map = std::function<Batch<Scalar>(const Batch<Scalar>& y)>;

    std::string name;
    Eigen::Index meas_dim = 1;
    Eigen::Index out_dim = 2;
    Map map;

    Vector<Scalar> operator()(const Vector<Scalar>& y) const { return map(y).col(0); }

    void validate() const
    {
        if (out_dim < 2) {
            throw std::invalid_argument("FeatureFunction '" + name + "': out_dim must be >= 2");
        }
        if (!map) {
            throw std::invalid_argument("FeatureFunction '" + name + "': empty map");
        }
    }
};

using FeatureFunctiond = FeatureFunction<double>;

/**
 * (1, y_1, ..., y_m, y_1^2, ..., y_m^2, ..., y_m^order): elementwise powers,
 * no cross terms. With a center c and scale s the powers are taken of
 * (y - c) / s instead; for monomials this spans the same function space, it
 * only changes the conditioning of the Gram matrix.
 */
template <typename Scalar>
FeatureFunction<Scalar> make_monomial_feature(Eigen::Index meas_dim, int order,
                                              const Vector<Scalar>& center = {}, const Vector<Scalar>& scale = {})
{
    if (meas_dim < 1) {
        throw std::invalid_argument("make_monomial_feature: meas_dim must be >= 1");
    }
    if (order < 1) {
        throw std::invalid_argument("make_monomial_feature: order must be >= 1");
    }
    const bool standardized = center.size() > 0;
    if (standardized && (center.size() != meas_dim || scale.size() != meas_dim || (scale.array() <= 0).any())) {
        throw std::invalid_argument("make_monomial_feature: bad standardization");
    }
    FeatureFunction<Scalar> feat;
    feat.name = (order == 1 ? "affine" : "monomial" + std::to_string(order)) + (standardized ? "_std" : "");
    feat.meas_dim = meas_dim;
    feat.out_dim = 1 + meas_dim * order;
    feat.map = [=](const Batch<Scalar>& y) -> Batch<Scalar> {
        if (y.rows() != meas_dim) {
            throw std::invalid_argument("monomial feature: measurement has wrong dimension");
        }
        Batch<Scalar> base = y;
        if (standardized) {
            base = scale.cwiseInverse().asDiagonal() * (y.colwise() - center);
        }
        Batch<Scalar> out(1 + meas_dim * order, y.cols());
        out.row(0).setOnes();
        Batch<Scalar> power = base;
        for (int k = 0; k < order; ++k) {
            out.middleRows(1 + k * meas_dim, meas_dim) = power;
            if (k + 1 < order) {
                power = power.cwiseProduct(base);
            }
        }
        return out;
    };
    return feat;
}

template <typename Scalar>
FeatureFunction<Scalar> make_affine_feature(Eigen::Index meas_dim)
{
    return make_monomial_feature<Scalar>(meas_dim, 1);
}

/**
 * Named features beyond the monomials:
 *   "abs"    (1, |y_i|)
 *   "square" (1, y_i^2)
 *   "signed_square" (1, y_i, y_i |y_i|)
 */
FeatureFunctiond make_named_feature(const std::string& name, Eigen::Index meas_dim);

}  // namespace fgf

#include "fgf/feature.hpp"

namespace fgf {

namespace {

template <typename Tail>
FeatureFunctiond stacked(std::string name, Eigen::Index meas_dim, Eigen::Index blocks, Tail tail)
{
    FeatureFunctiond feat;
    feat.name = std::move(name);
    feat.meas_dim = meas_dim;
    feat.out_dim = 1 + blocks * meas_dim;
    feat.map = [meas_dim, blocks, tail](const Batchd& y) -> Batchd {
        if (y.rows() != meas_dim) {
            throw std::invalid_argument("feature: measurement has wrong dimension");
        }
        Batchd out(1 + blocks * meas_dim, y.cols());
        out.row(0).setOnes();
        out.bottomRows(blocks * meas_dim) = tail(y);
        return out;
    };
    return feat;
}

}  // namespace

FeatureFunctiond make_named_feature(const std::string& name, Eigen::Index meas_dim)
{
    if (meas_dim < 1) {
        throw std::invalid_argument("make_named_feature: meas_dim must be >= 1");
    }
    if (name == "abs") {
        return stacked(name, meas_dim, 1, [](const Batchd& y) -> Batchd { return y.cwiseAbs(); });
    }
    if (name == "square") {
        return stacked(name, meas_dim, 1, [](const Batchd& y) -> Batchd { return y.cwiseAbs2(); });
    }
    if (name == "signed_square") {
        return stacked(name, meas_dim, 2, [](const Batchd& y) -> Batchd {
            Batchd out(2 * y.rows(), y.cols());
            out.topRows(y.rows()) = y;
            out.bottomRows(y.rows()) = y.cwiseProduct(y.cwiseAbs());
            return out;
        });
    }
    throw std::invalid_argument("unknown feature '" + name + "' (known: abs, square, signed_square)");
}

}  // namespace fgf

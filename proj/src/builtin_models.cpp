#include "fgf/builtin_models.hpp"

#include <limits>
#include <numbers>

namespace fgf {

double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }

double normal_pdf(double x, double mean, double sd)
{
    if (sd == 0.0) {
        return x == mean ? std::numeric_limits<double>::infinity() : 0.0;
    }
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (std::abs(sd) * std::sqrt(2.0 * std::numbers::pi));
}

double gaussian_log_pdf(const Vectord& x, const Vectord& mean, const Matrixd& cov)
{
    Eigen::LLT<Matrixd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("gaussian_log_pdf: covariance is not positive definite");
    }
    const Vectord z = llt.matrixL().solve(x - mean);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double k = static_cast<double>(x.size());
    return -0.5 * (z.squaredNorm() + log_det + k * std::log(2.0 * std::numbers::pi));
}

ModelSpec make_noise_magnitude_model(const NoiseMagnitudeParams& params)
{
    StateSpaceModeld m;
    m.name = "noise_magnitude";
    m.state_dim = m.meas_dim = m.process_noise_dim = m.obs_noise_dim = 1;
    const double scale = params.process_noise_scale;
    m.process = [scale](const Batchd& x, const Batchd& v) -> Batchd { return x + scale * v; };
    m.observe = [](const Batchd& x, const Batchd& w) -> Batchd { return x.cwiseProduct(w); };
    m.likelihood = [](const Vectord& y, const Vectord& x) { return normal_pdf(y[0], 0.0, x[0]); };
    return {std::move(m), GaussianBeliefd::scalar(params.prior_mean, params.prior_var)};
}

ModelSpec make_heaviside_model(const HeavisideParams& params)
{
    StateSpaceModeld m;
    m.name = "heaviside";
    m.state_dim = m.meas_dim = m.process_noise_dim = m.obs_noise_dim = 1;
    const double height = params.step_height;
    m.process = [](const Batchd& x, const Batchd& v) -> Batchd { return x + v; };
    m.observe = [height](const Batchd& x, const Batchd& w) -> Batchd {
        return x + w + height * (x.array() >= 0.0).cast<double>().matrix();
    };
    m.likelihood = [height](const Vectord& y, const Vectord& x) {
        return normal_pdf(y[0], x[0] + height * heaviside(x[0]), 1.0);
    };
    return {std::move(m), GaussianBeliefd::scalar(params.prior_mean, params.prior_var)};
}

ModelSpec make_linear_gaussian_model(const Matrixd& a, const Matrixd& b, const Matrixd& c, const Matrixd& d,
                                     const GaussianBeliefd& prior)
{
    if (a.rows() != a.cols() || b.rows() != a.rows() || c.cols() != a.rows() || d.rows() != c.rows()) {
        throw std::invalid_argument("make_linear_gaussian_model: inconsistent matrix shapes");
    }
    StateSpaceModeld m;
    m.name = "linear_gaussian";
    m.state_dim = a.rows();
    m.meas_dim = c.rows();
    m.process_noise_dim = b.cols();
    m.obs_noise_dim = d.cols();
    m.process = [a, b](const Batchd& x, const Batchd& v) -> Batchd { return a * x + b * v; };
    m.observe = [c, d](const Batchd& x, const Batchd& w) -> Batchd { return c * x + d * w; };
    const Matrixd r = d * d.transpose();
    m.likelihood = [c, r](const Vectord& y, const Vectord& x) {
        return std::exp(gaussian_log_pdf(y, c * x, r));
    };
    return {std::move(m), prior};
}

}  // namespace fgf

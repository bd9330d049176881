// builtin_models.hpp
//
// The two scalar benchmark systems plus a generic linear-Gaussian model used
// for Kalman cross-checks.
#pragma once

#include "fgf/core.hpp"
#include "fgf/model.hpp"

#include <string>

namespace fgf {

struct ModelSpec {
    StateSpaceModeld model;
    GaussianBeliefd prior;
};

/// Sensor-noise-magnitude system: M' = M + scale * v, y = M * w.
struct NoiseMagnitudeParams {
    double prior_mean = 5.0;
    double prior_var = 1.0;
    double process_noise_scale = 0.1;
};

/// Step-nonlinearity system: x' = x + v, y = x + w + height * H(x), H(0) = 1.
struct HeavisideParams {
    double prior_mean = 0.0;
    double prior_var = 5.0;
    double step_height = 50.0;
};

ModelSpec make_noise_magnitude_model(const NoiseMagnitudeParams& params = {});
ModelSpec make_heaviside_model(const HeavisideParams& params = {});

/// x' = A x + B v, y = C x + D w. The likelihood is N(y | C x, D D^T).
ModelSpec make_linear_gaussian_model(const Matrixd& a, const Matrixd& b, const Matrixd& c, const Matrixd& d,
                                     const GaussianBeliefd& prior);

double heaviside(double x);
double normal_pdf(double x, double mean, double sd);

/// Log density of N(mean, cov) at x.
double gaussian_log_pdf(const Vectord& x, const Vectord& mean, const Matrixd& cov);

}  // namespace fgf

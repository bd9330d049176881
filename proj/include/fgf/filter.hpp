// filter.hpp
//
// Gaussian filter (GF) and feature Gaussian filter (FGF).
//
// Both filters share the prediction step and the joint moment computation.
// The GF conditions the moment-matched joint Gaussian of (x, y); the FGF fits
// q(x | y) = N(x | Gamma phi(y), Sigma) by minimizing KL[p(x, y) | q(x | y)],
// which has the closed-form solution
//
//   Gamma = E[x phi^T] E[phi phi^T]^-1,
//   Sigma = E[(x - Gamma phi)(x - Gamma phi)^T].
//
// With phi(y) = (1, y) the two coincide.
#pragma once

#include "fgf/core.hpp"
#include "fgf/expectation.hpp"
#include "fgf/feature.hpp"
#include "fgf/linalg.hpp"
#include "fgf/model.hpp"

#include <string>
#include <vector>

namespace fgf {

/// Central moments of (x, phi(y)) under the predicted joint. Entry 0 of the
/// feature is the constant, so row/column 0 of S_ff and column 0 of S_xf are zero.
template <typename Scalar>
struct JointMoments {
    Vector<Scalar> mu_x;
    Vector<Scalar> mu_f;
    Matrix<Scalar> S_xx;
    Matrix<Scalar> S_ff;
    Matrix<Scalar> S_xf;

    Eigen::Index state_dim() const { return mu_x.size(); }
    Eigen::Index feature_dim() const { return mu_f.size(); }
};

template <typename Scalar>
struct FgfPosteriorParams {
    Matrix<Scalar> Gamma;  ///< state_dim x feature_dim
    Matrix<Scalar> Sigma;  ///< state_dim x state_dim
};

using JointMomentsd = JointMoments<double>;
using FgfPosteriorParamsd = FgfPosteriorParams<double>;

/// Mean and covariance of process(x, v) over a point set for (x, v).
template <typename Scalar>
GaussianBelief<Scalar> predict_from_samples(const SampleSet<Scalar>& s, const StateSpaceModel<Scalar>& model)
{
    const Batch<Scalar> next = model.process(s.state, s.noise);
    if (next.rows() != model.state_dim || next.cols() != s.size()) {
        throw std::invalid_argument("predict: process returned a batch of the wrong shape");
    }
    require_finite(next, s, "predict");
    Vector<Scalar> mean = weighted_mean(next, s.weights);
    Matrix<Scalar> cov = project_psd<Scalar>(weighted_cross_cov(next, mean, next, mean, s.weights));
    return GaussianBelief<Scalar>(std::move(mean), std::move(cov));
}

/// Mean and covariance of process(x, v), x ~ belief, v ~ N(0, I).
template <typename Scalar>
GaussianBelief<Scalar> predict(const GaussianBelief<Scalar>& belief, const StateSpaceModel<Scalar>& model,
                               const ExpectationEngine& engine)
{
    belief.validate();
    model.validate();
    if (belief.dim() != model.state_dim) {
        throw std::invalid_argument("predict: belief dimension does not match the model");
    }
    return predict_from_samples(draw_samples(engine, belief, model.process_noise_dim), model);
}

/// Measurements observe(x, w) for every point of a sample set over (x, w).
template <typename Scalar>
Batch<Scalar> observe_samples(const SampleSet<Scalar>& s, const StateSpaceModel<Scalar>& model)
{
    Batch<Scalar> y = model.observe(s.state, s.noise);
    if (y.rows() != model.meas_dim || y.cols() != s.size()) {
        throw std::invalid_argument("joint_moments: observe returned a batch of the wrong shape");
    }
    require_finite(y, s, "joint_moments (measurement)");
    return y;
}

/// Moments of (x, phi(y)) from points over (x, w) and their measurements.
template <typename Scalar>
JointMoments<Scalar> joint_moments_from_samples(const SampleSet<Scalar>& s, const Batch<Scalar>& y,
                                                const FeatureFunction<Scalar>& feature)
{
    feature.validate();
    const Batch<Scalar> phi = feature.map(y);
    if (phi.rows() != feature.out_dim || phi.cols() != s.size()) {
        throw std::invalid_argument("joint_moments: feature returned a batch of the wrong shape");
    }
    require_finite(phi, s, "joint_moments (feature)");
    if ((phi.row(0).array() != Scalar(1)).any()) {
        throw std::invalid_argument("joint_moments: feature '" + feature.name + "' must have constant 1 first");
    }

    // One weighted covariance pass over the stacked batch (x; phi).
    const Eigen::Index n = s.state.rows();
    const Eigen::Index k = phi.rows();
    Batch<Scalar> stacked(n + k, s.size());
    stacked.topRows(n) = s.state;
    stacked.bottomRows(k) = phi;
    const Vector<Scalar> mean = weighted_mean(stacked, s.weights);
    const Matrix<Scalar> cov = weighted_cross_cov(stacked, mean, stacked, mean, s.weights);

    JointMoments<Scalar> m;
    m.mu_x = mean.head(n);
    m.mu_f = mean.tail(k);
    m.mu_f[0] = Scalar(1);
    m.S_xx = project_psd<Scalar>(cov.topLeftCorner(n, n));
    m.S_ff = project_psd<Scalar>(cov.bottomRightCorner(k, k));
    m.S_ff.row(0).setZero();
    m.S_ff.col(0).setZero();
    m.S_xf = cov.topRightCorner(n, k);
    m.S_xf.col(0).setZero();
    return m;
}

/// Moments of (x, phi(observe(x, w))) for x ~ belief, w ~ N(0, I).
template <typename Scalar>
JointMoments<Scalar> joint_moments(const GaussianBelief<Scalar>& belief, const StateSpaceModel<Scalar>& model,
                                   const FeatureFunction<Scalar>& feature, const ExpectationEngine& engine)
{
    belief.validate();
    model.validate();
    feature.validate();
    if (belief.dim() != model.state_dim || feature.meas_dim != model.meas_dim) {
        throw std::invalid_argument("joint_moments: belief, model and feature dimensions disagree");
    }
    const SampleSet<Scalar> s = draw_samples(engine, belief, model.obs_noise_dim);
    return joint_moments_from_samples(s, observe_samples(s, model), feature);
}

/// Conditions the moment-matched joint Gaussian of (x, y) on y. Expects the
/// moments of an affine feature (1, y).
template <typename Scalar>
GaussianBelief<Scalar> gf_update(const JointMoments<Scalar>& moments, const std::type_identity_t<Vector<Scalar>>& y)
{
    const Eigen::Index m = moments.feature_dim() - 1;
    if (m < 1 || y.size() != m) {
        throw std::invalid_argument("gf_update: measurement dimension does not match the affine moments");
    }
    const Vector<Scalar> mu_y = moments.mu_f.tail(m);
    const Matrix<Scalar> s_yy = moments.S_ff.bottomRightCorner(m, m);
    const Matrix<Scalar> s_xy = moments.S_xf.rightCols(m);
    const Matrix<Scalar> gain =
        solve_spd<Scalar>(s_yy, s_xy.transpose(), "gf_update: conditioning on y failed, Syy singular").transpose();
    Vector<Scalar> mean = moments.mu_x + gain * (y - mu_y);
    Matrix<Scalar> cov = project_psd<Scalar>(moments.S_xx - gain * s_xy.transpose());
    return GaussianBelief<Scalar>(std::move(mean), std::move(cov));
}

/**
 * Solves for Gamma and Sigma from the joint moments.
 *
 * Gamma solves the raw-moment normal equations E[phi phi^T] Gamma^T = E[phi x^T]
 * with E[phi phi^T] = S_ff + mu_f mu_f^T and E[x phi^T] = S_xf + mu_x mu_f^T.
 * Because phi_0 = 1, eliminating the constant block gives the same solution
 * from central moments, which is far better conditioned for raw monomials
 * of a measurement with large mean:
 *
 *   Gamma_r = S_xr S_rr^-1,  Gamma_0 = mu_x - Gamma_r mu_r,
 *
 * (r = the non-constant features). Sigma is expanded in central moments:
 *
 *   Sigma = S_xx - Gamma S_fx - S_xf Gamma^T + Gamma S_ff Gamma^T + d d^T,
 *   d = mu_x - Gamma mu_f.
 */
template <typename Scalar>
FgfPosteriorParams<Scalar> fgf_solve(const JointMoments<Scalar>& moments)
{
    const Eigen::Index k = moments.feature_dim();
    const Eigen::Index n = moments.state_dim();
    if (k < 2 || moments.S_ff.rows() != k || moments.S_xf.rows() != n || moments.S_xf.cols() != k
        || moments.S_xx.rows() != n) {
        throw std::invalid_argument("fgf_solve: inconsistent moment dimensions");
    }
    if (moments.mu_f[0] != Scalar(1)) {
        throw std::invalid_argument("fgf_solve: feature entry 0 must be the constant 1");
    }
    const Eigen::Index m = k - 1;
    const Matrix<Scalar> s_rr = moments.S_ff.bottomRightCorner(m, m);
    const Matrix<Scalar> s_xr = moments.S_xf.rightCols(m);

    FgfPosteriorParams<Scalar> p;
    p.Gamma.resize(n, k);
    p.Gamma.rightCols(m) =
        solve_spd<Scalar>(s_rr, Matrix<Scalar>(s_xr.transpose()),
                          "fgf_solve: feature Gram matrix E[phi phi^T] is rank deficient, reduce the feature set")
            .transpose();
    p.Gamma.col(0) = moments.mu_x - p.Gamma.rightCols(m) * moments.mu_f.tail(m);
    const Vector<Scalar> d = moments.mu_x - p.Gamma * moments.mu_f;
    const Matrix<Scalar> gs = p.Gamma * moments.S_xf.transpose();
    const Matrix<Scalar> sigma = moments.S_xx - gs - gs.transpose()
                                 + p.Gamma * moments.S_ff * p.Gamma.transpose() + d * d.transpose();
    p.Sigma = project_psd<Scalar>(sigma);
    return p;
}

/// q(x | y) = N(Gamma phi(y), Sigma).
template <typename Scalar>
GaussianBelief<Scalar> fgf_update(const FgfPosteriorParams<Scalar>& params, const FeatureFunction<Scalar>& feature,
                                  const std::type_identity_t<Vector<Scalar>>& y)
{
    if (y.size() != feature.meas_dim) {
        throw std::invalid_argument("fgf_update: measurement dimension does not match the feature");
    }
    const Vector<Scalar> phi = feature(y);
    if (phi.size() != params.Gamma.cols() || params.Sigma.rows() != params.Gamma.rows()) {
        throw std::invalid_argument("fgf_update: parameters do not match the feature dimension");
    }
    return GaussianBelief<Scalar>(params.Gamma * phi, params.Sigma);
}

/// Monomial feature of the given order on (y - mu_y) / sd_y, with mu_y and
/// sd_y the weighted mean and standard deviation of the measurement batch.
template <typename Scalar>
FeatureFunction<Scalar> standardized_monomial(const Batch<Scalar>& y, const Vector<Scalar>& weights, int order)
{
    const Vector<Scalar> mu = weighted_mean(y, weights);
    Vector<Scalar> sd = ((y.colwise() - mu).cwiseAbs2() * weights).cwiseSqrt();
    for (Eigen::Index i = 0; i < sd.size(); ++i) {
        if (!(sd[i] > Scalar(0))) {
            sd[i] = Scalar(1);
        }
    }
    return make_monomial_feature<Scalar>(y.rows(), order, mu, sd);
}

/// One filter of a bank: its feature and, when standardize_order > 0, the
/// monomial order to rebuild the feature with at every step on y
/// standardized by the predicted measurement mean and standard deviation.
template <typename Scalar>
struct FilterSpec {
    FeatureFunction<Scalar> feature;
    int standardize_order = 0;
};

template <typename Scalar>
struct FilterTrack {
    std::vector<GaussianBelief<Scalar>> posteriors;
    std::string error;  ///< empty unless the filter diverged; posteriors then stop early

    bool diverged() const { return !error.empty(); }
};

/**
 * Runs several filters over the same measurements in lockstep. At step t
 * every filter transforms the same standard point sets, drawn from engine
 * streams 2t (prediction) and 2t + 1 (update), so the filters see common
 * random numbers and each track equals what run_filter gives on its own.
 *
 * A filter whose step throws NumericalError stops; its error names the step
 * and the other filters continue.
 */
template <typename Scalar>
std::vector<FilterTrack<Scalar>> run_filter_bank(const StateSpaceModel<Scalar>& model,
                                                 const GaussianBelief<Scalar>& prior,
                                                 const std::vector<FilterSpec<Scalar>>& filters,
                                                 const ExpectationEngine& engine,
                                                 const std::type_identity_t<Matrix<Scalar>>& measurements)
{
    model.validate();
    prior.validate();
    engine.validate();
    if (prior.dim() != model.state_dim) {
        throw std::invalid_argument("run_filter: prior dimension does not match the model");
    }
    if (measurements.cols() > 0 && measurements.rows() != model.meas_dim) {
        throw std::invalid_argument("run_filter: measurements have the wrong dimension");
    }
    if (!measurements.allFinite()) {
        throw std::invalid_argument("run_filter: measurements must be finite");
    }
    for (const auto& f : filters) {
        f.feature.validate();
        if (f.feature.meas_dim != model.meas_dim) {
            throw std::invalid_argument("run_filter: feature '" + f.feature.name + "' has the wrong input dimension");
        }
    }

    const Eigen::Index steps = measurements.cols();
    std::vector<FilterTrack<Scalar>> tracks(filters.size());
    std::vector<GaussianBelief<Scalar>> beliefs(filters.size(), prior);
    for (auto& track : tracks) {
        track.posteriors.reserve(static_cast<std::size_t>(steps));
    }
    for (Eigen::Index t = 0; t < steps; ++t) {
        const StandardPoints pred_points =
            standard_points(engine.reseeded(2 * t), model.state_dim + model.process_noise_dim);
        const StandardPoints update_points =
            standard_points(engine.reseeded(2 * t + 1), model.state_dim + model.obs_noise_dim);
        const Vector<Scalar> y = measurements.col(t);
        for (std::size_t k = 0; k < filters.size(); ++k) {
            if (tracks[k].diverged()) {
                continue;
            }
            try {
                const GaussianBelief<Scalar> predicted =
                    predict_from_samples(transform_points(pred_points, beliefs[k], model.process_noise_dim), model);
                const SampleSet<Scalar> s = transform_points(update_points, predicted, model.obs_noise_dim);
                const Batch<Scalar> ys = observe_samples(s, model);
                const FeatureFunction<Scalar> feat = filters[k].standardize_order > 0
                                                         ? standardized_monomial(ys, s.weights, filters[k].standardize_order)
                                                         : filters[k].feature;
                const FgfPosteriorParams<Scalar> params = fgf_solve(joint_moments_from_samples(s, ys, feat));
                GaussianBelief<Scalar> post = fgf_update(params, feat, y);
                if (!post.mean.allFinite() || !post.cov.allFinite()) {
                    throw NumericalError("non-finite posterior");
                }
                beliefs[k] = post;
                tracks[k].posteriors.push_back(std::move(post));
            } catch (const NumericalError& e) {
                tracks[k].error = "step " + std::to_string(t) + ": " + e.what();
            }
        }
    }
    return tracks;
}

/**
 * Alternates predict and (joint_moments, fgf_solve, fgf_update) over the
 * measurement columns and returns the posterior after each one. Throws
 * NumericalError naming the step on failure.
 */
template <typename Scalar>
std::vector<GaussianBelief<Scalar>> run_filter(const StateSpaceModel<Scalar>& model,
                                               const GaussianBelief<Scalar>& prior,
                                               const FeatureFunction<Scalar>& feature,
                                               const ExpectationEngine& engine,
                                               const std::type_identity_t<Matrix<Scalar>>& measurements, int standardize_order = 0)
{
    auto tracks = run_filter_bank<Scalar>(model, prior, {FilterSpec<Scalar>{feature, standardize_order}}, engine,
                                          measurements);
    if (tracks.front().diverged()) {
        throw NumericalError("run_filter: " + tracks.front().error);
    }
    return std::move(tracks.front().posteriors);
}

}  // namespace fgf

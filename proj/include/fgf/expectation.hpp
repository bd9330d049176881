// expectation.hpp
//
// Numerical expectations E[f(x, n)] with x ~ belief and n ~ N(0, I). Both
// engines build a weighted point set over the augmented variable (x, n), whose
// covariance is block-diagonal (belief covariance, identity), so one point set
// serves the prediction integrand f(g(x, v)) and the update integrand
// f(x, h(x, w)) alike.
#pragma once

#include "fgf/core.hpp"
#include "fgf/linalg.hpp"
#include "fgf/rng.hpp"

#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>

namespace fgf {

struct ExpectationEngine {
    enum class Kind { monte_carlo, sigma_point };

    Kind kind = Kind::sigma_point;
    int sample_count = 10000;  ///< monte_carlo only
    double kappa = 0.0;        ///< sigma_point spread; lambda = kappa
    std::uint64_t seed = 0;

    static ExpectationEngine monte_carlo(int samples, std::uint64_t seed)
    {
        ExpectationEngine e;
        e.kind = Kind::monte_carlo;
        e.sample_count = samples;
        e.seed = seed;
        return e;
    }

    static ExpectationEngine sigma_point(double kappa = 0.0)
    {
        ExpectationEngine e;
        e.kind = Kind::sigma_point;
        e.kappa = kappa;
        return e;
    }

    /// Same configuration with the seed replaced by an independent stream.
    ExpectationEngine reseeded(std::uint64_t stream) const
    {
        ExpectationEngine e = *this;
        e.seed = mix_seed(seed, stream);
        return e;
    }

    void validate() const
    {
        if (kind == Kind::monte_carlo && sample_count < 2) {
            throw std::invalid_argument("ExpectationEngine: monte_carlo needs sample_count >= 2");
        }
        if (kind == Kind::sigma_point && !std::isfinite(kappa)) {
            throw std::invalid_argument("ExpectationEngine: kappa must be finite");
        }
    }

    std::string describe() const
    {
        std::ostringstream os;
        if (kind == Kind::monte_carlo) {
            os << "monte_carlo(samples=" << sample_count << " seed=" << seed << ")";
        } else {
            os << "sigma_point(kappa=" << kappa << ")";
        }
        return os.str();
    }
};

/// Weighted points over (x, n); column j of `state` and `noise` form one point.
template <typename Scalar>
struct SampleSet {
    Batch<Scalar> state;
    Batch<Scalar> noise;
    Vector<Scalar> weights;

    Eigen::Index size() const { return weights.size(); }
};

/// Weighted point set for N(0, I_dim), before the belief is applied.
struct StandardPoints {
    Batchd z;  ///< dim x count
    Vectord weights;

    Eigen::Index dim() const { return z.rows(); }
    Eigen::Index size() const { return weights.size(); }
};

/**
 * Sigma points: 2d + 1 points at 0 and +- sqrt(d + kappa) e_i with weights
 * kappa / (d + kappa) for the center and 1 / (2 (d + kappa)) elsewhere.
 *
 * Monte Carlo: sample_count i.i.d. draws from the engine's seed, weights 1/N.
 */
inline StandardPoints standard_points(const ExpectationEngine& engine, Eigen::Index dim)
{
    engine.validate();
    if (dim < 1) {
        throw std::invalid_argument("standard_points: dimension must be >= 1");
    }
    StandardPoints p;
    if (engine.kind == ExpectationEngine::Kind::monte_carlo) {
        NormalRng rng(engine.seed);
        p.z = rng.normal_matrix(dim, engine.sample_count);
        p.weights = Vectord::Constant(engine.sample_count, 1.0 / engine.sample_count);
        return p;
    }
    const double spread = static_cast<double>(dim) + engine.kappa;
    if (!(spread > 0.0)) {
        throw std::invalid_argument("standard_points: sigma-point spread d + kappa must be positive");
    }
    const double step = std::sqrt(spread);
    p.z = Batchd::Zero(dim, 2 * dim + 1);
    p.z.middleCols(1, dim).diagonal().setConstant(step);
    p.z.rightCols(dim).diagonal().setConstant(-step);
    p.weights = Vectord::Constant(2 * dim + 1, 1.0 / (2.0 * spread));
    p.weights[0] = engine.kappa / spread;
    return p;
}

/// Maps standard points onto belief x N(0, I_noise_dim): the first
/// belief.dim() rows become mean + S z with S the symmetric square root of
/// the belief covariance, the remaining rows are the noise.
template <typename Scalar>
SampleSet<Scalar> transform_points(const StandardPoints& points, const GaussianBelief<Scalar>& belief,
                                   Eigen::Index noise_dim)
{
    const Eigen::Index n = belief.dim();
    if (noise_dim < 0 || points.dim() != n + noise_dim) {
        throw std::invalid_argument("transform_points: point dimension does not match belief and noise");
    }
    const Matrix<Scalar> root = symmetric_sqrt(belief.cov);
    SampleSet<Scalar> s;
    s.state = root.lazyProduct(points.z.topRows(n).template cast<Scalar>()).colwise() + belief.mean;
    s.noise = points.z.bottomRows(noise_dim).template cast<Scalar>();
    s.weights = points.weights.template cast<Scalar>();
    return s;
}

template <typename Scalar>
SampleSet<Scalar> draw_samples(const ExpectationEngine& engine, const GaussianBelief<Scalar>& belief,
                               Eigen::Index noise_dim)
{
    return transform_points(standard_points(engine, belief.dim() + noise_dim), belief, noise_dim);
}

template <typename Scalar>
void require_finite(const Batch<Scalar>& values, const SampleSet<Scalar>& samples, const char* what)
{
    if (values.allFinite()) {
        return;
    }
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        if (!values.col(j).allFinite()) {
            std::ostringstream os;
            os << what << ": non-finite integrand at sample " << j << " (state = "
               << samples.state.col(j).transpose() << ", noise = " << samples.noise.col(j).transpose() << ")";
            throw NumericalError(os.str());
        }
    }
}

template <typename Scalar>
Vector<Scalar> weighted_mean(const Batch<Scalar>& values, const Vector<Scalar>& weights)
{
    return values * weights;
}

/// Sum_j w_j (a_j - ma)(b_j - mb)^T.
template <typename Scalar>
Matrix<Scalar> weighted_cross_cov(const Batch<Scalar>& a, const Vector<Scalar>& ma, const Batch<Scalar>& b,
                                  const Vector<Scalar>& mb, const Vector<Scalar>& weights)
{
    const Batch<Scalar> cb = b.colwise() - mb;
    const Batch<Scalar> wa = ((a.colwise() - ma).array().rowwise() * weights.transpose().array()).matrix();
    return wa.lazyProduct(cb.transpose());
}

/**
 * E[f(x, n)] under belief x and n ~ N(0, I_noise_dim). f maps a batch of
 * columns to a k x N matrix; the result is its weighted column sum.
 */
template <typename Scalar, typename Func>
Vector<Scalar> expect(const ExpectationEngine& engine, const GaussianBelief<Scalar>& belief, Eigen::Index noise_dim,
                      Func&& f)
{
    const SampleSet<Scalar> s = draw_samples(engine, belief, noise_dim);
    const Batch<Scalar> values = f(s.state, s.noise);
    if (values.cols() != s.size()) {
        throw std::invalid_argument("expect: integrand must return one column per sample");
    }
    require_finite(values, s, "expect");
    return weighted_mean(values, s.weights);
}

struct MonteCarloEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/**
 * Expected likelihood weight E[p(y|x)] for x ~ N(0, I_D), y | x ~ N(x, I_D).
 * Closed form (2 sqrt(pi))^-D. The standard error is zero for the
 * deterministic sigma-point rule.
 */
inline MonteCarloEstimate expected_likelihood_weight(int dim, const ExpectationEngine& engine)
{
    if (dim < 1) {
        throw std::invalid_argument("expected_likelihood_weight: dimension must be >= 1");
    }
    const GaussianBeliefd prior(Vectord::Zero(dim), Matrixd::Identity(dim, dim));
    const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * dim);
    // y - x = w, so the likelihood only depends on the noise draw.
    const auto weight = [norm](const Batchd&, const Batchd& w) -> Batchd {
        Batchd out(2, w.cols());
        out.row(0) = norm * (-0.5 * w.colwise().squaredNorm().array()).exp().matrix();
        out.row(1) = out.row(0).array().square().matrix();
        return out;
    };
    const Vectord m = expect(engine, prior, dim, weight);
    MonteCarloEstimate est;
    est.value = m[0];
    if (engine.kind == ExpectationEngine::Kind::monte_carlo) {
        est.std_error = std::sqrt(std::max(m[1] - m[0] * m[0], 0.0) / engine.sample_count);
    }
    return est;
}

}  // namespace fgf

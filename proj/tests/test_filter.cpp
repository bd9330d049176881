#include "fgf/builtin_models.hpp"
#include "fgf/filter.hpp"
#include "fgf/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fgf;

namespace {

ModelSpec additive_scalar(double a, double c)
{
    Matrixd am = Matrixd::Constant(1, 1, a);
    Matrixd cm = Matrixd::Constant(1, 1, c);
    Matrixd one = Matrixd::Identity(1, 1);
    return make_linear_gaussian_model(am, one, cm, one, GaussianBeliefd::scalar(0.0, 1.0));
}

JointMomentsd scalar_moments(double mu_x, double s_xx, double mu_y, double s_yy, double s_xy)
{
    JointMomentsd m;
    m.mu_x = Vectord::Constant(1, mu_x);
    m.mu_f = Vectord(2);
    m.mu_f << 1.0, mu_y;
    m.S_xx = Matrixd::Constant(1, 1, s_xx);
    m.S_ff = Matrixd::Zero(2, 2);
    m.S_ff(1, 1) = s_yy;
    m.S_xf = Matrixd::Zero(1, 2);
    m.S_xf(0, 1) = s_xy;
    return m;
}

Matrixd random_matrix(std::mt19937_64& gen, Eigen::Index r, Eigen::Index c, double scale = 1.0)
{
    std::normal_distribution<double> nd(0.0, scale);
    Matrixd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = nd(gen);
    }
    return m;
}

/// Textbook Kalman filter, written independently of the library.
struct KalmanOracle {
    Matrixd a, q, c, r;
    Vectord x;
    Matrixd p;

    void step(const Vectord& y)
    {
        x = a * x;
        p = a * p * a.transpose() + q;
        const Matrixd s = c * p * c.transpose() + r;
        const Matrixd k = p * c.transpose() * s.inverse();
        x = x + k * (y - c * x);
        p = (Matrixd::Identity(p.rows(), p.cols()) - k * c) * p;
        p = (p + p.transpose()) / 2.0;
    }
};

}  // namespace

TEST(Predict, Examples)
{
    const auto sp = ExpectationEngine::sigma_point();
    const GaussianBeliefd a = predict(GaussianBeliefd::scalar(0.0, 1.0), additive_scalar(1.0, 1.0).model, sp);
    EXPECT_NEAR(a.mean[0], 0.0, 1e-15);
    EXPECT_NEAR(a.cov(0, 0), 2.0, 1e-14);

    const ModelSpec nm = make_noise_magnitude_model();
    const GaussianBeliefd b = predict(nm.prior, nm.model, sp);
    EXPECT_NEAR(b.mean[0], 5.0, 1e-14);
    EXPECT_NEAR(b.cov(0, 0), 1.01, 1e-14);

    StateSpaceModeld doubling;
    doubling.name = "doubling";
    doubling.process = [](const Batchd& x, const Batchd&) -> Batchd { return 2.0 * x; };
    doubling.observe = [](const Batchd& x, const Batchd&) -> Batchd { return x; };
    const GaussianBeliefd c = predict(GaussianBeliefd::scalar(1.0, 1.0), doubling, sp);
    EXPECT_NEAR(c.mean[0], 2.0, 1e-14);
    EXPECT_NEAR(c.cov(0, 0), 4.0, 1e-14);
}

TEST(JointMoments, LinearModelAffineFeature)
{
    const ModelSpec s = additive_scalar(1.0, 1.0);
    const JointMomentsd m = joint_moments(GaussianBeliefd::scalar(0.0, 1.0), s.model, make_affine_feature<double>(1),
                                          ExpectationEngine::sigma_point());
    EXPECT_NEAR(m.mu_f[1], 0.0, 1e-15);
    EXPECT_NEAR(m.S_ff(1, 1), 2.0, 1e-14);
    EXPECT_NEAR(m.S_xf(0, 1), 1.0, 1e-14);
    EXPECT_EQ(m.mu_f[0], 1.0);
    EXPECT_EQ(m.S_ff.row(0).norm() + m.S_ff.col(0).norm() + m.S_xf.col(0).norm(), 0.0);
}

TEST(JointMoments, NoiseMagnitudeHasNoLinearCorrelation)
{
    const ModelSpec s = make_noise_magnitude_model();
    const JointMomentsd m =
        joint_moments(s.prior, s.model, make_affine_feature<double>(1), ExpectationEngine::sigma_point());
    EXPECT_NEAR(m.S_xf(0, 1), 0.0, 1e-12);
}

TEST(JointMoments, NoiseMagnitudeQuadraticFeature)
{
    // y = M w with M ~ N(5, 1): E[y^2] = E[M^2], cov(M, y^2) = E[M^3] - E[M] E[M^2].
    const double m2 = gaussian_moment_oracle(5.0, 1.0, 2);
    const double m3 = gaussian_moment_oracle(5.0, 1.0, 3);
    const double m1 = gaussian_moment_oracle(5.0, 1.0, 1);
    const ModelSpec s = make_noise_magnitude_model();
    const JointMomentsd m = joint_moments(s.prior, s.model, make_monomial_feature<double>(1, 2),
                                          ExpectationEngine::monte_carlo(1000000, 3));
    // Standard errors at 10^6 samples are about 0.04 for both.
    EXPECT_NEAR(m.mu_f[2], m2, 0.2);
    EXPECT_NEAR(m.S_xf(0, 2), m3 - m1 * m2, 0.25);
    EXPECT_NEAR(m.mu_f[2], 26.0, 0.2);
    EXPECT_NEAR(m.S_xf(0, 2), 10.0, 0.25);
}

TEST(JointMoments, FeatureMustStartWithConstant)
{
    FeatureFunctiond bad;
    bad.name = "no_constant";
    bad.out_dim = 2;
    bad.map = [](const Batchd& y) -> Batchd {
        Batchd out(2, y.cols());
        out.row(0) = y.row(0);
        out.row(1) = y.row(0);
        return out;
    };
    const ModelSpec s = additive_scalar(1.0, 1.0);
    EXPECT_THROW(joint_moments(s.prior, s.model, bad, ExpectationEngine::sigma_point()), std::invalid_argument);
}

TEST(GfUpdate, Examples)
{
    const GaussianBeliefd a = gf_update(scalar_moments(0.0, 1.0, 0.0, 2.0, 1.0), Vectord::Constant(1, 1.0));
    EXPECT_NEAR(a.mean[0], 0.5, 1e-15);
    EXPECT_NEAR(a.cov(0, 0), 0.5, 1e-15);

    const GaussianBeliefd b = gf_update(scalar_moments(3.0, 2.0, 1.0, 4.0, 0.0), Vectord::Constant(1, 17.0));
    EXPECT_EQ(b.mean[0], 3.0);
    EXPECT_EQ(b.cov(0, 0), 2.0);

    const GaussianBeliefd c = gf_update(scalar_moments(-2.0, 2.0, 1.5, 4.0, 1.0), Vectord::Constant(1, 1.5));
    EXPECT_EQ(c.mean[0], -2.0);
}

TEST(GfUpdate, SingularInnovationCovariance)
{
    EXPECT_THROW(gf_update(scalar_moments(0.0, 1.0, 0.0, 0.0, 0.0), Vectord::Constant(1, 1.0)), NumericalError);
    EXPECT_THROW(gf_update(scalar_moments(0.0, 1.0, 0.0, 1.0, 0.0), Vectord::Zero(2)), std::invalid_argument);
}

TEST(FgfSolve, Examples)
{
    const FgfPosteriorParamsd a = fgf_solve(scalar_moments(0.0, 1.0, 0.0, 2.0, 1.0));
    EXPECT_NEAR(a.Gamma(0, 0), 0.0, 1e-15);
    EXPECT_NEAR(a.Gamma(0, 1), 0.5, 1e-15);
    EXPECT_NEAR(a.Sigma(0, 0), 1.0 - 0.5, 1e-15);

    const FgfPosteriorParamsd b = fgf_solve(scalar_moments(4.0, 3.0, 2.0, 5.0, 0.0));
    EXPECT_NEAR(b.Gamma(0, 0), 4.0, 1e-14);
    EXPECT_EQ(b.Gamma(0, 1), 0.0);
    EXPECT_NEAR(b.Sigma(0, 0), 3.0, 1e-14);
}

TEST(FgfSolve, NoiseMagnitudeQuadraticWeightIsPositive)
{
    const ModelSpec s = make_noise_magnitude_model();
    const FeatureFunctiond f = make_monomial_feature<double>(1, 2);
    const FgfPosteriorParamsd p =
        fgf_solve(joint_moments(s.prior, s.model, f, ExpectationEngine::monte_carlo(200000, 1)));
    EXPECT_GT(p.Gamma(0, 2), 0.0);
}

TEST(FgfSolve, RankDeficientFeatureAdvisesReduction)
{
    // A feature that never varies carries no information and makes the Gram
    // matrix singular. (Exact duplicates are rescued by the jitter.)
    FeatureFunctiond dup;
    dup.name = "dead";
    dup.out_dim = 3;
    dup.map = [](const Batchd& y) -> Batchd {
        Batchd out(3, y.cols());
        out.row(0).setOnes();
        out.row(1) = y.row(0);
        out.row(2).setZero();
        return out;
    };
    const ModelSpec s = additive_scalar(1.0, 1.0);
    const JointMomentsd m = joint_moments(s.prior, s.model, dup, ExpectationEngine::sigma_point());
    try {
        fgf_solve(m);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("reduce the feature set"), std::string::npos) << e.what();
    }
}

TEST(FgfUpdate, ConstantGammaIgnoresMeasurement)
{
    FgfPosteriorParamsd p;
    p.Gamma = Matrixd::Zero(1, 4);
    p.Gamma(0, 0) = 2.5;
    p.Sigma = Matrixd::Constant(1, 1, 0.3);
    const FeatureFunctiond f = make_monomial_feature<double>(1, 3);
    for (const double y : {-100.0, 0.0, 3.0, 1e3}) {
        const GaussianBeliefd b = fgf_update(p, f, Vectord::Constant(1, y));
        EXPECT_EQ(b.mean[0], 2.5);
        EXPECT_EQ(b.cov(0, 0), 0.3);
    }
    EXPECT_THROW(fgf_update(p, make_affine_feature<double>(1), Vectord::Constant(1, 1.0)), std::invalid_argument);
}

TEST(FgfUpdate, AffineFeatureEqualsGf)
{
    std::mt19937_64 gen(21);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 1 + trial % 3;
        const Eigen::Index k = 1 + trial % 2;
        const ModelSpec s = make_linear_gaussian_model(
            random_matrix(gen, n, n, 0.5), random_matrix(gen, n, n), random_matrix(gen, k, n),
            Matrixd::Identity(k, k) + 0.1 * random_matrix(gen, k, k),
            GaussianBeliefd(random_matrix(gen, n, 1), Matrixd::Identity(n, n)));
        const FeatureFunctiond aff = make_affine_feature<double>(k);
        const JointMomentsd m = joint_moments(s.prior, s.model, aff, ExpectationEngine::monte_carlo(500, trial));
        const Vectord y = random_matrix(gen, k, 1, 3.0);
        const GaussianBeliefd gf = gf_update(m, y);
        const GaussianBeliefd fgf = fgf_update(fgf_solve(m), aff, y);
        EXPECT_LT((gf.mean - fgf.mean).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + gf.mean.cwiseAbs().maxCoeff()));
        EXPECT_LT((gf.cov - fgf.cov).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + gf.cov.cwiseAbs().maxCoeff()));
    }
}

TEST(FgfUpdate, HeavisideCubicFeatureAtUpperBranch)
{
    const ModelSpec s = make_heaviside_model();
    const GaussianBeliefd pred = predict(s.prior, s.model, ExpectationEngine::sigma_point());
    const FeatureFunctiond f = make_monomial_feature<double>(1, 3);
    const FgfPosteriorParamsd p =
        fgf_solve(joint_moments(pred, s.model, f, ExpectationEngine::monte_carlo(200000, 4)));
    EXPECT_GT(fgf_update(p, f, Vectord::Constant(1, 60.0)).mean[0], 0.0);

    // The grid posterior agrees that the state is on the upper branch.
    const DefaultGrids g = default_grids(s.model, pred);
    const GridDensity1D post = conditional_slice(joint_density_grid(s.model, pred, g.x, g.y), 60.0);
    double upper = 0.0;
    for (int i = 0; i < post.grid.n; ++i) {
        upper += post.grid.value(i) > 0.0 ? post.density[i] * post.grid.spacing() : 0.0;
    }
    EXPECT_GT(upper, 0.99);
}

TEST(FgfSolve, PosteriorCovarianceIsPsd)
{
    std::mt19937_64 gen(8);
    const ModelSpec nm = make_noise_magnitude_model();
    const ModelSpec hv = make_heaviside_model();
    for (int trial = 0; trial < 30; ++trial) {
        const ModelSpec& s = trial % 2 ? nm : hv;
        const GaussianBeliefd b = GaussianBeliefd::scalar(random_matrix(gen, 1, 1, 5.0)(0, 0),
                                                          0.1 + std::abs(random_matrix(gen, 1, 1)(0, 0)));
        const FeatureFunctiond f = make_monomial_feature<double>(1, 1 + trial % 3);
        const FgfPosteriorParamsd p = fgf_solve(joint_moments(b, s.model, f, ExpectationEngine::monte_carlo(2000, trial)));
        EXPECT_NO_THROW(GaussianBeliefd(Vectord::Zero(1), p.Sigma).validate());
        EXPECT_GE(p.Sigma(0, 0), 0.0);
    }
}

TEST(MonomialFeature, Examples)
{
    const FeatureFunctiond f3 = make_monomial_feature<double>(1, 3);
    Vectord e3(4);
    e3 << 1, 2, 4, 8;
    EXPECT_EQ(f3(Vectord::Constant(1, 2.0)), e3);
    EXPECT_EQ(f3.out_dim, 4);

    const FeatureFunctiond f2 = make_monomial_feature<double>(2, 2);
    Vectord y(2);
    y << 1, 3;
    Vectord e2(5);
    e2 << 1, 1, 3, 1, 9;
    EXPECT_EQ(f2(y), e2);
    EXPECT_EQ(f2.out_dim, 5);

    EXPECT_EQ(make_monomial_feature<double>(1, 1).name, "affine");
    EXPECT_EQ(make_affine_feature<double>(2).out_dim, 3);
    EXPECT_THROW(make_monomial_feature<double>(1, 0), std::invalid_argument);
    EXPECT_THROW(make_monomial_feature<double>(0, 1), std::invalid_argument);
}

TEST(NamedFeature, Library)
{
    const Vectord y = Vectord::Constant(1, -3.0);
    EXPECT_EQ(make_named_feature("abs", 1)(y), Eigen::Vector2d(1, 3));
    EXPECT_EQ(make_named_feature("square", 1)(y), Eigen::Vector2d(1, 9));
    EXPECT_EQ(make_named_feature("signed_square", 1)(y), Eigen::Vector3d(1, -3, -9));
    EXPECT_THROW(make_named_feature("nope", 1), std::invalid_argument);
}

TEST(StandardizedFeature, SpansTheSameFunctions)
{
    const ModelSpec s = make_heaviside_model();
    const auto engine = ExpectationEngine::monte_carlo(5000, 2);
    const SampleSet<double> pts = draw_samples(engine, s.prior, 1);
    const Batchd ys = observe_samples(pts, s.model);
    const FeatureFunctiond raw = make_monomial_feature<double>(1, 3);
    const FeatureFunctiond std3 = standardized_monomial(ys, pts.weights, 3);
    EXPECT_EQ(std3.name, "monomial3_std");
    const FgfPosteriorParamsd a = fgf_solve(joint_moments_from_samples(pts, ys, raw));
    const FgfPosteriorParamsd b = fgf_solve(joint_moments_from_samples(pts, ys, std3));
    for (const double y : {-5.0, 0.0, 20.0, 55.0}) {
        const Vectord yv = Vectord::Constant(1, y);
        EXPECT_NEAR(fgf_update(a, raw, yv).mean[0], fgf_update(b, std3, yv).mean[0], 1e-6);
    }
    EXPECT_NEAR(a.Sigma(0, 0), b.Sigma(0, 0), 1e-8);
}

TEST(RunFilter, EmptyMeasurementsGiveEmptyResult)
{
    const ModelSpec s = make_noise_magnitude_model();
    EXPECT_TRUE(run_filter(s.model, s.prior, make_affine_feature<double>(1), ExpectationEngine::sigma_point(),
                           Matrixd(1, 0))
                    .empty());
}

TEST(RunFilter, MatchesKalmanOnLinearModel)
{
    std::mt19937_64 gen(5);
    Matrixd a = random_matrix(gen, 3, 3);
    a *= 0.95 / a.eigenvalues().cwiseAbs().maxCoeff();
    const Matrixd b = random_matrix(gen, 3, 3, 0.5);
    const Matrixd c = random_matrix(gen, 2, 3);
    const Matrixd d = Matrixd::Identity(2, 2) + 0.2 * random_matrix(gen, 2, 2);
    const GaussianBeliefd prior(random_matrix(gen, 3, 1), 2.0 * Matrixd::Identity(3, 3));
    const ModelSpec s = make_linear_gaussian_model(a, b, c, d, prior);
    const auto traj = simulate(s.model, prior.mean, 100, 9);

    const auto posts = run_filter(s.model, prior, make_affine_feature<double>(2), ExpectationEngine::sigma_point(),
                                  traj.measurements);
    KalmanOracle kf{a, b * b.transpose(), c, d * d.transpose(), prior.mean, prior.cov};
    ASSERT_EQ(posts.size(), 100u);
    for (int t = 0; t < 100; ++t) {
        kf.step(traj.measurements.col(t));
        EXPECT_LT((posts[t].mean - kf.x).norm(), 1e-6 * (1.0 + kf.x.norm())) << "t=" << t;
        EXPECT_LT((posts[t].cov - kf.p).norm(), 1e-6 * kf.p.norm()) << "t=" << t;
    }
}

TEST(RunFilter, GfIgnoresNoiseMagnitudeMeasurements)
{
    const ModelSpec s = make_noise_magnitude_model();
    const auto traj = simulate(s.model, s.prior.mean, 200, 1);
    const auto posts =
        run_filter(s.model, s.prior, make_affine_feature<double>(1), ExpectationEngine::sigma_point(), traj.measurements);
    for (const auto& p : posts) {
        EXPECT_NEAR(p.mean[0], 5.0, 1e-12);
    }
}

TEST(RunFilter, ErrorNamesTheStep)
{
    // Measurements become non-finite once the state passes 3.5.
    StateSpaceModeld m;
    m.name = "bounded";
    m.process = [](const Batchd& x, const Batchd&) -> Batchd { return x.array() + 1.0; };
    m.observe = [](const Batchd& x, const Batchd& w) -> Batchd {
        return ((x.array() > 3.5).select(std::numeric_limits<double>::infinity(), x.array()) + w.array()).matrix();
    };
    try {
        run_filter(m, GaussianBeliefd::scalar(0.0, 0.01), make_affine_feature<double>(1), ExpectationEngine::sigma_point(),
                   Matrixd(Matrixd::Zero(1, 6)));
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(run_filter(m, GaussianBeliefd::scalar(0.0, 1.0), make_affine_feature<double>(1),
                            ExpectationEngine::sigma_point(),
                            Matrixd(Matrixd::Constant(1, 2, std::numeric_limits<double>::quiet_NaN()))),
                 std::invalid_argument);
}

TEST(RunFilterBank, MatchesIndividualRunsAndIsolatesDivergence)
{
    const ModelSpec s = make_heaviside_model();
    const auto traj = simulate(s.model, s.prior.mean, 50, 3);
    const auto engine = ExpectationEngine::monte_carlo(500, 7);

    FeatureFunctiond blowup = make_monomial_feature<double>(1, 2);
    blowup.name = "blowup";
    blowup.map = [](const Batchd& y) -> Batchd {
        Batchd out(2, y.cols());
        out.row(0).setOnes();
        out.row(1) = (20.0 * y.row(0).array()).exp().matrix();  // overflows on the upper branch
        return out;
    };
    blowup.out_dim = 2;
    const std::vector<FilterSpec<double>> specs{{make_affine_feature<double>(1), 0},
                                                {make_monomial_feature<double>(1, 3), 0},
                                                {blowup, 0}};
    const auto tracks = run_filter_bank(s.model, s.prior, specs, engine, traj.measurements);
    ASSERT_EQ(tracks.size(), 3u);
    EXPECT_FALSE(tracks[0].diverged());
    EXPECT_FALSE(tracks[1].diverged());
    EXPECT_TRUE(tracks[2].diverged());
    EXPECT_LT(tracks[2].posteriors.size(), 50u);

    for (int k = 0; k < 2; ++k) {
        const auto solo = run_filter(s.model, s.prior, specs[k].feature, engine, traj.measurements);
        ASSERT_EQ(solo.size(), tracks[k].posteriors.size());
        for (std::size_t t = 0; t < solo.size(); ++t) {
            EXPECT_EQ(solo[t].mean, tracks[k].posteriors[t].mean);
            EXPECT_EQ(solo[t].cov, tracks[k].posteriors[t].cov);
        }
    }
}

#include "fgf/oracle.hpp"

#include "fgf/expectation.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fgf {

namespace {

void require_scalar(const StateSpaceModeld& model, const char* what)
{
    if (model.state_dim != 1 || model.meas_dim != 1) {
        throw std::invalid_argument(std::string(what) + ": the grid oracle supports scalar models only");
    }
}

double normal_mass(double lo, double hi, double mean, double sd)
{
    const double s = sd * std::numbers::sqrt2;
    return 0.5 * (std::erf((hi - mean) / s) - std::erf((lo - mean) / s));
}

}  // namespace

Grid1D::Grid1D(double lo_, double hi_, int n_) : lo(lo_), hi(hi_), n(n_)
{
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("Grid1D: need finite lo < hi");
    }
    if (n < 1) {
        throw std::invalid_argument("Grid1D: need at least one cell");
    }
}

Grid1D Grid1D::centered(double mean, double sd, int n, double half_width_sds)
{
    if (!(sd > 0.0)) {
        throw std::invalid_argument("Grid1D::centered: sd must be positive");
    }
    return Grid1D(mean - half_width_sds * sd, mean + half_width_sds * sd, n);
}

Vectord Grid1D::values() const
{
    Vectord v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = value(i);
    }
    return v;
}

int Grid1D::nearest(double v) const
{
    const auto i = static_cast<long>(std::floor((v - lo) / spacing()));
    return static_cast<int>(std::clamp<long>(i, 0, n - 1));
}

double GridDensity1D::mean() const
{
    return (grid.values().array() * density.array()).sum() * grid.spacing();
}

double GridDensity1D::variance() const
{
    const double m = mean();
    return ((grid.values().array() - m).square() * density.array()).sum() * grid.spacing();
}

DefaultGrids default_grids(const StateSpaceModeld& model, const GaussianBeliefd& belief, int n)
{
    require_scalar(model, "default_grids");
    belief.validate();
    const double sd_x = std::sqrt(belief.cov(0, 0));
    // Each draw is paired with its noise-negated twin, so a measurement that is
    // odd in the noise gets an exactly symmetric grid.
    const SampleSet<double> half = draw_samples(ExpectationEngine::monte_carlo(50000, 0), belief, model.obs_noise_dim);
    const Eigen::Index n_draws = half.size();
    SampleSet<double> s;
    s.state.resize(half.state.rows(), 2 * n_draws);
    s.noise.resize(half.noise.rows(), 2 * n_draws);
    s.state << half.state, half.state;
    s.noise << half.noise, -half.noise;
    s.weights = Vectord::Constant(2 * n_draws, 0.5 / n_draws);
    const Batchd y = model.observe(s.state, s.noise);
    require_finite(y, s, "default_grids");
    const double mean_y = 0.5 * (y.leftCols(n_draws).mean() + y.rightCols(n_draws).mean());
    const double var_y = (y.array() - mean_y).square().mean();
    const double sd_y = std::sqrt(var_y);
    return {Grid1D::centered(belief.mean[0], sd_x, n), Grid1D::centered(mean_y, sd_y, n)};
}

GridDensity2D joint_density_grid(const StateSpaceModeld& model, const GaussianBeliefd& belief, const Grid1D& x_grid,
                                 const Grid1D& y_grid)
{
    require_scalar(model, "joint_density_grid");
    belief.validate();
    if (!model.likelihood) {
        throw std::invalid_argument("joint_density_grid: model '" + model.name + "' has no analytic likelihood");
    }
    const double mu = belief.mean[0];
    const double sd = std::sqrt(belief.cov(0, 0));
    const double covered = normal_mass(x_grid.lo, x_grid.hi, mu, sd);
    if (covered < 1.0 - kGridMassTolerance) {
        std::ostringstream os;
        os << "joint_density_grid: x grid [" << x_grid.lo << ", " << x_grid.hi << "] misses " << 1.0 - covered
           << " of the belief mass";
        throw GridCoverageError(os.str());
    }

    GridDensity2D out;
    out.x_grid = x_grid;
    out.y_grid = y_grid;
    out.density.resize(x_grid.n, y_grid.n);
    const auto& likelihood = *model.likelihood;
    Vectord xv(1);
    Vectord yv(1);
    double prior_total = 0.0;
    for (int i = 0; i < x_grid.n; ++i) {
        xv[0] = x_grid.value(i);
        const double prior = normal_pdf(xv[0], mu, sd);
        prior_total += prior;
        for (int j = 0; j < y_grid.n; ++j) {
            yv[0] = y_grid.value(j);
            out.density(i, j) = likelihood(yv, xv) * prior;
        }
    }
    if (!out.density.allFinite()) {
        throw NumericalError("joint_density_grid: non-finite likelihood on the grid");
    }
    const double total = out.density.sum() * out.cell_area();
    const double expected = prior_total * x_grid.spacing();
    if (!(total > 0.0) || total < (1.0 - kGridMassTolerance) * expected) {
        std::ostringstream os;
        os << "joint_density_grid: y grid [" << y_grid.lo << ", " << y_grid.hi << "] misses "
           << 1.0 - total / expected << " of the likelihood mass";
        throw GridCoverageError(os.str());
    }
    out.density /= total;
    return out;
}

GridDensity1D conditional_slice(const GridDensity2D& joint, double y)
{
    if (!(y >= joint.y_grid.lo && y <= joint.y_grid.hi)) {
        throw std::invalid_argument("conditional_slice: y outside the grid range");
    }
    const int j = joint.y_grid.nearest(y);
    GridDensity1D out;
    out.grid = joint.x_grid;
    out.density = joint.density.col(j);
    const double mass = out.density.sum() * out.grid.spacing();
    if (!(mass > 0.0)) {
        throw NumericalError("conditional_slice: no probability mass at y = " + std::to_string(y)
                             + " (outside the model support at this grid resolution)");
    }
    out.density /= mass;
    return out;
}

JointMomentsd grid_joint_moments(const GridDensity2D& joint, const FeatureFunctiond& feature)
{
    feature.validate();
    if (feature.meas_dim != 1) {
        throw std::invalid_argument("grid_joint_moments: scalar measurement feature required");
    }
    const double area = joint.cell_area();
    const Vectord xs = joint.x_grid.values();
    const Batchd ys = joint.y_grid.values().transpose();
    const Batchd phi = feature.map(ys);  // k x n_y

    // Per-column mass and first x moment.
    const Vectord col_mass = joint.density.colwise().sum().transpose() * area;
    const Vectord row_mass = joint.density.rowwise().sum() * area;
    const Vectord col_x = (joint.density.transpose() * xs) * area;

    JointMomentsd m;
    m.mu_x = Vectord::Constant(1, row_mass.dot(xs));
    m.mu_f = phi * col_mass;
    m.mu_f[0] = 1.0;
    m.S_xx = Matrixd::Constant(1, 1, ((xs.array() - m.mu_x[0]).square() * row_mass.array()).sum());
    const Batchd centered_phi = phi.colwise() - m.mu_f;
    const Batchd weighted_phi = (centered_phi.array().rowwise() * col_mass.transpose().array()).matrix();
    m.S_ff = symmetrized(Matrixd(weighted_phi * centered_phi.transpose()));
    m.S_ff.row(0).setZero();
    m.S_ff.col(0).setZero();
    // sum_j (E[x; col j] - mu_x * mass_j) (phi_j - mu_f)^T
    const Vectord col_dev = col_x - m.mu_x[0] * col_mass;
    m.S_xf = (centered_phi * col_dev).transpose();
    m.S_xf(0, 0) = 0.0;
    return m;
}

double kl_conditional(const GridDensity2D& joint, const FgfPosteriorParamsd& params, const FeatureFunctiond& feature)
{
    if (params.Gamma.rows() != 1 || params.Sigma.rows() != 1 || params.Gamma.cols() != feature.out_dim) {
        throw std::invalid_argument("kl_conditional: scalar-state parameters matching the feature required");
    }
    const double var = params.Sigma(0, 0);
    if (!(var > 0.0)) {
        throw NumericalError("kl_conditional: q(x|y) has non-positive variance");
    }
    const double area = joint.cell_area();
    const Vectord xs = joint.x_grid.values();
    const Batchd ys = joint.y_grid.values().transpose();
    const RowVector<double> q_mean = params.Gamma * feature.map(ys);
    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * var);

    double kl = 0.0;
    for (int j = 0; j < joint.y_grid.n; ++j) {
        const double mq = q_mean[j];
        double col = 0.0;
        for (int i = 0; i < joint.x_grid.n; ++i) {
            const double p = joint.density(i, j);
            if (p > 0.0) {
                const double r = xs[i] - mq;
                col += p * (std::log(p) - log_norm + 0.5 * r * r / var);
            }
        }
        kl += col;
    }
    return kl * area;
}

double gaussian_moment_oracle(double mean, double var, int k)
{
    if (var < 0.0) {
        throw std::invalid_argument("gaussian_moment_oracle: negative variance");
    }
    if (k < 0 || k > 8) {
        throw std::invalid_argument("gaussian_moment_oracle: order must be in [0, 8]");
    }
    double prev = 1.0;  // E[X^0]
    if (k == 0) {
        return prev;
    }
    double cur = mean;  // E[X^1]
    for (int j = 2; j <= k; ++j) {
        const double next = mean * cur + (j - 1) * var * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace fgf

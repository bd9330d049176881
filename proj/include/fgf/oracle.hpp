// oracle.hpp
//
// Brute-force ground truth for scalar models: the joint density p(x, y) on a
// tensor grid, exact conditionals p(x | y) by slicing it, and the
// joint-versus-conditional objective
//
//   KL[p(x, y) | q(x | y)] = sum over cells of p log(p / q) dA
//
// evaluated by Riemann sum. The value carries a constant that does not depend
// on q (the conditional entropy of p), so only differences between q's are
// meaningful.
#pragma once

#include "fgf/builtin_models.hpp"
#include "fgf/core.hpp"
#include "fgf/feature.hpp"
#include "fgf/filter.hpp"

#include <stdexcept>

namespace fgf {

/// The grid misses more probability mass than the oracle tolerates.
class GridCoverageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kGridMassTolerance = 1e-3;
inline constexpr int kDefaultGridPoints = 2001;

/// n uniform cells on [lo, hi]; values are the cell centers.
struct Grid1D {
    double lo = 0.0;
    double hi = 1.0;
    int n = 1;

    Grid1D() = default;
    Grid1D(double lo_, double hi_, int n_);

    /// mean +- half_width_sds * sd.
    static Grid1D centered(double mean, double sd, int n, double half_width_sds = 6.0);

    double spacing() const { return (hi - lo) / n; }
    double value(int i) const { return lo + (i + 0.5) * spacing(); }
    Vectord values() const;
    /// Index of the cell containing v, clamped to the grid.
    int nearest(double v) const;
};

/// density(i, j) = p(x_i, y_j); sum(density) * cell_area() == 1.
struct GridDensity2D {
    Grid1D x_grid;
    Grid1D y_grid;
    Matrixd density;

    double cell_area() const { return x_grid.spacing() * y_grid.spacing(); }
};

/// Density over a 1-D grid, normalized so that sum * spacing == 1.
struct GridDensity1D {
    Grid1D grid;
    Vectord density;

    double mean() const;
    double variance() const;
};

struct DefaultGrids {
    Grid1D x;
    Grid1D y;
};

/**
 * x grid: belief mean +- 6 sd. y grid: measurement marginal mean +- 6 sd,
 * with the marginal moments taken from a fixed-seed 10^5-sample Monte Carlo
 * pass (noise-antithetic pairs). Scalar models only.
 */
DefaultGrids default_grids(const StateSpaceModeld& model, const GaussianBeliefd& belief, int n = kDefaultGridPoints);

/**
 * p(x_i, y_j) proportional to likelihood(y_j | x_i) * N(x_i | belief), normalized.
 * Throws GridCoverageError when the x grid misses more than 1e-3 of the belief
 * mass or the y grid misses more than 1e-3 of the likelihood mass.
 */
GridDensity2D joint_density_grid(const StateSpaceModeld& model, const GaussianBeliefd& belief, const Grid1D& x_grid,
                                 const Grid1D& y_grid);

/// p(x | y) from the grid column nearest to y.
GridDensity1D conditional_slice(const GridDensity2D& joint, double y);

/// Central moments of (x, phi(y)) under the grid joint.
JointMomentsd grid_joint_moments(const GridDensity2D& joint, const FeatureFunctiond& feature);

/// Riemann sum of p log(p / q) with q(x | y) = N(x | Gamma phi(y), Sigma).
double kl_conditional(const GridDensity2D& joint, const FgfPosteriorParamsd& params, const FeatureFunctiond& feature);

/// E[X^k] for X ~ N(mean, var), k <= 8, by E[X^k] = mean E[X^(k-1)] + (k-1) var E[X^(k-2)].
double gaussian_moment_oracle(double mean, double var, int k);

}  // namespace fgf

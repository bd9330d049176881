// bench.hpp
//
// Experiment runners for the two scalar benchmark systems. One experiment
// draws the true initial state from the prior, simulates the system, and runs
// the GF (monomial order 1) together with FGFs of the requested orders over the
// same measurements with common random numbers.
//
// RMSE is sqrt(mean over steps of (posterior mean - true state)^2). The
// "near" and "far" variants restrict the steps to |x| < 5 and |x| > 10.
//
// CSV layout in an output directory:
//   report_<model>_<order>.csv  seed,t,x,y,gf_mean,gf_std,fgf_mean,fgf_std
//   summary.csv                 one row per (seed, order), see write_summary_csv
// Rows are ordered by (seed, t) / (seed, order). Wall-clock times are never
// written to CSV so reruns are byte-identical.
#pragma once

#include "fgf/builtin_models.hpp"
#include "fgf/expectation.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fgf {

inline constexpr double kNearBand = 5.0;
inline constexpr double kFarBand = 10.0;

struct ExperimentOptions {
    int steps = 1000;
    std::uint64_t seed = 0;
    ExpectationEngine engine = ExpectationEngine::monte_carlo(10000, 0);
    std::vector<int> orders;  ///< FGF monomial orders; order 1 (the GF) always runs
    bool standardize = false; ///< monomials on y standardized by the predicted moments
};

struct FilterRun {
    int order = 1;
    Vectord mean;  ///< NaN after divergence
    Vectord sd;
    std::string error;  ///< empty unless the filter diverged

    double rmse = 0.0;
    double rmse_near = 0.0;  ///< NaN when no step qualifies
    double rmse_far = 0.0;
    int n_near = 0;
    int n_far = 0;

    bool diverged() const { return !error.empty(); }
};

struct ExperimentReport {
    std::string model;
    std::uint64_t seed = 0;
    std::string engine;
    Vectord states;
    Vectord measurements;
    std::vector<FilterRun> runs;  ///< order 1 first, then the requested orders
    double runtime_seconds = 0.0;

    /// The run of a given order; throws std::out_of_range when absent.
    const FilterRun& run(int order) const;
    const FilterRun& gf() const { return run(1); }
};

/// Runs one experiment on a scalar model.
ExperimentReport run_experiment(const ModelSpec& spec, const ExperimentOptions& opts);

/// Noise-magnitude system; orders default to {2}.
ExperimentReport run_noise_experiment(ExperimentOptions opts, const NoiseMagnitudeParams& params = {});

/// Heaviside system; orders default to {3}.
ExperimentReport run_heaviside_experiment(ExperimentOptions opts, const HeavisideParams& params = {});

/// Seeds first_seed, first_seed + 1, ... in order.
std::vector<ExperimentReport> run_seeds(const ModelSpec& spec, const ExperimentOptions& opts, int seeds,
                                        std::uint64_t first_seed = 0);

/// RMSE of mean against truth over the steps where mask is set; NaN if none.
double masked_rmse(const Vectord& mean, const Vectord& truth, const std::vector<bool>& mask);

void write_report_csv(const std::filesystem::path& file, const std::vector<ExperimentReport>& reports, int order);

/// seed,order,rmse_gf,rmse_fgf,rmse_near_gf,rmse_near_fgf,n_near,rmse_far_gf,rmse_far_fgf,n_far,engine,status
void write_summary_csv(const std::filesystem::path& file, const std::vector<ExperimentReport>& reports);

/// report_<model>_<order>.csv for every order plus summary.csv; returns the files written.
std::vector<std::filesystem::path> write_experiment_csvs(const std::filesystem::path& dir,
                                                         const std::vector<ExperimentReport>& reports);

}  // namespace fgf

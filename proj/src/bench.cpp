#include "fgf/bench.hpp"

#include "fgf/feature.hpp"
#include "fgf/filter.hpp"
#include "fgf/model.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace fgf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> run_orders(const std::vector<int>& requested)
{
    std::vector<int> orders{1};
    std::set<int> seen{1};
    for (int k : requested) {
        if (k < 1) {
            throw std::invalid_argument("experiment: feature orders must be >= 1");
        }
        if (seen.insert(k).second) {
            orders.push_back(k);
        }
    }
    return orders;
}

void score(FilterRun& run, const Vectord& truth)
{
    const auto n = static_cast<std::size_t>(truth.size());
    std::vector<bool> all(n, true), near(n), far(n);
    for (std::size_t t = 0; t < n; ++t) {
        near[t] = std::abs(truth[t]) < kNearBand;
        far[t] = std::abs(truth[t]) > kFarBand;
    }
    run.n_near = static_cast<int>(std::count(near.begin(), near.end(), true));
    run.n_far = static_cast<int>(std::count(far.begin(), far.end(), true));
    run.rmse = masked_rmse(run.mean, truth, all);
    run.rmse_near = masked_rmse(run.mean, truth, near);
    run.rmse_far = masked_rmse(run.mean, truth, far);
}

std::ofstream open_csv(const std::filesystem::path& file)
{
    std::ofstream out(file);
    if (!out) {
        throw std::runtime_error("cannot write '" + file.string() + "'");
    }
    out.precision(17);
    return out;
}

}  // namespace

const FilterRun& ExperimentReport::run(int order) const
{
    for (const auto& r : runs) {
        if (r.order == order) {
            return r;
        }
    }
    throw std::out_of_range("experiment report has no run of order " + std::to_string(order));
}

double masked_rmse(const Vectord& mean, const Vectord& truth, const std::vector<bool>& mask)
{
    if (mean.size() != truth.size() || static_cast<std::size_t>(truth.size()) != mask.size()) {
        throw std::invalid_argument("masked_rmse: size mismatch");
    }
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index t = 0; t < truth.size(); ++t) {
        if (mask[static_cast<std::size_t>(t)]) {
            const double e = mean[t] - truth[t];
            sum += e * e;
            ++count;
        }
    }
    return count == 0 ? kNaN : std::sqrt(sum / count);
}

ExperimentReport run_experiment(const ModelSpec& spec, const ExperimentOptions& opts)
{
    if (opts.steps < 1) {
        throw std::invalid_argument("experiment: steps must be >= 1");
    }
    if (spec.model.state_dim != 1 || spec.model.meas_dim != 1) {
        throw std::invalid_argument("experiment: scalar models only");
    }
    opts.engine.validate();
    const auto start = std::chrono::steady_clock::now();

    // Independent streams for the initial state, the simulation and the filters.
    NormalRng init_rng(mix_seed(opts.seed, 0));
    const Vectord x1 = spec.prior.mean + symmetric_sqrt(spec.prior.cov) * init_rng.normal_vector(1);
    const Trajectory<double> traj = simulate(spec.model, x1, opts.steps, mix_seed(opts.seed, 1));
    ExpectationEngine engine = opts.engine;
    engine.seed = mix_seed(mix_seed(opts.seed, 2), opts.engine.seed);

    const std::vector<int> orders = run_orders(opts.orders);
    std::vector<FilterSpec<double>> specs;
    for (int k : orders) {
        // Order 1 is the GF itself: standardizing an affine feature changes nothing.
        const bool standardize = opts.standardize && k > 1;
        specs.push_back({make_monomial_feature<double>(1, k), standardize ? k : 0});
    }
    const auto tracks = run_filter_bank(spec.model, spec.prior, specs, engine, traj.measurements);

    ExperimentReport report;
    report.model = spec.model.name;
    report.seed = opts.seed;
    report.engine = opts.engine.describe() + (opts.standardize ? "+standardized" : "");
    report.states = traj.states.row(0).transpose();
    report.measurements = traj.measurements.row(0).transpose();
    for (std::size_t i = 0; i < orders.size(); ++i) {
        FilterRun run;
        run.order = orders[i];
        run.mean = Vectord::Constant(opts.steps, kNaN);
        run.sd = Vectord::Constant(opts.steps, kNaN);
        const auto& posts = tracks[i].posteriors;
        for (std::size_t t = 0; t < posts.size(); ++t) {
            run.mean[static_cast<Eigen::Index>(t)] = posts[t].mean[0];
            run.sd[static_cast<Eigen::Index>(t)] = std::sqrt(posts[t].cov(0, 0));
        }
        run.error = tracks[i].error;
        score(run, report.states);
        report.runs.push_back(std::move(run));
    }
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

ExperimentReport run_noise_experiment(ExperimentOptions opts, const NoiseMagnitudeParams& params)
{
    if (opts.orders.empty()) {
        opts.orders = {2};
    }
    return run_experiment(make_noise_magnitude_model(params), opts);
}

ExperimentReport run_heaviside_experiment(ExperimentOptions opts, const HeavisideParams& params)
{
    if (opts.orders.empty()) {
        opts.orders = {3};
    }
    return run_experiment(make_heaviside_model(params), opts);
}

std::vector<ExperimentReport> run_seeds(const ModelSpec& spec, const ExperimentOptions& opts, int seeds,
                                        std::uint64_t first_seed)
{
    if (seeds < 1) {
        throw std::invalid_argument("run_seeds: need at least one seed");
    }
    std::vector<ExperimentReport> out;
    out.reserve(static_cast<std::size_t>(seeds));
    for (int i = 0; i < seeds; ++i) {
        ExperimentOptions o = opts;
        o.seed = first_seed + static_cast<std::uint64_t>(i);
        out.push_back(run_experiment(spec, o));
    }
    return out;
}

void write_report_csv(const std::filesystem::path& file, const std::vector<ExperimentReport>& reports, int order)
{
    std::ofstream out = open_csv(file);
    out << "seed,t,x,y,gf_mean,gf_std,fgf_mean,fgf_std\n";
    for (const auto& rep : reports) {
        const FilterRun& gf = rep.gf();
        const FilterRun& fgf = rep.run(order);
        for (Eigen::Index t = 0; t < rep.states.size(); ++t) {
            out << rep.seed << ',' << t << ',' << rep.states[t] << ',' << rep.measurements[t] << ',' << gf.mean[t]
                << ',' << gf.sd[t] << ',' << fgf.mean[t] << ',' << fgf.sd[t] << '\n';
        }
    }
}

void write_summary_csv(const std::filesystem::path& file, const std::vector<ExperimentReport>& reports)
{
    std::ofstream out = open_csv(file);
    out << "seed,order,rmse_gf,rmse_fgf,rmse_near_gf,rmse_near_fgf,n_near,rmse_far_gf,rmse_far_fgf,n_far,engine,"
           "status\n";
    for (const auto& rep : reports) {
        const FilterRun& gf = rep.gf();
        for (const auto& run : rep.runs) {
            std::string status = "ok";
            if (run.diverged()) {
                status = "fgf diverged at " + run.error;
            } else if (gf.diverged()) {
                status = "gf diverged at " + gf.error;
            }
            // Keep the CSV one field per column.
            for (char& c : status) {
                if (c == ',' || c == '\n') {
                    c = ';';
                }
            }
            out << rep.seed << ',' << run.order << ',' << gf.rmse << ',' << run.rmse << ',' << gf.rmse_near << ','
                << run.rmse_near << ',' << run.n_near << ',' << gf.rmse_far << ',' << run.rmse_far << ','
                << run.n_far << ',' << rep.engine << ',' << status << '\n';
        }
    }
}

std::vector<std::filesystem::path> write_experiment_csvs(const std::filesystem::path& dir,
                                                         const std::vector<ExperimentReport>& reports)
{
    if (reports.empty()) {
        throw std::invalid_argument("write_experiment_csvs: no reports");
    }
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;
    for (const auto& run : reports.front().runs) {
        files.push_back(dir / ("report_" + reports.front().model + "_" + std::to_string(run.order) + ".csv"));
        write_report_csv(files.back(), reports, run.order);
    }
    files.push_back(dir / "summary.csv");
    write_summary_csv(files.back(), reports);
    return files;
}

}  // namespace fgf

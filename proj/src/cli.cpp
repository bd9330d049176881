#include "fgf/cli.hpp"

#include "fgf/bench.hpp"
#include "fgf/config.hpp"
#include "fgf/filter.hpp"
#include "fgf/oracle.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>

namespace fgf {

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::string> model;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
};

struct SimulateArgs {
    std::optional<int> steps;
    std::optional<std::string> orders;
    std::optional<int> seeds;
    std::optional<int> samples;
    std::optional<std::string> engine;
    bool standardize = false;
};

struct DensityArgs {
    std::optional<std::string> y_range;
    int grid_n = kDefaultGridPoints;
    int stride = 10;
    std::optional<int> order;
    std::string moments = "grid";
};

struct KlArgs {
    std::string orders = "1,2,3";
    int grid_n = kDefaultGridPoints;
};

void add_common(CLI::App* sub, CommonArgs& a)
{
    sub->add_option("--config", a.config_path, "key = value configuration file");
    sub->add_option("--model", a.model, "noise_magnitude | heaviside");
    sub->add_option("--seed", a.seed, "experiment seed (also the engine seed base)");
    sub->add_option("--out", a.out_dir, "output directory")->capture_default_str();
}

/// defaults < config file < command-line flags
Config resolve_config(const CommonArgs& a)
{
    Config cfg = a.config_path.empty() ? Config{} : Config::load(a.config_path);
    if (a.model) {
        cfg.set("model", *a.model);
    }
    if (a.seed) {
        cfg.set("experiment.seed", std::to_string(*a.seed));
    }
    return cfg;
}

int default_order(const std::string& model) { return model == "heaviside" ? 3 : 2; }

std::ofstream open_out(const std::filesystem::path& file)
{
    std::ofstream out(file);
    if (!out) {
        throw ConfigError("cannot write '" + file.string() + "'");
    }
    out.precision(17);
    return out;
}

int cmd_simulate(const CommonArgs& common, const SimulateArgs& a, std::ostream& out)
{
    Config cfg = resolve_config(common);
    if (a.steps) {
        cfg.set("experiment.steps", std::to_string(*a.steps));
    }
    if (a.orders) {
        cfg.set("experiment.orders", *a.orders);
    }
    if (a.seeds) {
        cfg.set("experiment.seeds", std::to_string(*a.seeds));
    }
    if (a.samples) {
        cfg.set("engine.samples", std::to_string(*a.samples));
    }
    if (a.engine) {
        cfg.set("engine.kind", *a.engine);
    }
    if (a.standardize) {
        cfg.set("feature.standardize", "true");
    }

    const ModelSpec spec = model_from_config(cfg);
    ExperimentOptions opts;
    opts.steps = static_cast<int>(cfg.get_int("experiment.steps", 1000));
    if (opts.steps < 1) {
        throw ConfigError("steps must be >= 1");
    }
    opts.engine = engine_from_config(cfg);
    opts.orders = cfg.get_int_list("experiment.orders", {1, default_order(spec.model.name)});
    opts.standardize = cfg.get_bool("feature.standardize", false);
    const auto seeds = cfg.get_int("experiment.seeds", 1);
    if (seeds < 1) {
        throw ConfigError("seeds must be >= 1");
    }
    const auto first_seed = static_cast<std::uint64_t>(cfg.get_int("experiment.seed", 0));

    const auto reports = run_seeds(spec, opts, static_cast<int>(seeds), first_seed);
    const auto files = write_experiment_csvs(common.out_dir, reports);

    double runtime = 0.0;
    int diverged = 0;
    for (const auto& r : reports) {
        runtime += r.runtime_seconds;
        for (const auto& run : r.runs) {
            diverged += run.diverged() ? 1 : 0;
        }
    }
    out << spec.model.name << ": " << reports.size() << " seed(s) x " << opts.steps << " steps, "
        << opts.engine.describe() << ", runtime " << std::fixed << std::setprecision(2) << runtime << " s"
        << std::defaultfloat << "\n";
    if (reports.size() == 1) {
        for (const auto& run : reports.front().runs) {
            out << "  order " << run.order << ": rmse " << run.rmse << (run.diverged() ? "  (diverged)" : "") << "\n";
        }
    }
    if (diverged > 0) {
        out << "  " << diverged << " filter run(s) diverged, see summary.csv\n";
    }
    for (const auto& f : files) {
        out << "wrote " << f.string() << "\n";
    }
    return 0;
}

/// Grids covering the default ranges and, for y, the requested range.
DefaultGrids density_grids(const ModelSpec& spec, const GaussianBeliefd& belief, int n,
                           const std::optional<std::pair<double, double>>& y_range)
{
    DefaultGrids g = default_grids(spec.model, belief, n);
    if (y_range) {
        g.y = Grid1D(std::min(g.y.lo, y_range->first), std::max(g.y.hi, y_range->second), n);
    }
    return g;
}

std::pair<double, double> parse_range(const std::string& text)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw ConfigError("--y-range expects lo,hi");
    }
    Config c;
    c.set("lo", text.substr(0, comma));
    c.set("hi", text.substr(comma + 1));
    const double lo = c.get_double("lo", 0.0);
    const double hi = c.get_double("hi", 0.0);
    if (!(lo < hi)) {
        throw ConfigError("--y-range needs lo < hi");
    }
    return {lo, hi};
}

/// Moments of (x, phi(y)) from the grid joint or from the configured engine.
JointMomentsd density_moments(const std::string& source, const GridDensity2D& joint, const ModelSpec& spec,
                              const GaussianBeliefd& belief, const FeatureFunctiond& feature,
                              const ExpectationEngine& engine)
{
    if (source == "grid") {
        return grid_joint_moments(joint, feature);
    }
    if (source == "engine") {
        return joint_moments(belief, spec.model, feature, engine);
    }
    throw ConfigError("--moments must be grid or engine");
}

double gauss(double x, double mean, double var) { return normal_pdf(x, mean, std::sqrt(var)); }

int cmd_density(const CommonArgs& common, const DensityArgs& a, std::ostream& out)
{
    const Config cfg = resolve_config(common);
    const ModelSpec spec = model_from_config(cfg);
    if (a.grid_n < 2 || a.stride < 1) {
        throw ConfigError("--grid-n must be >= 2 and --stride >= 1");
    }
    const int order = a.order.value_or(static_cast<int>(cfg.get_int("feature.order", default_order(spec.model.name))));
    const std::optional<std::pair<double, double>> y_range =
        a.y_range ? std::optional(parse_range(*a.y_range)) : std::nullopt;

    // The densities are those of the first update: prior pushed through one
    // prediction (exact for the built-ins, whose process models are linear).
    const GaussianBeliefd belief = predict(spec.prior, spec.model, ExpectationEngine::sigma_point());
    const DefaultGrids grids = density_grids(spec, belief, a.grid_n, y_range);
    const GridDensity2D joint = joint_density_grid(spec.model, belief, grids.x, grids.y);

    const ExpectationEngine engine = engine_from_config(cfg);
    const FeatureFunctiond affine = make_affine_feature<double>(1);
    const FeatureFunctiond feature = make_monomial_feature<double>(1, order);
    const FgfPosteriorParamsd gf = fgf_solve(density_moments(a.moments, joint, spec, belief, affine, engine));
    const FgfPosteriorParamsd fgf = fgf_solve(density_moments(a.moments, joint, spec, belief, feature, engine));

    std::filesystem::create_directories(common.out_dir);
    const auto density_file = std::filesystem::path(common.out_dir) / ("density_" + spec.model.name + ".csv");
    const auto means_file = std::filesystem::path(common.out_dir) / ("density_means_" + spec.model.name + ".csv");
    std::ofstream dens = open_out(density_file);
    std::ofstream means = open_out(means_file);
    dens << "y,x,p,q_gf,q_fgf\n";
    means << "y,mean_exact,mean_gf,mean_fgf\n";

    const auto [lo, hi] = y_range.value_or(std::pair{grids.y.lo, grids.y.hi});
    int rows = 0;
    for (int j = 0; j < grids.y.n; j += a.stride) {
        const double y = grids.y.value(j);
        if (y < lo || y > hi) {
            continue;
        }
        const Vectord yv = Vectord::Constant(1, y);
        const GaussianBeliefd q_gf = fgf_update(gf, affine, yv);
        const GaussianBeliefd q_fgf = fgf_update(fgf, feature, yv);
        double mean_exact = std::numeric_limits<double>::quiet_NaN();
        std::optional<GridDensity1D> slice;
        try {
            slice = conditional_slice(joint, y);
            mean_exact = slice->mean();
        } catch (const NumericalError&) {
            // No mass at this y on the grid; the exact conditional is undefined.
        }
        means << y << ',' << mean_exact << ',' << q_gf.mean[0] << ',' << q_fgf.mean[0] << '\n';
        for (int i = 0; i < grids.x.n; i += a.stride) {
            const double x = grids.x.value(i);
            const double p = slice ? slice->density[i] : std::numeric_limits<double>::quiet_NaN();
            dens << y << ',' << x << ',' << p << ',' << gauss(x, q_gf.mean[0], q_gf.cov(0, 0)) << ','
                 << gauss(x, q_fgf.mean[0], q_fgf.cov(0, 0)) << '\n';
        }
        ++rows;
    }
    out << spec.model.name << ": " << rows << " y slices, feature order " << order << ", moments from " << a.moments
        << "\nwrote " << density_file.string() << "\nwrote " << means_file.string() << "\n";
    return 0;
}

int cmd_kl(const CommonArgs& common, const KlArgs& a, std::ostream& out)
{
    const Config cfg = resolve_config(common);
    const ModelSpec spec = model_from_config(cfg);
    const std::vector<int> orders = parse_int_list(a.orders);
    if (a.grid_n < 2) {
        throw ConfigError("--grid-n must be >= 2");
    }
    const GaussianBeliefd belief = predict(spec.prior, spec.model, ExpectationEngine::sigma_point());
    const DefaultGrids grids = default_grids(spec.model, belief, a.grid_n);
    const GridDensity2D joint = joint_density_grid(spec.model, belief, grids.x, grids.y);

    std::filesystem::create_directories(common.out_dir);
    const auto file = std::filesystem::path(common.out_dir) / ("kl_" + spec.model.name + ".csv");
    std::ofstream csv = open_out(file);
    csv << "order,kl,sigma\n";
    out << spec.model.name << " (KL up to a constant independent of the feature)\n";
    for (int k : orders) {
        if (k < 1) {
            throw ConfigError("orders must be >= 1");
        }
        const FeatureFunctiond feature = make_monomial_feature<double>(1, k);
        const FgfPosteriorParamsd params = fgf_solve(grid_joint_moments(joint, feature));
        const double kl = kl_conditional(joint, params, feature);
        csv << k << ',' << kl << ',' << params.Sigma(0, 0) << '\n';
        out << "  order " << k << ": " << std::setprecision(10) << kl << "\n";
    }
    out << "wrote " << file.string() << "\n";
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Gaussian filter and feature Gaussian filter experiments"};
    app.require_subcommand(1);

    CommonArgs common;
    SimulateArgs sim;
    DensityArgs dens;
    KlArgs kl;

    CLI::App* simulate = app.add_subcommand("simulate", "run filter experiments and write report CSVs");
    add_common(simulate, common);
    simulate->add_option("--steps", sim.steps, "time steps per experiment (default 1000)");
    simulate->add_option("--orders", sim.orders, "comma-separated monomial orders, e.g. 1,2");
    simulate->add_option("--seeds", sim.seeds, "number of consecutive seeds (default 1)");
    simulate->add_option("--samples", sim.samples, "Monte Carlo sample count (default 10000)");
    simulate->add_option("--engine", sim.engine, "monte_carlo | sigma_point");
    simulate->add_flag("--standardize", sim.standardize, "standardize monomial features per step");

    CLI::App* density = app.add_subcommand("density", "grid densities p(x|y) with GF/FGF fits");
    add_common(density, common);
    density->add_option("--y-range", dens.y_range, "lo,hi range of measurements to export");
    density->add_option("--grid-n", dens.grid_n, "grid points per axis")->capture_default_str();
    density->add_option("--stride", dens.stride, "export every n-th grid point")->capture_default_str();
    density->add_option("--order", dens.order, "FGF monomial order");
    density->add_option("--moments", dens.moments, "grid | engine")->capture_default_str();

    CLI::App* klcmd = app.add_subcommand("kl", "KL objective for each feature order");
    add_common(klcmd, common);
    klcmd->add_option("--orders", kl.orders, "comma-separated monomial orders")->capture_default_str();
    klcmd->add_option("--grid-n", kl.grid_n, "grid points per axis")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(common, sim, out);
        }
        if (density->parsed()) {
            return cmd_density(common, dens, out);
        }
        return cmd_kl(common, kl, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const GridCoverageError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fgf

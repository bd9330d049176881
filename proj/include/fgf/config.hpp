// config.hpp
//
// Plain-text "key = value" configuration, one pair per line, '#' starts a
// comment. Recognized keys:
//
//   model                 noise_magnitude | heaviside
//   prior.mean, prior.var
//   model.noise_scale     noise_magnitude process noise scale
//   model.step_height     heaviside step height
//   engine.kind           monte_carlo | sigma_point
//   engine.samples, engine.seed, engine.kappa
//   feature.kind          affine | monomial | abs | square | signed_square
//   feature.order, feature.standardize
//   experiment.steps, experiment.seed, experiment.seeds, experiment.orders
//
// Unset keys keep the model/experiment defaults.
#pragma once

#include "fgf/builtin_models.hpp"
#include "fgf/expectation.hpp"
#include "fgf/feature.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgf {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// "1,2,3" -> {1, 2, 3}.
std::vector<int> parse_int_list(const std::string& text);

ModelSpec model_from_config(const Config& cfg);

/// Default: monte_carlo with 10000 samples.
ExpectationEngine engine_from_config(const Config& cfg);

/// feature.kind / feature.order for a model with the given measurement dimension.
FeatureFunctiond feature_from_config(const Config& cfg, Eigen::Index meas_dim);

}  // namespace fgf

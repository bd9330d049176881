#include "fgf/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fgf {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
    }
    return value;
}

}  // namespace

Config Config::parse(const std::string& text)
{
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        }
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const
{
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return fallback;
    }
    // from_chars for double is missing from older libstdc++ releases.
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != it->second.size()) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + it->second + "'");
    }
    return v;
}

long long Config::get_int(const std::string& key, long long fallback) const
{
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<long long>(key, it->second);
}

bool Config::get_bool(const std::string& key, bool fallback) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return fallback;
    }
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            throw ConfigError("empty entry in list '" + text + "'");
        }
        out.push_back(parse_number<int>("list", item));
    }
    if (out.empty()) {
        throw ConfigError("empty list");
    }
    return out;
}

std::vector<int> Config::get_int_list(const std::string& key, const std::vector<int>& fallback) const
{
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_int_list(it->second);
}

ModelSpec model_from_config(const Config& cfg)
{
    const std::string name = cfg.get_string("model", "noise_magnitude");
    if (name == "noise_magnitude") {
        NoiseMagnitudeParams p;
        p.prior_mean = cfg.get_double("prior.mean", p.prior_mean);
        p.prior_var = cfg.get_double("prior.var", p.prior_var);
        p.process_noise_scale = cfg.get_double("model.noise_scale", p.process_noise_scale);
        return make_noise_magnitude_model(p);
    }
    if (name == "heaviside") {
        HeavisideParams p;
        p.prior_mean = cfg.get_double("prior.mean", p.prior_mean);
        p.prior_var = cfg.get_double("prior.var", p.prior_var);
        p.step_height = cfg.get_double("model.step_height", p.step_height);
        return make_heaviside_model(p);
    }
    throw ConfigError("unknown model '" + name + "' (known: noise_magnitude, heaviside)");
}

ExpectationEngine engine_from_config(const Config& cfg)
{
    const std::string kind = cfg.get_string("engine.kind", "monte_carlo");
    ExpectationEngine e;
    if (kind == "monte_carlo") {
        const long long n = cfg.get_int("engine.samples", 10000);
        if (n < 2 || n > 100000000) {
            throw ConfigError("engine.samples must be in [2, 1e8]");
        }
        e = ExpectationEngine::monte_carlo(static_cast<int>(n), 0);
    } else if (kind == "sigma_point") {
        e = ExpectationEngine::sigma_point(cfg.get_double("engine.kappa", 0.0));
    } else {
        throw ConfigError("unknown engine.kind '" + kind + "' (known: monte_carlo, sigma_point)");
    }
    e.seed = static_cast<std::uint64_t>(cfg.get_int("engine.seed", 0));
    try {
        e.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    return e;
}

FeatureFunctiond feature_from_config(const Config& cfg, Eigen::Index meas_dim)
{
    const std::string kind = cfg.get_string("feature.kind", "monomial");
    try {
        if (kind == "affine") {
            return make_affine_feature<double>(meas_dim);
        }
        if (kind == "monomial") {
            return make_monomial_feature<double>(meas_dim, static_cast<int>(cfg.get_int("feature.order", 2)));
        }
        return make_named_feature(kind, meas_dim);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("feature: ") + ex.what());
    }
}

}  // namespace fgf

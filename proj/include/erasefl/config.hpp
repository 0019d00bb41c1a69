// JSON experiment configuration.
//
// Units are explicit: SNR is given in dB and converted to linear scale
// internally, rates are decimals in (0, 1], the time budget counts symbol
// durations.  Sample file:
//
//   {
//     "users": 10,
//     "samples_per_user": 100,
//     "interval_width": 0.2,
//     "noise_variance": 5.0,
//     "feature_degree": 2,
//     "learning_rate": 0.05,
//     "local_iterations": 1,
//     "scheme": "per_user_memory",
//     "channel": {"snr_db": 3.0, "k_bits": 100, "rate": 0.9, "regime": "short"},
//     "time_budget_symbols": 1500,
//     "replicas": 100,
//     "seed": 42
//   }
//
// global_memory additionally takes "memory_depth" and optional "alphas"
// (defaults to equal weights); "rounds" replaces "time_budget_symbols" for
// round-capped runs; an optional "sweep" object with "rates", "snr_db" and
// "memory_depths" axes turns the file into a sweep description.

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "erasefl/simulation.hpp"

namespace erasefl::io {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LoadedConfig {
    sim::ExperimentConfig experiment;
    std::optional<sim::SweepSpec> sweep;
};

namespace detail {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

inline aggregation::SchemeConfig parse_scheme(const json& j) {
    const std::string name = get_or<std::string>(j, "scheme", "per_user_memory");
    if (name == "error_free") return aggregation::SchemeConfig::error_free();
    if (name == "no_memory") return aggregation::SchemeConfig::no_memory();
    if (name == "per_user_memory") return aggregation::SchemeConfig::per_user_memory();
    if (name == "global_memory") {
        const int m = get_or<int>(j, "memory_depth", 1);
        if (j.contains("alphas"))
            return aggregation::SchemeConfig::global_memory(m, get_or<std::vector<double>>(j, "alphas", {}));
        return aggregation::SchemeConfig::global_memory(m);
    }
    throw ConfigError("config key 'scheme': unknown scheme '" + name +
                      "' (expected error_free, no_memory, per_user_memory or global_memory)");
}

inline channel::Regime parse_regime(const std::string& name) {
    if (name == "short") return channel::Regime::ShortPacket;
    if (name == "long") return channel::Regime::LongPacket;
    throw ConfigError("config key 'channel.regime': expected \"short\" or \"long\", got \"" + name + "\"");
}

}  // namespace detail

inline LoadedConfig parse_config(const nlohmann::json& j) {
    using detail::get_or;
    sim::ExperimentConfig cfg;
    cfg.num_users = get_or<std::size_t>(j, "users", cfg.num_users);
    cfg.samples_per_user = get_or<std::size_t>(j, "samples_per_user", cfg.samples_per_user);
    cfg.interval_width = get_or<double>(j, "interval_width", cfg.interval_width);
    cfg.noise_variance = get_or<double>(j, "noise_variance", cfg.noise_variance);
    cfg.feature_degree = get_or<int>(j, "feature_degree", cfg.feature_degree);
    cfg.learner.eta = get_or<double>(j, "learning_rate", cfg.learner.eta);
    cfg.learner.local_iterations = get_or<int>(j, "local_iterations", cfg.learner.local_iterations);
    cfg.scheme = detail::parse_scheme(j);
    cfg.time_budget_symbols = get_or<std::uint64_t>(j, "time_budget_symbols", 0);
    cfg.num_rounds = get_or<std::size_t>(j, "rounds", 0);
    cfg.replicas = get_or<std::size_t>(j, "replicas", cfg.replicas);
    cfg.base_seed = get_or<std::uint64_t>(j, "seed", cfg.base_seed);

    if (!j.contains("channel")) throw ConfigError("config: missing required 'channel' object");
    const auto& ch = j.at("channel");
    cfg.snr_db = get_or<double>(ch, "snr_db", 3.0);
    const int k_bits = get_or<int>(ch, "k_bits", 100);
    const double rate = get_or<double>(ch, "rate", 0.5);
    const auto regime = detail::parse_regime(get_or<std::string>(ch, "regime", "short"));
    try {
        cfg.link = channel::LinkBudget::make(sim::db_to_linear(cfg.snr_db), k_bits, rate, regime);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config key 'channel': ") + e.what());
    }

    LoadedConfig loaded{cfg, std::nullopt};
    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        sim::SweepSpec spec;
        spec.rates = get_or<std::vector<double>>(sw, "rates", {});
        spec.snr_db = get_or<std::vector<double>>(sw, "snr_db", {});
        spec.memory_depths = get_or<std::vector<int>>(sw, "memory_depths", {});
        loaded.sweep = std::move(spec);
    }
    return loaded;
}

/// Load and validate a config file.  Error messages carry the file path and,
/// for syntax errors, the parser's line/byte position.
inline LoadedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    try {
        LoadedConfig loaded = parse_config(j);
        loaded.experiment.validate();
        return loaded;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace erasefl::io

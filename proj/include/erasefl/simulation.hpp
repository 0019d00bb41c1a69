// Experiment engine: non-i.i.d. dataset generation, the communication round
// loop under symbol-time accounting, seeded Monte Carlo replication, and
// rate/SNR/memory sweeps.
//
// Determinism contract: (config, base_seed) fixes every logged value.
// Replica i draws from the stream derive_stream_seed(base_seed, i); within a
// replica the draw order is pinned (dataset samples in user-then-sample
// order, then per round one packet draw per user in user order).  Replicas
// are reduced in index order, so results do not depend on worker count.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "erasefl/aggregation.hpp"
#include "erasefl/channel.hpp"
#include "erasefl/learning.hpp"
#include "erasefl/rng.hpp"

namespace erasefl::sim {

struct ExperimentConfig {
    std::size_t num_users = 10;
    std::size_t samples_per_user = 100;
    double interval_width = 1.0;   // per-user x-interval width
    double noise_variance = 5.0;   // variance of the additive target noise
    int feature_degree = 2;
    learning::LearnerConfig learner{};
    aggregation::SchemeConfig scheme = aggregation::SchemeConfig::per_user_memory();
    double snr_db = 3.0;
    channel::LinkBudget link = channel::LinkBudget::make(2.0, 100, 0.5, channel::Regime::ShortPacket);
    std::uint64_t time_budget_symbols = 0;  // 0 = unset; rounds derived as floor(budget / n)
    std::size_t num_rounds = 0;             // 0 = unset; explicit round cap
    std::size_t replicas = 1;
    std::uint64_t base_seed = 1;

    std::size_t derived_rounds() const {
        if (time_budget_symbols > 0)
            return static_cast<std::size_t>(time_budget_symbols /
                                            static_cast<std::uint64_t>(link.n_symbols));
        return num_rounds;
    }

    void validate() const {
        if (num_users < 1) throw std::invalid_argument("config: users must be >= 1");
        if (samples_per_user < 1) throw std::invalid_argument("config: samples_per_user must be >= 1");
        if (!(interval_width > 0.0)) throw std::invalid_argument("config: interval_width must be > 0");
        if (!(noise_variance >= 0.0)) throw std::invalid_argument("config: noise_variance must be >= 0");
        if (feature_degree < 0) throw std::invalid_argument("config: feature_degree must be >= 0");
        learner.validate();
        scheme.validate();
        if (replicas < 1) throw std::invalid_argument("config: replicas must be >= 1");
        if (time_budget_symbols == 0 && num_rounds == 0)
            throw std::invalid_argument("config: set either time_budget_symbols or rounds");
        if (time_budget_symbols > 0 && num_rounds > 0)
            throw std::invalid_argument("config: time_budget_symbols and rounds are mutually exclusive");
        if (derived_rounds() == 0)
            throw std::invalid_argument(
                "config: time budget of " + std::to_string(time_budget_symbols) +
                " symbols is shorter than one round (n = " + std::to_string(link.n_symbols) + ")");
    }
};

struct RoundLog {
    std::size_t round = 0;
    std::uint64_t elapsed_symbols = 0;
    std::vector<int> indicators;
    std::size_t participation = 0;
    double mse = 0.0;
    std::vector<double> snr_draws;  // per-user instantaneous SNR
};

/// Disjoint-support regression data: user u (1-based) draws x uniformly from
/// [(u-1)*width, u*width) and y = x^2 + noise with zero-mean Gaussian noise.
inline std::vector<learning::Dataset> generate_noniid_datasets(std::size_t num_users,
                                                               std::size_t samples_per_user,
                                                               double interval_width,
                                                               double noise_variance,
                                                               RngStream& rng) {
    if (num_users < 1 || samples_per_user < 1)
        throw std::invalid_argument("generate_noniid_datasets: users and samples must be >= 1");
    if (!(interval_width > 0.0) || !(noise_variance >= 0.0))
        throw std::invalid_argument("generate_noniid_datasets: invalid width or noise variance");
    const double noise_stddev = std::sqrt(noise_variance);
    std::vector<learning::Dataset> datasets(num_users);
    for (std::size_t u = 0; u < num_users; ++u) {
        const double lo = static_cast<double>(u) * interval_width;
        const double hi = lo + interval_width;
        datasets[u].samples.reserve(samples_per_user);
        for (std::size_t i = 0; i < samples_per_user; ++i) {
            const double x = rng.uniform(lo, hi);
            const double y = x * x + rng.normal(0.0, noise_stddev);
            datasets[u].samples.push_back({x, y});
        }
    }
    return datasets;
}

/// Mean pointwise loss of a global parameter over the union of all users' data.
inline double global_mse(const ModelParams& omega, const learning::FeatureMap& features,
                         const std::vector<learning::Dataset>& datasets) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& ds : datasets) {
        for (const auto& s : ds.samples) {
            acc += learning::pointwise_loss(omega, features, s.x, s.y);
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

/// Mutable per-replica state for the round loop.
struct ExperimentState {
    std::vector<learning::Dataset> datasets;
    learning::FeatureMap features;
    aggregation::Aggregator aggregator;
    std::uint64_t elapsed_symbols = 0;
    std::size_t round = 0;
};

inline ExperimentState init_experiment(const ExperimentConfig& cfg, RngStream& rng) {
    learning::FeatureMap features{cfg.feature_degree};
    ModelParams initial(features.dimension(), 0.0);
    return ExperimentState{
        generate_noniid_datasets(cfg.num_users, cfg.samples_per_user, cfg.interval_width,
                                 cfg.noise_variance, rng),
        features,
        aggregation::Aggregator(cfg.scheme, std::move(initial), cfg.num_users),
        0,
        0,
    };
}

/// One communication round: local updates from the current global, one uplink
/// packet per user, aggregation, and bookkeeping (elapsed time, global MSE of
/// the new global over the union of the data).
inline RoundLog run_round(ExperimentState& state, const ExperimentConfig& cfg, RngStream& rng) {
    const std::size_t num_users = cfg.num_users;
    aggregation::RoundReception reception;
    reception.indicators.resize(num_users);
    reception.params.resize(num_users);
    reception.dataset_sizes.resize(num_users);

    RoundLog log;
    log.round = state.round;
    log.snr_draws.resize(num_users);

    for (std::size_t u = 0; u < num_users; ++u) {
        ModelParams local = learning::local_update(state.aggregator.global(), state.features,
                                                   state.datasets[u], cfg.learner);
        const channel::PacketDraw packet = channel::draw_packet(rng, cfg.link);
        log.snr_draws[u] = packet.fading.gamma;
        reception.indicators[u] = packet.indicator;
        reception.dataset_sizes[u] = state.datasets[u].size();
        if (packet.indicator == 1) reception.params[u] = std::move(local);
    }

    const ModelParams& next = state.aggregator.aggregate(reception);
    state.elapsed_symbols += static_cast<std::uint64_t>(cfg.link.n_symbols);
    state.round += 1;

    log.indicators = std::move(reception.indicators);
    log.participation = 0;
    for (int i : log.indicators) log.participation += static_cast<std::size_t>(i);
    log.mse = global_mse(next, state.features, state.datasets);
    log.elapsed_symbols = state.elapsed_symbols;
    return log;
}

/// Full round loop for one replica, drawing from the replica's own stream.
inline std::vector<RoundLog> run_replica(const ExperimentConfig& cfg, std::size_t replica_index) {
    cfg.validate();
    RngStream rng = RngStream::for_stream(cfg.base_seed, replica_index);
    ExperimentState state = init_experiment(cfg, rng);
    const std::size_t rounds = cfg.derived_rounds();
    std::vector<RoundLog> logs;
    logs.reserve(rounds);
    for (std::size_t t = 0; t < rounds; ++t) logs.push_back(run_round(state, cfg, rng));
    return logs;
}

/// Single-run convenience: replica 0 of the configured base seed.
inline std::vector<RoundLog> run_experiment(const ExperimentConfig& cfg) {
    return run_replica(cfg, 0);
}

inline std::vector<double> mse_series(const std::vector<RoundLog>& logs) {
    std::vector<double> series;
    series.reserve(logs.size());
    for (const auto& log : logs) series.push_back(log.mse);
    return series;
}

struct MonteCarloResult {
    std::vector<std::vector<RoundLog>> replicas;  // [replica][round]
    std::vector<double> mean_mse;                 // per round, averaged across replicas

    double final_mse_mean() const { return mean_mse.back(); }

    /// Unbiased variance of the final-round MSE across replicas.
    double final_mse_variance() const {
        if (replicas.size() < 2) return 0.0;
        double mean = 0.0;
        for (const auto& logs : replicas) mean += logs.back().mse;
        mean /= static_cast<double>(replicas.size());
        double var = 0.0;
        for (const auto& logs : replicas) {
            const double d = logs.back().mse - mean;
            var += d * d;
        }
        return var / static_cast<double>(replicas.size() - 1);
    }
};

/// Worker count: an explicit request wins, otherwise the ERASEFL_THREADS
/// environment variable, otherwise the hardware concurrency; always clamped
/// to [1, jobs].
inline unsigned resolve_worker_count(unsigned requested, std::size_t jobs) {
    unsigned cap = requested;
    if (cap == 0) {
        if (const char* env = std::getenv("ERASEFL_THREADS")) {
            char* end = nullptr;
            const unsigned long parsed = std::strtoul(env, &end, 10);
            if (end == env || *end != '\0' || parsed == 0)
                throw std::invalid_argument("ERASEFL_THREADS must be a positive integer, got '" +
                                            std::string(env) + "'");
            cap = static_cast<unsigned>(parsed);
        } else {
            cap = std::thread::hardware_concurrency();
        }
    }
    if (cap == 0) cap = 1;
    if (jobs < 1) jobs = 1;
    return cap > jobs ? static_cast<unsigned>(jobs) : cap;
}

/// Run all replicas (in parallel up to the worker cap) and average the MSE
/// series in replica-index order.
inline MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg, unsigned max_threads = 0) {
    cfg.validate();
    const std::size_t replicas = cfg.replicas;
    MonteCarloResult result;
    result.replicas.resize(replicas);

    const unsigned workers = resolve_worker_count(max_threads, replicas);
    if (workers <= 1) {
        for (std::size_t i = 0; i < replicas; ++i) result.replicas[i] = run_replica(cfg, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= replicas) return;
                try {
                    result.replicas[i] = run_replica(cfg, i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    const std::size_t rounds = result.replicas.front().size();
    result.mean_mse.assign(rounds, 0.0);
    for (std::size_t i = 0; i < replicas; ++i)
        for (std::size_t t = 0; t < rounds; ++t) result.mean_mse[t] += result.replicas[i][t].mse;
    for (auto& m : result.mean_mse) m /= static_cast<double>(replicas);
    return result;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct SweepSpec {
    std::vector<double> rates;
    std::vector<double> snr_db;
    std::vector<int> memory_depths;  // GlobalMemory only; empty = keep scheme as configured
};

struct SweepRow {
    double rate = 0.0;
    double gamma0_db = 0.0;
    int memory_depth = 0;
    std::size_t rounds = 0;
    double final_mse_mean = 0.0;
    double final_mse_var = 0.0;
};

/// Deduplicate preserving first occurrence; returns true if anything was dropped.
template <typename T>
bool dedup_axis(std::vector<T>& axis) {
    std::vector<T> kept;
    for (const T& v : axis) {
        bool seen = false;
        for (const T& k : kept) seen = seen || k == v;
        if (!seen) kept.push_back(v);
    }
    const bool changed = kept.size() != axis.size();
    axis = std::move(kept);
    return changed;
}

/// Grid of Monte Carlo runs at a fixed time budget; one row per
/// (rate, SNR, memory depth) point.  Duplicate axis values are dropped.
inline std::vector<SweepRow> sweep(SweepSpec spec, const ExperimentConfig& base,
                                   unsigned max_threads = 0) {
    if (spec.rates.empty() || spec.snr_db.empty())
        throw std::invalid_argument("sweep: rate and SNR axes must be nonempty");
    for (double r : spec.rates)
        if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("sweep: rates must be in (0, 1]");
    if (!spec.memory_depths.empty() && base.scheme.kind != aggregation::Scheme::GlobalMemory)
        throw std::invalid_argument("sweep: memory axis requires the global_memory scheme");
    dedup_axis(spec.rates);
    dedup_axis(spec.snr_db);
    dedup_axis(spec.memory_depths);

    std::vector<int> depths = spec.memory_depths;
    if (depths.empty()) depths.push_back(base.scheme.memory_depth);

    std::vector<SweepRow> rows;
    for (double rate : spec.rates) {
        for (double db : spec.snr_db) {
            for (int m : depths) {
                ExperimentConfig cfg = base;
                cfg.snr_db = db;
                cfg.link = channel::LinkBudget::make(db_to_linear(db), base.link.k_bits, rate,
                                                     base.link.regime);
                if (base.scheme.kind == aggregation::Scheme::GlobalMemory && m != base.scheme.memory_depth)
                    cfg.scheme = aggregation::SchemeConfig::global_memory(m);
                const MonteCarloResult mc = run_monte_carlo(cfg, max_threads);
                rows.push_back(SweepRow{rate, db, cfg.scheme.memory_depth, mc.mean_mse.size(),
                                        mc.final_mse_mean(), mc.final_mse_variance()});
            }
        }
    }
    return rows;
}

}  // namespace erasefl::sim

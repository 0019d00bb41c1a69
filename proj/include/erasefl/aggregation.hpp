// Central-node aggregation schemes.
//
// Four ways to fold one round of uplink receptions into the global parameter:
//
//   ErrorFree:     dataset-size weighted average of all users' fresh updates;
//                  requires every update to be present.
//   NoMemory:      weighted average over the received updates only; an
//                  all-erased round keeps the previous global.
//   PerUserMemory: every user contributes, erased users via their last
//                  successfully received update (seeded with the initial
//                  global before any reception).
//   GlobalMemory:  erased users contribute a weighted average of the last m
//                  global parameters (weights alpha, most recent first);
//                  during warm-up the weights are renormalized over the
//                  history available so far.
//
// All schemes funnel through one weighted-average accumulation so that an
// erasure-free round yields bitwise-identical results regardless of scheme.

#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "erasefl/learning.hpp"

namespace erasefl::aggregation {

enum class Scheme { ErrorFree, NoMemory, PerUserMemory, GlobalMemory };

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::ErrorFree: return "error_free";
        case Scheme::NoMemory: return "no_memory";
        case Scheme::PerUserMemory: return "per_user_memory";
        case Scheme::GlobalMemory: return "global_memory";
    }
    return "unknown";
}

struct SchemeConfig {
    Scheme kind = Scheme::ErrorFree;
    int memory_depth = 0;         // GlobalMemory only
    std::vector<double> alphas;   // GlobalMemory only, most recent first

    static SchemeConfig error_free() { return {Scheme::ErrorFree, 0, {}}; }
    static SchemeConfig no_memory() { return {Scheme::NoMemory, 0, {}}; }
    static SchemeConfig per_user_memory() { return {Scheme::PerUserMemory, 0, {}}; }

    static SchemeConfig global_memory(int m) {
        if (m < 1) throw std::invalid_argument("SchemeConfig: memory depth must be >= 1");
        return {Scheme::GlobalMemory, m,
                std::vector<double>(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m))};
    }

    static SchemeConfig global_memory(int m, std::vector<double> alphas) {
        SchemeConfig cfg{Scheme::GlobalMemory, m, std::move(alphas)};
        cfg.validate();
        return cfg;
    }

    void validate() const {
        if (kind != Scheme::GlobalMemory) return;
        if (memory_depth < 1) throw std::invalid_argument("SchemeConfig: memory depth must be >= 1");
        if (alphas.size() != static_cast<std::size_t>(memory_depth))
            throw std::invalid_argument("SchemeConfig: need exactly memory_depth alpha weights");
        double sum = 0.0;
        for (double a : alphas) {
            if (a < 0.0) throw std::invalid_argument("SchemeConfig: alpha weights must be >= 0");
            sum += a;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("SchemeConfig: alpha weights must sum to 1");
    }
};

/// One round of uplink results.  params[u] is valid exactly when
/// indicators[u] == 1; dataset_sizes[u] is the aggregation weight D_u.
struct RoundReception {
    std::vector<int> indicators;
    std::vector<ModelParams> params;
    std::vector<std::size_t> dataset_sizes;

    std::size_t num_users() const { return indicators.size(); }
};

/// sum(w_i * v_i) / sum(w_i), accumulated in input order.
inline ModelParams weighted_average(const std::vector<const ModelParams*>& values,
                                    const std::vector<double>& weights) {
    if (values.empty() || values.size() != weights.size())
        throw std::invalid_argument("weighted_average: values/weights size mismatch or empty");
    ModelParams acc(values.front()->size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const ModelParams& v = *values[i];
        if (v.size() != acc.size()) throw std::invalid_argument("weighted_average: dimension mismatch");
        const double w = weights[i];
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * v[j];
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("weighted_average: total weight must be > 0");
    for (auto& a : acc) a /= total;
    return acc;
}

/// Single-owner aggregation state machine: one instance per experiment, one
/// aggregate() call per round.
class Aggregator {
public:
    Aggregator(SchemeConfig scheme, ModelParams initial_global, std::size_t num_users)
        : scheme_(std::move(scheme)), global_(std::move(initial_global)), num_users_(num_users) {
        scheme_.validate();
        if (num_users_ == 0) throw std::invalid_argument("Aggregator: need at least one user");
        if (global_.empty()) throw std::invalid_argument("Aggregator: initial global is empty");
        if (scheme_.kind == Scheme::PerUserMemory)
            user_cache_.assign(num_users_, global_);
        if (scheme_.kind == Scheme::GlobalMemory)
            history_.push_front(global_);
    }

    const ModelParams& global() const { return global_; }
    std::size_t round_index() const { return round_; }
    const std::vector<ModelParams>& user_cache() const { return user_cache_; }
    const std::deque<ModelParams>& global_history() const { return history_; }

    /// Fold one round of receptions into a new global parameter.
    ModelParams aggregate(const RoundReception& r) {
        check_reception(r);
        ModelParams next;
        switch (scheme_.kind) {
            case Scheme::ErrorFree: next = aggregate_error_free(r); break;
            case Scheme::NoMemory: next = aggregate_no_memory(r); break;
            case Scheme::PerUserMemory: next = aggregate_per_user_memory(r); break;
            case Scheme::GlobalMemory: next = aggregate_global_memory(r); break;
        }
        global_ = next;
        if (scheme_.kind == Scheme::GlobalMemory) {
            history_.push_front(global_);
            while (history_.size() > static_cast<std::size_t>(scheme_.memory_depth)) history_.pop_back();
        }
        ++round_;
        return global_;
    }

private:
    void check_reception(const RoundReception& r) const {
        if (r.num_users() != num_users_ || r.params.size() != num_users_ ||
            r.dataset_sizes.size() != num_users_)
            throw std::invalid_argument("Aggregator: reception arrays must all have num_users entries");
        for (std::size_t u = 0; u < num_users_; ++u) {
            if (r.indicators[u] != 0 && r.indicators[u] != 1)
                throw std::invalid_argument("Aggregator: indicators must be 0 or 1");
            if (r.indicators[u] == 1 && r.params[u].size() != global_.size())
                throw std::invalid_argument("Aggregator: received parameter dimension mismatch");
        }
    }

    ModelParams aggregate_error_free(const RoundReception& r) const {
        std::vector<const ModelParams*> values;
        std::vector<double> weights;
        values.reserve(num_users_);
        weights.reserve(num_users_);
        for (std::size_t u = 0; u < num_users_; ++u) {
            if (r.indicators[u] != 1)
                throw std::logic_error("aggregate_error_free: missing update for user " + std::to_string(u));
            values.push_back(&r.params[u]);
            weights.push_back(static_cast<double>(r.dataset_sizes[u]));
        }
        return weighted_average(values, weights);
    }

    ModelParams aggregate_no_memory(const RoundReception& r) const {
        std::vector<const ModelParams*> values;
        std::vector<double> weights;
        for (std::size_t u = 0; u < num_users_; ++u) {
            if (r.indicators[u] == 1) {
                values.push_back(&r.params[u]);
                weights.push_back(static_cast<double>(r.dataset_sizes[u]));
            }
        }
        if (values.empty()) return global_;  // all erased: keep the previous global
        return weighted_average(values, weights);
    }

    ModelParams aggregate_per_user_memory(const RoundReception& r) {
        std::vector<const ModelParams*> values;
        std::vector<double> weights;
        values.reserve(num_users_);
        weights.reserve(num_users_);
        for (std::size_t u = 0; u < num_users_; ++u) {
            values.push_back(r.indicators[u] == 1 ? &r.params[u] : &user_cache_[u]);
            weights.push_back(static_cast<double>(r.dataset_sizes[u]));
        }
        ModelParams next = weighted_average(values, weights);
        for (std::size_t u = 0; u < num_users_; ++u)
            if (r.indicators[u] == 1) user_cache_[u] = r.params[u];
        return next;
    }

    ModelParams aggregate_global_memory(const RoundReception& r) const {
        const ModelParams substitute = history_blend();
        std::vector<const ModelParams*> values;
        std::vector<double> weights;
        values.reserve(num_users_);
        weights.reserve(num_users_);
        for (std::size_t u = 0; u < num_users_; ++u) {
            values.push_back(r.indicators[u] == 1 ? &r.params[u] : &substitute);
            weights.push_back(static_cast<double>(r.dataset_sizes[u]));
        }
        return weighted_average(values, weights);
    }

    /// Weighted average of the available history, alphas renormalized during
    /// warm-up.  A zero prefix weight (leading-zero alphas before the history
    /// fills) falls back to the oldest available entry.
    ModelParams history_blend() const {
        const std::size_t h = history_.size();
        double prefix = 0.0;
        for (std::size_t i = 0; i < h; ++i) prefix += scheme_.alphas[i];
        if (!(prefix > 0.0)) return history_.back();
        ModelParams blend(global_.size(), 0.0);
        for (std::size_t i = 0; i < h; ++i) {
            const double w = scheme_.alphas[i] / prefix;
            for (std::size_t j = 0; j < blend.size(); ++j) blend[j] += w * history_[i][j];
        }
        return blend;
    }

    SchemeConfig scheme_;
    ModelParams global_;
    std::size_t num_users_;
    std::size_t round_ = 0;
    std::vector<ModelParams> user_cache_;    // PerUserMemory
    std::deque<ModelParams> history_;        // GlobalMemory, most recent first
};

}  // namespace erasefl::aggregation

// Probabilistic diagnostics for the no-memory scheme.
//
// With independent per-user erasure probabilities eps_u, the participation
// count S = sum of reception indicators follows a Poisson binomial
// distribution.  This header computes its exact pmf, enumerates the outcome
// distribution of the received-only average for small user counts, and checks
// the Le Cam total-variation bound against the Poisson approximation with
// matched mean:
//
//   sum_j |Pr[S = j] - lambda^j e^-lambda / j!| < 2 * sum_u (1 - eps_u)^2
//
// with lambda = sum_u (1 - eps_u).

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "erasefl/learning.hpp"

namespace erasefl::analysis {

struct ErasureProfile {
    std::vector<double> eps;

    std::size_t num_users() const { return eps.size(); }

    void validate() const {
        if (eps.empty()) throw std::invalid_argument("ErasureProfile: need at least one user");
        for (double e : eps)
            if (!(e >= 0.0 && e <= 1.0))
                throw std::invalid_argument("ErasureProfile: erasure probabilities must be in [0, 1]");
    }
};

/// Probability mass on counts 0..U.
struct Pmf {
    std::vector<double> mass;
};

/// Exact Poisson binomial pmf of the participation count, by iterative
/// convolution over users (O(U^2)).
inline Pmf poisson_binomial_pmf(const ErasureProfile& profile) {
    profile.validate();
    std::vector<double> mass{1.0};
    for (double e : profile.eps) {
        const double p = 1.0 - e;
        std::vector<double> next(mass.size() + 1, 0.0);
        for (std::size_t j = 0; j < mass.size(); ++j) {
            next[j] += mass[j] * e;
            next[j + 1] += mass[j] * p;
        }
        mass.swap(next);
    }
    return Pmf{std::move(mass)};
}

/// One indicator pattern of the received-only average: its probability and
/// value.  An all-erased round has no average; it retains the previous global
/// and is flagged instead of valued.
struct Outcome {
    std::uint32_t pattern = 0;  // bit u set = user u received
    double probability = 0.0;
    ModelParams value;
    bool retains_previous = false;
};

struct OutcomeDistribution {
    std::vector<Outcome> outcomes;
};

/// Enumerate all 2^U reception patterns with their product probabilities and
/// equal-size received-only averages.  U is capped at 20.
inline OutcomeDistribution outcome_pmf(const ErasureProfile& profile,
                                       const std::vector<ModelParams>& local_params) {
    profile.validate();
    const std::size_t num_users = profile.num_users();
    if (num_users > 20) throw std::length_error("outcome_pmf: enumeration capped at 20 users");
    if (local_params.size() != num_users)
        throw std::invalid_argument("outcome_pmf: need one parameter vector per user");
    const std::size_t dim = local_params.front().size();
    for (const auto& p : local_params)
        if (p.size() != dim) throw std::invalid_argument("outcome_pmf: parameter dimension mismatch");

    OutcomeDistribution dist;
    dist.outcomes.reserve(std::size_t{1} << num_users);
    for (std::uint32_t pattern = 0; pattern < (std::uint32_t{1} << num_users); ++pattern) {
        Outcome out;
        out.pattern = pattern;
        out.probability = 1.0;
        ModelParams sum(dim, 0.0);
        std::size_t received = 0;
        for (std::size_t u = 0; u < num_users; ++u) {
            const bool got = (pattern >> u) & 1u;
            out.probability *= got ? 1.0 - profile.eps[u] : profile.eps[u];
            if (got) {
                ++received;
                for (std::size_t j = 0; j < dim; ++j) sum[j] += local_params[u][j];
            }
        }
        if (received == 0) {
            out.retains_previous = true;
        } else {
            for (auto& v : sum) v /= static_cast<double>(received);
            out.value = std::move(sum);
        }
        dist.outcomes.push_back(std::move(out));
    }
    return dist;
}

struct LeCamReport {
    double lambda = 0.0;
    double tv_sum = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/// Total-variation-style sum between the exact participation pmf and the
/// Poisson(lambda) pmf, against the 2*sum((1-eps)^2) bound.  The Poisson tail
/// beyond the support is accumulated term-wise until terms drop below 1e-16.
inline LeCamReport le_cam_check(const ErasureProfile& profile) {
    profile.validate();
    const Pmf pmf = poisson_binomial_pmf(profile);
    LeCamReport rep;
    for (double e : profile.eps) {
        rep.lambda += 1.0 - e;
        rep.bound += 2.0 * (1.0 - e) * (1.0 - e);
    }

    double term = std::exp(-rep.lambda);  // Poisson mass at j, advanced iteratively
    std::size_t j = 0;
    for (; j < pmf.mass.size(); ++j) {
        rep.tv_sum += std::abs(pmf.mass[j] - term);
        term *= rep.lambda / static_cast<double>(j + 1);
    }
    // tail: exact pmf is zero beyond the user count
    while (term >= 1e-16 || static_cast<double>(j) < rep.lambda) {
        rep.tv_sum += term;
        term *= rep.lambda / static_cast<double>(j + 1);
        ++j;
    }

    // the strict inequality is vacuous at lambda == 0 (both sides zero)
    rep.holds = rep.lambda == 0.0 ? rep.tv_sum <= rep.bound : rep.tv_sum < rep.bound;
    return rep;
}

struct WindowStats {
    double mean = 0.0;
    double variance = 0.0;
};

/// Sample mean and unbiased sample variance over the trailing `window`
/// entries of a series.
inline WindowStats fluctuation_stats(const std::vector<double>& series, std::size_t window) {
    if (window < 2) throw std::domain_error("fluctuation_stats: window must be >= 2");
    if (series.size() < window) throw std::domain_error("fluctuation_stats: series shorter than window");
    const std::size_t begin = series.size() - window;
    WindowStats stats;
    for (std::size_t i = begin; i < series.size(); ++i) stats.mean += series[i];
    stats.mean /= static_cast<double>(window);
    for (std::size_t i = begin; i < series.size(); ++i) {
        const double d = series[i] - stats.mean;
        stats.variance += d * d;
    }
    stats.variance /= static_cast<double>(window - 1);
    return stats;
}

}  // namespace erasefl::analysis

// Packet-erasure channel model.
//
// Uplink packets of k message bits are coded at rate R into n = ceil(k/R)
// channel uses and sent over Rayleigh block fading (gain constant per packet,
// independent across packets).  Two erasure regimes:
//
//   ShortPacket: normal-approximation packet error rate at the instantaneous
//                SNR,  eps = Q((n*C(g) - k + 0.5*log2 n) / sqrt(n*V(g)))
//                with capacity C(g) = log2(1+g) and dispersion
//                V(g) = log2^2(e) * (1 - (1+g)^-2).
//   LongPacket:  outage test, erased iff the instantaneous SNR falls below
//                2^R - 1; the marginal erasure probability over unit-mean
//                exponential fading is 1 - exp(-(2^R - 1)/g0).
//
// The normal approximation is known to be accurate for n >= 100 and R >= 0.5;
// it is still evaluated outside that region (callers surface a warning).

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "erasefl/rng.hpp"

namespace erasefl::channel {

enum class Regime { ShortPacket, LongPacket };

inline std::string to_string(Regime r) {
    return r == Regime::ShortPacket ? "short" : "long";
}

/// Per-experiment link configuration.  gamma0 is the average transmit SNR in
/// linear scale; n_symbols is derived from k_bits and rate.
struct LinkBudget {
    double gamma0 = 1.0;
    int k_bits = 100;
    double rate = 0.5;
    int n_symbols = 200;
    Regime regime = Regime::ShortPacket;

    static LinkBudget make(double gamma0, int k_bits, double rate, Regime regime) {
        if (!(gamma0 > 0.0)) throw std::domain_error("LinkBudget: gamma0 must be > 0");
        if (k_bits < 1) throw std::domain_error("LinkBudget: k_bits must be >= 1");
        if (!(rate > 0.0 && rate <= 1.0)) throw std::domain_error("LinkBudget: rate must be in (0, 1]");
        // Real-number ceil(k/R); the 1e-9 slack absorbs binary representation
        // artifacts (e.g. 3/0.3 evaluating to 10.000000000000002).
        const int n = static_cast<int>(std::ceil(static_cast<double>(k_bits) / rate - 1e-9));
        return LinkBudget{gamma0, k_bits, rate, n, regime};
    }
};

/// One block-fading realization: squared gain and instantaneous SNR.
struct FadingDraw {
    double gain_sq = 0.0;
    double gamma = 0.0;
};

/// Channel capacity log2(1 + gamma) in bits per channel use.
inline double shannon_capacity(double gamma) {
    if (gamma < 0.0) throw std::domain_error("shannon_capacity: gamma must be >= 0");
    return std::log2(1.0 + gamma);
}

/// Channel dispersion log2^2(e) * (1 - (1+gamma)^-2) in bits^2.
inline double channel_dispersion(double gamma) {
    if (gamma < 0.0) throw std::domain_error("channel_dispersion: gamma must be >= 0");
    const double log2e = std::numbers::log2e;
    const double s = 1.0 + gamma;
    return log2e * log2e * (1.0 - 1.0 / (s * s));
}

/// Standard normal tail probability Pr[N(0,1) > x].
inline double q_function(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// Normal-approximation erasure probability for a k-bit message in n channel
/// uses at instantaneous SNR gamma.  gamma == 0 means zero capacity and zero
/// dispersion; the limit of the expression is 1 and that value is returned.
inline double erasure_prob_short(double gamma, int k_bits, int n_symbols) {
    if (gamma < 0.0) throw std::domain_error("erasure_prob_short: gamma must be >= 0");
    if (k_bits < 1 || n_symbols < k_bits)
        throw std::domain_error("erasure_prob_short: need n_symbols >= k_bits >= 1");
    if (gamma == 0.0) return 1.0;
    const double n = static_cast<double>(n_symbols);
    const double num = n * shannon_capacity(gamma) - static_cast<double>(k_bits) + 0.5 * std::log2(n);
    const double den = std::sqrt(n * channel_dispersion(gamma));
    return q_function(num / den);
}

/// Outage SNR threshold 2^R - 1 for a code of rate R.
inline double outage_threshold(double rate) {
    if (!(rate > 0.0)) throw std::domain_error("outage_threshold: rate must be > 0");
    return std::exp2(rate) - 1.0;
}

/// Long-packet erasure probability: Pr[gamma < 2^R - 1] under unit-mean
/// exponential fading with average SNR gamma0.
inline double erasure_prob_long(double gamma0, double rate) {
    if (!(gamma0 > 0.0)) throw std::domain_error("erasure_prob_long: gamma0 must be > 0");
    return -std::expm1(-outage_threshold(rate) / gamma0);
}

/// Draw one block-fading realization for the link: |h|^2 is unit-mean
/// exponential (squared magnitude of a circularly symmetric complex Gaussian).
inline FadingDraw sample_fading(RngStream& rng, const LinkBudget& link) {
    const double gain_sq = rng.exponential(1.0);
    return FadingDraw{gain_sq, link.gamma0 * gain_sq};
}

/// Bernoulli reception indicator: 1 with probability 1-eps, 0 with probability eps.
inline int sample_erasure(RngStream& rng, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::domain_error("sample_erasure: eps must be in [0, 1]");
    return rng.uniform01() >= eps ? 1 : 0;
}

/// One uplink packet outcome: fading draw, realized erasure probability, and
/// reception indicator.  ShortPacket composes fading -> eps -> Bernoulli;
/// LongPacket is the deterministic outage test on the draw.
struct PacketDraw {
    FadingDraw fading;
    double erasure_prob = 0.0;
    int indicator = 1;
};

inline PacketDraw draw_packet(RngStream& rng, const LinkBudget& link) {
    PacketDraw out;
    out.fading = sample_fading(rng, link);
    if (link.regime == Regime::ShortPacket) {
        out.erasure_prob = erasure_prob_short(out.fading.gamma, link.k_bits, link.n_symbols);
        out.indicator = sample_erasure(rng, out.erasure_prob);
    } else {
        const bool erased = out.fading.gamma < outage_threshold(link.rate);
        out.erasure_prob = erased ? 1.0 : 0.0;
        out.indicator = erased ? 0 : 1;
    }
    return out;
}

}  // namespace erasefl::channel

// Device-side regression model: polynomial features, squared loss, and the
// local full-batch gradient-descent update.  All operations are pure.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace erasefl {

/// Dense model parameter vector shared by devices and the central node.
using ModelParams = std::vector<double>;

}  // namespace erasefl

namespace erasefl::learning {

struct Sample {
    double x = 0.0;
    double y = 0.0;
};

struct Dataset {
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
};

/// Polynomial feature map phi(x) = [1, x, ..., x^degree].
struct FeatureMap {
    int degree = 2;

    std::size_t dimension() const { return static_cast<std::size_t>(degree) + 1; }

    std::vector<double> operator()(double x) const {
        std::vector<double> phi(dimension());
        double p = 1.0;
        for (auto& v : phi) {
            v = p;
            p *= x;
        }
        return phi;
    }

    /// omega . phi(x) without materializing the feature vector.
    double predict(const ModelParams& omega, double x) const {
        check_dim(omega);
        double acc = 0.0;
        double p = 1.0;
        for (double w : omega) {
            acc += w * p;
            p *= x;
        }
        return acc;
    }

    void check_dim(const ModelParams& omega) const {
        if (omega.size() != dimension())
            throw std::invalid_argument("FeatureMap: model dimension " + std::to_string(omega.size()) +
                                        " does not match feature dimension " + std::to_string(dimension()));
    }
};

struct LearnerConfig {
    double eta = 0.05;
    int local_iterations = 1;

    void validate() const {
        if (!(eta > 0.0)) throw std::invalid_argument("LearnerConfig: eta must be > 0");
        if (local_iterations < 1) throw std::invalid_argument("LearnerConfig: local_iterations must be >= 1");
    }
};

/// Squared-error loss 0.5 * (y - omega.phi(x))^2 for one point.
inline double pointwise_loss(const ModelParams& omega, const FeatureMap& features, double x, double y) {
    const double r = y - features.predict(omega, x);
    return 0.5 * r * r;
}

/// Mean pointwise loss over a device's dataset.
inline double local_loss(const ModelParams& omega, const FeatureMap& features, const Dataset& data) {
    if (data.samples.empty()) throw std::domain_error("local_loss: dataset is empty");
    double acc = 0.0;
    for (const auto& s : data.samples) acc += pointwise_loss(omega, features, s.x, s.y);
    return acc / static_cast<double>(data.samples.size());
}

/// Gradient of local_loss: (1/D) * sum of -(y - omega.phi(x)) * phi(x).
inline ModelParams local_gradient(const ModelParams& omega, const FeatureMap& features, const Dataset& data) {
    if (data.samples.empty()) throw std::domain_error("local_gradient: dataset is empty");
    features.check_dim(omega);
    ModelParams grad(omega.size(), 0.0);
    for (const auto& s : data.samples) {
        const double r = s.y - features.predict(omega, s.x);
        double p = 1.0;
        for (auto& g : grad) {
            g -= r * p;
            p *= s.x;
        }
    }
    const double inv = 1.0 / static_cast<double>(data.samples.size());
    for (auto& g : grad) g *= inv;
    return grad;
}

/// local_iterations full-batch GD steps from the broadcast global parameter.
inline ModelParams local_update(const ModelParams& omega_global, const FeatureMap& features,
                                const Dataset& data, const LearnerConfig& config) {
    config.validate();
    ModelParams omega = omega_global;
    for (int it = 0; it < config.local_iterations; ++it) {
        const ModelParams grad = local_gradient(omega, features, data);
        for (std::size_t j = 0; j < omega.size(); ++j) omega[j] -= config.eta * grad[j];
    }
    return omega;
}

}  // namespace erasefl::learning

// SPDX-License-Identifier: MIT

/**
 * @file policy.hpp
 * @brief Routing with the encoder's policy head, greedy or sampled.
 */

#pragma once

#include "qapr/env.hpp"
#include "qapr/errors.hpp"
#include "qapr/nn/encoder.hpp"
#include "qapr/routers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace qapr::nn {

[[nodiscard]] inline EncoderInput encoder_input(const RoutingState& s) {
    return EncoderInput{to_mat(s.effective_flow()), s.mapping(), &s.problem().device, &s.problem().distances};
}

/// Softmax over logits.
[[nodiscard]] inline std::vector<double> action_probabilities(const std::vector<double>& logits) {
    if (logits.empty()) {
        throw EmptyInput("no logits");
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& x : p) {
        x /= z;
    }
    return p;
}

struct PolicyRouterConfig {
    bool sample = false;         ///< sample from the softmax instead of taking the argmax
    std::uint64_t seed = 0;      ///< sampling seed
    RewardWeights weights{};     ///< horizon and decay of the encoder's effective flow
    std::size_t t_max = 1000;
    std::size_t stall_limit = 0; ///< 0 means N_P; steps without a gate before path moves take over
};

[[nodiscard]] inline RoutedCircuit route_policy(std::shared_ptr<const RoutingProblem> problem, const Mapping& m0,
                                                const EncoderParams& params, const PolicyRouterConfig& cfg,
                                                const DecisionObserver& observe = {}) {
    if (problem->circuit.n_qubits() != params.config().n_logical) {
        throw ShapeMismatch("encoder expects " + std::to_string(params.config().n_logical) + " qubits, circuit has " +
                            std::to_string(problem->circuit.n_qubits()));
    }
    auto rng = std::make_shared<std::mt19937_64>(cfg.seed);
    ActionChooser inner = [&params, &cfg, rng](const RoutingState& s) {
        const auto out = evaluate(encoder_input(s), params);
        const auto& actions = s.legal_actions(); // same order as the device edges
        std::size_t pick = 0;
        if (cfg.sample) {
            const auto probs = action_probabilities(out.logits);
            pick = std::discrete_distribution<std::size_t>(probs.begin(), probs.end())(*rng);
        } else {
            pick = static_cast<std::size_t>(std::max_element(out.logits.begin(), out.logits.end()) - out.logits.begin());
        }
        return actions.at(pick);
    };
    const std::size_t limit =
        cfg.stall_limit != 0 ? cfg.stall_limit : static_cast<std::size_t>(problem->device.n_nodes());
    auto guard = std::make_shared<StallGuard>(std::move(inner), limit);
    return drive(RoutingState(std::move(problem), m0, cfg.weights, cfg.t_max),
                 [guard](const RoutingState& s) { return (*guard)(s); }, observe);
}

[[nodiscard]] inline RoutedCircuit route_policy(const Circuit& c, const Device& d, const Mapping& m0,
                                                const EncoderParams& params, const PolicyRouterConfig& cfg = {}) {
    return route_policy(make_problem(c, d), m0, params, cfg);
}

/// Adapts the policy router to the generic pass interface used by bidirectional refinement.
[[nodiscard]] inline RouteFn make_policy_router(std::shared_ptr<const EncoderParams> params, PolicyRouterConfig cfg) {
    return [params = std::move(params), cfg](const std::shared_ptr<const RoutingProblem>& p, const Mapping& m) {
        return route_policy(p, m, *params, cfg);
    };
}

} // namespace qapr::nn

// SPDX-License-Identifier: MIT

/**
 * @file qap.hpp
 * @brief Quadratic-assignment objective, decay-weighted effective flow, and
 *        the shaped routing reward.
 *
 * The objective of a placement X under flow F and distance D is
 * Tr(F X D X^T) = sum_{i,j} F[i][j] * D[X(i)][X(j)], evaluated here over the
 * nonzero flow pairs only.
 */

#pragma once

#include "qapr/circuit.hpp"
#include "qapr/device.hpp"
#include "qapr/errors.hpp"
#include "qapr/parse.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace qapr {

/**
 * Injective assignment of logical qubits to physical nodes.
 *
 * Stored as phys_of[logical] together with the inverse occupant[node]
 * (kEmpty for unoccupied nodes when there are fewer qubits than nodes).
 */
class Mapping {
public:
    static constexpr LogicalQubit kEmpty = -1;

    Mapping() = default;
    Mapping(std::vector<PhysicalNode> phys_of, int n_physical)
        : phys_of_(std::move(phys_of)), occupant_(static_cast<std::size_t>(std::max(n_physical, 0)), kEmpty) {
        if (n_physical < static_cast<int>(phys_of_.size())) {
            throw QubitCountExceedsDevice(std::to_string(phys_of_.size()) + " logical qubits do not fit on " +
                                          std::to_string(n_physical) + " nodes");
        }
        for (std::size_t q = 0; q < phys_of_.size(); ++q) {
            const int p = phys_of_[q];
            if (p < 0 || p >= n_physical) {
                throw InvalidMapping("logical " + std::to_string(q) + " mapped outside the device");
            }
            auto& slot = occupant_[static_cast<std::size_t>(p)];
            if (slot != kEmpty) {
                throw InvalidMapping("node " + std::to_string(p) + " assigned twice");
            }
            slot = static_cast<LogicalQubit>(q);
        }
    }

    /// Logical i on physical i.
    [[nodiscard]] static Mapping trivial(int n_logical, int n_physical) {
        std::vector<PhysicalNode> p(static_cast<std::size_t>(std::max(n_logical, 0)));
        std::iota(p.begin(), p.end(), 0);
        return Mapping(std::move(p), n_physical);
    }

    /// Uniformly random injective placement, deterministic per seed.
    [[nodiscard]] static Mapping random(int n_logical, int n_physical, std::uint64_t seed) {
        if (n_logical > n_physical) {
            throw QubitCountExceedsDevice("random mapping: more qubits than nodes");
        }
        std::vector<PhysicalNode> nodes(static_cast<std::size_t>(n_physical));
        std::iota(nodes.begin(), nodes.end(), 0);
        std::mt19937_64 rng(seed);
        std::shuffle(nodes.begin(), nodes.end(), rng);
        nodes.resize(static_cast<std::size_t>(n_logical));
        return Mapping(std::move(nodes), n_physical);
    }

    [[nodiscard]] int n_logical() const noexcept { return static_cast<int>(phys_of_.size()); }
    [[nodiscard]] int n_physical() const noexcept { return static_cast<int>(occupant_.size()); }
    [[nodiscard]] PhysicalNode phys(LogicalQubit q) const { return phys_of_.at(static_cast<std::size_t>(q)); }
    [[nodiscard]] LogicalQubit occupant(PhysicalNode p) const { return occupant_.at(static_cast<std::size_t>(p)); }
    [[nodiscard]] const std::vector<PhysicalNode>& phys_of() const noexcept { return phys_of_; }
    [[nodiscard]] const std::vector<LogicalQubit>& occupants() const noexcept { return occupant_; }

    /// X <- X * S_uv: the logical occupants of nodes u and v trade places.
    void swap_nodes(PhysicalNode u, PhysicalNode v) {
        auto& a = occupant_.at(static_cast<std::size_t>(u));
        auto& b = occupant_.at(static_cast<std::size_t>(v));
        std::swap(a, b);
        if (a != kEmpty) {
            phys_of_[static_cast<std::size_t>(a)] = u;
        }
        if (b != kEmpty) {
            phys_of_[static_cast<std::size_t>(b)] = v;
        }
    }

    /// Both arrays describe the same bijection.
    [[nodiscard]] bool is_valid() const {
        std::size_t occupied = 0;
        for (std::size_t p = 0; p < occupant_.size(); ++p) {
            const int q = occupant_[p];
            if (q == kEmpty) {
                continue;
            }
            ++occupied;
            if (q < 0 || q >= n_logical() || phys_of_[static_cast<std::size_t>(q)] != static_cast<int>(p)) {
                return false;
            }
        }
        return occupied == phys_of_.size();
    }

    friend bool operator==(const Mapping& a, const Mapping& b) noexcept {
        return a.phys_of_ == b.phys_of_ && a.occupant_.size() == b.occupant_.size();
    }

private:
    std::vector<PhysicalNode> phys_of_;
    std::vector<LogicalQubit> occupant_;
};

/// Which flow the QAP reward term is evaluated on.
enum class RewardFlow { Effective, CurrentSlice };

struct RewardWeights {
    double lambda_qap = 1.0;
    double lambda_swap = 2.0;
    double lambda_gate = 2.0;
    double beta = -1.0;   ///< per-action penalty
    double gamma = 0.7;   ///< lookahead decay
    int horizon = 8;      ///< number of future slices folded into the effective flow
    RewardFlow flow = RewardFlow::Effective;

    void validate() const {
        if (!(gamma > 0.0 && gamma < 1.0)) {
            throw ConfigError("gamma must lie in (0, 1)");
        }
        if (horizon < 0) {
            throw ConfigError("horizon must be >= 0");
        }
        if (!(beta < 0.0)) {
            throw ConfigError("beta must be negative");
        }
        if (!std::isfinite(lambda_qap) || !std::isfinite(lambda_swap) || !std::isfinite(lambda_gate)) {
            throw ConfigError("reward coefficients must be finite");
        }
    }
};

// ---------------------------------------------------------------------------
// Objective and reward
// ---------------------------------------------------------------------------

[[nodiscard]] inline double qap_objective(const Mapping& x, const FlowMatrix& f, const DistanceMatrix& d) {
    if (f.size() != x.n_logical()) {
        throw ShapeMismatch("flow is " + std::to_string(f.size()) + "x" + std::to_string(f.size()) +
                            " but the mapping places " + std::to_string(x.n_logical()) + " qubits");
    }
    if (d.size() != x.n_physical()) {
        throw ShapeMismatch("distance matrix size differs from the mapping's node count");
    }
    double total = 0.0;
    const auto& phys = x.phys_of();
    f.for_each_pair([&](int i, int j, double w) {
        total += w * d(phys[static_cast<std::size_t>(i)], phys[static_cast<std::size_t>(j)]);
    });
    return 2.0 * total;
}

/// sum_{h=0}^{H} gamma^h F_{t+h}; slices[0] is F_t and slices past the end contribute nothing.
[[nodiscard]] inline FlowMatrix effective_flow(std::span<const FlowMatrix> slices, double gamma, int horizon,
                                               int n_qubits) {
    FlowMatrix out(n_qubits);
    double w = 1.0;
    for (int h = 0; h <= horizon && static_cast<std::size_t>(h) < slices.size(); ++h) {
        out.axpy(w, slices[static_cast<std::size_t>(h)]);
        w *= gamma;
    }
    return out;
}

[[nodiscard]] inline FlowMatrix effective_flow(std::span<const FlowMatrix> slices, double gamma, int horizon) {
    if (slices.empty()) {
        throw ShapeMismatch("effective_flow needs at least the current slice");
    }
    return effective_flow(slices, gamma, horizon, slices.front().size());
}

/// Decrease of the objective across a transition; positive means the placement improved.
[[nodiscard]] inline double qap_reward(const Mapping& x_before, const FlowMatrix& f_before, const Mapping& x_after,
                                       const FlowMatrix& f_after, const DistanceMatrix& d) {
    return qap_objective(x_before, f_before, d) - qap_objective(x_after, f_after, d);
}

[[nodiscard]] inline double total_reward(double r_qap, std::size_t n_scheduled, const RewardWeights& w) {
    return w.lambda_qap * r_qap + w.lambda_swap * w.beta + w.lambda_gate * static_cast<double>(n_scheduled);
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace detail {

inline void apply_reward_key(RewardWeights& w, const std::string& key, const std::string& raw) {
    auto number = [&]() {
        try {
            std::size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) {
                throw ConfigError("bad number for " + key + ": " + raw);
            }
            return v;
        } catch (const std::logic_error&) {
            throw ConfigError("bad number for " + key + ": " + raw);
        }
    };
    if (key == "lambda_qap") {
        w.lambda_qap = number();
    } else if (key == "lambda_swap") {
        w.lambda_swap = number();
    } else if (key == "lambda_gate") {
        w.lambda_gate = number();
    } else if (key == "beta") {
        w.beta = number();
    } else if (key == "gamma") {
        w.gamma = number();
    } else if (key == "horizon") {
        const double h = number();
        if (h != std::floor(h)) {
            throw ConfigError("horizon must be an integer");
        }
        w.horizon = static_cast<int>(h);
    } else if (key == "reward_flow") {
        if (raw == "effective") {
            w.flow = RewardFlow::Effective;
        } else if (raw == "current") {
            w.flow = RewardFlow::CurrentSlice;
        } else {
            throw ConfigError("reward_flow must be \"effective\" or \"current\"");
        }
    } else {
        throw ConfigError("unknown reward key '" + key + "'");
    }
}

} // namespace detail

/// Keys: lambda_qap, lambda_swap, lambda_gate, beta, gamma, horizon, reward_flow. Missing keys keep defaults.
[[nodiscard]] inline RewardWeights reward_weights_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("reward config: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("reward config must be a JSON object");
    }
    RewardWeights w;
    for (const auto& [key, value] : doc.items()) {
        if (value.is_string()) {
            detail::apply_reward_key(w, key, value.get<std::string>());
        } else if (value.is_number()) {
            std::ostringstream ss;
            ss.precision(17);
            ss << value.get<double>();
            detail::apply_reward_key(w, key, ss.str());
        } else {
            throw ConfigError("reward key '" + key + "' must be a number or string");
        }
    }
    w.validate();
    return w;
}

/// Flat TOML: `key = value` lines, `#` comments, an optional `[reward]` table header.
[[nodiscard]] inline RewardWeights reward_weights_from_toml(const std::string& text) {
    RewardWeights w;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string t = detail::trim(line);
        if (t.empty() || t == "[reward]") {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("reward config line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string value = detail::trim(t.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        detail::apply_reward_key(w, detail::trim(t.substr(0, eq)), value);
    }
    w.validate();
    return w;
}

[[nodiscard]] inline RewardWeights load_reward_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IOError("cannot open reward config " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        return reward_weights_from_json(ss.str());
    }
    return reward_weights_from_toml(ss.str());
}

} // namespace qapr

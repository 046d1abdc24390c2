// SPDX-License-Identifier: MIT

/**
 * @file routers.hpp
 * @brief Complete routing policies driven through the routing environment.
 *
 * - BasicSwap walks one endpoint of the earliest pending gate along a shortest path.
 * - SABRE scores candidate SWAPs by front-layer distance, optionally plus an
 *   omega-weighted mean distance over the gates of the next few slices.
 * - QAP-greedy takes the action with the highest one-step shaped reward.
 *
 * All routers break ties by lexicographic edge order, so every run is deterministic.
 * Bidirectional refinement chains forward, backward and forward passes, each
 * seeded with the previous pass's final placement.
 */

#pragma once

#include "qapr/circuit.hpp"
#include "qapr/device.hpp"
#include "qapr/env.hpp"
#include "qapr/errors.hpp"
#include "qapr/qap.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace qapr {

struct RoutedCircuit {
    Mapping initial_mapping;
    std::vector<ScheduleEntry> schedule;
    Mapping final_mapping;
    std::size_t inserted_swaps = 0;
    std::size_t inserted_cnots = 0;
    std::size_t steps = 0;
    bool truncated = false;
};

/// A SWAP decomposes into three CNOTs.
[[nodiscard]] inline std::size_t count_cnots(const RoutedCircuit& r) noexcept { return 3 * r.inserted_swaps; }

enum class RouterKind { BasicSwap, SabreBasic, SabreLookahead, QapGreedy };

struct RouterConfig {
    RouterKind kind = RouterKind::QapGreedy;
    double omega = 0.5;          ///< weight of the future-gate term (sabre lookahead)
    int window = 10;             ///< number of future slices forming the extended set (sabre lookahead)
    RewardWeights weights{};     ///< reward, horizon and decay (qap greedy)
    std::size_t t_max = 1000;
    std::size_t stall_limit = 0; ///< qap greedy: steps without executing a gate before the path fallback; 0 means N_P

    void validate() const {
        if (!(omega >= 0.0)) {
            throw ConfigError("omega must be >= 0");
        }
        if (window < 0) {
            throw ConfigError("window must be >= 0");
        }
        weights.validate();
    }
};

[[nodiscard]] inline std::string router_name(RouterKind k) {
    switch (k) {
    case RouterKind::BasicSwap: return "basic";
    case RouterKind::SabreBasic: return "sabre";
    case RouterKind::SabreLookahead: return "sabre-la";
    case RouterKind::QapGreedy: return "qap-greedy";
    }
    return "unknown";
}

[[nodiscard]] inline RouterKind router_kind_from_name(const std::string& name) {
    if (name == "basic") {
        return RouterKind::BasicSwap;
    }
    if (name == "sabre") {
        return RouterKind::SabreBasic;
    }
    if (name == "sabre-la") {
        return RouterKind::SabreLookahead;
    }
    if (name == "qap-greedy") {
        return RouterKind::QapGreedy;
    }
    throw ConfigError("unknown router '" + name + "'");
}

[[nodiscard]] inline Action edge_action(PhysicalNode a, PhysicalNode b) noexcept {
    return a < b ? Action{a, b} : Action{b, a};
}

[[nodiscard]] inline RoutedCircuit finish(const RoutingState& s, const Mapping& initial) {
    RoutedCircuit r;
    r.initial_mapping = initial;
    r.schedule = s.schedule();
    r.final_mapping = s.mapping();
    r.inserted_swaps = s.swaps_inserted();
    r.inserted_cnots = 3 * r.inserted_swaps;
    r.steps = s.steps();
    r.truncated = s.truncated();
    return r;
}

/// Picks the next action for a state; called only while the episode is running.
using ActionChooser = std::function<Action(const RoutingState&)>;
/// Optional hook observing each decision before it is applied.
using DecisionObserver = std::function<void(const RoutingState&, const Action&)>;

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// One SWAP moving the first qubit of gate k one hop closer to its partner; lowest node id wins ties.
[[nodiscard]] inline Action path_move(const RoutingState& s, std::size_t k) {
    const auto& p = s.problem();
    const Gate& g = p.circuit[k];
    const PhysicalNode a = s.mapping().phys(g.u);
    const PhysicalNode b = s.mapping().phys(g.v);
    const int here = p.distances(a, b);
    for (PhysicalNode n : p.device.neighbors(a)) { // sorted ascending
        if (p.distances(n, b) == here - 1) {
            return edge_action(a, n);
        }
    }
    throw Error("no shortest-path neighbor; device distances are inconsistent");
}

/// Earliest pending gate of the current slice in circuit order.
[[nodiscard]] inline std::size_t earliest_pending(const RoutingState& s) {
    return *std::min_element(s.pending().begin(), s.pending().end());
}

/// Pending gate with the lexicographically smallest (min qubit, max qubit) pair.
[[nodiscard]] inline std::size_t smallest_pending_pair(const RoutingState& s) {
    const auto& c = s.problem().circuit;
    auto key = [&](std::size_t k) {
        const Gate& g = c[k];
        return std::pair{std::min(g.u, g.v), std::max(g.u, g.v)};
    };
    return *std::min_element(s.pending().begin(), s.pending().end(),
                             [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
}

inline RoutedCircuit drive(RoutingState s, const ActionChooser& choose, const DecisionObserver& observe = {}) {
    const Mapping initial = s.mapping();
    // the zero-cost pass already ran in the constructor; the starting placement is the caller's
    while (!s.finished()) {
        const Action a = choose(s);
        if (observe) {
            observe(s, a);
        }
        s.step(a);
    }
    return finish(s, initial);
}

// ---------------------------------------------------------------------------
// BasicSwap
// ---------------------------------------------------------------------------

[[nodiscard]] inline RoutedCircuit route_basic_swap(std::shared_ptr<const RoutingProblem> problem, const Mapping& m0,
                                                    std::size_t t_max = 1000) {
    return drive(RoutingState(std::move(problem), m0, RewardWeights{}, t_max),
                 [](const RoutingState& s) { return path_move(s, earliest_pending(s)); });
}

[[nodiscard]] inline RoutedCircuit route_basic_swap(const Circuit& c, const Device& d, const Mapping& m0,
                                                    std::size_t t_max = 1000) {
    return route_basic_swap(make_problem(c, d), m0, t_max);
}

// ---------------------------------------------------------------------------
// SABRE
// ---------------------------------------------------------------------------

/// Sum of distances over the given gates under placement m.
[[nodiscard]] inline double gate_distance_sum(const RoutingProblem& p, const Mapping& m,
                                              const std::vector<std::size_t>& gates) {
    double sum = 0.0;
    for (std::size_t k : gates) {
        const Gate& g = p.circuit[k];
        sum += p.distances(m.phys(g.u), m.phys(g.v));
    }
    return sum;
}

/// Gates of slices t+1 .. t+window.
[[nodiscard]] inline std::vector<std::size_t> future_gates(const RoutingState& s, int window) {
    std::vector<std::size_t> out;
    const auto& slices = s.problem().slices;
    for (int w = 1; w <= window; ++w) {
        const std::size_t t = s.slice_index() + static_cast<std::size_t>(w);
        if (t >= slices.size()) {
            break;
        }
        out.insert(out.end(), slices[t].begin(), slices[t].end());
    }
    return out;
}

/// Edges with at least one endpoint holding a qubit of a front-layer gate, lexicographic.
[[nodiscard]] inline std::vector<Action> sabre_candidates(const RoutingState& s) {
    const auto& p = s.problem();
    std::vector<char> hot(static_cast<std::size_t>(p.device.n_nodes()), 0);
    for (std::size_t k : s.pending()) {
        const Gate& g = p.circuit[k];
        hot[static_cast<std::size_t>(s.mapping().phys(g.u))] = 1;
        hot[static_cast<std::size_t>(s.mapping().phys(g.v))] = 1;
    }
    std::vector<Action> out;
    for (const auto& [u, v] : p.device.edges()) {
        if (hot[static_cast<std::size_t>(u)] || hot[static_cast<std::size_t>(v)]) {
            out.push_back(Action{u, v});
        }
    }
    return out;
}

/// Score of applying `a`: basic is the front-layer distance sum, lookahead the normalized two-term form.
[[nodiscard]] inline double sabre_score(const RoutingState& s, const Action& a, bool lookahead, double omega,
                                        const std::vector<std::size_t>& extended) {
    Mapping m = s.mapping();
    m.swap_nodes(a.u, a.v);
    const auto& p = s.problem();
    const double front = gate_distance_sum(p, m, s.pending());
    if (!lookahead) {
        return front;
    }
    double score = front / static_cast<double>(s.pending().size());
    if (!extended.empty()) {
        score += omega * gate_distance_sum(p, m, extended) / static_cast<double>(extended.size());
    }
    return score;
}

[[nodiscard]] inline RoutedCircuit route_sabre(std::shared_ptr<const RoutingProblem> problem, const Mapping& m0,
                                               const RouterConfig& cfg, const DecisionObserver& observe = {}) {
    if (cfg.kind != RouterKind::SabreBasic && cfg.kind != RouterKind::SabreLookahead) {
        throw ConfigError("route_sabre needs a sabre router kind");
    }
    cfg.validate();
    const bool lookahead = cfg.kind == RouterKind::SabreLookahead;
    std::size_t cached_slice = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> extended;
    auto choose = [&](const RoutingState& s) {
        if (lookahead && s.slice_index() != cached_slice) {
            cached_slice = s.slice_index();
            extended = future_gates(s, cfg.window);
        }
        const auto candidates = sabre_candidates(s);
        Action best = candidates.front();
        double best_score = std::numeric_limits<double>::infinity();
        for (const Action& a : candidates) {
            const double sc = sabre_score(s, a, lookahead, cfg.omega, extended);
            if (sc < best_score) {
                best_score = sc;
                best = a;
            }
        }
        return best;
    };
    return drive(RoutingState(std::move(problem), m0, cfg.weights, cfg.t_max), choose, observe);
}

[[nodiscard]] inline RoutedCircuit route_sabre(const Circuit& c, const Device& d, const Mapping& m0,
                                               const RouterConfig& cfg, const DecisionObserver& observe = {}) {
    return route_sabre(make_problem(c, d), m0, cfg, observe);
}

// ---------------------------------------------------------------------------
// QAP greedy
// ---------------------------------------------------------------------------

/// Highest one-step reward over all legal actions; first in edge order on ties.
[[nodiscard]] inline Action best_reward_action(const RoutingState& s) {
    const auto& actions = s.legal_actions();
    Action best = actions.front();
    double best_reward = -std::numeric_limits<double>::infinity();
    for (const Action& a : actions) {
        const double r = s.preview(a).reward;
        if (r > best_reward) {
            best_reward = r;
            best = a;
        }
    }
    return best;
}

/**
 * Wraps a chooser with the plateau escape: after `limit` consecutive steps
 * that execute no gate, path moves on the smallest pending pair take over
 * until a gate runs.
 */
class StallGuard {
public:
    StallGuard(ActionChooser inner, std::size_t limit) : inner_(std::move(inner)), limit_(limit) {}

    Action operator()(const RoutingState& s) {
        if (s.pending_total() != last_remaining_) {
            last_remaining_ = s.pending_total();
            stalled_ = 0;
            fallback_ = false;
        } else if (++stalled_ >= limit_) {
            fallback_ = true;
        }
        if (fallback_) {
            ++fallback_moves_;
            return path_move(s, smallest_pending_pair(s));
        }
        return inner_(s);
    }

    [[nodiscard]] std::size_t fallback_moves() const noexcept { return fallback_moves_; }

private:
    ActionChooser inner_;
    std::size_t limit_;
    std::size_t last_remaining_ = std::numeric_limits<std::size_t>::max();
    std::size_t stalled_ = 0;
    bool fallback_ = false;
    std::size_t fallback_moves_ = 0;
};

[[nodiscard]] inline RoutedCircuit route_qap_greedy(std::shared_ptr<const RoutingProblem> problem, const Mapping& m0,
                                                    const RouterConfig& cfg, const DecisionObserver& observe = {}) {
    if (cfg.kind != RouterKind::QapGreedy) {
        throw ConfigError("route_qap_greedy needs the qap-greedy router kind");
    }
    cfg.validate();
    const std::size_t limit =
        cfg.stall_limit != 0 ? cfg.stall_limit : static_cast<std::size_t>(problem->device.n_nodes());
    auto guard = std::make_shared<StallGuard>(best_reward_action, limit);
    return drive(RoutingState(std::move(problem), m0, cfg.weights, cfg.t_max),
                 [guard](const RoutingState& s) { return (*guard)(s); }, observe);
}

[[nodiscard]] inline RoutedCircuit route_qap_greedy(const Circuit& c, const Device& d, const Mapping& m0,
                                                    const RouterConfig& cfg, const DecisionObserver& observe = {}) {
    return route_qap_greedy(make_problem(c, d), m0, cfg, observe);
}

// ---------------------------------------------------------------------------
// Dispatch and bidirectional refinement
// ---------------------------------------------------------------------------

/// Routes one pass of a problem from a starting placement.
using RouteFn = std::function<RoutedCircuit(const std::shared_ptr<const RoutingProblem>&, const Mapping&)>;

[[nodiscard]] inline RouteFn make_router(const RouterConfig& cfg) {
    cfg.validate();
    switch (cfg.kind) {
    case RouterKind::BasicSwap:
        return [cfg](const std::shared_ptr<const RoutingProblem>& p, const Mapping& m) {
            return route_basic_swap(p, m, cfg.t_max);
        };
    case RouterKind::SabreBasic:
    case RouterKind::SabreLookahead:
        return [cfg](const std::shared_ptr<const RoutingProblem>& p, const Mapping& m) {
            return route_sabre(p, m, cfg);
        };
    case RouterKind::QapGreedy:
        return [cfg](const std::shared_ptr<const RoutingProblem>& p, const Mapping& m) {
            return route_qap_greedy(p, m, cfg);
        };
    }
    throw ConfigError("unknown router kind");
}

/// Forward, backward (reversed gates), forward; returns the last forward pass.
[[nodiscard]] inline RoutedCircuit route_bidirectional(const Circuit& c, const Device& d, const Mapping& m0,
                                                       const RouteFn& inner) {
    const auto forward = make_problem(c, d);
    const auto backward = make_problem(c.reversed(), d);
    const RoutedCircuit first = inner(forward, m0);
    const RoutedCircuit second = inner(backward, first.final_mapping);
    return inner(forward, second.final_mapping);
}

[[nodiscard]] inline RoutedCircuit route_bidirectional(const Circuit& c, const Device& d, const Mapping& m0,
                                                       const RouterConfig& inner) {
    return route_bidirectional(c, d, m0, make_router(inner));
}

/// One pass, or forward-backward-forward when passes == 3.
[[nodiscard]] inline RoutedCircuit route(const Circuit& c, const Device& d, const Mapping& m0, const RouteFn& fn,
                                         int passes = 1) {
    if (passes != 1 && passes != 3) {
        throw ConfigError("passes must be 1 or 3");
    }
    if (passes == 3) {
        return route_bidirectional(c, d, m0, fn);
    }
    return fn(make_problem(c, d), m0);
}

[[nodiscard]] inline RoutedCircuit route(const Circuit& c, const Device& d, const Mapping& m0,
                                         const RouterConfig& cfg, int passes = 1) {
    return route(c, d, m0, make_router(cfg), passes);
}

} // namespace qapr

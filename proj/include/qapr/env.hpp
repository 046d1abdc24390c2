// SPDX-License-Identifier: MIT

/**
 * @file env.hpp
 * @brief Step-level routing environment.
 *
 * The circuit is consumed one time slice at a time. Each action swaps the
 * occupants of one device edge; every pending gate of the current slice whose
 * qubits become adjacent is executed and its flow entry cleared. Whenever a
 * slice is entered (including at reset), gates that are already adjacent are
 * executed for free before any action is taken.
 */

#pragma once

#include "qapr/circuit.hpp"
#include "qapr/device.hpp"
#include "qapr/errors.hpp"
#include "qapr/qap.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace qapr {

/// Immutable inputs shared by every episode on the same (circuit, device).
struct RoutingProblem {
    Circuit circuit;
    TimeSlices slices;
    std::vector<FlowMatrix> flows;
    Device device;
    DistanceMatrix distances;
};

[[nodiscard]] inline std::shared_ptr<const RoutingProblem> make_problem(Circuit circuit, Device device) {
    auto p = std::make_shared<RoutingProblem>();
    p->slices = slice_circuit(circuit);
    p->flows = slice_flows(circuit, p->slices);
    p->distances = distance_matrix(device);
    p->circuit = std::move(circuit);
    p->device = std::move(device);
    return p;
}

struct Action {
    PhysicalNode u = 0;
    PhysicalNode v = 1;

    friend bool operator==(const Action& a, const Action& b) noexcept { return a.u == b.u && a.v == b.v; }
    friend bool operator<(const Action& a, const Action& b) noexcept {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    }
};

/// One emitted operation: an original circuit gate or an inserted SWAP, with its physical nodes.
struct ScheduleEntry {
    enum class Kind : std::uint8_t { Gate, Swap };
    Kind kind = Kind::Gate;
    std::size_t gate_index = 0; ///< index into the circuit; unused for inserted swaps
    PhysicalNode u = 0;
    PhysicalNode v = 0;

    [[nodiscard]] bool is_swap() const noexcept { return kind == Kind::Swap; }
    friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

struct StepOutcome {
    double reward = 0.0;
    double r_qap = 0.0;
    double qap_before = 0.0;
    double qap_after = 0.0;
    std::vector<std::size_t> scheduled; ///< G_tau: gates made adjacent by this action
    int swaps_inserted = 0;
    bool done = false;
    bool truncated = false;
};

struct TraceRecord {
    std::size_t t = 0;
    std::size_t j = 0;
    Action action;
    double reward = 0.0;
    std::vector<std::pair<int, int>> scheduled;
    double qap_before = 0.0;
    double qap_after = 0.0;
};

struct Observation {
    Mapping mapping;
    FlowMatrix current;
    std::vector<FlowMatrix> future; ///< exactly H matrices, zero past the last slice
    DistanceMatrix distances;
};

class RoutingState {
public:
    RoutingState(std::shared_ptr<const RoutingProblem> problem, Mapping initial, RewardWeights weights,
                 std::size_t t_max)
        : problem_(std::move(problem)), mapping_(std::move(initial)), weights_(weights), t_max_(t_max) {
        const auto& c = problem_->circuit;
        const auto& d = problem_->device;
        weights_.validate();
        if (c.n_qubits() > d.n_nodes()) {
            throw QubitCountExceedsDevice("circuit uses " + std::to_string(c.n_qubits()) + " qubits, device has " +
                                          std::to_string(d.n_nodes()) + " nodes");
        }
        if (mapping_.n_logical() != c.n_qubits() || mapping_.n_physical() != d.n_nodes() || !mapping_.is_valid()) {
            throw InvalidMapping("initial mapping does not match the circuit and device");
        }
        for (const auto& [u, v] : d.edges()) {
            actions_.push_back(Action{u, v});
        }
        remaining_ = c.size();
        load_slice(0);
        settle();
    }

    // --- read-only view -----------------------------------------------------

    [[nodiscard]] const RoutingProblem& problem() const noexcept { return *problem_; }
    [[nodiscard]] const std::shared_ptr<const RoutingProblem>& problem_ptr() const noexcept { return problem_; }
    [[nodiscard]] const Mapping& mapping() const noexcept { return mapping_; }
    [[nodiscard]] const RewardWeights& weights() const noexcept { return weights_; }
    [[nodiscard]] std::size_t slice_index() const noexcept { return t_; }
    [[nodiscard]] std::size_t slice_count() const noexcept { return problem_->slices.size(); }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] std::size_t steps_in_slice() const noexcept { return j_; }
    [[nodiscard]] std::size_t t_max() const noexcept { return t_max_; }
    [[nodiscard]] bool done() const noexcept { return t_ >= problem_->slices.size(); }
    [[nodiscard]] bool truncated() const noexcept { return !done() && steps_ >= t_max_; }
    [[nodiscard]] bool finished() const noexcept { return done() || truncated(); }
    /// Pending gates of the current slice (indices into the circuit), in slice order.
    [[nodiscard]] const std::vector<std::size_t>& pending() const noexcept { return pending_; }
    [[nodiscard]] const FlowMatrix& current_flow() const noexcept { return flow_; }
    [[nodiscard]] const std::vector<ScheduleEntry>& schedule() const noexcept { return schedule_; }
    [[nodiscard]] const std::vector<TraceRecord>& trace() const noexcept { return trace_; }
    [[nodiscard]] std::size_t swaps_inserted() const noexcept { return swaps_; }
    [[nodiscard]] std::size_t pending_total() const noexcept { return remaining_; }

    /// Every device edge, lexicographic. The action space does not depend on the state.
    [[nodiscard]] const std::vector<Action>& legal_actions() const {
        if (finished()) {
            throw EpisodeFinished("episode is over");
        }
        return actions_;
    }

    /// Effective flow used by the reward: current pending flow plus decayed future slices.
    [[nodiscard]] FlowMatrix effective_flow() const {
        FlowMatrix f = flow_;
        f.axpy(1.0, future_flow_);
        return f;
    }

    [[nodiscard]] Observation observation(int horizon) const {
        Observation obs{mapping_, flow_, {}, problem_->distances};
        const int n = problem_->circuit.n_qubits();
        for (int h = 1; h <= horizon; ++h) {
            const std::size_t s = t_ + static_cast<std::size_t>(h);
            obs.future.push_back(s < problem_->flows.size() ? problem_->flows[s] : FlowMatrix(n));
        }
        return obs;
    }

    /// Outcome of taking `a` from this state, without changing it.
    [[nodiscard]] StepOutcome preview(const Action& a) const {
        check_action(a);
        Mapping after = mapping_;
        after.swap_nodes(a.u, a.v);
        StepOutcome out;
        out.swaps_inserted = 1;
        const auto& dist = problem_->distances;
        FlowMatrix cleared = flow_;
        for (std::size_t k : pending_) {
            const Gate& g = problem_->circuit[k];
            if (problem_->device.adjacent(after.phys(g.u), after.phys(g.v))) {
                out.scheduled.push_back(k);
                cleared.clear(g.u, g.v);
            }
        }
        const double future_before = qap_objective(mapping_, future_flow_, dist);
        const double future_after = qap_objective(after, future_flow_, dist);
        out.qap_before = qap_objective(mapping_, flow_, dist) + future_before;
        out.qap_after = qap_objective(after, cleared, dist) + future_after;
        out.r_qap = out.qap_before - out.qap_after;
        out.reward = total_reward(out.r_qap, out.scheduled.size(), weights_);
        const bool slice_clears = out.scheduled.size() == pending_.size();
        out.done = slice_clears && will_finish_after_slice(after);
        out.truncated = !out.done && steps_ + 1 >= t_max_;
        return out;
    }

    StepOutcome step(const Action& a) {
        StepOutcome out = preview(a);
        TraceRecord rec{t_, j_, a, out.reward, {}, out.qap_before, out.qap_after};

        mapping_.swap_nodes(a.u, a.v);
        schedule_.push_back(ScheduleEntry{ScheduleEntry::Kind::Swap, 0, a.u, a.v});
        ++swaps_;
        ++steps_;
        ++j_;
        for (std::size_t k : out.scheduled) {
            const Gate& g = problem_->circuit[k];
            rec.scheduled.emplace_back(g.u, g.v);
            execute(k);
        }
        if (!out.scheduled.empty()) {
            std::erase_if(pending_, [&](std::size_t k) {
                return std::find(out.scheduled.begin(), out.scheduled.end(), k) != out.scheduled.end();
            });
        }
        settle();
        trace_.push_back(std::move(rec));
        out.done = done();
        out.truncated = truncated();
        return out;
    }

private:
    void check_action(const Action& a) const {
        if (finished()) {
            throw EpisodeFinished("episode is over");
        }
        if (!problem_->device.adjacent(a.u, a.v)) {
            throw IllegalAction("(" + std::to_string(a.u) + "," + std::to_string(a.v) + ") is not a device edge");
        }
    }

    void load_slice(std::size_t t) {
        t_ = t;
        j_ = 0;
        const auto& slices = problem_->slices;
        const int n = problem_->circuit.n_qubits();
        if (t_ >= slices.size()) {
            pending_.clear();
            flow_ = FlowMatrix(n);
            future_flow_ = FlowMatrix(n);
            return;
        }
        pending_ = slices[t_];
        flow_ = problem_->flows[t_];
        future_flow_ = FlowMatrix(n);
        if (weights_.flow == RewardFlow::Effective) {
            double w = 1.0;
            for (int h = 1; h <= weights_.horizon && t_ + static_cast<std::size_t>(h) < slices.size(); ++h) {
                w *= weights_.gamma;
                future_flow_.axpy(w, problem_->flows[t_ + static_cast<std::size_t>(h)]);
            }
        }
    }

    void execute(std::size_t k) {
        const Gate& g = problem_->circuit[k];
        schedule_.push_back(ScheduleEntry{ScheduleEntry::Kind::Gate, k, mapping_.phys(g.u), mapping_.phys(g.v)});
        flow_.clear(g.u, g.v);
        --remaining_;
    }

    /// Zero-cost pass: run already-adjacent gates, advancing over slices that clear completely.
    void settle() {
        const auto& slices = problem_->slices;
        while (t_ < slices.size()) {
            std::vector<std::size_t> still;
            for (std::size_t k : pending_) {
                const Gate& g = problem_->circuit[k];
                if (problem_->device.adjacent(mapping_.phys(g.u), mapping_.phys(g.v))) {
                    execute(k);
                } else {
                    still.push_back(k);
                }
            }
            pending_ = std::move(still);
            if (!pending_.empty()) {
                return;
            }
            load_slice(t_ + 1);
        }
    }

    /// True if every slice after the current one clears for free under `m`.
    [[nodiscard]] bool will_finish_after_slice(const Mapping& m) const {
        const auto& slices = problem_->slices;
        for (std::size_t s = t_ + 1; s < slices.size(); ++s) {
            for (std::size_t k : slices[s]) {
                const Gate& g = problem_->circuit[k];
                if (!problem_->device.adjacent(m.phys(g.u), m.phys(g.v))) {
                    return false;
                }
            }
        }
        return true;
    }

    std::shared_ptr<const RoutingProblem> problem_;
    Mapping mapping_;
    RewardWeights weights_;
    std::size_t t_max_ = 1000;
    std::vector<Action> actions_;

    std::size_t t_ = 0;
    std::size_t j_ = 0;
    std::size_t steps_ = 0;
    std::size_t swaps_ = 0;
    std::size_t remaining_ = 0;
    std::vector<std::size_t> pending_;
    FlowMatrix flow_;
    FlowMatrix future_flow_;
    std::vector<ScheduleEntry> schedule_;
    std::vector<TraceRecord> trace_;
};

[[nodiscard]] inline RoutingState reset(std::shared_ptr<const RoutingProblem> problem, Mapping initial,
                                        RewardWeights weights = {}, std::size_t t_max = 1000) {
    return RoutingState(std::move(problem), std::move(initial), weights, t_max);
}

[[nodiscard]] inline RoutingState reset(const Circuit& circuit, const Device& device, Mapping initial,
                                        RewardWeights weights = {}, std::size_t t_max = 1000) {
    if (circuit.n_qubits() > device.n_nodes()) {
        throw QubitCountExceedsDevice("circuit uses " + std::to_string(circuit.n_qubits()) +
                                      " qubits, device has " + std::to_string(device.n_nodes()) + " nodes");
    }
    return RoutingState(make_problem(circuit, device), std::move(initial), weights, t_max);
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

[[nodiscard]] inline nlohmann::json trace_record_json(const TraceRecord& r) {
    nlohmann::json scheduled = nlohmann::json::array();
    for (const auto& [u, v] : r.scheduled) {
        scheduled.push_back({u, v});
    }
    return nlohmann::json{{"t", r.t},
                          {"j", r.j},
                          {"action", {r.action.u, r.action.v}},
                          {"reward", r.reward},
                          {"scheduled", scheduled},
                          {"qap_before", r.qap_before},
                          {"qap_after", r.qap_after}};
}

/// One JSON object per line.
inline void write_trace_jsonl(std::ostream& os, const std::vector<TraceRecord>& records) {
    for (const auto& r : records) {
        os << trace_record_json(r).dump() << '\n';
    }
}

} // namespace qapr

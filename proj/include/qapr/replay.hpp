// SPDX-License-Identifier: MIT

/**
 * @file replay.hpp
 * @brief Replays an emitted schedule on a permutation simulator.
 *
 * The check is independent of the environment's own bookkeeping: it only
 * trusts the circuit, the device and the initial placement, and re-derives
 * where every logical qubit sits after each inserted SWAP.
 */

#pragma once

#include "qapr/circuit.hpp"
#include "qapr/device.hpp"
#include "qapr/env.hpp"
#include "qapr/qap.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace qapr {

struct ReplayReport {
    bool ok = true;
    std::string error;
    Mapping final_mapping;
    std::size_t swaps = 0;
    std::size_t gates = 0;

    explicit operator bool() const noexcept { return ok; }
};

/**
 * Accepts iff every original gate runs exactly once, on adjacent nodes, after
 * every earlier gate sharing one of its qubits, and every SWAP uses a device
 * edge. When `expected_final` is given it must match the replayed placement.
 */
[[nodiscard]] inline ReplayReport replay_schedule(const Circuit& circuit, const Device& device, const Mapping& initial,
                                                  const std::vector<ScheduleEntry>& schedule,
                                                  const std::optional<Mapping>& expected_final = std::nullopt) {
    ReplayReport rep;
    auto fail = [&](std::string why) {
        rep.ok = false;
        rep.error = std::move(why);
        return rep;
    };
    if (initial.n_logical() != circuit.n_qubits() || initial.n_physical() != device.n_nodes() ||
        !initial.is_valid()) {
        return fail("initial mapping does not fit circuit/device");
    }

    // Per-qubit queues of gate indices in circuit order; a gate is ready when it heads both queues.
    const auto nq = static_cast<std::size_t>(circuit.n_qubits());
    std::vector<std::vector<std::size_t>> per_qubit(nq);
    for (std::size_t k = 0; k < circuit.size(); ++k) {
        per_qubit[static_cast<std::size_t>(circuit[k].u)].push_back(k);
        per_qubit[static_cast<std::size_t>(circuit[k].v)].push_back(k);
    }
    std::vector<std::size_t> head(nq, 0);
    std::vector<char> executed(circuit.size(), 0);

    Mapping m = initial;
    for (std::size_t pos = 0; pos < schedule.size(); ++pos) {
        const ScheduleEntry& e = schedule[pos];
        const std::string at = "entry " + std::to_string(pos) + ": ";
        if (e.is_swap()) {
            if (!device.adjacent(e.u, e.v)) {
                return fail(at + "swap on non-edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
            }
            m.swap_nodes(e.u, e.v);
            ++rep.swaps;
            continue;
        }
        if (e.gate_index >= circuit.size()) {
            return fail(at + "gate index out of range");
        }
        const std::size_t k = e.gate_index;
        if (executed[k]) {
            return fail(at + "gate " + std::to_string(k) + " executed twice");
        }
        const Gate& g = circuit[k];
        const auto qu = static_cast<std::size_t>(g.u);
        const auto qv = static_cast<std::size_t>(g.v);
        if (head[qu] >= per_qubit[qu].size() || per_qubit[qu][head[qu]] != k ||
            head[qv] >= per_qubit[qv].size() || per_qubit[qv][head[qv]] != k) {
            return fail(at + "gate " + std::to_string(k) + " runs before a gate it depends on");
        }
        const PhysicalNode pu = m.phys(g.u);
        const PhysicalNode pv = m.phys(g.v);
        if (!device.adjacent(pu, pv)) {
            return fail(at + "gate " + std::to_string(k) + " on non-adjacent nodes " + std::to_string(pu) + "," +
                        std::to_string(pv));
        }
        if (!((e.u == pu && e.v == pv) || (e.u == pv && e.v == pu))) {
            return fail(at + "gate " + std::to_string(k) + " reported on nodes that do not hold its qubits");
        }
        executed[k] = 1;
        ++head[qu];
        ++head[qv];
        ++rep.gates;
    }
    if (rep.gates != circuit.size()) {
        return fail(std::to_string(circuit.size() - rep.gates) + " gates never executed");
    }
    if (expected_final && !(*expected_final == m)) {
        return fail("reported final mapping differs from the replayed one");
    }
    rep.final_mapping = std::move(m);
    return rep;
}

} // namespace qapr

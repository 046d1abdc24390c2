// SPDX-License-Identifier: MIT
// Shared test fixtures and independent oracles.

#pragma once

#include "qapr/circuit.hpp"
#include "qapr/device.hpp"
#include "qapr/qap.hpp"

#include <random>
#include <vector>

namespace qapr::testing {

/// Dense Tr(F X D X^T) with X materialized as an N_Q x N_P 0/1 matrix.
inline double dense_trace_objective(const Mapping& m, const FlowMatrix& f, const DistanceMatrix& d) {
    const int nq = m.n_logical();
    const int np = m.n_physical();
    std::vector<double> x(static_cast<std::size_t>(nq) * static_cast<std::size_t>(np), 0.0);
    for (int q = 0; q < nq; ++q) {
        x[static_cast<std::size_t>(q * np + m.phys(q))] = 1.0;
    }
    double trace = 0.0;
    for (int i = 0; i < nq; ++i) {
        for (int j = 0; j < nq; ++j) {
            for (int k = 0; k < np; ++k) {
                for (int l = 0; l < np; ++l) {
                    trace += f(i, j) * x[static_cast<std::size_t>(j * np + k)] * d(k, l) *
                             x[static_cast<std::size_t>(i * np + l)];
                }
            }
        }
    }
    return trace;
}

/**
 * Motivation instance on a 3x4 grid (node = 4r + c). After the first slice
 * clears for free, the pending slice holds (q2,q3) at distance 2 and (q4,q5)
 * at distance 4. SWAP(q2,q6) makes q2,q3 adjacent; SWAP(q2,q4) pushes q2 one
 * hop away from q3 while pulling q4 one hop towards q5, so the objective is
 * unchanged.
 */
struct MotivationInstance {
    Device device = make_grid(3, 4);
    Mapping mapping{{0, 1, 5, 7, 4, 11, 6, 2, 3, 8, 9, 10}, 12};
    Circuit circuit{12, {{3, 8}, {0, 4}, {2, 3}, {4, 5}}};

    [[nodiscard]] FlowMatrix pending_flow() const { return slice_to_flow({Gate{2, 3}, Gate{4, 5}}, 12); }
    [[nodiscard]] Edge green() const { return {5, 6}; } // nodes of q2 and q6
    [[nodiscard]] Edge red() const { return {4, 5}; }   // nodes of q4 and q2
};

inline Circuit random_circuit(int n_qubits, int n_gates, std::mt19937_64& rng) {
    Circuit c(n_qubits);
    std::uniform_int_distribution<int> q(0, n_qubits - 1);
    for (int i = 0; i < n_gates; ++i) {
        const int u = q(rng);
        int v = q(rng);
        while (v == u) {
            v = q(rng);
        }
        c.add(u, v);
    }
    return c;
}

} // namespace qapr::testing

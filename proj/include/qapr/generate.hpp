// SPDX-License-Identifier: MIT

/**
 * @file generate.hpp
 * @brief Seeded random two-qubit circuits for training and benchmark suites.
 */

#pragma once

#include "qapr/circuit.hpp"
#include "qapr/errors.hpp"

#include <cstdint>
#include <random>

namespace qapr {

/// Gate-count multipliers: a circuit on N qubits has between kappa_low*N and kappa_high*N gates.
struct GateDensity {
    int kappa_low = 8;
    int kappa_high = 16;
};

/// Uniform gate count in [kappa_low*N, kappa_high*N], each gate a uniform pair of distinct qubits.
[[nodiscard]] inline Circuit generate_training_circuit(int n_qubits, std::uint64_t seed, GateDensity k = {}) {
    if (n_qubits < 2) {
        throw InvalidSize("random circuits need at least 2 qubits");
    }
    if (k.kappa_low < 0 || k.kappa_high < k.kappa_low) {
        throw ConfigError("need 0 <= kappa_low <= kappa_high");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> count(k.kappa_low * n_qubits, k.kappa_high * n_qubits);
    std::uniform_int_distribution<int> first(0, n_qubits - 1);
    std::uniform_int_distribution<int> second(0, n_qubits - 2);
    const int n_gates = count(rng);
    Circuit c(n_qubits);
    for (int i = 0; i < n_gates; ++i) {
        const int u = first(rng);
        int v = second(rng);
        v += v >= u ? 1 : 0;
        c.add(u, v);
    }
    return c;
}

} // namespace qapr

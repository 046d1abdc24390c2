// SPDX-License-Identifier: MIT

/**
 * @file circuit.hpp
 * @brief Two-qubit circuits, ASAP time slicing and per-slice flow matrices.
 *
 * A circuit is an ordered list of two-qubit gates; two gates that share a
 * qubit keep their textual order, which defines the dependency DAG. Slicing
 * partitions the DAG by depth so that every slice holds gates on pairwise
 * disjoint qubits, and each slice converts to a symmetric flow matrix.
 */

#pragma once

#include "qapr/errors.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qapr {

using LogicalQubit = int;
using PhysicalNode = int;

enum class GateKind : std::uint8_t { CNOT, SWAP };

struct Gate {
    LogicalQubit u = 0;
    LogicalQubit v = 1;
    GateKind kind = GateKind::CNOT;

    [[nodiscard]] bool touches(LogicalQubit q) const noexcept { return u == q || v == q; }
    [[nodiscard]] bool shares_qubit(const Gate& o) const noexcept {
        return touches(o.u) || touches(o.v);
    }
    friend bool operator==(const Gate& a, const Gate& b) noexcept {
        return a.u == b.u && a.v == b.v && a.kind == b.kind;
    }
};

class Circuit {
public:
    Circuit() = default;
    explicit Circuit(int n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits < 0) {
            throw IndexError("negative qubit count");
        }
    }
    Circuit(int n_qubits, const std::vector<std::pair<int, int>>& pairs) : Circuit(n_qubits) {
        for (const auto& [u, v] : pairs) {
            add(u, v);
        }
    }

    void add(LogicalQubit u, LogicalQubit v, GateKind kind = GateKind::CNOT) {
        if (u < 0 || v < 0 || u >= n_qubits_ || v >= n_qubits_) {
            throw IndexError("gate (" + std::to_string(u) + "," + std::to_string(v) +
                             ") outside register of size " + std::to_string(n_qubits_));
        }
        if (u == v) {
            throw IndexError("gate acts twice on qubit " + std::to_string(u));
        }
        gates_.push_back(Gate{u, v, kind});
    }

    [[nodiscard]] int n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] const std::vector<Gate>& gates() const noexcept { return gates_; }
    [[nodiscard]] std::size_t size() const noexcept { return gates_.size(); }
    [[nodiscard]] bool empty() const noexcept { return gates_.empty(); }
    [[nodiscard]] const Gate& operator[](std::size_t i) const { return gates_.at(i); }

    /// Same gates in reverse order (the backward pass of bidirectional routing).
    [[nodiscard]] Circuit reversed() const {
        Circuit out(n_qubits_);
        out.gates_.assign(gates_.rbegin(), gates_.rend());
        return out;
    }

    friend bool operator==(const Circuit& a, const Circuit& b) noexcept {
        return a.n_qubits_ == b.n_qubits_ && a.gates_ == b.gates_;
    }

private:
    int n_qubits_ = 0;
    std::vector<Gate> gates_;
};

/// Depth layers of a circuit. Each slice lists indices into Circuit::gates().
struct TimeSlices {
    std::vector<std::vector<std::size_t>> slices;

    [[nodiscard]] std::size_t size() const noexcept { return slices.size(); }
    [[nodiscard]] bool empty() const noexcept { return slices.empty(); }
    [[nodiscard]] const std::vector<std::size_t>& operator[](std::size_t t) const {
        return slices.at(t);
    }
};

/// ASAP layering: a gate lands one slice after the latest earlier gate sharing a qubit.
[[nodiscard]] inline TimeSlices slice_circuit(const Circuit& c) {
    TimeSlices out;
    std::vector<std::size_t> next_free(static_cast<std::size_t>(c.n_qubits()), 0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const Gate& g = c[k];
        auto& fu = next_free[static_cast<std::size_t>(g.u)];
        auto& fv = next_free[static_cast<std::size_t>(g.v)];
        const std::size_t layer = std::max(fu, fv);
        if (layer >= out.slices.size()) {
            out.slices.resize(layer + 1);
        }
        out.slices[layer].push_back(k);
        fu = fv = layer + 1;
    }
    return out;
}

[[nodiscard]] inline std::vector<Gate> slice_gates(const Circuit& c, const std::vector<std::size_t>& slice) {
    std::vector<Gate> gates;
    gates.reserve(slice.size());
    for (std::size_t k : slice) {
        gates.push_back(c[k]);
    }
    return gates;
}

/**
 * Symmetric, zero-diagonal, nonnegative N x N matrix of pending interactions.
 *
 * Storage is dense; the set of nonzero upper-triangle pairs is tracked alongside
 * so that objective evaluation costs O(nnz).
 */
class FlowMatrix {
public:
    struct Entry {
        int i;
        int j;
        double weight;
    };

    FlowMatrix() = default;
    explicit FlowMatrix(int n)
        : n_(n), values_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0),
          slot_(values_.size(), kNoSlot) {
        if (n < 0) {
            throw ShapeMismatch("negative flow matrix size");
        }
    }

    [[nodiscard]] int size() const noexcept { return n_; }

    [[nodiscard]] double operator()(int i, int j) const {
        return values_[index(i, j)];
    }

    /// Sets F[i][j] = F[j][i] = w.
    void set(int i, int j, double w) {
        check(i, j);
        if (i == j) {
            throw ShapeMismatch("flow matrix diagonal must stay zero");
        }
        if (!(w >= 0.0)) {
            throw ShapeMismatch("flow weights must be nonnegative");
        }
        if (i > j) {
            std::swap(i, j);
        }
        const std::size_t upper = index(i, j);
        values_[upper] = w;
        values_[index(j, i)] = w;
        if (w != 0.0 && slot_[upper] == kNoSlot) {
            slot_[upper] = pairs_.size();
            pairs_.emplace_back(i, j);
        } else if (w == 0.0 && slot_[upper] != kNoSlot) {
            const std::size_t pos = slot_[upper];
            const auto last = pairs_.back();
            pairs_[pos] = last;
            slot_[index(last.first, last.second)] = pos;
            pairs_.pop_back();
            slot_[upper] = kNoSlot;
        }
    }

    void add(int i, int j, double w) { set(i, j, (*this)(i, j) + w); }
    void clear(int i, int j) { set(i, j, 0.0); }

    /// this += scale * other
    void axpy(double scale, const FlowMatrix& other) {
        if (other.n_ != n_) {
            throw ShapeMismatch("flow matrix sizes differ");
        }
        for (const auto& [i, j] : other.pairs_) {
            add(i, j, scale * other(i, j));
        }
    }

    [[nodiscard]] std::size_t nonzero_pairs() const noexcept { return pairs_.size(); }
    [[nodiscard]] bool is_zero() const noexcept { return pairs_.empty(); }

    /// Nonzero upper-triangle entries (i < j), sorted.
    [[nodiscard]] std::vector<Entry> entries() const {
        std::vector<Entry> out;
        out.reserve(pairs_.size());
        for (const auto& [i, j] : pairs_) {
            out.push_back(Entry{i, j, (*this)(i, j)});
        }
        std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });
        return out;
    }

    /// Calls fn(i, j, w) once per nonzero unordered pair, in unspecified order.
    template <typename Fn>
    void for_each_pair(Fn&& fn) const {
        for (const auto& [i, j] : pairs_) {
            fn(i, j, values_[index(i, j)]);
        }
    }

    [[nodiscard]] const std::vector<double>& dense() const noexcept { return values_; }

    friend bool operator==(const FlowMatrix& a, const FlowMatrix& b) noexcept {
        return a.n_ == b.n_ && a.values_ == b.values_;
    }

private:
    static constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

    [[nodiscard]] std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
    }
    void check(int i, int j) const {
        if (i < 0 || j < 0 || i >= n_ || j >= n_) {
            throw IndexError("flow index out of range");
        }
    }

    int n_ = 0;
    std::vector<double> values_;
    std::vector<std::size_t> slot_;
    std::vector<std::pair<int, int>> pairs_;
};

/// Flow of one slice: F[u][v] counts gates on (u, v). Slice gates must be qubit-disjoint.
[[nodiscard]] inline FlowMatrix slice_to_flow(const std::vector<Gate>& slice, int n_qubits) {
    FlowMatrix f(n_qubits);
    std::vector<char> used(static_cast<std::size_t>(n_qubits), 0);
    for (const Gate& g : slice) {
        if (g.u < 0 || g.v < 0 || g.u >= n_qubits || g.v >= n_qubits) {
            throw IndexError("slice gate outside register");
        }
        auto& a = used[static_cast<std::size_t>(g.u)];
        auto& b = used[static_cast<std::size_t>(g.v)];
        if (a || b) {
            throw DisjointnessViolation("slice gates share qubit " + std::to_string(a ? g.u : g.v));
        }
        a = b = 1;
        f.add(g.u, g.v, 1.0);
    }
    return f;
}

[[nodiscard]] inline std::vector<FlowMatrix> slice_flows(const Circuit& c, const TimeSlices& s) {
    std::vector<FlowMatrix> out;
    out.reserve(s.size());
    for (const auto& slice : s.slices) {
        out.push_back(slice_to_flow(slice_gates(c, slice), c.n_qubits()));
    }
    return out;
}

} // namespace qapr

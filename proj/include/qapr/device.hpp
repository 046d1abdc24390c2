// SPDX-License-Identifier: MIT

/**
 * @file device.hpp
 * @brief Coupling graphs, node coordinates and hop-count distance matrices.
 *
 * Built-in topologies are row-major 2D grids (node id = r * cols + c) and
 * Tokyo-like grids that add fixed diagonal couplers on top of the grid.
 */

#pragma once

#include "qapr/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace qapr {

using Edge = std::pair<int, int>;

struct Coord {
    double x = 0.5;
    double y = 0.5;
};

class Device {
public:
    Device() = default;

    /// Edges are normalized to (min, max), deduplicated and sorted.
    Device(int n_nodes, std::vector<Edge> edges, std::vector<Coord> coords, std::string name = "custom")
        : n_(n_nodes), name_(std::move(name)), coords_(std::move(coords)) {
        if (n_nodes < 1) {
            throw InvalidDevice("device needs at least one node");
        }
        if (coords_.size() != static_cast<std::size_t>(n_nodes)) {
            throw InvalidDevice("expected " + std::to_string(n_nodes) + " coordinates, got " +
                                std::to_string(coords_.size()));
        }
        for (const Coord& c : coords_) {
            if (!(c.x >= 0.0 && c.x <= 1.0 && c.y >= 0.0 && c.y <= 1.0)) {
                throw InvalidDevice("node coordinates must lie in the unit square");
            }
        }
        adjacent_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0);
        neighbors_.resize(static_cast<std::size_t>(n_));
        for (auto [u, v] : edges) {
            if (u < 0 || v < 0 || u >= n_ || v >= n_) {
                throw InvalidDevice("edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
            }
            if (u == v) {
                throw InvalidDevice("self-loop on node " + std::to_string(u));
            }
            if (u > v) {
                std::swap(u, v);
            }
            if (!adjacent(u, v)) {
                adjacent_[idx(u, v)] = adjacent_[idx(v, u)] = 1;
                edges_.emplace_back(u, v);
                neighbors_[static_cast<std::size_t>(u)].push_back(v);
                neighbors_[static_cast<std::size_t>(v)].push_back(u);
            }
        }
        std::sort(edges_.begin(), edges_.end());
        for (auto& nb : neighbors_) {
            std::sort(nb.begin(), nb.end());
        }
    }

    [[nodiscard]] int n_nodes() const noexcept { return n_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    /// Sorted lexicographically; this is also the action order of the routing environment.
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<Coord>& coords() const noexcept { return coords_; }
    [[nodiscard]] const std::vector<int>& neighbors(int u) const { return neighbors_.at(static_cast<std::size_t>(u)); }

    [[nodiscard]] bool adjacent(int u, int v) const noexcept {
        if (u < 0 || v < 0 || u >= n_ || v >= n_) {
            return false;
        }
        return adjacent_[idx(u, v)] != 0;
    }

    /// Position of edge (u, v) in edges(), or -1.
    [[nodiscard]] int edge_index(int u, int v) const {
        if (u > v) {
            std::swap(u, v);
        }
        const auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{u, v});
        if (it == edges_.end() || *it != Edge{u, v}) {
            return -1;
        }
        return static_cast<int>(it - edges_.begin());
    }

private:
    [[nodiscard]] std::size_t idx(int u, int v) const noexcept {
        return static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v);
    }

    int n_ = 0;
    std::string name_;
    std::vector<Edge> edges_;
    std::vector<Coord> coords_;
    std::vector<char> adjacent_;
    std::vector<std::vector<int>> neighbors_;
};

/// All-pairs hop counts. Symmetric with zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(int n, std::vector<int> hops) : n_(n), hops_(std::move(hops)) {
        if (hops_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
            throw ShapeMismatch("distance matrix storage does not match size");
        }
    }

    [[nodiscard]] int size() const noexcept { return n_; }
    [[nodiscard]] int operator()(int u, int v) const noexcept {
        return hops_[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v)];
    }
    [[nodiscard]] int diameter() const noexcept {
        return hops_.empty() ? 0 : *std::max_element(hops_.begin(), hops_.end());
    }

private:
    int n_ = 0;
    std::vector<int> hops_;
};

/// BFS from every node.
[[nodiscard]] inline DistanceMatrix distance_matrix(const Device& d) {
    const int n = d.n_nodes();
    constexpr int kUnreached = std::numeric_limits<int>::max();
    std::vector<int> hops(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), kUnreached);
    std::deque<int> queue;
    for (int s = 0; s < n; ++s) {
        int* row = hops.data() + static_cast<std::ptrdiff_t>(s) * n;
        row[s] = 0;
        queue.assign(1, s);
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v : d.neighbors(u)) {
                if (row[v] == kUnreached) {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (int v = 0; v < n; ++v) {
            if (row[v] == kUnreached) {
                throw DisconnectedDevice("node " + std::to_string(v) + " unreachable from node " +
                                         std::to_string(s));
            }
        }
    }
    return DistanceMatrix(n, std::move(hops));
}

[[nodiscard]] inline Device make_grid(int rows, int cols) {
    if (rows < 1 || cols < 1 || rows * cols < 2) {
        throw InvalidShape("grid " + std::to_string(rows) + "x" + std::to_string(cols) + " has fewer than 2 nodes");
    }
    std::vector<Edge> edges;
    std::vector<Coord> coords;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int id = r * cols + c;
            if (c + 1 < cols) {
                edges.emplace_back(id, id + 1);
            }
            if (r + 1 < rows) {
                edges.emplace_back(id, id + cols);
            }
            coords.push_back(Coord{cols > 1 ? static_cast<double>(c) / (cols - 1) : 0.5,
                                   rows > 1 ? static_cast<double>(r) / (rows - 1) : 0.5});
        }
    }
    return Device(rows * cols, std::move(edges), std::move(coords),
                  "grid:" + std::to_string(rows) + "x" + std::to_string(cols));
}

/// Grid shape backing each supported Tokyo-like size.
[[nodiscard]] inline std::pair<int, int> tokyo_grid_shape(int n) {
    switch (n) {
    case 12: return {3, 4};
    case 16: return {4, 4};
    case 20: return {4, 5};
    default: throw InvalidSize("tokyo topology exists for 12, 16 or 20 nodes, not " + std::to_string(n));
    }
}

/// Diagonal couplers added on top of the grid.
[[nodiscard]] inline std::vector<Edge> tokyo_extra_edges(int n) {
    switch (n) {
    case 12: return {{1, 6}, {2, 5}, {4, 9}, {5, 8}, {6, 11}, {7, 10}};
    case 16: return {{1, 6}, {2, 5}, {4, 9}, {5, 8}, {6, 11}, {7, 10}, {9, 14}, {10, 13}};
    case 20:
        return {{1, 7},  {2, 6},  {3, 9},   {4, 8},   {5, 11},  {6, 10},
                {7, 13}, {8, 12}, {11, 17}, {12, 16}, {13, 19}, {14, 18}};
    default: throw InvalidSize("tokyo topology exists for 12, 16 or 20 nodes, not " + std::to_string(n));
    }
}

[[nodiscard]] inline Device make_tokyo(int n) {
    const auto [rows, cols] = tokyo_grid_shape(n);
    const Device grid = make_grid(rows, cols);
    std::vector<Edge> edges = grid.edges();
    const auto extra = tokyo_extra_edges(n);
    edges.insert(edges.end(), extra.begin(), extra.end());
    return Device(n, std::move(edges), grid.coords(), "tokyo:" + std::to_string(n));
}

/// `{"n": int, "edges": [[u,v], ...], "coords": [[x,y], ...]}`
[[nodiscard]] inline Device device_from_json(const std::string& text, std::string name = "custom") {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidDevice(std::string("device JSON: ") + e.what());
    }
    try {
        const int n = doc.at("n").get<int>();
        std::vector<Edge> edges;
        for (const auto& e : doc.at("edges")) {
            if (e.size() != 2) {
                throw InvalidDevice("device edges must be pairs");
            }
            edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
        std::vector<Coord> coords;
        for (const auto& c : doc.at("coords")) {
            if (c.size() != 2) {
                throw InvalidDevice("device coords must be pairs");
            }
            coords.push_back(Coord{c[0].get<double>(), c[1].get<double>()});
        }
        return Device(n, std::move(edges), std::move(coords), std::move(name));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidDevice(std::string("device JSON: ") + e.what());
    }
}

[[nodiscard]] inline std::string device_to_json(const Device& d) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [u, v] : d.edges()) {
        edges.push_back({u, v});
    }
    nlohmann::json coords = nlohmann::json::array();
    for (const Coord& c : d.coords()) {
        coords.push_back({c.x, c.y});
    }
    return nlohmann::json{{"n", d.n_nodes()}, {"edges", edges}, {"coords", coords}}.dump();
}

/// Resolves `grid:RxC`, `tokyo:N`, or a path to a JSON device file.
[[nodiscard]] inline Device device_by_name(const std::string& spec) {
    if (spec.rfind("grid:", 0) == 0) {
        const std::string shape = spec.substr(5);
        const auto x = shape.find('x');
        if (x == std::string::npos) {
            throw InvalidShape("expected grid:RxC, got " + spec);
        }
        try {
            std::size_t used_r = 0;
            std::size_t used_c = 0;
            const int r = std::stoi(shape.substr(0, x), &used_r);
            const int c = std::stoi(shape.substr(x + 1), &used_c);
            if (used_r != x || used_c != shape.size() - x - 1) {
                throw InvalidShape("expected grid:RxC, got " + spec);
            }
            return make_grid(r, c);
        } catch (const std::logic_error&) {
            throw InvalidShape("expected grid:RxC, got " + spec);
        }
    }
    if (spec.rfind("tokyo:", 0) == 0) {
        try {
            std::size_t used = 0;
            const int n = std::stoi(spec.substr(6), &used);
            if (used != spec.size() - 6) {
                throw InvalidSize("expected tokyo:N, got " + spec);
            }
            return make_tokyo(n);
        } catch (const std::logic_error&) {
            throw InvalidSize("expected tokyo:N, got " + spec);
        }
    }
    std::ifstream in(spec);
    if (!in) {
        throw IOError("unknown device '" + spec + "' (not grid:RxC, tokyo:N, or a readable file)");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return device_from_json(ss.str(), spec);
}

} // namespace qapr

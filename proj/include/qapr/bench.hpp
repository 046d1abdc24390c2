// SPDX-License-Identifier: MIT

/**
 * @file bench.hpp
 * @brief Benchmark harness: circuit suites x routers x initial mappings -> CNOT overhead rows.
 *
 * Circuits come from a glob (QASM or JSON gate lists) or from the seeded
 * generator (`gen:N:COUNT:SEED`). Jobs run on a worker pool capped by
 * QAPR_THREADS; rows are re-validated by replay and returned in job order,
 * so output does not depend on the worker count.
 */

#pragma once

#include "qapr/circuit.hpp"
#include "qapr/device.hpp"
#include "qapr/errors.hpp"
#include "qapr/generate.hpp"
#include "qapr/nn.hpp"
#include "qapr/parse.hpp"
#include "qapr/qap.hpp"
#include "qapr/replay.hpp"
#include "qapr/routers.hpp"

#include <nlohmann/json.hpp>

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace qapr::bench {

// ---------------------------------------------------------------------------
// Spec
// ---------------------------------------------------------------------------

struct MappingSpec {
    enum class Mode : std::uint8_t { Trivial, Random };
    Mode mode = Mode::Trivial;
    int count = 1;
    std::uint64_t seed = 0;

    /// "trivial" or "random:K:SEED".
    [[nodiscard]] static MappingSpec parse(const std::string& s) {
        if (s == "trivial") {
            return {};
        }
        unsigned long long k = 0;
        unsigned long long seed = 0;
        char tail = 0;
        if (std::sscanf(s.c_str(), "random:%llu:%llu%c", &k, &seed, &tail) != 2 || k < 1 || k > 100000) {
            throw ConfigError("mapping must be 'trivial' or 'random:K:SEED' with K >= 1, got '" + s + "'");
        }
        return MappingSpec{Mode::Random, static_cast<int>(k), seed};
    }

    [[nodiscard]] std::string str() const {
        return mode == Mode::Trivial ? "trivial" : "random:" + std::to_string(count) + ":" + std::to_string(seed);
    }
};

/// One router column of an experiment.
struct RouterSpec {
    std::string name = "qap-greedy"; ///< basic | sabre | sabre-la | qap-greedy | nn
    RouterConfig config{};
    int passes = 1;
    std::string checkpoint;          ///< nn: checkpoint base path; empty means seeded init
    std::uint64_t nn_seed = 0;       ///< nn: initializer seed when no checkpoint is given

    [[nodiscard]] std::string label() const {
        std::string l = name;
        if (name == "qap-greedy" || name == "nn") {
            l += "(H=" + std::to_string(config.weights.horizon) + ")";
        }
        return passes == 3 ? l + "x3" : l;
    }

    void validate() const {
        if (passes != 1 && passes != 3) {
            throw ConfigError("passes must be 1 or 3");
        }
        if (name != "nn") {
            (void)router_kind_from_name(name);
        }
        config.validate();
    }
};

[[nodiscard]] inline RouterSpec make_router_spec(const std::string& name, int passes = 1, int horizon = 8,
                                                 double gamma = 0.7, std::size_t t_max = 1000) {
    RouterSpec r;
    r.name = name;
    r.passes = passes;
    if (name != "nn") {
        r.config.kind = router_kind_from_name(name);
    }
    r.config.weights.horizon = horizon;
    r.config.weights.gamma = gamma;
    r.config.t_max = t_max;
    r.validate();
    return r;
}

struct ExperimentSpec {
    std::string circuits;            ///< glob, file, directory or gen:N:COUNT:SEED
    std::string device = "grid:4x4";
    std::vector<RouterSpec> routers;
    MappingSpec mapping{};
    std::size_t t_max = 1000;        ///< applied to every router
    std::string output;              ///< optional path; .json or .csv
    int threads = 0;                 ///< 0: QAPR_THREADS or hardware concurrency

    void validate() const {
        if (routers.empty()) {
            throw ConfigError("experiment needs at least one router");
        }
        if (mapping.mode == MappingSpec::Mode::Random && mapping.count < 1) {
            throw ConfigError("random mapping count must be >= 1");
        }
        for (const auto& r : routers) {
            r.validate();
        }
    }
};

// ---------------------------------------------------------------------------
// Circuit sources
// ---------------------------------------------------------------------------

struct CircuitEntry {
    std::string id;
    std::string family;
    std::optional<Circuit> circuit; ///< empty when loading failed
    std::string error;
};

/// Family label from a file-name prefix; "unknown" when nothing matches.
[[nodiscard]] inline std::string family_of(const std::string& path) {
    static const std::vector<std::string> families = {
        "graphstate", "twolocal", "realamp", "wstate", "qaoa", "queko", "ghz", "qft", "qnn",
        "qpe",        "su2",      "vqe",     "tsp",    "ae",   "dj"};
    std::string stem = std::filesystem::path(path).stem().string();
    std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char c) { return std::tolower(c); });
    for (const auto& f : families) { // longer names first where prefixes overlap
        if (stem.rfind(f, 0) == 0) {
            return f;
        }
    }
    return "unknown";
}

struct GeneratorSpec {
    int n_qubits = 0;
    int count = 0;
    std::uint64_t seed = 0;
};

[[nodiscard]] inline std::optional<GeneratorSpec> parse_generator(const std::string& s) {
    if (s.rfind("gen:", 0) != 0) {
        return std::nullopt;
    }
    int n = 0;
    int count = 0;
    unsigned long long seed = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "gen:%d:%d:%llu%c", &n, &count, &seed, &tail) != 3 || n < 2 || count < 1) {
        throw ConfigError("generator must be gen:N:COUNT:SEED with N >= 2 and COUNT >= 1, got '" + s + "'");
    }
    return GeneratorSpec{n, count, seed};
}

/// Sorted matches of a shell glob; a directory expands to its .qasm and .json files.
[[nodiscard]] inline std::vector<std::string> expand_glob(const std::string& pattern) {
    std::vector<std::string> out;
    if (std::filesystem::is_directory(pattern)) {
        for (const auto& e : std::filesystem::directory_iterator(pattern)) {
            const auto ext = e.path().extension();
            if (e.is_regular_file() && (ext == ".qasm" || ext == ".json")) {
                out.push_back(e.path().string());
            }
        }
    } else {
        glob_t g{};
        if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
            for (std::size_t i = 0; i < g.gl_pathc; ++i) {
                out.emplace_back(g.gl_pathv[i]);
            }
        }
        ::globfree(&g);
    }
    std::sort(out.begin(), out.end());
    return out;
}

[[nodiscard]] inline std::vector<CircuitEntry> load_suite(const std::string& source) {
    std::vector<CircuitEntry> out;
    if (const auto gen = parse_generator(source)) {
        for (int i = 0; i < gen->count; ++i) {
            const std::uint64_t seed = gen->seed + static_cast<std::uint64_t>(i);
            out.push_back(CircuitEntry{"gen" + std::to_string(gen->n_qubits) + "_s" + std::to_string(seed), "random",
                                       generate_training_circuit(gen->n_qubits, seed), {}});
        }
        return out;
    }
    const auto paths = expand_glob(source);
    if (paths.empty()) {
        throw IOError("no circuits match '" + source + "'");
    }
    for (const auto& p : paths) {
        CircuitEntry e{std::filesystem::path(p).filename().string(), family_of(p), std::nullopt, {}};
        try {
            e.circuit = load_circuit(p);
        } catch (const Error& ex) {
            e.error = ex.what();
        }
        out.push_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rows
// ---------------------------------------------------------------------------

struct ResultRow {
    std::string circuit;
    std::string family;
    int n_qubits = 0;
    std::size_t n_gates = 0;
    std::string router;
    std::string mapping;            ///< "trivial" or "random"
    std::int64_t mapping_seed = -1; ///< -1 for the trivial mapping
    std::size_t inserted_swaps = 0;
    std::size_t inserted_cnots = 0;
    std::size_t steps = 0;
    bool truncated = false;
    double wall_ms = 0.0;
    std::string error;              ///< load, routing or validation failure; such rows count as truncated

    /// Everything except the wall time.
    [[nodiscard]] bool same_result(const ResultRow& o) const {
        return circuit == o.circuit && family == o.family && n_qubits == o.n_qubits && n_gates == o.n_gates &&
               router == o.router && mapping == o.mapping && mapping_seed == o.mapping_seed &&
               inserted_swaps == o.inserted_swaps && inserted_cnots == o.inserted_cnots && steps == o.steps &&
               truncated == o.truncated && error == o.error;
    }
    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Number of worker threads: explicit request, else QAPR_THREADS, else hardware concurrency.
[[nodiscard]] inline unsigned worker_count(int requested, std::size_t jobs) {
    unsigned n = requested > 0 ? static_cast<unsigned>(requested) : 0U;
    if (n == 0) {
        if (const char* env = std::getenv("QAPR_THREADS")) {
            const int v = std::atoi(env);
            n = v > 0 ? static_cast<unsigned>(v) : 1U;
        }
    }
    if (n == 0) {
        n = std::max(1U, std::thread::hardware_concurrency());
    }
    return static_cast<unsigned>(std::clamp<std::size_t>(jobs, 1, n));
}

/// Called once per finished row, serialized, in completion order.
using RowSink = std::function<void(const ResultRow&)>;

namespace detail {

struct Job {
    std::size_t circuit = 0;
    std::size_t router = 0;
    int mapping = 0;
};

class NnCache {
public:
    const nn::EncoderParams& get(const RouterSpec& r, int n_qubits) {
        std::lock_guard lock(mu_);
        const auto key = std::make_pair(r.checkpoint + "#" + std::to_string(r.nn_seed), n_qubits);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            nn::EncoderParams p;
            if (r.checkpoint.empty()) {
                nn::EncoderConfig cfg;
                cfg.n_logical = n_qubits;
                p = nn::init_params(cfg, r.nn_seed);
            } else {
                p = nn::load_checkpoint(r.checkpoint);
            }
            it = cache_.emplace(key, std::make_shared<const nn::EncoderParams>(std::move(p))).first;
        }
        return *it->second;
    }

private:
    std::mutex mu_;
    std::map<std::pair<std::string, int>, std::shared_ptr<const nn::EncoderParams>> cache_;
};

inline RouteFn router_fn(const RouterSpec& r, std::size_t t_max, NnCache& nn_cache, int n_qubits) {
    if (r.name == "nn") {
        nn::PolicyRouterConfig pc;
        pc.weights = r.config.weights;
        pc.t_max = t_max;
        const nn::EncoderParams& params = nn_cache.get(r, n_qubits);
        return [&params, pc](const std::shared_ptr<const RoutingProblem>& p, const Mapping& m) {
            return nn::route_policy(p, m, params, pc);
        };
    }
    RouterConfig cfg = r.config;
    cfg.kind = router_kind_from_name(r.name);
    cfg.t_max = t_max;
    return make_router(cfg);
}

} // namespace detail

[[nodiscard]] inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RowSink& sink = {}) {
    spec.validate();
    const Device device = device_by_name(spec.device);
    const auto suite = load_suite(spec.circuits);

    std::vector<detail::Job> jobs;
    const int n_maps = spec.mapping.mode == MappingSpec::Mode::Trivial ? 1 : spec.mapping.count;
    for (std::size_t c = 0; c < suite.size(); ++c) {
        for (std::size_t r = 0; r < spec.routers.size(); ++r) {
            for (int m = 0; m < n_maps; ++m) {
                jobs.push_back(detail::Job{c, r, m});
            }
        }
    }

    std::vector<ResultRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex sink_mu;
    detail::NnCache nn_cache;

    auto run_job = [&](const detail::Job& job) {
        const CircuitEntry& entry = suite[job.circuit];
        const RouterSpec& rs = spec.routers[job.router];
        ResultRow row;
        row.circuit = entry.id;
        row.family = entry.family;
        row.router = rs.label();
        if (spec.mapping.mode == MappingSpec::Mode::Trivial) {
            row.mapping = "trivial";
        } else {
            row.mapping = "random";
            row.mapping_seed = static_cast<std::int64_t>(spec.mapping.seed + static_cast<std::uint64_t>(job.mapping));
        }
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (!entry.circuit) {
                throw IOError(entry.error);
            }
            const Circuit& c = *entry.circuit;
            row.n_qubits = c.n_qubits();
            row.n_gates = c.size();
            if (c.n_qubits() > device.n_nodes()) {
                throw QubitCountExceedsDevice("circuit has " + std::to_string(c.n_qubits()) + " qubits, device " +
                                              std::to_string(device.n_nodes()) + " nodes");
            }
            const Mapping m0 = row.mapping_seed < 0
                                   ? Mapping::trivial(c.n_qubits(), device.n_nodes())
                                   : Mapping::random(c.n_qubits(), device.n_nodes(),
                                                     static_cast<std::uint64_t>(row.mapping_seed));
            const RoutedCircuit r = route(c, device, m0, detail::router_fn(rs, spec.t_max, nn_cache, c.n_qubits()),
                                          rs.passes);
            row.inserted_swaps = r.inserted_swaps;
            row.inserted_cnots = count_cnots(r);
            row.steps = r.steps;
            row.truncated = r.truncated;
            if (!r.truncated) {
                const auto rep = replay_schedule(c, device, r.initial_mapping, r.schedule, r.final_mapping);
                if (!rep.ok) {
                    row.truncated = true;
                    row.error = "schedule failed validation: " + rep.error;
                }
            }
        } catch (const std::exception& ex) {
            row.truncated = true;
            row.error = ex.what();
        }
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return row;
    };

    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            rows[i] = run_job(jobs[i]);
            if (sink) {
                std::lock_guard lock(sink_mu);
                sink(rows[i]);
            }
        }
    };
    const unsigned n_workers = worker_count(spec.threads, jobs.size());
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

struct GroupBy {
    bool gate_range = false;
    bool family = false;
};

struct SummaryRow {
    std::string router;
    std::string gate_range; ///< "[lo,hi)" or "all"
    std::string family;     ///< family or "all"
    std::size_t count = 0;      ///< rows entering the mean
    std::size_t truncated = 0;  ///< rows excluded from the mean
    std::optional<double> mean;
    std::optional<double> stddev; ///< population standard deviation

    friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

inline constexpr std::size_t kGateBinWidth = 50;

[[nodiscard]] inline std::string gate_bin(std::size_t gates) {
    const std::size_t lo = gates / kGateBinWidth * kGateBinWidth;
    return "[" + std::to_string(lo) + "," + std::to_string(lo + kGateBinWidth) + ")";
}

/// Mean and std of inserted CNOTs per group; groups keep first-appearance order of routers and sorted bins/families.
[[nodiscard]] inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, GroupBy by = {}) {
    if (rows.empty()) {
        throw EmptyInput("no rows to summarize");
    }
    std::vector<std::string> router_order;
    struct Acc {
        std::size_t bin_lo = 0;
        std::vector<double> values;
        std::size_t truncated = 0;
    };
    std::map<std::tuple<std::size_t, std::size_t, std::string>, std::pair<std::string, Acc>> groups;
    for (const auto& r : rows) {
        auto it = std::find(router_order.begin(), router_order.end(), r.router);
        const auto ri = static_cast<std::size_t>(it - router_order.begin());
        if (it == router_order.end()) {
            router_order.push_back(r.router);
        }
        const std::size_t lo = by.gate_range ? r.n_gates / kGateBinWidth * kGateBinWidth : 0;
        const std::string fam = by.family ? r.family : "all";
        auto& [bin, acc] = groups[{ri, lo, fam}];
        bin = by.gate_range ? gate_bin(r.n_gates) : "all";
        if (r.truncated) {
            ++acc.truncated;
        } else {
            acc.values.push_back(static_cast<double>(r.inserted_cnots));
        }
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, val] : groups) {
        const auto& [bin, acc] = val;
        SummaryRow s{router_order[std::get<0>(key)], bin, std::get<2>(key), acc.values.size(), acc.truncated, {}, {}};
        if (!acc.values.empty()) {
            double sum = 0.0;
            for (double v : acc.values) {
                sum += v;
            }
            const double mean = sum / static_cast<double>(acc.values.size());
            double sq = 0.0;
            for (double v : acc.values) {
                sq += (v - mean) * (v - mean);
            }
            s.mean = mean;
            s.stddev = std::sqrt(sq / static_cast<double>(acc.values.size()));
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char c : s) {
        q += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return q + "\"";
}

inline std::string fixed(double x, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << x;
    return os.str();
}

} // namespace detail

inline const std::vector<std::string>& row_columns() {
    static const std::vector<std::string> cols = {"circuit",        "family",         "n_qubits", "n_gates",
                                                  "router",         "mapping",        "mapping_seed",
                                                  "inserted_swaps", "inserted_cnots", "steps",    "truncated",
                                                  "wall_ms",        "error"};
    return cols;
}

inline const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> cols = {"router", "gate_range", "family", "count", "truncated", "mean",
                                                  "std"};
    return cols;
}

[[nodiscard]] inline std::string join_header(const std::vector<std::string>& cols) {
    std::string h;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        h += (i ? "," : "") + cols[i];
    }
    return h + "\n";
}

[[nodiscard]] inline std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::string out = join_header(row_columns());
    for (const auto& r : rows) {
        out += detail::csv_field(r.circuit) + "," + detail::csv_field(r.family) + "," + std::to_string(r.n_qubits) +
               "," + std::to_string(r.n_gates) + "," + detail::csv_field(r.router) + "," + r.mapping + "," +
               std::to_string(r.mapping_seed) + "," + std::to_string(r.inserted_swaps) + "," +
               std::to_string(r.inserted_cnots) + "," + std::to_string(r.steps) + "," + (r.truncated ? "1" : "0") +
               "," + detail::fixed(r.wall_ms, 3) + "," + detail::csv_field(r.error) + "\n";
    }
    return out;
}

[[nodiscard]] inline std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
    std::string out = join_header(summary_columns());
    for (const auto& s : rows) {
        out += detail::csv_field(s.router) + "," + s.gate_range + "," + detail::csv_field(s.family) + "," +
               std::to_string(s.count) + "," + std::to_string(s.truncated) + "," +
               (s.mean ? detail::fixed(*s.mean, 4) : "") + "," + (s.stddev ? detail::fixed(*s.stddev, 4) : "") + "\n";
    }
    return out;
}

[[nodiscard]] inline nlohmann::json row_to_json(const ResultRow& r) {
    return nlohmann::json{{"circuit", r.circuit},
                          {"family", r.family},
                          {"n_qubits", r.n_qubits},
                          {"n_gates", r.n_gates},
                          {"router", r.router},
                          {"mapping", r.mapping},
                          {"mapping_seed", r.mapping_seed},
                          {"inserted_swaps", r.inserted_swaps},
                          {"inserted_cnots", r.inserted_cnots},
                          {"steps", r.steps},
                          {"truncated", r.truncated},
                          {"wall_ms", r.wall_ms},
                          {"error", r.error}};
}

[[nodiscard]] inline ResultRow row_from_json(const nlohmann::json& j) {
    try {
        ResultRow r;
        r.circuit = j.at("circuit").get<std::string>();
        r.family = j.at("family").get<std::string>();
        r.n_qubits = j.at("n_qubits").get<int>();
        r.n_gates = j.at("n_gates").get<std::size_t>();
        r.router = j.at("router").get<std::string>();
        r.mapping = j.at("mapping").get<std::string>();
        r.mapping_seed = j.at("mapping_seed").get<std::int64_t>();
        r.inserted_swaps = j.at("inserted_swaps").get<std::size_t>();
        r.inserted_cnots = j.at("inserted_cnots").get<std::size_t>();
        r.steps = j.at("steps").get<std::size_t>();
        r.truncated = j.at("truncated").get<bool>();
        r.wall_ms = j.at("wall_ms").get<double>();
        r.error = j.value("error", "");
        if (r.inserted_cnots != 3 * r.inserted_swaps) {
            throw ConfigError("row '" + r.circuit + "': inserted_cnots is not 3 x inserted_swaps");
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad result row: ") + e.what());
    }
}

[[nodiscard]] inline std::string rows_to_json(const std::vector<ResultRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back(row_to_json(r));
    }
    return arr.dump(2) + "\n";
}

[[nodiscard]] inline std::vector<ResultRow> rows_from_json(const std::string& text) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad results file: ") + e.what());
    }
    if (!arr.is_array()) {
        throw ConfigError("results file must hold a JSON array");
    }
    std::vector<ResultRow> rows;
    for (const auto& j : arr) {
        rows.push_back(row_from_json(j));
    }
    return rows;
}

[[nodiscard]] inline std::string summary_to_json(const std::vector<SummaryRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : rows) {
        arr.push_back({{"router", s.router},
                       {"gate_range", s.gate_range},
                       {"family", s.family},
                       {"count", s.count},
                       {"truncated", s.truncated},
                       {"mean", s.mean ? nlohmann::json(*s.mean) : nlohmann::json(nullptr)},
                       {"std", s.stddev ? nlohmann::json(*s.stddev) : nlohmann::json(nullptr)}});
    }
    return arr.dump(2) + "\n";
}

namespace detail {

inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            rec.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
            rec.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(rec));
            rec.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (quoted) {
        throw ConfigError("unterminated quoted CSV field");
    }
    if (any) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace detail

/// Reads the output of rows_to_csv; the header must match row_columns().
[[nodiscard]] inline std::vector<ResultRow> rows_from_csv(const std::string& text) {
    const auto records = detail::parse_csv(text);
    if (records.empty() || records[0] != row_columns()) {
        throw ConfigError("results CSV header does not match the row schema");
    }
    std::vector<ResultRow> rows;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        if (f.size() != row_columns().size()) {
            throw ConfigError("results CSV record " + std::to_string(i) + " has " + std::to_string(f.size()) +
                              " fields");
        }
        try {
            nlohmann::json j{{"circuit", f[0]},
                             {"family", f[1]},
                             {"n_qubits", std::stoi(f[2])},
                             {"n_gates", std::stoull(f[3])},
                             {"router", f[4]},
                             {"mapping", f[5]},
                             {"mapping_seed", std::stoll(f[6])},
                             {"inserted_swaps", std::stoull(f[7])},
                             {"inserted_cnots", std::stoull(f[8])},
                             {"steps", std::stoull(f[9])},
                             {"truncated", f[10] == "1"},
                             {"wall_ms", std::stod(f[11])},
                             {"error", f[12]}};
            rows.push_back(row_from_json(j));
        } catch (const std::logic_error&) {
            throw ConfigError("results CSV record " + std::to_string(i) + " has a malformed number");
        }
    }
    return rows;
}

enum class Format : std::uint8_t { Csv, Json };

[[nodiscard]] inline Format format_for_output(const std::string& path) {
    return std::filesystem::path(path).extension() == ".json" ? Format::Json : Format::Csv;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (f == nullptr) {
        throw IOError("cannot open '" + path + "' for writing");
    }
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok) {
        throw IOError("failed writing '" + path + "'");
    }
}

inline void export_rows(const std::vector<ResultRow>& rows, const std::string& path) {
    write_text(path, format_for_output(path) == Format::Json ? rows_to_json(rows) : rows_to_csv(rows));
}

inline void export_summary(const std::vector<SummaryRow>& rows, const std::string& path) {
    write_text(path, format_for_output(path) == Format::Json ? summary_to_json(rows) : summary_to_csv(rows));
}

[[nodiscard]] inline std::vector<ResultRow> import_rows(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IOError("cannot open results file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return format_for_output(path) == Format::Json ? rows_from_json(ss.str()) : rows_from_csv(ss.str());
}

} // namespace qapr::bench

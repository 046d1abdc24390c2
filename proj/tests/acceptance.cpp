// SPDX-License-Identifier: MIT
// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "fixtures.hpp"
#include "qapr/bench.hpp"
#include "qapr/nn.hpp"
#include "qapr/replay.hpp"
#include "qapr/routers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace qapr;

namespace {

struct Outcome {
    int id;
    std::string name;
    bool ok;
    std::string detail;
};

std::vector<Outcome> outcomes;

void report(int id, const char* name, bool ok, const std::string& detail) {
    outcomes.push_back(Outcome{id, name, ok, detail});
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

FlowMatrix integer_flow(int n, std::mt19937_64& rng) {
    FlowMatrix f(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            f.set(i, j, static_cast<double>(rng() % 4));
        }
    }
    return f;
}

DistanceMatrix integer_distances(int n, std::mt19937_64& rng) {
    std::vector<int> d(static_cast<std::size_t>(n * n), 0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const int v = 1 + static_cast<int>(rng() % 6);
            d[static_cast<std::size_t>(i * n + j)] = v;
            d[static_cast<std::size_t>(j * n + i)] = v;
        }
    }
    return DistanceMatrix(n, std::move(d));
}

void qap_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int np = 2 + static_cast<int>(rng() % 7);
        const int nq = 1 + static_cast<int>(rng() % static_cast<unsigned>(np));
        const FlowMatrix f = integer_flow(nq, rng);
        const DistanceMatrix d = integer_distances(np, rng);
        const Mapping x = Mapping::random(nq, np, rng());
        mismatches += qap_objective(x, f, d) == qapr::testing::dense_trace_objective(x, f, d) ? 0 : 1;
    }
    const double t = seconds_since(t0);
    report(1, "qap-oracle", mismatches == 0 && t < 1.0,
           fmt("mismatches=%.0f of 200, %.3fs", mismatches, t));
}

void motivation_fixture() {
    const qapr::testing::MotivationInstance inst;
    const auto d = distance_matrix(inst.device);
    const FlowMatrix before = inst.pending_flow();
    Mapping green = inst.mapping;
    green.swap_nodes(inst.green().first, inst.green().second);
    Mapping red = inst.mapping;
    red.swap_nodes(inst.red().first, inst.red().second);
    const double rg = qap_reward(inst.mapping, before, green, before, d);
    const double rr = qap_reward(inst.mapping, before, red, before, d);
    report(2, "swap-sign-fixture", rg > 0.0 && rr == 0.0, fmt("r_green=%g r_red=%g", rg, rr));
}

const std::vector<RouterKind> kKinds{RouterKind::BasicSwap, RouterKind::SabreBasic, RouterKind::SabreLookahead,
                                     RouterKind::QapGreedy};

void semantic_validity_and_cnots() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(3);
    const std::vector<Device> devices{make_grid(3, 4), make_tokyo(12), make_grid(4, 4), make_tokyo(16),
                                      make_grid(4, 5), make_tokyo(20)};
    int invalid = 0;
    int bad_cnots = 0;
    for (int i = 0; i < 1000; ++i) {
        const Device& d = devices[static_cast<std::size_t>(i) % devices.size()];
        const int nq = 2 + static_cast<int>(rng() % static_cast<unsigned>(d.n_nodes() - 1));
        const Circuit c = qapr::testing::random_circuit(nq, static_cast<int>(rng() % 80), rng);
        const Mapping m = rng() % 2 == 0 ? Mapping::trivial(nq, d.n_nodes()) : Mapping::random(nq, d.n_nodes(), rng());
        RouterConfig cfg;
        cfg.kind = kKinds[rng() % kKinds.size()];
        const int passes = rng() % 4 == 0 ? 3 : 1;
        const RoutedCircuit r = route(c, d, m, cfg, passes);
        const auto rep = replay_schedule(c, d, r.initial_mapping, r.schedule, r.final_mapping);
        invalid += r.truncated || !rep.ok || rep.gates != c.size() || rep.swaps != r.inserted_swaps ? 1 : 0;
        bad_cnots += r.inserted_cnots == 3 * r.inserted_swaps && count_cnots(r) == r.inserted_cnots ? 0 : 1;
    }
    const double t = seconds_since(t0);
    report(3, "replay-validity", invalid == 0 && t < 120.0, fmt("failures=%.0f of 1000, %.2fs", invalid, t));

    bench::ExperimentSpec spec;
    spec.circuits = "gen:12:20:50";
    spec.device = "tokyo:12";
    spec.mapping = bench::MappingSpec::parse("random:2:9");
    for (const char* name : {"basic", "sabre", "sabre-la", "qap-greedy"}) {
        spec.routers.push_back(bench::make_router_spec(name));
        spec.routers.push_back(bench::make_router_spec(name, 3));
    }
    const auto rows = bench::run_experiment(spec);
    int bad_rows = 0;
    for (const auto& row : rows) {
        bad_rows += row.inserted_cnots == 3 * row.inserted_swaps && row.inserted_cnots % 3 == 0 ? 0 : 1;
    }
    report(4, "cnot-accounting", bad_cnots == 0 && bad_rows == 0,
           fmt("bad=%.0f of 1000 routed, %.0f of %.0f rows", bad_cnots, bad_rows, static_cast<double>(rows.size())));
}

// Sum of front-layer physical distances after swapping nodes a and b.
int front_sum_after(const RoutingState& s, int a, int b) {
    int sum = 0;
    for (std::size_t k : s.pending()) {
        const Gate& g = s.problem().circuit[k];
        int pu = s.mapping().phys(g.u);
        int pv = s.mapping().phys(g.v);
        pu = pu == a ? b : (pu == b ? a : pu);
        pv = pv == a ? b : (pv == b ? a : pv);
        sum += s.problem().distances(pu, pv);
    }
    return sum;
}

void sabre_optimality() {
    std::mt19937_64 rng(5);
    std::size_t decisions = 0;
    std::size_t suboptimal = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Device d = trial % 2 == 0 ? make_grid(3, 4) : make_tokyo(12);
        const int nq = 4 + static_cast<int>(rng() % 9);
        const Circuit c = qapr::testing::random_circuit(nq, 1 + static_cast<int>(rng() % 25), rng);
        RouterConfig cfg;
        cfg.kind = RouterKind::SabreBasic;
        (void)route_sabre(c, d, Mapping::random(nq, 12, rng()), cfg, [&](const RoutingState& s, const Action& a) {
            ++decisions;
            // candidates: edges touching a node that holds a front-layer qubit
            std::vector<char> hot(static_cast<std::size_t>(d.n_nodes()), 0);
            for (std::size_t k : s.pending()) {
                hot[static_cast<std::size_t>(s.mapping().phys(c[k].u))] = 1;
                hot[static_cast<std::size_t>(s.mapping().phys(c[k].v))] = 1;
            }
            int best = std::numeric_limits<int>::max();
            for (int u = 0; u < d.n_nodes(); ++u) {
                for (int v = u + 1; v < d.n_nodes(); ++v) {
                    if (d.adjacent(u, v) && (hot[static_cast<std::size_t>(u)] || hot[static_cast<std::size_t>(v)])) {
                        best = std::min(best, front_sum_after(s, u, v));
                    }
                }
            }
            suboptimal += front_sum_after(s, a.u, a.v) == best ? 0 : 1;
        });
    }
    report(5, "sabre-step-optimality", suboptimal == 0 && decisions > 0,
           fmt("suboptimal=%.0f of %.0f decisions", static_cast<double>(suboptimal), static_cast<double>(decisions)));
}

void suite_criteria() {
    const auto t0 = std::chrono::steady_clock::now();
    bench::ExperimentSpec spec;
    spec.circuits = "gen:16:100:1000";
    spec.device = "grid:4x4";
    spec.routers = {bench::make_router_spec("basic"), bench::make_router_spec("sabre-la"),
                    bench::make_router_spec("qap-greedy", 1, 0), bench::make_router_spec("qap-greedy", 1, 8),
                    bench::make_router_spec("qap-greedy", 3, 8)};
    const auto rows = bench::run_experiment(spec);
    const auto s = bench::summarize(rows);
    const double t = seconds_since(t0);
    auto mean = [&](std::size_t i) { return s[i].mean.value_or(std::numeric_limits<double>::infinity()); };
    const double basic = mean(0);
    const double sabre_la = mean(1);
    const double h0 = mean(2);
    const double h8 = mean(3);
    const double h8x3 = mean(4);
    report(6, "lookahead-direction", h8 <= h0 && s[2].truncated == 0 && s[3].truncated == 0 && t < 300.0,
           fmt("H8=%.1f H0=%.1f (%.1fs)", h8, h0, t));
    report(7, "baseline-ordering", h8x3 < basic && h8x3 <= 1.15 * sabre_la && s[0].truncated == 0 && s[1].truncated == 0,
           fmt("qap-greedy(H8,3-pass)=%.1f basic=%.1f 1.15*sabre-la=%.1f", h8x3, basic, 1.15 * sabre_la));
    std::size_t truncated = 0;
    std::size_t qap_rows = 0;
    bool finished = true;
    for (const auto& r : rows) {
        finished = finished && r.steps <= spec.t_max;
        if (r.router.rfind("qap-greedy", 0) == 0) {
            ++qap_rows;
            truncated += r.truncated ? 1 : 0;
        }
    }
    report(10, "termination", finished && truncated == 0 && qap_rows == 300,
           fmt("qap-greedy truncated=%.0f of %.0f episodes", static_cast<double>(truncated), static_cast<double>(qap_rows)));
}

void gradient_check() {
    const auto t0 = std::chrono::steady_clock::now();
    nn::EncoderConfig cfg;
    cfg.n_logical = 6;
    cfg.d = 16;
    cfg.layers = 2;
    cfg.heads = 2;
    const Device dev = make_grid(2, 3);
    const Circuit c = generate_training_circuit(6, 8);
    const RoutingState st(make_problem(c, dev), Mapping::random(6, 6, 4), RewardWeights{}, 1000);
    const nn::EncoderInput in = nn::encoder_input(st);
    const auto p = nn::init_params(cfg, 21);
    double worst = 0.0;
    std::size_t probes = 0;
    for (nn::LossKind k : {nn::LossKind::SumLogits, nn::LossKind::Value}) {
        const auto rep = nn::grad_check(in, p, k, 40, 17);
        worst = std::max(worst, rep.max_rel_error);
        probes += rep.probes.size();
    }
    const double t = seconds_since(t0);
    report(8, "gradient-check", worst < 1e-4 && probes >= 20 && t < 30.0,
           fmt("max_rel_err=%.2e over %.0f probes, %.2fs", worst, static_cast<double>(probes), t));
}

void equivariance() {
    std::mt19937_64 rng(9);
    const Device dev = make_grid(3, 3);
    const auto dist = distance_matrix(dev);
    nn::EncoderConfig cfg;
    cfg.n_logical = 6;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        auto p = nn::init_params(cfg, 100 + static_cast<std::uint64_t>(trial));
        nn::randomize(p, -1.0, 1.0, 200 + static_cast<std::uint64_t>(trial));
        nn::Mat f(6, 6);
        for (int i = 0; i < 6; ++i) {
            for (int j = i + 1; j < 6; ++j) {
                f(i, j) = f(j, i) = rng() % 2 == 0 ? 0.0 : std::uniform_real_distribution<double>(0.1, 2.0)(rng);
            }
        }
        const Mapping x = Mapping::random(6, 9, rng());
        std::vector<int> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        nn::Mat fp(6, 6);
        std::vector<int> phys(6);
        for (int i = 0; i < 6; ++i) {
            const auto pi = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
            phys[pi] = x.phys(i);
            for (int j = 0; j < 6; ++j) {
                fp(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) = f(i, j);
            }
        }
        const auto a = nn::evaluate(nn::EncoderInput{f, x, &dev, &dist}, p);
        const auto b = nn::evaluate(nn::EncoderInput{fp, Mapping(phys, 9), &dev, &dist}, nn::permute_logical(p, perm));
        for (std::size_t e = 0; e < a.logits.size(); ++e) {
            worst = std::max(worst, std::fabs(a.logits[e] - b.logits[e]));
        }
    }
    report(9, "relabel-equivariance", worst <= 1e-10, fmt("max_logit_diff=%.2e over 50 states", worst));
}

void topology() {
    // Extra couplers listed for the Tokyo-like devices, on top of the row-major grid.
    const std::vector<std::pair<int, std::vector<Edge>>> extra{
        {12, {{1, 6}, {2, 5}, {4, 9}, {5, 8}, {6, 11}, {7, 10}}},
        {16, {{1, 6}, {2, 5}, {4, 9}, {5, 8}, {6, 11}, {7, 10}, {9, 14}, {10, 13}}},
        {20, {{1, 7}, {2, 6}, {3, 9}, {4, 8}, {5, 11}, {6, 10}, {7, 13}, {8, 12}, {11, 17}, {12, 16}, {13, 19}, {14, 18}}}};
    const std::vector<std::pair<int, int>> shapes{{3, 4}, {4, 4}, {4, 5}};
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < extra.size(); ++k) {
        const auto [rows, cols] = shapes[k];
        std::set<Edge> expected;
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const int v = r * cols + c;
                if (c + 1 < cols) {
                    expected.insert({v, v + 1});
                }
                if (r + 1 < rows) {
                    expected.insert({v, v + cols});
                }
            }
        }
        expected.insert(extra[k].second.begin(), extra[k].second.end());
        const Device t = make_tokyo(extra[k].first);
        const std::set<Edge> got(t.edges().begin(), t.edges().end());
        const bool same = got == expected && t.edges().size() == expected.size() && t.n_nodes() == extra[k].first;
        ok = ok && same;
        detail += "tokyo" + std::to_string(extra[k].first) + "=" + std::to_string(got.size()) + (same ? "ok " : "DIFF ");
    }
    report(11, "topology-fidelity", ok, detail);
}

} // namespace

int main() {
    qap_oracle();
    motivation_fixture();
    semantic_validity_and_cnots();
    sabre_optimality();
    suite_criteria();
    gradient_check();
    equivariance();
    topology();
    std::sort(outcomes.begin(), outcomes.end(), [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
    int failures = 0;
    for (const auto& o : outcomes) {
        std::printf("%s %2d %-24s %s\n", o.ok ? "PASS" : "FAIL", o.id, o.name.c_str(), o.detail.c_str());
        failures += o.ok ? 0 : 1;
    }
    std::printf("%s: %d of %zu criteria failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures, outcomes.size());
    return failures == 0 ? 0 : 1;
}

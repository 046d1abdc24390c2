// SPDX-License-Identifier: MIT
// qapr: route circuit suites, summarize results, trace single episodes.

#include "qapr/bench.hpp"
#include "qapr/nn.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

using namespace qapr;

namespace {

struct RouteArgs {
    std::string circuits;
    std::string device = "grid:4x4";
    std::vector<std::string> routers{"qap-greedy"};
    std::string mapping = "trivial";
    int passes = 1;
    int horizon = 8;
    double gamma = 0.7;
    std::size_t t_max = 1000;
    std::string reward_config;
    std::string checkpoint;
    std::uint64_t nn_seed = 0;
    int threads = 0;
    std::string out;
    bool quiet = false;
    bool summary = true;
};

bench::RouterSpec router_spec(const RouteArgs& a, const std::string& name) {
    bench::RouterSpec r = bench::make_router_spec(name, a.passes, a.horizon, a.gamma, a.t_max);
    if (!a.reward_config.empty()) {
        r.config.weights = load_reward_weights(a.reward_config);
        r.config.weights.horizon = a.horizon;
        r.config.weights.gamma = a.gamma;
    }
    r.checkpoint = a.checkpoint;
    r.nn_seed = a.nn_seed;
    r.validate();
    return r;
}

void print_summary(const std::vector<bench::SummaryRow>& s, std::FILE* f = stdout) {
    std::fprintf(f, "%-22s %-10s %-10s %6s %5s %12s %10s\n", "router", "gates", "family", "n", "trunc", "mean_cnots",
                "std");
    for (const auto& r : s) {
        std::fprintf(f, "%-22s %-10s %-10s %6zu %5zu %12s %10s\n", r.router.c_str(), r.gate_range.c_str(),
                    r.family.c_str(), r.count, r.truncated, r.mean ? std::to_string(*r.mean).c_str() : "-",
                    r.stddev ? std::to_string(*r.stddev).c_str() : "-");
    }
}

int run_route(const RouteArgs& a) {
    bench::ExperimentSpec spec;
    spec.circuits = a.circuits;
    spec.device = a.device;
    spec.mapping = bench::MappingSpec::parse(a.mapping);
    spec.t_max = a.t_max;
    spec.output = a.out;
    spec.threads = a.threads;
    for (const auto& name : a.routers) {
        spec.routers.push_back(router_spec(a, name));
    }
    std::size_t done = 0;
    const auto rows = bench::run_experiment(spec, [&](const bench::ResultRow& r) {
        ++done;
        if (!a.quiet) {
            std::fprintf(stderr, "[%zu] %s %s %s cnots=%zu%s%s\n", done, r.circuit.c_str(), r.router.c_str(),
                         r.mapping_seed < 0 ? "trivial" : ("seed=" + std::to_string(r.mapping_seed)).c_str(),
                         r.inserted_cnots, r.truncated ? " TRUNCATED" : "",
                         r.error.empty() ? "" : (" error: " + r.error).c_str());
        }
    });
    if (!a.out.empty()) {
        bench::export_rows(rows, a.out);
    } else {
        std::cout << bench::rows_to_csv(rows);
    }
    if (a.summary && !rows.empty()) {
        print_summary(bench::summarize(rows), a.out.empty() ? stderr : stdout);
    }
    return 0;
}

int run_summarize(const std::string& in, bool by_gates, bool by_family, const std::string& out) {
    const auto s = bench::summarize(bench::import_rows(in), bench::GroupBy{by_gates, by_family});
    if (out.empty()) {
        print_summary(s);
    } else {
        bench::export_summary(s, out);
    }
    return 0;
}

int run_trace(const std::string& circuit, const RouteArgs& a) {
    const Circuit c = load_circuit(circuit);
    const Device d = device_by_name(a.device);
    const auto m = bench::MappingSpec::parse(a.mapping);
    const Mapping m0 = m.mode == bench::MappingSpec::Mode::Trivial ? Mapping::trivial(c.n_qubits(), d.n_nodes())
                                                                   : Mapping::random(c.n_qubits(), d.n_nodes(), m.seed);
    const auto spec = router_spec(a, a.routers.front());
    RouteFn fn;
    std::shared_ptr<const nn::EncoderParams> params;
    if (spec.name == "nn") {
        nn::EncoderConfig cfg;
        cfg.n_logical = c.n_qubits();
        params = std::make_shared<const nn::EncoderParams>(spec.checkpoint.empty() ? nn::init_params(cfg, spec.nn_seed)
                                                                                   : nn::load_checkpoint(spec.checkpoint));
        nn::PolicyRouterConfig pc;
        pc.weights = spec.config.weights;
        pc.t_max = a.t_max;
        fn = nn::make_policy_router(params, pc);
    } else {
        RouterConfig rc = spec.config;
        rc.t_max = a.t_max;
        fn = make_router(rc);
    }
    const RoutedCircuit r = route(c, d, m0, fn, a.passes);
    std::printf("# router=%s device=%s qubits=%d gates=%zu\n", spec.label().c_str(), a.device.c_str(), c.n_qubits(),
                c.size());
    for (const auto& e : r.schedule) {
        if (e.is_swap()) {
            std::printf("swap %d %d\n", e.u, e.v);
        } else {
            std::printf("gate %zu %d %d\n", e.gate_index, e.u, e.v);
        }
    }
    const auto rep = replay_schedule(c, d, r.initial_mapping, r.schedule, r.final_mapping);
    std::printf("# swaps=%zu cnots=%zu steps=%zu truncated=%d valid=%d%s\n", r.inserted_swaps, count_cnots(r), r.steps,
                r.truncated ? 1 : 0, rep.ok ? 1 : 0, rep.ok ? "" : (" " + rep.error).c_str());
    return r.truncated || !rep.ok ? 2 : 0;
}

void add_routing_options(CLI::App* cmd, RouteArgs& a) {
    cmd->add_option("--device", a.device, "grid:RxC, tokyo:N or a device JSON file")->capture_default_str();
    cmd->add_option("--mapping", a.mapping, "trivial or random:K:SEED")->capture_default_str();
    cmd->add_option("--passes", a.passes, "1, or 3 for forward-backward-forward")
        ->check(CLI::IsMember({1, 3}))
        ->capture_default_str();
    cmd->add_option("--horizon", a.horizon, "lookahead slices H")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--gamma", a.gamma, "lookahead decay in (0,1)")->capture_default_str();
    cmd->add_option("--tmax", a.t_max, "step limit per episode")->capture_default_str();
    cmd->add_option("--reward-config", a.reward_config, "reward weights (.toml or .json)")->check(CLI::ExistingFile);
    cmd->add_option("--checkpoint", a.checkpoint, "nn router: checkpoint base path");
    cmd->add_option("--nn-seed", a.nn_seed, "nn router: initializer seed without a checkpoint");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qapr: qubit routing with QAP-shaped rewards"};
    app.require_subcommand(1);

    RouteArgs route_args;
    auto* route_cmd = app.add_subcommand("route", "route a circuit suite and report inserted CNOTs");
    route_cmd->add_option("--circuits", route_args.circuits, "glob, directory, file or gen:N:COUNT:SEED")->required();
    route_cmd->add_option("--router", route_args.routers, "basic, sabre, sabre-la, qap-greedy, nn (repeat or comma-separate)")
        ->delimiter(',')
        ->check(CLI::IsMember({"basic", "sabre", "sabre-la", "qap-greedy", "nn"}))
        ->capture_default_str();
    add_routing_options(route_cmd, route_args);
    route_cmd->add_option("--threads", route_args.threads, "worker count (default QAPR_THREADS or all cores)");
    route_cmd->add_option("--out", route_args.out, "results file, .csv or .json (default: CSV on stdout)");
    route_cmd->add_flag("--quiet", route_args.quiet, "no per-row progress");
    route_cmd->add_flag("!--no-summary", route_args.summary, "skip the summary table");

    std::string sum_in;
    std::string sum_out;
    bool by_gates = false;
    bool by_family = false;
    auto* sum_cmd = app.add_subcommand("summarize", "mean and std of inserted CNOTs per router");
    sum_cmd->add_option("results", sum_in, "results file from route (.csv or .json)")->required()->check(CLI::ExistingFile);
    sum_cmd->add_flag("--by-gates", by_gates, "group by gate-count bins of width 50");
    sum_cmd->add_flag("--by-family", by_family, "group by circuit family");
    sum_cmd->add_option("--out", sum_out, "write the summary to .csv or .json");

    RouteArgs trace_args;
    trace_args.routers = {"qap-greedy"};
    std::string trace_circuit;
    std::string trace_router = "qap-greedy";
    auto* trace_cmd = app.add_subcommand("trace", "route one circuit and print its schedule");
    trace_cmd->add_option("circuit", trace_circuit, "QASM or JSON gate list")->required()->check(CLI::ExistingFile);
    trace_cmd->add_option("--router", trace_router, "router name")
        ->check(CLI::IsMember({"basic", "sabre", "sabre-la", "qap-greedy", "nn"}))
        ->capture_default_str();
    add_routing_options(trace_cmd, trace_args);

    int gen_n = 12;
    std::uint64_t gen_seed = 0;
    auto* gen_cmd = app.add_subcommand("gen", "print a random training circuit as a JSON gate list");
    gen_cmd->add_option("-n,--qubits", gen_n, "qubit count")->capture_default_str();
    gen_cmd->add_option("--seed", gen_seed, "generator seed")->capture_default_str();

    std::string dev_name;
    auto* dev_cmd = app.add_subcommand("device", "print a device as JSON");
    dev_cmd->add_option("name", dev_name, "grid:RxC, tokyo:N or a device JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*route_cmd) {
            return run_route(route_args);
        }
        if (*sum_cmd) {
            return run_summarize(sum_in, by_gates, by_family, sum_out);
        }
        if (*trace_cmd) {
            trace_args.routers = {trace_router};
            return run_trace(trace_circuit, trace_args);
        }
        if (*gen_cmd) {
            std::cout << to_json_gatelist(generate_training_circuit(gen_n, gen_seed)) << '\n';
            return 0;
        }
        if (*dev_cmd) {
            std::cout << device_to_json(device_by_name(dev_name)) << '\n';
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

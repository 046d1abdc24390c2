// SPDX-License-Identifier: MIT

#include "fixtures.hpp"
#include "qapr/qap.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qapr;
using qapr::testing::dense_trace_objective;

namespace {

FlowMatrix random_flow(int n, std::mt19937_64& rng, int max_weight = 4) {
    FlowMatrix f(n);
    std::uniform_int_distribution<int> w(0, max_weight);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng() % 3 == 0) {
                f.set(i, j, w(rng) / 4.0); // small dyadic rationals stay exact
            }
        }
    }
    return f;
}

DistanceMatrix random_distances(int n, std::mt19937_64& rng) {
    std::vector<int> hops(static_cast<std::size_t>(n * n), 0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const int h = 1 + static_cast<int>(rng() % 6);
            hops[static_cast<std::size_t>(i * n + j)] = hops[static_cast<std::size_t>(j * n + i)] = h;
        }
    }
    return DistanceMatrix(n, std::move(hops));
}

} // namespace

TEST(Objective, ZeroFlow) {
    const auto d = distance_matrix(make_grid(2, 3));
    EXPECT_EQ(qap_objective(Mapping::random(5, 6, 4), FlowMatrix(5), d), 0.0);
}

TEST(Objective, TwoQubitIdentity) {
    FlowMatrix f(2);
    f.set(0, 1, 1.0);
    const DistanceMatrix d(2, {0, 2, 2, 0});
    const Mapping x = Mapping::trivial(2, 2);
    EXPECT_EQ(dense_trace_objective(x, f, d), 4.0);
    EXPECT_EQ(qap_objective(x, f, d), 4.0);
}

TEST(Objective, MatchesDenseTraceOnRandomInstances) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int np = 2 + static_cast<int>(rng() % 7);
        const int nq = 1 + static_cast<int>(rng() % static_cast<unsigned>(np));
        const FlowMatrix f = random_flow(nq, rng);
        const DistanceMatrix d = random_distances(np, rng);
        const Mapping x = Mapping::random(nq, np, rng());
        EXPECT_EQ(qap_objective(x, f, d), dense_trace_objective(x, f, d));
    }
}

TEST(Objective, ShapeMismatch) {
    const auto d = distance_matrix(make_grid(2, 2));
    EXPECT_THROW((void)qap_objective(Mapping::trivial(3, 4), FlowMatrix(4), d), ShapeMismatch);
    EXPECT_THROW((void)qap_objective(Mapping::trivial(3, 5), FlowMatrix(3), d), ShapeMismatch);
}

TEST(Objective, NonnegativeAndZeroOnlyForZeroFlow) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 6);
        const FlowMatrix f = random_flow(n, rng);
        const double obj = qap_objective(Mapping::random(n, n, rng()), f, random_distances(n, rng));
        EXPECT_GE(obj, 0.0);
        EXPECT_EQ(obj == 0.0, f.is_zero());
    }
}

TEST(Objective, PhysicalRelabelingInvariance) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 7);
        const FlowMatrix f = random_flow(n, rng);
        const DistanceMatrix d = random_distances(n, rng);
        const Mapping x = Mapping::random(n, n, rng());
        const Mapping perm = Mapping::random(n, n, rng()); // node p -> perm.phys(p)
        std::vector<int> hops(static_cast<std::size_t>(n * n));
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                hops[static_cast<std::size_t>(perm.phys(a) * n + perm.phys(b))] = d(a, b);
            }
        }
        std::vector<int> moved(static_cast<std::size_t>(n));
        for (int q = 0; q < n; ++q) {
            moved[static_cast<std::size_t>(q)] = perm.phys(x.phys(q));
        }
        EXPECT_EQ(qap_objective(x, f, d), qap_objective(Mapping(moved, n), f, DistanceMatrix(n, hops)));
    }
}

TEST(EffectiveFlow, ZeroHorizonIsCurrentSlice) {
    std::mt19937_64 rng(1);
    std::vector<FlowMatrix> slices{random_flow(5, rng), random_flow(5, rng)};
    EXPECT_EQ(effective_flow(slices, 0.7, 0), slices[0]);
}

TEST(EffectiveFlow, DecayedSum) {
    std::vector<FlowMatrix> slices(3, FlowMatrix(3));
    slices[0].set(0, 1, 1.0);
    slices[1].set(0, 1, 1.0);
    const FlowMatrix f = effective_flow(slices, 0.5, 2);
    EXPECT_DOUBLE_EQ(f(0, 1), 1.5);
    EXPECT_DOUBLE_EQ(f(1, 0), 1.5);
}

TEST(EffectiveFlow, FuturesPastTheEndContributeNothing) {
    std::vector<FlowMatrix> last(1, FlowMatrix(4));
    last[0].set(1, 3, 1.0);
    EXPECT_EQ(effective_flow(last, 0.7, 4), last[0]);
}

TEST(EffectiveFlow, LinearInEachSlice) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<FlowMatrix> a{random_flow(4, rng), random_flow(4, rng), random_flow(4, rng)};
        std::vector<FlowMatrix> b = a;
        const std::size_t h = rng() % 3;
        const FlowMatrix extra = random_flow(4, rng);
        b[h].axpy(1.0, extra);
        FlowMatrix lhs = effective_flow(b, 0.5, 2);
        FlowMatrix rhs = effective_flow(a, 0.5, 2);
        rhs.axpy(std::pow(0.5, static_cast<double>(h)), extra);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                EXPECT_EQ(lhs(i, j), rhs(i, j));
                EXPECT_GE(lhs(i, j), effective_flow(a, 0.5, 2)(i, j));
            }
        }
    }
}

TEST(Reward, NoOpTransitionIsZero) {
    std::mt19937_64 rng(4);
    const FlowMatrix f = random_flow(6, rng);
    const Mapping x = Mapping::random(6, 6, 3);
    EXPECT_EQ(qap_reward(x, f, x, f, random_distances(6, rng)), 0.0);
}

TEST(Reward, MotivationInstance) {
    const qapr::testing::MotivationInstance inst;
    const auto d = distance_matrix(inst.device);
    const FlowMatrix before = inst.pending_flow();

    Mapping green = inst.mapping;
    green.swap_nodes(inst.green().first, inst.green().second);
    EXPECT_EQ(d(green.phys(2), green.phys(3)), 1);
    FlowMatrix green_after = before;
    green_after.clear(2, 3); // the swap schedules (q2,q3)
    EXPECT_GT(qap_reward(inst.mapping, before, green, green_after, d), 0.0);
    EXPECT_GT(qap_reward(inst.mapping, before, green, before, d), 0.0);

    Mapping red = inst.mapping;
    red.swap_nodes(inst.red().first, inst.red().second);
    EXPECT_GT(d(red.phys(2), red.phys(3)), 1);
    EXPECT_GT(d(red.phys(4), red.phys(5)), 1);
    EXPECT_EQ(qap_reward(inst.mapping, before, red, before, d), 0.0);
}

TEST(Reward, ClearedGateEqualsTwoObjectiveCalls) {
    const auto d = distance_matrix(make_grid(2, 3));
    FlowMatrix before(6);
    before.set(0, 4, 1.0);
    before.set(2, 3, 1.0);
    Mapping x = Mapping::trivial(6, 6);
    Mapping y = x;
    y.swap_nodes(1, 4); // q4 -> node 1, adjacent to q0
    FlowMatrix after = before;
    after.clear(0, 4);
    const double expected = qap_objective(x, before, d) - qap_objective(y, after, d);
    EXPECT_EQ(qap_reward(x, before, y, after, d), expected);
    // cleared entry contributed 2 * D(0,4) = 4, and (2,3) did not move
    EXPECT_EQ(expected, 4.0);
}

TEST(Reward, Antisymmetric) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const FlowMatrix a = random_flow(5, rng);
        const FlowMatrix b = random_flow(5, rng);
        const Mapping x = Mapping::random(5, 7, rng());
        const Mapping y = Mapping::random(5, 7, rng());
        const auto d = random_distances(7, rng);
        EXPECT_EQ(qap_reward(x, a, y, b, d), -qap_reward(y, b, x, a, d));
    }
}

TEST(TotalReward, WeightedSum) {
    RewardWeights w;
    EXPECT_EQ(total_reward(0.0, 0, w), -2.0);
    EXPECT_EQ(total_reward(3.0, 1, w), 3.0);
    w.lambda_qap = w.lambda_swap = w.lambda_gate = 0.0;
    EXPECT_EQ(total_reward(5.0, 3, w), 0.0);
}

TEST(Weights, Validation) {
    RewardWeights w;
    w.gamma = 1.0;
    EXPECT_THROW(w.validate(), ConfigError);
    w = {};
    w.beta = 0.0;
    EXPECT_THROW(w.validate(), ConfigError);
    w = {};
    w.horizon = -1;
    EXPECT_THROW(w.validate(), ConfigError);
}

TEST(Weights, ConfigFormats) {
    const RewardWeights j = reward_weights_from_json(
        R"({"lambda_qap":0.5,"lambda_swap":1,"lambda_gate":2,"beta":-0.5,"gamma":0.9,"horizon":3,"reward_flow":"current"})");
    EXPECT_EQ(j.lambda_qap, 0.5);
    EXPECT_EQ(j.beta, -0.5);
    EXPECT_EQ(j.horizon, 3);
    EXPECT_EQ(j.flow, RewardFlow::CurrentSlice);
    const RewardWeights t = reward_weights_from_toml("[reward]\n# weights\nlambda_qap = 1.5\ngamma = 0.25\n");
    EXPECT_EQ(t.lambda_qap, 1.5);
    EXPECT_EQ(t.gamma, 0.25);
    EXPECT_EQ(t.lambda_gate, 2.0);
    EXPECT_THROW((void)reward_weights_from_json(R"({"gamma":2})"), ConfigError);
    EXPECT_THROW((void)reward_weights_from_toml("bogus = 1\n"), ConfigError);
    EXPECT_THROW((void)reward_weights_from_toml("horizon = 1.5\n"), ConfigError);
}

TEST(MappingType, ValidationAndSwap) {
    EXPECT_THROW(Mapping({0, 0}, 3), InvalidMapping);
    EXPECT_THROW(Mapping({0, 3}, 3), InvalidMapping);
    EXPECT_THROW(Mapping({0, 1, 2}, 2), QubitCountExceedsDevice);
    Mapping m({2, 0}, 4);
    m.swap_nodes(2, 3); // q0 onto the empty node 3
    EXPECT_EQ(m.phys(0), 3);
    EXPECT_EQ(m.occupant(2), Mapping::kEmpty);
    EXPECT_TRUE(m.is_valid());
    EXPECT_EQ(Mapping::random(6, 9, 5), Mapping::random(6, 9, 5));
}

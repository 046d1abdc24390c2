// SPDX-License-Identifier: MIT

#include "fixtures.hpp"
#include "qapr/env.hpp"
#include "qapr/replay.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace qapr;

namespace {

RewardWeights no_lookahead() {
    RewardWeights w;
    w.horizon = 0;
    return w;
}

} // namespace

TEST(Reset, EmptyCircuitIsDone) {
    const auto s = reset(Circuit(4), make_grid(2, 2), Mapping::trivial(4, 4));
    EXPECT_TRUE(s.done());
    EXPECT_EQ(s.swaps_inserted(), 0U);
    EXPECT_THROW((void)s.legal_actions(), EpisodeFinished);
}

TEST(Reset, AdjacentGateClearsForFree) {
    const auto s = reset(Circuit(4, {{0, 1}}), make_grid(2, 2), Mapping::trivial(4, 4));
    EXPECT_TRUE(s.done());
    EXPECT_EQ(s.swaps_inserted(), 0U);
    ASSERT_EQ(s.schedule().size(), 1U);
    EXPECT_FALSE(s.schedule()[0].is_swap());
}

TEST(Reset, DistantGateStaysPending) {
    const auto s = reset(Circuit(4, {{0, 3}}), make_grid(2, 2), Mapping::trivial(4, 4));
    EXPECT_FALSE(s.done());
    EXPECT_EQ(s.current_flow()(0, 3), 1.0);
    EXPECT_EQ(s.current_flow()(3, 0), 1.0);
    EXPECT_EQ(s.pending().size(), 1U);
}

TEST(Reset, Errors) {
    EXPECT_THROW((void)reset(Circuit(5), make_grid(2, 2), Mapping::trivial(4, 4)), QubitCountExceedsDevice);
    EXPECT_THROW((void)reset(Circuit(3), make_grid(2, 2), Mapping::trivial(4, 4)), InvalidMapping);
    EXPECT_THROW((void)reset(Circuit(3), make_grid(2, 2), Mapping::trivial(3, 5)), InvalidMapping);
}

TEST(Step, SingleSwapRoutesDiagonalGate) {
    auto s = reset(Circuit(4, {{0, 3}}), make_grid(2, 2), Mapping::trivial(4, 4));
    const StepOutcome out = s.step(Action{1, 3});
    EXPECT_EQ(s.mapping().phys(3), 1);
    EXPECT_EQ(out.scheduled, std::vector<std::size_t>{0});
    EXPECT_EQ(out.swaps_inserted, 1);
    EXPECT_TRUE(out.done);
    EXPECT_TRUE(s.done());
    EXPECT_EQ(s.swaps_inserted(), 1U);
    // r_qap = 2*D(0,3) = 4, one gate: 1*4 + 2*(-1) + 2*1
    EXPECT_DOUBLE_EQ(out.reward, 4.0);
}

TEST(Step, MotivationInstanceGreenBeatsRed) {
    const qapr::testing::MotivationInstance inst;
    auto s = reset(inst.circuit, inst.device, inst.mapping, no_lookahead());
    ASSERT_EQ(s.slice_index(), 1U); // first slice cleared for free
    ASSERT_EQ(s.pending().size(), 2U);

    const StepOutcome red = s.preview(Action{inst.red().first, inst.red().second});
    EXPECT_TRUE(red.scheduled.empty());
    EXPECT_EQ(red.r_qap, 0.0);

    const StepOutcome green = s.step(Action{inst.green().first, inst.green().second});
    EXPECT_EQ(green.scheduled, std::vector<std::size_t>{2});
    EXPECT_GT(green.r_qap, 0.0);
    EXPECT_GT(green.reward, red.reward);
    EXPECT_EQ(s.current_flow()(2, 3), 0.0);
}

TEST(Step, UnrelatedSwapLeavesFlowUnchanged) {
    // q0,q3 pending on a 2x3 grid; swapping nodes 4 and 5 moves nobody involved
    auto s = reset(Circuit(6, {{0, 5}}), make_grid(2, 3), Mapping::trivial(6, 6), no_lookahead());
    const FlowMatrix before = s.current_flow();
    const StepOutcome out = s.step(Action{1, 2});
    EXPECT_TRUE(out.scheduled.empty());
    EXPECT_EQ(s.current_flow(), before);
    const RewardWeights w = no_lookahead();
    EXPECT_DOUBLE_EQ(out.reward, w.lambda_swap * w.beta + w.lambda_qap * out.r_qap);
    EXPECT_EQ(out.r_qap, 0.0);
}

TEST(Step, Errors) {
    auto s = reset(Circuit(4, {{0, 3}}), make_grid(2, 2), Mapping::trivial(4, 4));
    EXPECT_THROW((void)s.step(Action{0, 3}), IllegalAction);
    (void)s.step(Action{1, 3});
    EXPECT_THROW((void)s.step(Action{0, 1}), EpisodeFinished);
}

TEST(Step, PreviewMatchesStepAndIsPure) {
    std::mt19937_64 rng(12);
    const Device dev = make_grid(3, 3);
    for (int trial = 0; trial < 30; ++trial) {
        auto s = reset(qapr::testing::random_circuit(9, 30, rng), dev, Mapping::random(9, 9, rng()));
        while (!s.finished()) {
            const auto& acts = s.legal_actions();
            const Action a = acts[rng() % acts.size()];
            const Mapping m = s.mapping();
            const StepOutcome p = s.preview(a);
            EXPECT_EQ(s.mapping(), m);
            const StepOutcome o = s.step(a);
            EXPECT_EQ(p.reward, o.reward);
            EXPECT_EQ(p.scheduled, o.scheduled);
            EXPECT_EQ(p.done, o.done);
            EXPECT_EQ(p.truncated, o.truncated);
        }
    }
}

TEST(Actions, LexicographicAndStateIndependent) {
    auto s = reset(Circuit(4, {{0, 3}, {1, 2}}), make_grid(2, 2), Mapping::trivial(4, 4));
    const std::vector<Action> expected{{0, 1}, {0, 2}, {1, 3}, {2, 3}};
    EXPECT_EQ(s.legal_actions(), expected);
    auto t = reset(Circuit(12, {{0, 11}}), make_tokyo(12), Mapping::trivial(12, 12));
    EXPECT_EQ(t.legal_actions().size(), 23U);
    (void)s.step(Action{0, 1});
    if (!s.finished()) {
        EXPECT_EQ(s.legal_actions(), expected);
    }
}

TEST(Observe, FutureStackIsZeroPaddedAndTracksClearing) {
    // slices: [(0,1),(2,3)], [(1,2)] on a line where nothing is adjacent under this placement
    const Device line(4, {{0, 1}, {1, 2}, {2, 3}}, std::vector<Coord>(4));
    const Circuit c(4, {{0, 1}, {2, 3}, {1, 2}});
    auto s = reset(c, line, Mapping({0, 2, 1, 3}, 4));
    ASSERT_EQ(s.slice_index(), 0U);
    const Observation first = s.observation(3);
    EXPECT_EQ(first.current, slice_to_flow({Gate{0, 1}, Gate{2, 3}}, 4));
    ASSERT_EQ(first.future.size(), 3U);
    EXPECT_EQ(first.future[0], slice_to_flow({Gate{1, 2}}, 4));
    EXPECT_TRUE(first.future[1].is_zero());
    EXPECT_TRUE(first.future[2].is_zero());
    EXPECT_EQ(first.distances(0, 3), 3);

    // q0@0, q2@1, q1@2, q3@3: swapping nodes 1,2 makes both slice-0 gates adjacent,
    // and (1,2) then clears for free
    (void)s.step(Action{1, 2});
    EXPECT_TRUE(s.done());
    const Observation after = s.observation(2);
    EXPECT_TRUE(after.current.is_zero());
    EXPECT_TRUE(after.future[0].is_zero());
}

TEST(Observe, ClearedEntryZeroedWithinSlice) {
    // (0,3) and (1,2) pending on a 2x3 grid; one swap clears only (0,3)
    auto s = reset(Circuit(6, {{0, 4}, {2, 3}}), make_grid(2, 3), Mapping::trivial(6, 6));
    ASSERT_EQ(s.pending().size(), 2U);
    (void)s.step(Action{1, 4});
    EXPECT_EQ(s.observation(0).current(0, 4), 0.0);
    EXPECT_EQ(s.observation(0).current(2, 3), 1.0);
}

TEST(Episode, RandomWalksPreserveInvariants) {
    std::mt19937_64 rng(77);
    const std::vector<Device> devices{make_grid(3, 4), make_tokyo(12), make_grid(2, 5)};
    std::size_t episodes = 0;
    std::size_t total_steps = 0;
    while (total_steps < 10000) {
        const Device& dev = devices[episodes % devices.size()];
        const int nq = 2 + static_cast<int>(rng() % static_cast<unsigned>(dev.n_nodes() - 1));
        const Circuit c = qapr::testing::random_circuit(nq, 1 + static_cast<int>(rng() % 25), rng);
        const Mapping m0 = Mapping::random(nq, dev.n_nodes(), rng());
        auto s = reset(c, dev, m0, RewardWeights{}, 300);
        std::size_t pending = s.pending_total();
        while (!s.finished()) {
            const auto& acts = s.legal_actions();
            (void)s.step(acts[rng() % acts.size()]);
            ASSERT_TRUE(s.mapping().is_valid());
            ASSERT_LE(s.pending_total(), pending);
            pending = s.pending_total();
            ++total_steps;
        }
        if (s.done()) {
            const auto rep = replay_schedule(c, dev, m0, s.schedule(), s.mapping());
            ASSERT_TRUE(rep.ok) << rep.error;
            EXPECT_EQ(rep.swaps, s.swaps_inserted());
        } else {
            EXPECT_EQ(s.steps(), 300U);
        }
        ++episodes;
    }
}

TEST(Episode, Deterministic) {
    std::mt19937_64 rng(5);
    const Circuit c = qapr::testing::random_circuit(12, 60, rng);
    const Device dev = make_tokyo(12);
    auto a = reset(c, dev, Mapping::trivial(12, 12));
    auto b = reset(c, dev, Mapping::trivial(12, 12));
    std::mt19937_64 pick(1);
    while (!a.finished()) {
        const Action act = a.legal_actions()[pick() % a.legal_actions().size()];
        const auto oa = a.step(act);
        const auto ob = b.step(act);
        EXPECT_EQ(oa.reward, ob.reward);
        EXPECT_EQ(oa.scheduled, ob.scheduled);
        EXPECT_EQ(a.mapping(), b.mapping());
    }
}

TEST(Episode, TruncatesAtTmax) {
    auto s = reset(Circuit(4, {{0, 3}}), make_grid(1, 4), Mapping::trivial(4, 4), RewardWeights{}, 3);
    for (int i = 0; i < 3; ++i) {
        EXPECT_FALSE(s.truncated());
        (void)s.step(Action{1, 2}); // never touches q0 or q3
    }
    EXPECT_TRUE(s.truncated());
    EXPECT_FALSE(s.done());
    EXPECT_THROW((void)s.step(Action{1, 2}), EpisodeFinished);
}

TEST(Trace, JsonLinesExport) {
    auto s = reset(Circuit(4, {{0, 3}}), make_grid(2, 2), Mapping::trivial(4, 4));
    (void)s.step(Action{1, 3});
    std::ostringstream os;
    write_trace_jsonl(os, s.trace());
    const auto rec = nlohmann::json::parse(os.str());
    EXPECT_EQ(rec["t"], 0);
    EXPECT_EQ(rec["j"], 0);
    EXPECT_EQ(rec["action"], nlohmann::json::array({1, 3}));
    EXPECT_EQ(rec["scheduled"], nlohmann::json::parse("[[0,3]]"));
    EXPECT_EQ(rec["qap_before"], 4.0);
    EXPECT_EQ(rec["qap_after"], 0.0);
    EXPECT_EQ(rec["reward"], 4.0);
}

TEST(Replay, RejectsBrokenSchedules) {
    const Circuit c(4, {{0, 3}, {0, 1}});
    const Device dev = make_grid(2, 2);
    const Mapping m0 = Mapping::trivial(4, 4);
    using K = ScheduleEntry::Kind;
    // gate on non-adjacent nodes
    EXPECT_FALSE(replay_schedule(c, dev, m0, {{K::Gate, 0, 0, 3}, {K::Gate, 1, 0, 1}}).ok);
    // dependency violated
    EXPECT_FALSE(replay_schedule(c, dev, m0, {{K::Gate, 1, 0, 1}, {K::Swap, 0, 1, 3}, {K::Gate, 0, 0, 1}}).ok);
    // swap on a non-edge
    EXPECT_FALSE(replay_schedule(c, dev, m0, {{K::Swap, 0, 0, 3}}).ok);
    // missing gate
    EXPECT_FALSE(replay_schedule(c, dev, m0, {{K::Swap, 0, 1, 3}, {K::Gate, 0, 0, 1}}).ok);
    // valid: swap nodes 1,3 puts q3 at node 1 and q1 at node 3; then (0,1) needs q1 back
    EXPECT_TRUE(replay_schedule(c, dev, m0,
                                {{K::Swap, 0, 1, 3}, {K::Gate, 0, 0, 1}, {K::Swap, 0, 1, 3}, {K::Gate, 1, 0, 1}})
                    .ok);
}

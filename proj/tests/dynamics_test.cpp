#include <gtest/gtest.h>

#include <algorithm>

#include "aopbip/dynamics.hpp"
#include "generator.hpp"
#include "oracle.hpp"

namespace aopbip {
namespace {

TEST(Dynamics, PingPongInitialAndOnlyStep) {
    BipSystem sys(testing::load_model("pingpong.bip"));
    auto q0 = sys.initial();
    EXPECT_EQ(sys.format(q0), "Ping@IDL1{p1=1} Pong@IDL2{p2=0}");
    auto steps = sys.enabled_steps(q0);
    ASSERT_EQ(steps.size(), 1u);
    EXPECT_EQ(sys.interaction_name(steps[0].interaction), "a0");
    auto q1 = sys.apply(q0, steps[0]);
    EXPECT_EQ(sys.format(q1), "Ping@SND{p1=1} Pong@REP{p2=2}");
}

TEST(Dynamics, MapEventProjectsOntoParticipants) {
    BipSystem sys(testing::load_model("pingpong.bip"));
    auto rho = run(sys, 1, 0);
    auto es = events_of(rho);
    ASSERT_EQ(es.size(), 1u);
    auto e = map_event(sys, es[0], "Ping");
    ASSERT_TRUE(e);
    EXPECT_EQ(e->l(), "IDL1");
    EXPECT_EQ(e->tau.port, "send1");
    EXPECT_EQ(e->l_next(), "SND");
    EXPECT_EQ(e->v().at("p1"), 1);
    EXPECT_EQ(format_local_event(*e), "IDL1{p1=1} | t0:send1 | SND{p1=1}");
}

TEST(Dynamics, DumpFormat) {
    BipSystem sys(testing::load_model("pingpong.bip"));
    auto dump = dump_trace(sys, run(sys, 2, 7));
    EXPECT_EQ(dump,
              "# q0 = Ping@IDL1{p1=1} Pong@IDL2{p2=0}\n"
              "Ping@IDL1{p1=1} Pong@IDL2{p2=0} | a0 | Ping@SND{p1=1} Pong@REP{p2=2}\n"
              "Ping@SND{p1=1} Pong@REP{p2=2} | a1 | Ping@IDL1{p1=2} Pong@IDL2{p2=2}\n");
}

TEST(Dynamics, StepRejectsDisabledInteraction) {
    BipSystem sys(testing::load_model("pingpong.bip"));
    EXPECT_THROW(sys.step(sys.initial(), "a1"), std::invalid_argument);
}

TEST(Dynamics, PingPongDepthOneHasOneEvent) {
    BipSystem sys(testing::load_model("pingpong.bip"));
    auto ex = explore(sys, ExploreOptions{1, 1000});
    EXPECT_EQ(ex.events.size(), 1u);
}

TEST(Dynamics, PriorityFiltersLowerInteraction) {
    auto c = testing::load_model("global_match.bip");
    c.priorities = {Priority{"a0", "a1"}};
    BipSystem sys(c);
    auto pre = sys.enabled_interactions(sys.initial(), false);
    auto post = sys.enabled_interactions(sys.initial(), true);
    auto a0 = *sys.interaction_index("a0");
    EXPECT_NE(std::find(pre.begin(), pre.end(), a0), pre.end());
    EXPECT_EQ(std::find(post.begin(), post.end(), a0), post.end());
}

TEST(Dynamics, RunIsReproducibleBySeed) {
    BipSystem sys(testing::load_model("two_writers.bip"));
    EXPECT_EQ(dump_trace(sys, run(sys, 20, 42)), dump_trace(sys, run(sys, 20, 42)));
}

TEST(Dynamics, ReplayReproducesRun) {
    BipSystem sys(testing::load_model("network.bip"));
    auto rho = run(sys, 15, 3);
    auto again = replay(sys, rho.steps);
    EXPECT_EQ(again.states, rho.states);
}

TEST(Dynamics, OverflowSurfacesAsTraceError) {
    auto c = testing::load_model("pingpong.bip");
    // The transfer copies p1 into p2 before Pong increments it.
    c.atoms[0].vars[0].init = std::numeric_limits<std::int64_t>::max();
    BipSystem sys(c);
    auto rho = run(sys, 5, 0);
    EXPECT_TRUE(rho.error.has_value());
}

// Every explored event is a move of the reference semantics, and vice versa.
TEST(DynamicsProperty, ExplorationAgreesWithReferenceSemantics) {
    testing::Rng rng(17);
    for (int i = 0; i < 150; ++i) {
        auto c = testing::random_model(rng);
        BipSystem sys(c);
        auto ex = explore(sys, ExploreOptions{6, 20000});
        std::map<GlobalState, std::vector<testing::RefMove>> seen;
        for (const auto& e : ex.events) {
            testing::RefMove m;
            m.interaction = sys.interaction_name(e.step.interaction);
            const auto& in = c.interactions[e.step.interaction];
            for (std::size_t k = 0; k < in.ports.size(); ++k)
                m.transitions.push_back(c.find_atom(in.ports[k].instance)->transitions[e.step.transitions[k]].id);
            m.post = testing::to_ref(sys, e.post);
            seen[e.pre].push_back(std::move(m));
        }
        for (auto& [q, moves] : seen) {
            auto expected = testing::ref_moves(c, testing::to_ref(sys, q));
            std::sort(moves.begin(), moves.end());
            std::sort(expected.begin(), expected.end());
            EXPECT_EQ(moves, expected) << "model " << i << " at " << sys.format(q);
        }
        // Interior states with no recorded events are deadlocks in both semantics.
        for (const auto& d : ex.deadlocks) EXPECT_TRUE(testing::ref_moves(c, testing::to_ref(sys, d)).empty());
    }
}

TEST(DynamicsProperty, MapEventAndDomains) {
    testing::Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        auto c = testing::random_model(rng);
        BipSystem sys(c);
        auto ex = explore(sys, ExploreOptions{5, 20000});
        for (const auto& e : ex.events) {
            const auto& in = c.interactions[e.step.interaction];
            for (const auto& b : c.atoms) {
                EXPECT_EQ(map_event(sys, e, b.name).has_value(), in.involves(b.name));
                auto idx = sys.instance_index(b.name);
                EXPECT_EQ(e.pre.locals[idx].values.size(), e.post.locals[idx].values.size());
                if (!in.involves(b.name)) EXPECT_EQ(e.pre.locals[idx], e.post.locals[idx]);
            }
            // The executed interaction was enabled after priority filtering.
            auto en = sys.enabled_interactions(e.pre, true);
            EXPECT_NE(std::find(en.begin(), en.end(), e.step.interaction), en.end());
        }
    }
}

}  // namespace
}  // namespace aopbip

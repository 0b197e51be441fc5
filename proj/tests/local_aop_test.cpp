#include <gtest/gtest.h>

#include <algorithm>

#include "aopbip/local_aop.hpp"
#include "generator.hpp"

namespace aopbip {
namespace {

using Ids = std::set<std::string>;

// Flattens nested conjunctions/disjunctions and sorts operands by their printed form.
std::string canonical(const Expr& e) {
    if (const auto* b = std::get_if<Binary>(&e->node)) {
        if (b->op == BinaryOp::And || b->op == BinaryOp::Or) {
            std::vector<std::string> parts;
            std::vector<Expr> todo{e};
            while (!todo.empty()) {
                auto cur = todo.back();
                todo.pop_back();
                const auto* cb = std::get_if<Binary>(&cur->node);
                if (cb && cb->op == b->op) {
                    todo.push_back(cb->lhs);
                    todo.push_back(cb->rhs);
                } else {
                    parts.push_back(canonical(cur));
                }
            }
            std::sort(parts.begin(), parts.end());
            std::string out = b->op == BinaryOp::And ? "and(" : "or(";
            for (const auto& p : parts) out += p + ";";
            return out + ")";
        }
    }
    return to_string(e);
}

const AtomicComponent& atom(const CompositeComponent& c, const std::string& n) { return *c.find_atom(n); }

TEST(Neighborhoods, SyntaxModel) {
    auto c = testing::load_model("syntax.bip");
    const auto& b = atom(c, "B");
    Ids m{"t3", "t5"};
    EXPECT_EQ(origin(b, m), (Ids{"l0", "l2"}));
    EXPECT_EQ(dest(b, m), (Ids{"l1", "l4"}));
    EXPECT_EQ(siblings(b, m), (Ids{"t0", "t2", "t3", "t4", "t5"}));
    EXPECT_EQ(predecessors(b, m), (Ids{"t0", "t4"}));
}

TEST(Neighborhoods, EmptyMatch) {
    auto c = testing::load_model("syntax.bip");
    const auto& b = atom(c, "B");
    EXPECT_TRUE(origin(b, {}).empty());
    EXPECT_TRUE(siblings(b, {}).empty());
    EXPECT_TRUE(predecessors(b, {}).empty());
}

TEST(MkGuard, DynamicWeaveExample) {
    auto c = testing::load_model("dynamic.bip");
    const auto& b = atom(c, "B");
    auto g = mk_guard({"p1", "p2"}, "l2", b, {"t2", "t3", "t4"});
    const auto* t2 = b.find_transition("t2");
    const auto* t3 = b.find_transition("t3");
    const auto* t4 = b.find_transition("t4");
    auto expected = conj(t2->guard, disj(t3->guard, t4->guard));
    EXPECT_EQ(canonical(g), canonical(expected));
    auto swapped = conj(disj(t4->guard, t3->guard), t2->guard);
    EXPECT_EQ(canonical(g), canonical(swapped));
    EXPECT_NE(canonical(g), canonical(conj(t2->guard, t3->guard)));
}

TEST(MkGuard, PortWithoutTransitionsIsFalse) {
    auto c = testing::load_model("dynamic.bip");
    auto g = mk_guard({"p0"}, "l2", atom(c, "B"), {"t2"});
    EXPECT_TRUE(is_bool_literal(g, false));
}

TEST(EditFrame, Table) {
    EXPECT_EQ(edit_frame(at_location("l")), (EditFrame{EditPoint::PE, EditPoint::CB}));
    EXPECT_EQ(edit_frame(read_var_guard("x")), (EditFrame{EditPoint::PE, EditPoint::CB}));
    EXPECT_EQ(edit_frame(read_var_func("x")), (EditFrame{EditPoint::CB, EditPoint::CE}));
    EXPECT_EQ(edit_frame(write_var("x")), (EditFrame{EditPoint::CB, EditPoint::CE}));
    EXPECT_EQ(edit_frame(port_execute("p")), (EditFrame{EditPoint::CB, EditPoint::CE}));
    EXPECT_EQ(edit_frame(port_enabled("p")), (EditFrame{EditPoint::RUN, EditPoint::CB}));
    EXPECT_EQ(edit_frame(lpc_and(at_location("l1"), write_var("x"))), (EditFrame{EditPoint::CB, EditPoint::CE}));
    EXPECT_EQ(edit_frame(lpc_and(port_enabled("p"), write_var("x"))), (EditFrame{EditPoint::RUN, EditPoint::CE}));
    EXPECT_FALSE(is_canonical(EditFrame{EditPoint::PE, EditPoint::CE}));
}

TEST(EditFrame, Early) {
    EXPECT_TRUE(early(at_location("l")));
    EXPECT_TRUE(early(port_enabled("p")));
    EXPECT_FALSE(early(port_execute("p")));
    EXPECT_FALSE(early(lpc_and(port_enabled("p"), read_var_func("x"))));
}

TEST(EditFrameProperty, AlwaysCanonical) {
    testing::Rng rng(99);
    auto c = testing::load_model("dynamic.bip");
    for (int i = 0; i < 1000; ++i) {
        auto lpc = testing::random_lpc(rng, atom(c, "B"), true, 4);
        auto f = edit_frame(lpc);
        EXPECT_TRUE(is_canonical(f)) << to_string(lpc);
        // The frame of a conjunction dominates the frames of its parts.
        for (const auto& part : conjuncts(lpc)) {
            auto g = edit_frame(part);
            EXPECT_LE(static_cast<int>(g.start), static_cast<int>(f.start));
            EXPECT_LE(static_cast<int>(g.end), static_cast<int>(f.end));
        }
    }
}

TEST(SelectLocal, StaticSelection) {
    auto c = testing::load_model("weave_procedures.bip");
    const auto& b = atom(c, "B");
    EXPECT_EQ(select_local(b, at_location("l0")), (Ids{"t1", "t5"}));
    EXPECT_EQ(select_local(b, lpc_and(at_location("l0"), port_execute("p2"))), (Ids{"t5"}));
    EXPECT_EQ(select_local(b, write_var("y")), (Ids{"t2"}));
    // Guards of a block are evaluated together, so the whole l0 block is selected.
    EXPECT_EQ(select_local(b, read_var_guard("x")), (Ids{"t1", "t5"}));
    EXPECT_EQ(select_local(b, read_var_func("x")), (Ids{"t2", "t5"}));
}

// portEnabled(p) holds at a location iff some sibling on p has a true guard there.
TEST(SelectLocal, PortEnabledAgreesWithSiblingOracle) {
    auto c = testing::load_model("dynamic.bip");
    BipSystem sys(c);
    auto ex = explore(sys, ExploreOptions{8, 10000});
    const auto& b = atom(c, "B");
    for (const auto& e : ex.local_events.at("B"))
        for (const auto* p : {"p0", "p1", "p2"}) {
            bool oracle = false;
            for (const auto& t : b.transitions) {
                if (t.src != e.l() || t.port != p) continue;
                std::map<std::string, std::int64_t> env = e.v();
                Lookup look = [&](const std::string& n) { return env.at(n); };
                oracle = oracle || evaluate(t.guard, look) != 0;
            }
            EXPECT_EQ(match_local(b, e, port_enabled(p)), oracle) << format_local_event(e) << " " << p;
        }
}

LocalAspect aspect_for(const std::string& id, Lpc lpc) {
    LocalAspect a;
    a.id = id;
    a.instance = "B";
    a.intertype = {Variable{"k", Type::Int, 0}};
    a.pointcut = std::move(lpc);
    a.before = assign("k", binary(BinaryOp::Add, var("k"), int_lit(1)));
    a.after = assign("k", binary(BinaryOp::Add, var("k"), int_lit(10)));
    return a;
}

TEST(WeaveLocal, CbCeWrapsMatchedAndClearsOnPredecessors) {
    auto c = testing::load_model("weave_procedures.bip");
    auto a = aspect_for("A_1", lpc_and(at_location("l0"), port_execute("p2")));
    a.resets = {ResetPair{"l0", bool_lit(true)}};
    auto w = weave_local(c, a);
    const auto& b = atom(w.model, "B");
    const auto* t5 = b.find_transition("t5");
    EXPECT_TRUE(starts_with(t5->func, a.before_block()));
    EXPECT_TRUE(ends_with(t5->func, a.after_block()));
    EXPECT_TRUE(has_block(t5->func, "A_1", MarkerRole::Set));
    EXPECT_TRUE(has_block(b.find_transition("t3")->func, "A_1", MarkerRole::Clear));
    EXPECT_EQ(w.report.reset_anchors, (Ids{"l1"}));
    ASSERT_EQ(w.report.added_transitions.size(), 1u);
    const auto* r = b.find_transition(w.report.added_transitions[0]);
    EXPECT_EQ(r->src, "l1");
    EXPECT_EQ(r->dest, "l0");
    EXPECT_EQ(r->port, a.ip_port());
    auto aip = w.model.find_interaction(a.ip_interaction());
    ASSERT_NE(aip, nullptr);
    for (const auto& in : w.model.interactions)
        if (in.name != aip->name) EXPECT_TRUE(priority_closure(w.model.priorities).count({in.name, aip->name}));
}

TEST(WeaveLocal, PeCbPutsBeforeAdviceOnPredecessors) {
    auto c = testing::load_model("weave_procedures.bip");
    auto a = aspect_for("A_1", at_location("l1"));
    auto w = weave_local(c, a);
    const auto& b = atom(w.model, "B");
    EXPECT_TRUE(ends_with(b.find_transition("t5")->func, a.before_block()));
    EXPECT_TRUE(starts_with(b.find_transition("t2")->func, a.after_block()));
    EXPECT_EQ(w.report.frame, (EditFrame{EditPoint::PE, EditPoint::CB}));
}

TEST(WeaveLocal, RunCbOnDynamicModel) {
    auto c = testing::load_model("dynamic.bip");
    auto a = aspect_for("A_1", port_enabled("p1"));
    auto w = weave_local(c, a);
    const auto& b = atom(w.model, "B");
    EXPECT_EQ(w.report.matched, (Ids{"t2", "t3", "t4"}));
    EXPECT_EQ(w.report.temp_locations, (Ids{a.temp_location("l2")}));
    EXPECT_TRUE(b.has_location("l2__bot_A_1"));
    EXPECT_EQ(b.find_transition("t1")->dest, "l2__bot_A_1");
    const auto* set = b.find_transition("l2__bot_A_1__set");
    const auto* clr = b.find_transition("l2__bot_A_1__clr");
    ASSERT_NE(set, nullptr);
    ASSERT_NE(clr, nullptr);
    EXPECT_EQ(set->port, a.ip_port());
    EXPECT_EQ(set->dest, "l2");
    EXPECT_TRUE(ends_with(set->func, a.before_block()));
    EXPECT_EQ(w.report.g.at("t2").size(), 2u);
    EXPECT_EQ(w.report.g.at("t0").size(), 1u);
}

TEST(WeaveLocal, RejectsAdviceOutsideScope) {
    auto c = testing::load_model("dynamic.bip");
    auto a = aspect_for("A_1", at_location("l0"));
    a.before = assign("zz", int_lit(1));
    EXPECT_THROW(weave_local(c, a), WeaveError);
}

TEST(WeaveLocal, RejectsUnresolvedPointcut) {
    auto c = testing::load_model("dynamic.bip");
    EXPECT_THROW(weave_local(c, aspect_for("A_1", at_location("nowhere"))), WeaveError);
}

TEST(RemLocal, StripsAdviceBack) {
    auto c = testing::load_model("weave_procedures.bip");
    auto a = aspect_for("A_1", lpc_and(at_location("l0"), port_execute("p2")));
    auto w = weave_local(c, a);
    BipSystem sys(w.model);
    GlobalEvent e{sys.initial(), {}, sys.step(sys.initial(), "c2")};
    for (const auto& s : sys.enabled_steps(sys.initial()))
        if (sys.interaction_name(s.interaction) == "c2") e.step = s;
    auto le = map_event(sys, e, "B");
    ASSERT_TRUE(le);
    auto back = rem_local(*le, atom(c, "B"), a);
    ASSERT_TRUE(back);
    EXPECT_EQ(back->tau, *atom(c, "B").find_transition("t5"));
}

// Structural invariants of every woven component.
TEST(WeaveLocalProperty, IpIsMaximalAndMapIsTotal) {
    testing::Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        auto c = testing::random_model(rng);
        auto a = testing::random_local_aspect(rng, c, "R_" + std::to_string(i), true);
        auto w = weave_local(c, a);
        EXPECT_FALSE(has_errors(validate(w.model, ValidateOptions{true})));
        const auto& orig = atom(c, a.instance);
        for (const auto& t : orig.transitions) {
            ASSERT_TRUE(w.report.g.count(t.id)) << t.id;
            for (const auto& id : w.report.g.at(t.id)) {
                const auto* img = atom(w.model, a.instance).find_transition(id);
                ASSERT_NE(img, nullptr);
                EXPECT_EQ(img->port, t.port);
            }
        }
        const auto& b = atom(w.model, a.instance);
        for (const auto& t : b.transitions)
            if (t.port == a.ip_port())
                EXPECT_NE(std::find(w.report.added_transitions.begin(), w.report.added_transitions.end(), t.id),
                          w.report.added_transitions.end());
        auto closure = priority_closure(w.model.priorities);
        for (const auto& in : w.model.interactions)
            if (in.name != a.ip_interaction()) EXPECT_TRUE(closure.count({in.name, a.ip_interaction()}));
        if (edit_frame(a.pointcut).start == EditPoint::RUN)
            for (const auto& l : origin(orig, w.report.matched)) EXPECT_TRUE(b.has_location(a.temp_location(l)));
    }
}

}  // namespace
}  // namespace aopbip

#include <gtest/gtest.h>

#include "aopbip/composition.hpp"
#include "aopbip/conformance.hpp"
#include "generator.hpp"

namespace aopbip {
namespace {

GlobalAspect first_global(const AspectFile& f) {
    for (const auto& k : f.containers)
        if (const auto* g = std::get_if<GlobalContainer>(&k)) return g->aspects.front();
    throw std::runtime_error("no global aspect");
}

LocalAspect first_local(const AspectFile& f) {
    for (const auto& k : f.containers)
        if (const auto* l = std::get_if<LocalContainer>(&k)) return l->aspects.front();
    throw std::runtime_error("no local aspect");
}

TEST(Conformance, WeaveProceduresLocalPasses) {
    auto c = testing::load_model("weave_procedures.bip");
    auto a = first_local(testing::load_aspects("weave_procedures.abip", c));
    auto w = weave_local(c, a);
    BipSystem orig(c);
    BipSystem woven(w.model);
    auto v = check_local(orig, woven, a);
    EXPECT_EQ(v.outcome, Outcome::Pass) << format_verdict(woven, v);
    EXPECT_GT(v.events, 0u);
    auto m = check_match_equivalence(orig, a.instance, a.pointcut);
    EXPECT_EQ(m.outcome, Outcome::Pass) << format_verdict(orig, m);
}

TEST(Conformance, FaultToleranceGlobalPasses) {
    auto c = testing::load_model("network.bip");
    auto a = first_global(testing::load_aspects("fault.abip", c));
    auto sel = select_global(c, a.pointcut);
    BipSystem orig(c);
    BipSystem woven(weave_global(c, {sel.begin(), sel.end()}, a));
    EXPECT_EQ(check_global_match(orig, a).outcome, Outcome::Pass);
    auto v = check_global(orig, woven, a);
    EXPECT_EQ(v.outcome, Outcome::Pass) << format_verdict(woven, v);
}

TEST(Conformance, DepthZeroIsInconclusive) {
    auto c = testing::load_model("weave_procedures.bip");
    auto a = first_local(testing::load_aspects("weave_procedures.abip", c));
    BipSystem orig(c);
    BipSystem woven(weave_local(c, a).model);
    auto v = check_local(orig, woven, a, CheckOptions{0, 1000});
    EXPECT_EQ(v.outcome, Outcome::Inconclusive);
}

TEST(Conformance, PortEnabledIsRejectedByMatchEquivalence) {
    BipSystem sys(testing::load_model("dynamic.bip"));
    EXPECT_THROW(check_match_equivalence(sys, "B", port_enabled("p1")), std::invalid_argument);
}

TEST(Conformance, DroppedGlobalAdviceFailsWithReplayableCounterexample) {
    auto c = testing::load_model("network.bip");
    auto a = first_global(testing::load_aspects("fault.abip", c));
    auto sel = select_global(c, a.pointcut);
    auto woven = weave_global(c, {sel.begin(), sel.end()}, a);
    BipSystem orig(c);
    testing::Rng rng(1);
    auto reached = testing::reached_interactions(BipSystem(woven), explore(BipSystem(woven)));
    auto broken = testing::drop_global_advice(rng, woven, a, reached);
    ASSERT_TRUE(broken);
    BipSystem bsys(*broken);
    auto v = check_global(orig, bsys, a);
    ASSERT_EQ(v.outcome, Outcome::Fail);
    EXPECT_FALSE(v.counterexample.empty());
    EXPECT_TRUE(recheck_global(orig, bsys, a, v.counterexample).has_value());
    EXPECT_NE(format_verdict(bsys, v).find("FAIL"), std::string::npos);
}

TEST(Conformance, MisplacedLocalAdviceFails) {
    auto c = testing::load_model("weave_procedures.bip");
    auto a = first_local(testing::load_aspects("weave_procedures.abip", c));
    auto w = weave_local(c, a);
    BipSystem orig(c);
    BipSystem wsys(w.model);
    testing::Rng rng(2);
    auto broken = testing::misplace_local_advice(rng, w.model, a, testing::reached_transitions(wsys, explore(wsys)));
    ASSERT_TRUE(broken);
    BipSystem bsys(*broken);
    auto v = check_local(orig, bsys, a);
    ASSERT_EQ(v.outcome, Outcome::Fail);
    EXPECT_TRUE(recheck_local(orig, bsys, a, v.counterexample).has_value());
}

// Forcing y out of {0,1} leaves l2 without an enabled transition once x wraps to 0.
TEST(Conformance, IntroducedDeadlockIsAWarning) {
    auto c = testing::load_model("dynamic.bip");
    LocalAspect a;
    a.id = "D_1";
    a.instance = "B";
    a.pointcut = lpc_and(at_location("l1"), port_execute("p0"));
    a.after = assign("y", int_lit(5));
    BipSystem orig(c);
    BipSystem woven(weave_local(c, a).model);
    EXPECT_TRUE(explore(orig).deadlocks.empty());
    auto v = check_local(orig, woven, a);
    EXPECT_EQ(v.outcome, Outcome::Pass) << format_verdict(woven, v);
    bool deadlock = false;
    for (const auto& d : v.warnings) deadlock = deadlock || d.code == "weave-deadlock";
    EXPECT_TRUE(deadlock);
}

TEST(Conformance, VerdictLineIsMachineReadable) {
    auto c = testing::load_model("weave_procedures.bip");
    auto a = first_local(testing::load_aspects("weave_procedures.abip", c));
    BipSystem orig(c);
    BipSystem woven(weave_local(c, a).model);
    auto text = format_verdict(woven, check_local(orig, woven, a));
    EXPECT_EQ(text.rfind("verdict local-apply A_1 PASS", 0), 0u) << text;
}

}  // namespace
}  // namespace aopbip

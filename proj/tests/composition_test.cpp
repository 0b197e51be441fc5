#include <gtest/gtest.h>

#include <algorithm>

#include "aopbip/composition.hpp"
#include "aopbip/frontend.hpp"
#include "generator.hpp"

namespace aopbip {
namespace {

std::vector<LocalAspect> local_aspects(const AspectFile& f) {
    std::vector<LocalAspect> out;
    for (const auto& k : f.containers)
        if (const auto* lc = std::get_if<LocalContainer>(&k)) out.insert(out.end(), lc->aspects.begin(), lc->aspects.end());
    return out;
}

const Transition& reset_of(const Composition& w, const std::string& aspect) {
    for (const auto& r : w.reports)
        if (r.aspect == aspect)
            for (const auto& id : r.added_transitions)
                if (id.rfind("reset_", 0) == 0) return *w.model.find_atom(r.instance)->find_transition(id);
    throw std::runtime_error("no reset transition for " + aspect);
}

TEST(WeaveProcedures, SerialAdvisesEarlierResetAllDoesNot) {
    auto c = testing::load_model("weave_procedures.bip");
    auto as = local_aspects(testing::load_aspects("weave_procedures.abip", c));
    ASSERT_EQ(as.size(), 2u);
    ASSERT_EQ(as[0].id, "A_1");
    ASSERT_EQ(as[1].id, "A2_1");

    auto serial = weave_serial_local(c, as);
    const auto& rs = reset_of(serial, "A_1");
    EXPECT_EQ(rs.src, "l1");
    EXPECT_EQ(rs.dest, "l0");
    EXPECT_TRUE(has_block(rs.func, "A2_1", MarkerRole::After));
    EXPECT_TRUE(serial.reports[1].matched.count(rs.id));
    EXPECT_FALSE(serial.warnings.empty());

    auto all = weave_all(c, as);
    const auto& ra = reset_of(all, "A_1");
    EXPECT_EQ(ra.id, rs.id);
    EXPECT_FALSE(has_block(ra.func, "A2_1", MarkerRole::After));
    EXPECT_FALSE(all.reports[1].matched.count(ra.id));
    EXPECT_EQ(all.reports[1].matched, (std::set<std::string>{"t2"}));

    // t2 carries the after advice of A2 under both strategies.
    EXPECT_TRUE(has_block(serial.model.find_atom("B")->find_transition("t2")->func, "A2_1", MarkerRole::After));
    EXPECT_TRUE(has_block(all.model.find_atom("B")->find_transition("t2")->func, "A2_1", MarkerRole::After));
}

std::int64_t y_after_f(const CompositeComponent& woven) {
    BipSystem sys(woven);
    auto q = sys.step(sys.initial(), "c0");
    q = sys.step(q, "c1");
    return sys.value(q, "B", "y");
}

// t1 copies x into y, so y records the value of x seen by the original update.
TEST(Interference, BeforeAdviceArrangementDecidesValue) {
    auto c = testing::load_model("interference.bip");
    auto as = local_aspects(testing::load_aspects("interference.abip", c));
    ASSERT_EQ(as.size(), 2u);
    const auto& a = as[0];  // x := 3
    const auto& a2 = as[1];  // x := 2

    // Weaving a2 then a yields F_b . F'_b . F at t1.
    auto w1 = weave_serial_local(c, {a2, a});
    const auto& f1 = w1.model.find_atom("B")->find_transition("t1")->func;
    EXPECT_TRUE(starts_with(f1, a.before_block()));
    EXPECT_EQ(y_after_f(w1.model), 2);

    auto w2 = weave_serial_local(c, {a, a2});
    const auto& f2 = w2.model.find_atom("B")->find_transition("t1")->func;
    EXPECT_TRUE(starts_with(f2, a2.before_block()));
    EXPECT_EQ(y_after_f(w2.model), 3);
}

TEST(Composition, DisjointAspectsGiveSameModelUnderBothStrategies) {
    auto c = testing::load_model("weave_procedures.bip");
    LocalAspect a;
    a.id = "X_1";
    a.instance = "B";
    a.pointcut = write_var("y");
    a.after = assign("y", int_lit(0));
    LocalAspect b;
    b.id = "X_2";
    b.instance = "B";
    b.pointcut = port_execute("p3");
    b.before = assign("x", int_lit(0));
    EXPECT_EQ(weave_serial_local(c, {a, b}).model, weave_all(c, {a, b}).model);
}

TEST(Composition, ProjectMatchFailsOutsideDomain) {
    std::map<std::string, std::vector<std::string>> g{{"t0", {"t0", "t0__nb"}}};
    EXPECT_EQ(project_match({"t0"}, {&g}), (std::set<std::string>{"t0", "t0__nb"}));
    EXPECT_THROW(project_match({"t9"}, {&g}), WeaveError);
}

TEST(Composition, NetworkCoverage) {
    auto c = testing::load_model("network.bip");
    std::vector<AspectFile> files;
    std::vector<std::pair<std::string, std::set<std::string>>> concerns;
    for (const auto* name : {"logging", "auth", "congestion", "fault"}) {
        files.push_back(testing::load_aspects(std::string(name) + ".abip", c));
        concerns.emplace_back(name, aspect_ids(files.back()));
    }
    auto w = weave_files(c, files, Strategy::Serial);
    auto cov = coverage(c, w, concerns);
    ASSERT_EQ(cov.rows.size(), 4u);
    EXPECT_EQ(cov.rows[0].transitions, 10u);
    EXPECT_EQ(cov.rows[0].interactions, 0u);
    EXPECT_EQ(cov.rows[1].transitions, 2u);
    EXPECT_EQ(cov.rows[1].interactions, 1u);
    EXPECT_EQ(cov.rows[2].transitions, 5u);
    EXPECT_EQ(cov.rows[2].interactions, 0u);
    EXPECT_EQ(cov.rows[3].transitions, 0u);
    EXPECT_EQ(cov.rows[3].interactions, 3u);
    EXPECT_FALSE(has_errors(validate(w.model, ValidateOptions{true})));
}

TEST(Composition, NetworkStrategiesAgreeOnCoverage) {
    auto c = testing::load_model("network.bip");
    std::vector<AspectFile> files;
    std::vector<std::pair<std::string, std::set<std::string>>> concerns;
    for (const auto* name : {"logging", "auth", "congestion", "fault"}) {
        files.push_back(testing::load_aspects(std::string(name) + ".abip", c));
        concerns.emplace_back(name, aspect_ids(files.back()));
    }
    auto s = coverage(c, weave_files(c, files, Strategy::Serial), concerns);
    auto a = coverage(c, weave_files(c, files, Strategy::All), concerns);
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
        EXPECT_EQ(s.rows[k].transitions, a.rows[k].transitions);
        EXPECT_EQ(s.rows[k].interactions, a.rows[k].interactions);
    }
}

TEST(Composition, LastResetWins) {
    auto c = testing::load_model("weave_procedures.bip");
    LocalAspect a;
    a.id = "R_1";
    a.instance = "B";
    a.pointcut = port_execute("p2");
    a.resets = {ResetPair{"l0", bool_lit(true)}};
    LocalAspect b = a;
    b.id = "R_2";
    b.resets = {ResetPair{"l2", bool_lit(true)}};
    auto w = weave_serial_local(c, {a, b});
    BipSystem sys(w.model);
    auto q = sys.step(sys.initial(), "c2");
    EXPECT_EQ(sys.location_name(0, q.locals[0].location), "l1");
    // Both resets are armed; the later aspect's ip interaction dominates the earlier one.
    auto en = sys.enabled_interactions(q);
    ASSERT_EQ(en.size(), 1u);
    EXPECT_EQ(sys.interaction_name(en[0]), b.ip_interaction());
    q = sys.step(q, b.ip_interaction());
    EXPECT_EQ(sys.location_name(0, q.locals[0].location), "l2");
}

// weave_all matches on the original and moves the match through the first weave map.
TEST(CompositionProperty, AllTransportsOriginalMatch) {
    testing::Rng rng(53);
    for (int i = 0; i < 300; ++i) {
        auto c = testing::random_model(rng);
        auto a = testing::random_local_aspect(rng, c, "P_" + std::to_string(i), false);
        auto b = testing::random_local_aspect(rng, c, "Q_" + std::to_string(i), false);
        if (b.instance != a.instance) continue;
        a.resets.clear();
        b.resets.clear();
        b.intertype = a.intertype;
        auto s = weave_serial_local(c, {a, b});
        auto l = weave_all(c, {a, b});
        EXPECT_FALSE(has_errors(validate(s.model, ValidateOptions{true})));
        EXPECT_FALSE(has_errors(validate(l.model, ValidateOptions{true})));
        EXPECT_EQ(s.reports[0].matched, l.reports[0].matched);
        std::set<std::string> image;
        for (const auto& id : select_local(*c.find_atom(a.instance), b.pointcut))
            for (const auto& img : l.reports[0].g.at(id)) image.insert(img);
        EXPECT_EQ(l.reports[1].matched, image);
    }
}

}  // namespace
}  // namespace aopbip

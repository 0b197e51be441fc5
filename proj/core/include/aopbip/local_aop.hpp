#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aopbip/dynamics.hpp"
#include "aopbip/global_aop.hpp"
#include "aopbip/model.hpp"

namespace aopbip {

enum class LpcKind { AtLocation, ReadVarGuard, ReadVarFunc, Write, PortEnabled, PortExecute, And };

struct Lpc {
    LpcKind kind = LpcKind::AtLocation;
    std::string arg;            // location, variable or port name; empty for And
    std::vector<Lpc> operands;  // exactly two for And

    friend bool operator==(const Lpc&, const Lpc&) = default;
};

Lpc at_location(std::string l);
Lpc read_var_guard(std::string x);
Lpc read_var_func(std::string x);
Lpc write_var(std::string x);
Lpc port_enabled(std::string p);
Lpc port_execute(std::string p);
Lpc lpc_and(Lpc a, Lpc b);
// Left-nested conjunction; `parts` must be non-empty.
Lpc lpc_and_all(const std::vector<Lpc>& parts);

std::vector<Lpc> conjuncts(const Lpc& lpc);
bool has_port_enabled(const Lpc& lpc);
std::string to_string(const Lpc& lpc);

// Names in the pointcut that do not exist in `b`.
std::vector<std::string> unresolved_names(const AtomicComponent& b, const Lpc& lpc);

std::set<std::string> var_guard(const Transition& t);

bool match_local(const AtomicComponent& b, const LocalEvent& e, const Lpc& lpc);

// Syntactic neighborhoods over transition ids.
std::set<std::string> origin(const AtomicComponent& b, const std::set<std::string>& m);
std::set<std::string> dest(const AtomicComponent& b, const std::set<std::string>& m);
std::set<std::string> siblings(const AtomicComponent& b, const std::set<std::string>& m);
std::set<std::string> predecessors(const AtomicComponent& b, const std::set<std::string>& m);

std::set<std::string> select_local(const AtomicComponent& b, const Lpc& lpc);
Lpc simplify_lpc(const Lpc& lpc);
std::set<std::string> selected_ports(const Lpc& lpc);

enum class EditPoint { PE = 0, CB = 1, CE = 2, RUN = 3 };

struct EditFrame {
    EditPoint start = EditPoint::PE;
    EditPoint end = EditPoint::CB;

    friend bool operator==(const EditFrame&, const EditFrame&) = default;
};

const char* to_string(EditPoint p);
std::string to_string(const EditFrame& f);
EditFrame edit_frame(const Lpc& lpc);
bool is_canonical(const EditFrame& f);
// False iff the frame is <CB,CE> or <RUN,CE>.
bool early(const Lpc& lpc);

Expr mk_guard(const std::set<std::string>& sp, const std::string& location, const AtomicComponent& b,
              const std::set<std::string>& m);

struct ResetPair {
    std::string location;
    Expr guard = bool_lit(true);
};

// The inter-type variables are shared by the aspects of one container and live in the target component.
struct LocalAspect {
    std::string id;
    std::string instance;
    std::vector<Variable> intertype;
    Lpc pointcut;
    UpdateFunction before;
    UpdateFunction after;
    std::vector<ResetPair> resets;

    std::string flag() const { return "b_aop_" + id; }
    std::string ip_port() const { return "ip_" + id; }
    std::string ip_interaction() const { return "aip_" + id; }
    std::string temp_location(const std::string& l) const { return l + "__bot_" + id; }
    UpdateFunction before_block() const { return wrap(before, id, MarkerRole::Before); }
    UpdateFunction after_block() const { return wrap(after, id, MarkerRole::After); }
    UpdateFunction set_block() const;
    UpdateFunction clear_block() const;
};

std::vector<Transition> weave_reset(const LocalAspect& aspect, const std::set<std::string>& anchors);

struct WeaveReport {
    std::string aspect;
    std::string instance;
    EditFrame frame;
    std::set<std::string> matched;
    // Original transition id -> ids of its images in the woven component.
    std::map<std::string, std::vector<std::string>> g;
    std::set<std::string> modified;
    std::set<std::string> temp_locations;
    std::set<std::string> reset_anchors;
    std::vector<std::string> added_transitions;
    std::vector<Diagnostic> warnings;
};

std::string format_report(const WeaveReport& r);

// The frame transformation alone; `m` is a set of transition ids of `b`.
AtomicComponent weave_frame(const AtomicComponent& b, const std::set<std::string>& m, const LocalAspect& aspect,
                            WeaveReport& report);

struct LocalWeave {
    CompositeComponent model;
    WeaveReport report;
};

LocalWeave weave_local(const CompositeComponent& c, const std::set<std::string>& m, const LocalAspect& aspect);
// Matches with select_local on the target component, then weaves.
LocalWeave weave_local(const CompositeComponent& c, const LocalAspect& aspect);

// `original` is the target component before the weave.
std::optional<LocalEvent> rem_local(const LocalEvent& e, const AtomicComponent& original, const LocalAspect& aspect);

}  // namespace aopbip

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aopbip/model.hpp"

namespace aopbip {

// Runtime state of one instance; `values` follows the declaration order of the component's variables.
struct LocalState {
    std::uint32_t location = 0;
    std::vector<std::int64_t> values;

    friend bool operator==(const LocalState&, const LocalState&) = default;
    friend auto operator<=>(const LocalState&, const LocalState&) = default;
};

struct GlobalState {
    std::vector<LocalState> locals;

    friend bool operator==(const GlobalState&, const GlobalState&) = default;
    friend auto operator<=>(const GlobalState&, const GlobalState&) = default;
};

struct GlobalStateHash {
    std::size_t operator()(const GlobalState& q) const noexcept;
};

// One execution choice: an interaction and, per port of it (in port order), the transition index taken.
struct GlobalStep {
    std::size_t interaction = 0;
    std::vector<std::size_t> transitions;

    friend bool operator==(const GlobalStep&, const GlobalStep&) = default;
    friend auto operator<=>(const GlobalStep&, const GlobalStep&) = default;
};

// Named view of a local state, independent of any compiled layout.
struct LocalSnapshot {
    std::string location;
    std::map<std::string, std::int64_t> valuation;

    friend bool operator==(const LocalSnapshot&, const LocalSnapshot&) = default;
};

struct LocalEvent {
    LocalSnapshot q;
    Transition tau;
    LocalSnapshot q_next;

    const std::string& l() const { return q.location; }
    const std::string& l_next() const { return q_next.location; }
    const std::map<std::string, std::int64_t>& v() const { return q.valuation; }
    const std::map<std::string, std::int64_t>& v_next() const { return q_next.valuation; }
};

bool operator==(const LocalEvent& a, const LocalEvent& b);

struct GlobalEvent {
    GlobalState pre;
    GlobalStep step;
    GlobalState post;
};

class BipSystem {
public:
    // Throws ModelError when the model does not validate.
    explicit BipSystem(CompositeComponent model, ValidateOptions opts = {true});
    ~BipSystem();
    BipSystem(const BipSystem&);
    BipSystem& operator=(const BipSystem&);
    BipSystem(BipSystem&&) noexcept;
    BipSystem& operator=(BipSystem&&) noexcept;

    const CompositeComponent& model() const { return model_; }
    GlobalState initial() const;

    std::size_t instance_index(const std::string& name) const;
    std::optional<std::size_t> interaction_index(const std::string& name) const;
    const std::string& location_name(std::size_t inst, std::uint32_t loc) const;
    std::int64_t value(const GlobalState& q, const std::string& inst, const std::string& var) const;

    std::vector<std::size_t> enabled_transitions(std::size_t inst, const LocalState& s) const;
    std::vector<std::size_t> enabled_interactions(const GlobalState& q, bool apply_priorities = true) const;
    std::vector<GlobalStep> enabled_steps(const GlobalState& q) const;

    // Executes a step; when `check` is set, throws std::invalid_argument if it is not enabled at q.
    GlobalState apply(const GlobalState& q, const GlobalStep& s, bool check = true) const;
    // Executes an interaction whose participants have exactly one enabled transition each.
    GlobalState step(const GlobalState& q, const std::string& interaction) const;

    std::string format(const GlobalState& q) const;
    std::string format_local(std::size_t inst, const LocalState& s) const;
    LocalSnapshot snapshot(std::size_t inst, const LocalState& s) const;
    const std::string& interaction_name(std::size_t i) const { return model_.interactions.at(i).name; }

    struct Compiled;

private:
    CompositeComponent model_;
    std::unique_ptr<Compiled> c_;
};

struct BipTrace {
    std::vector<GlobalState> states;
    std::vector<GlobalStep> steps;
    bool deadlock = false;
    std::optional<std::string> error;
};

BipTrace run(const BipSystem& sys, std::size_t max_steps, std::uint64_t seed);
// Re-executes explicit steps from q0; throws if a step is not enabled.
BipTrace replay(const BipSystem& sys, const std::vector<GlobalStep>& steps);

std::vector<std::string> global_trace(const BipSystem& sys, const BipTrace& rho);
std::vector<GlobalEvent> events_of(const BipTrace& rho);

std::optional<LocalEvent> map_event(const BipSystem& sys, const GlobalEvent& e, const std::string& instance);
std::vector<LocalEvent> map_trace(const BipSystem& sys, const std::vector<GlobalEvent>& es, const std::string& instance);

struct ExploreOptions {
    std::size_t depth = 12;
    std::size_t state_budget = 200000;
};

struct Exploration {
    std::vector<GlobalEvent> events;
    std::map<std::string, std::vector<LocalEvent>> local_events;
    std::vector<GlobalState> deadlocks;
    std::size_t states = 0;
    bool truncated = false;
};

Exploration explore(const BipSystem& sys, const ExploreOptions& opts = {});

std::string format_event(const BipSystem& sys, const GlobalEvent& e);
std::string format_local_event(const LocalEvent& e);
// One line per step, `q_i | interaction | q_{i+1}`; comment lines start with '#'.
std::string dump_trace(const BipSystem& sys, const BipTrace& rho);

}  // namespace aopbip

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aopbip/expr.hpp"

namespace aopbip {

struct Variable {
    std::string name;
    Type type = Type::Int;
    std::int64_t init = 0;

    friend bool operator==(const Variable&, const Variable&) = default;
};

struct Port {
    std::string name;
    std::vector<std::string> vars;

    friend bool operator==(const Port&, const Port&) = default;
};

struct Transition {
    std::string id;
    std::string src;
    std::string port;
    Expr guard = bool_lit(true);
    UpdateFunction func;
    std::string dest;
};

bool operator==(const Transition& a, const Transition& b);

struct AtomicComponent {
    std::string name;  // instance name; one instance per type
    std::vector<Port> ports;
    std::vector<std::string> locations;
    std::string initial;
    std::vector<Variable> vars;
    std::vector<Transition> transitions;

    const Port* find_port(const std::string& n) const;
    const Variable* find_var(const std::string& n) const;
    const Transition* find_transition(const std::string& id) const;
    bool has_location(const std::string& l) const;

    friend bool operator==(const AtomicComponent&, const AtomicComponent&) = default;
};

struct PortRef {
    std::string instance;
    std::string port;

    std::string str() const { return instance + "." + port; }
    friend auto operator<=>(const PortRef&, const PortRef&) = default;
};

struct Interaction {
    std::string name;
    std::vector<PortRef> ports;
    Expr guard = bool_lit(true);
    UpdateFunction func;

    bool has_port(const PortRef& p) const;
    bool involves(const std::string& instance) const;
};

bool operator==(const Interaction& a, const Interaction& b);

// `high` dominates `low`.
struct Priority {
    std::string low;
    std::string high;

    friend auto operator<=>(const Priority&, const Priority&) = default;
};

struct CompositeComponent {
    std::string name;
    std::string header;
    std::vector<AtomicComponent> atoms;
    std::vector<Interaction> interactions;
    std::vector<Priority> priorities;

    const AtomicComponent* find_atom(const std::string& n) const;
    AtomicComponent* find_atom(const std::string& n);
    const Interaction* find_interaction(const std::string& n) const;

    friend bool operator==(const CompositeComponent&, const CompositeComponent&) = default;
};

// Interaction-level variables are written `instance.port.var`.
std::string qualified_var(const PortRef& p, const std::string& var);

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;
    std::string message;
    std::string where;
};

std::string to_string(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& ds);

struct ValidateOptions {
    // Woven models legitimately contain reserved identifiers.
    bool allow_reserved = false;
};

bool is_reserved_name(const std::string& n);

std::vector<Diagnostic> validate(const CompositeComponent& c, const ValidateOptions& opts = {});

// Transitive closure of the priority relation as (low, high) pairs.
std::set<std::pair<std::string, std::string>> priority_closure(const std::vector<Priority>& pi);

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace aopbip

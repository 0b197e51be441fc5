#include "aopbip/model.hpp"

#include <algorithm>
#include <map>

namespace aopbip {

bool operator==(const Transition& a, const Transition& b) {
    return a.id == b.id && a.src == b.src && a.port == b.port && same(a.guard, b.guard) && a.func == b.func &&
           a.dest == b.dest;
}

bool operator==(const Interaction& a, const Interaction& b) {
    return a.name == b.name && a.ports == b.ports && same(a.guard, b.guard) && a.func == b.func;
}

const Port* AtomicComponent::find_port(const std::string& n) const {
    for (const auto& p : ports)
        if (p.name == n) return &p;
    return nullptr;
}

const Variable* AtomicComponent::find_var(const std::string& n) const {
    for (const auto& v : vars)
        if (v.name == n) return &v;
    return nullptr;
}

const Transition* AtomicComponent::find_transition(const std::string& id) const {
    for (const auto& t : transitions)
        if (t.id == id) return &t;
    return nullptr;
}

bool AtomicComponent::has_location(const std::string& l) const {
    return std::find(locations.begin(), locations.end(), l) != locations.end();
}

bool Interaction::has_port(const PortRef& p) const { return std::find(ports.begin(), ports.end(), p) != ports.end(); }

bool Interaction::involves(const std::string& instance) const {
    return std::any_of(ports.begin(), ports.end(), [&](const PortRef& p) { return p.instance == instance; });
}

const AtomicComponent* CompositeComponent::find_atom(const std::string& n) const {
    for (const auto& a : atoms)
        if (a.name == n) return &a;
    return nullptr;
}

AtomicComponent* CompositeComponent::find_atom(const std::string& n) {
    for (auto& a : atoms)
        if (a.name == n) return &a;
    return nullptr;
}

const Interaction* CompositeComponent::find_interaction(const std::string& n) const {
    for (const auto& i : interactions)
        if (i.name == n) return &i;
    return nullptr;
}

std::string qualified_var(const PortRef& p, const std::string& v) { return p.instance + "." + p.port + "." + v; }

std::string to_string(const Diagnostic& d) {
    std::string s = d.severity == Severity::Error ? "error" : "warning";
    s += "[" + d.code + "]";
    if (!d.where.empty()) s += " " + d.where;
    return s + ": " + d.message;
}

bool has_errors(const std::vector<Diagnostic>& ds) {
    return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

bool is_reserved_name(const std::string& n) {
    auto starts = [&](const char* p) { return n.rfind(p, 0) == 0; };
    return starts("b_aop") || starts("ip") || starts("__marker") || n.find("__bot") != std::string::npos;
}

std::set<std::pair<std::string, std::string>> priority_closure(const std::vector<Priority>& pi) {
    std::set<std::pair<std::string, std::string>> closure;
    for (const auto& p : pi) closure.insert({p.low, p.high});
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::pair<std::string, std::string>> add;
        for (const auto& [a, b] : closure)
            for (const auto& [c, d] : closure)
                if (b == c && !closure.count({a, d})) add.push_back({a, d});
        for (auto& x : add) changed |= closure.insert(x).second;
    }
    return closure;
}

namespace {

class Validator {
public:
    Validator(const CompositeComponent& c, const ValidateOptions& o) : c_(c), opts_(o) {}

    std::vector<Diagnostic> run() {
        std::set<std::string> instances;
        for (const auto& a : c_.atoms) {
            if (!instances.insert(a.name).second) error("duplicate-instance", "duplicate instance '" + a.name + "'", a.name);
            reserved(a.name, a.name);
            atom(a);
        }
        std::set<std::string> names;
        for (const auto& i : c_.interactions) {
            if (!names.insert(i.name).second)
                error("duplicate-interaction", "duplicate interaction '" + i.name + "'", i.name);
            interaction(i);
        }
        priorities(names);
        return std::move(out_);
    }

private:
    void error(std::string code, std::string msg, std::string where) {
        out_.push_back({Severity::Error, std::move(code), std::move(msg), std::move(where)});
    }

    void reserved(const std::string& name, const std::string& where) {
        if (!opts_.allow_reserved && is_reserved_name(name))
            error("reserved-name", "identifier '" + name + "' is reserved for woven code", where);
    }

    void expr(const Expr& e, const TypeEnv& env, std::optional<Type> want, const std::string& what,
              const std::string& where) {
        auto t = type_of(e, env);
        if (auto* err = std::get_if<TypeError>(&t)) {
            error("type", what + ": " + err->message, where);
            return;
        }
        if (want && std::get<Type>(t) != *want)
            error("type", what + " must be " + type_name(*want), where);
        if (has_literal_zero_division(e)) error("zero-division", what + " divides by literal 0", where);
    }

    void func(const UpdateFunction& f, const TypeEnv& env, const std::string& where) {
        for (const auto& s : f.stmts) {
            const auto* a = std::get_if<Assign>(&s);
            if (!a) continue;
            auto target = env(a->target);
            if (!target) {
                error("unknown-variable", "assignment to unknown variable '" + a->target + "'", where);
                continue;
            }
            expr(a->value, env, *target, "right-hand side of '" + a->target + "'", where);
        }
    }

    void atom(const AtomicComponent& a) {
        std::map<std::string, Type> vars;
        for (const auto& v : a.vars) {
            if (!vars.emplace(v.name, v.type).second)
                error("duplicate-variable", "duplicate variable '" + v.name + "'", a.name);
            reserved(v.name, a.name);
            if (v.type == Type::Bool && v.init != 0 && v.init != 1)
                error("type", "bool variable '" + v.name + "' has non-boolean initial value", a.name);
        }
        std::set<std::string> ports;
        for (const auto& p : a.ports) {
            if (!ports.insert(p.name).second) error("duplicate-port", "duplicate port '" + p.name + "'", a.name);
            reserved(p.name, a.name);
            for (const auto& v : p.vars)
                if (!vars.count(v))
                    error("unknown-variable", "port '" + p.name + "' attaches unknown variable '" + v + "'", a.name);
        }
        std::set<std::string> locs;
        for (const auto& l : a.locations) {
            if (!locs.insert(l).second) error("duplicate-location", "duplicate location '" + l + "'", a.name);
            reserved(l, a.name);
        }
        if (a.locations.empty()) error("no-location", "component has no location", a.name);
        if (!locs.count(a.initial)) error("bad-initial", "initial location '" + a.initial + "' is not declared", a.name);
        TypeEnv env = [&](const std::string& n) -> std::optional<Type> {
            auto it = vars.find(n);
            if (it == vars.end()) return std::nullopt;
            return it->second;
        };
        std::set<std::string> ids;
        for (const auto& t : a.transitions) {
            std::string where = a.name + "." + t.id;
            if (!ids.insert(t.id).second) error("duplicate-transition", "duplicate transition id '" + t.id + "'", where);
            if (!locs.count(t.src)) error("bad-location", "source location '" + t.src + "' is not declared", where);
            if (!locs.count(t.dest)) error("bad-location", "destination location '" + t.dest + "' is not declared", where);
            if (!ports.count(t.port)) error("unknown-port", "port '" + t.port + "' is not declared", where);
            expr(t.guard, env, Type::Bool, "guard", where);
            func(t.func, env, where);
        }
    }

    void interaction(const Interaction& i) {
        std::set<std::string> seen;
        std::map<std::string, Type> vars;
        for (const auto& p : i.ports) {
            if (!seen.insert(p.instance).second)
                error("multi-port", "more than one port of instance '" + p.instance + "'", i.name);
            const AtomicComponent* a = c_.find_atom(p.instance);
            if (!a) {
                error("unknown-port", "unknown instance in port '" + p.str() + "'", i.name);
                continue;
            }
            const Port* port = a->find_port(p.port);
            if (!port) {
                error("unknown-port", "unknown port '" + p.str() + "'", i.name);
                continue;
            }
            for (const auto& v : port->vars)
                if (const Variable* var = a->find_var(v)) vars.emplace(qualified_var(p, v), var->type);
        }
        if (i.ports.empty()) error("empty-interaction", "interaction has no ports", i.name);
        TypeEnv env = [&](const std::string& n) -> std::optional<Type> {
            auto it = vars.find(n);
            if (it == vars.end()) return std::nullopt;
            return it->second;
        };
        expr(i.guard, env, Type::Bool, "guard", i.name);
        func(i.func, env, i.name);
    }

    void priorities(const std::set<std::string>& names) {
        for (const auto& p : c_.priorities) {
            std::string where = p.low + " < " + p.high;
            if (!names.count(p.low)) error("unknown-interaction", "unknown interaction '" + p.low + "'", where);
            if (!names.count(p.high)) error("unknown-interaction", "unknown interaction '" + p.high + "'", where);
            if (p.low == p.high) error("priority-cycle", "priority pair is reflexive", where);
        }
        for (const auto& [lo, hi] : priority_closure(c_.priorities))
            if (lo == hi && !std::any_of(c_.priorities.begin(), c_.priorities.end(),
                                         [&](const Priority& p) { return p.low == lo && p.high == lo; })) {
                error("priority-cycle", "priority relation is cyclic through '" + lo + "'", lo);
                break;
            }
    }

    const CompositeComponent& c_;
    const ValidateOptions& opts_;
    std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate(const CompositeComponent& c, const ValidateOptions& opts) {
    return Validator(c, opts).run();
}

}  // namespace aopbip

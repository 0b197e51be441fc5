#include "aopbip/global_aop.hpp"

#include <algorithm>

namespace aopbip {

UpdateFunction GlobalAspect::before_block() const { return wrap(advice.before, id, MarkerRole::Before); }
UpdateFunction GlobalAspect::after_block() const { return wrap(advice.after, id, MarkerRole::After); }

bool match_global(const Interaction& a, const GlobalPointcut& gpc) {
    for (const auto& p : gpc.ports)
        if (!a.has_port(p)) return false;
    auto reads = var_read(a.func);
    for (const auto& v : gpc.reads)
        if (!reads.count(v)) return false;
    auto writes = var_write(a.func);
    for (const auto& v : gpc.writes)
        if (!writes.count(v)) return false;
    return true;
}

std::vector<std::string> select_global(const CompositeComponent& c, const GlobalPointcut& gpc) {
    std::vector<std::string> out;
    for (const auto& a : c.interactions)
        if (match_global(a, gpc)) out.push_back(a.name);
    return out;
}

AtomicComponent make_intertype(const std::string& instance, const std::vector<Variable>& vars) {
    AtomicComponent b;
    b.name = instance;
    b.vars = vars;
    Port p{"pV", {}};
    for (const auto& v : vars) p.vars.push_back(v.name);
    b.ports.push_back(std::move(p));
    b.locations = {"l0"};
    b.initial = "l0";
    b.transitions.push_back(Transition{"tV", "l0", "pV", bool_lit(true), {}, "l0"});
    return b;
}

std::set<std::string> advice_scope(const CompositeComponent& c, const GlobalAspect& aspect) {
    std::set<std::string> scope;
    for (const auto& v : aspect.intertype) scope.insert(qualified_var(aspect.intertype_port(), v.name));
    for (const auto& p : aspect.pointcut.ports) {
        const AtomicComponent* a = c.find_atom(p.instance);
        const Port* port = a ? a->find_port(p.port) : nullptr;
        if (!port) continue;
        for (const auto& v : port->vars) scope.insert(qualified_var(p, v));
    }
    return scope;
}

std::set<std::string> advice_escapes(const CompositeComponent& c, const GlobalAspect& aspect) {
    auto scope = advice_scope(c, aspect);
    std::set<std::string> used;
    for (const auto* f : {&aspect.advice.before, &aspect.advice.after}) {
        auto r = var_read(*f);
        auto w = var_write(*f);
        used.insert(r.begin(), r.end());
        used.insert(w.begin(), w.end());
    }
    std::set<std::string> out;
    for (const auto& v : used)
        if (!scope.count(v)) out.insert(v);
    return out;
}

CompositeComponent weave_global(const CompositeComponent& c, const std::set<std::string>& selected,
                                const GlobalAspect& aspect) {
    for (const auto& name : selected)
        if (!c.find_interaction(name)) throw WeaveError("aspect " + aspect.id + ": interaction '" + name + "' is not in the model");
    auto escapes = advice_escapes(c, aspect);
    if (!escapes.empty())
        throw WeaveError("aspect " + aspect.id + ": advice uses variable '" + *escapes.begin() +
                         "' outside the pointcut ports and inter-type variables");
    CompositeComponent out = c;
    AtomicComponent bv = make_intertype(aspect.intertype_instance, aspect.intertype);
    if (const AtomicComponent* existing = out.find_atom(bv.name)) {
        if (!(*existing == bv))
            throw WeaveError("aspect " + aspect.id + ": instance '" + bv.name + "' already exists with a different shape");
    } else {
        out.atoms.push_back(std::move(bv));
    }
    PortRef pv = aspect.intertype_port();
    auto before = aspect.before_block();
    auto after = aspect.after_block();
    for (auto& a : out.interactions) {
        if (!selected.count(a.name)) continue;
        if (!a.has_port(pv)) a.ports.push_back(pv);
        a.func = concat({before, a.func, after});
    }
    // Interactions keep their names, so the priority pairs carry over unchanged.
    return out;
}

std::optional<Interaction> rem_global(const Interaction& a, const GlobalAspect& aspect) {
    auto before = aspect.before_block();
    auto after = aspect.after_block();
    if (a.func.size() < before.size() + after.size() || !starts_with(a.func, before) || !ends_with(a.func, after))
        return std::nullopt;
    Interaction out = a;
    out.func.stmts.assign(a.func.stmts.begin() + static_cast<std::ptrdiff_t>(before.size()),
                          a.func.stmts.end() - static_cast<std::ptrdiff_t>(after.size()));
    PortRef pv = aspect.intertype_port();
    out.ports.erase(std::remove(out.ports.begin(), out.ports.end(), pv), out.ports.end());
    return out;
}

}  // namespace aopbip

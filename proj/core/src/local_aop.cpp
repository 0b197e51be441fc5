#include "aopbip/local_aop.hpp"

#include <algorithm>
#include <sstream>

namespace aopbip {

namespace {

Lpc leaf(LpcKind k, std::string arg) { return Lpc{k, std::move(arg), {}}; }

void collect_conjuncts(const Lpc& lpc, std::vector<Lpc>& out) {
    if (lpc.kind == LpcKind::And) {
        for (const auto& op : lpc.operands) collect_conjuncts(op, out);
    } else {
        out.push_back(lpc);
    }
}

const char* kind_keyword(LpcKind k) {
    switch (k) {
        case LpcKind::AtLocation: return "atLocation";
        case LpcKind::ReadVarGuard: return "readVarGuard";
        case LpcKind::ReadVarFunc: return "readVarFunc";
        case LpcKind::Write: return "write";
        case LpcKind::PortEnabled: return "portEnabled";
        case LpcKind::PortExecute: return "portExecute";
        case LpcKind::And: return "and";
    }
    return "?";
}

std::set<std::string> intersect(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

std::set<std::string> filter(const AtomicComponent& b, const std::function<bool(const Transition&)>& pred) {
    std::set<std::string> out;
    for (const auto& t : b.transitions)
        if (pred(t)) out.insert(t.id);
    return out;
}

EditPoint max_point(EditPoint a, EditPoint b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

std::string join(const std::set<std::string>& xs) {
    std::string out;
    for (const auto& x : xs) {
        if (!out.empty()) out += ' ';
        out += x;
    }
    return out.empty() ? "-" : out;
}

}  // namespace

Lpc at_location(std::string l) { return leaf(LpcKind::AtLocation, std::move(l)); }
Lpc read_var_guard(std::string x) { return leaf(LpcKind::ReadVarGuard, std::move(x)); }
Lpc read_var_func(std::string x) { return leaf(LpcKind::ReadVarFunc, std::move(x)); }
Lpc write_var(std::string x) { return leaf(LpcKind::Write, std::move(x)); }
Lpc port_enabled(std::string p) { return leaf(LpcKind::PortEnabled, std::move(p)); }
Lpc port_execute(std::string p) { return leaf(LpcKind::PortExecute, std::move(p)); }
Lpc lpc_and(Lpc a, Lpc b) { return Lpc{LpcKind::And, {}, {std::move(a), std::move(b)}}; }

Lpc lpc_and_all(const std::vector<Lpc>& parts) {
    if (parts.empty()) throw std::invalid_argument("empty pointcut conjunction");
    Lpc acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = lpc_and(acc, parts[i]);
    return acc;
}

std::vector<Lpc> conjuncts(const Lpc& lpc) {
    std::vector<Lpc> out;
    collect_conjuncts(lpc, out);
    return out;
}

bool has_port_enabled(const Lpc& lpc) {
    for (const auto& c : conjuncts(lpc))
        if (c.kind == LpcKind::PortEnabled) return true;
    return false;
}

std::string to_string(const Lpc& lpc) {
    if (lpc.kind != LpcKind::And) return std::string(kind_keyword(lpc.kind)) + "(" + lpc.arg + ")";
    const Lpc& rhs = lpc.operands[1];
    std::string r = to_string(rhs);
    if (rhs.kind == LpcKind::And) r = "(" + r + ")";
    return to_string(lpc.operands[0]) + " and " + r;
}

std::vector<std::string> unresolved_names(const AtomicComponent& b, const Lpc& lpc) {
    std::vector<std::string> out;
    for (const auto& c : conjuncts(lpc)) {
        bool ok = true;
        switch (c.kind) {
            case LpcKind::AtLocation: ok = b.has_location(c.arg); break;
            case LpcKind::ReadVarGuard:
            case LpcKind::ReadVarFunc:
            case LpcKind::Write: ok = b.find_var(c.arg) != nullptr; break;
            case LpcKind::PortEnabled:
            case LpcKind::PortExecute: ok = b.find_port(c.arg) != nullptr; break;
            case LpcKind::And: break;
        }
        if (!ok) out.push_back(to_string(c));
    }
    return out;
}

std::set<std::string> var_guard(const Transition& t) { return var_read(t.guard); }

bool match_local(const AtomicComponent& b, const LocalEvent& e, const Lpc& lpc) {
    switch (lpc.kind) {
        case LpcKind::And:
            return match_local(b, e, lpc.operands[0]) && match_local(b, e, lpc.operands[1]);
        case LpcKind::AtLocation:
            return e.l() == lpc.arg;
        case LpcKind::ReadVarGuard:
            return std::any_of(b.transitions.begin(), b.transitions.end(), [&](const Transition& t) {
                return t.src == e.l() && var_guard(t).count(lpc.arg) > 0;
            });
        case LpcKind::ReadVarFunc:
            return var_read(e.tau.func).count(lpc.arg) > 0;
        case LpcKind::Write:
            return var_write(e.tau.func).count(lpc.arg) > 0;
        case LpcKind::PortEnabled: {
            Lookup lookup = [&](const std::string& n) -> std::int64_t {
                auto it = e.v().find(n);
                if (it == e.v().end()) throw EvalError("unbound variable '" + n + "'");
                return it->second;
            };
            return std::any_of(b.transitions.begin(), b.transitions.end(), [&](const Transition& t) {
                return t.src == e.l() && t.port == lpc.arg && evaluate(t.guard, lookup) != 0;
            });
        }
        case LpcKind::PortExecute:
            return e.tau.port == lpc.arg;
    }
    return false;
}

std::set<std::string> origin(const AtomicComponent& b, const std::set<std::string>& m) {
    std::set<std::string> out;
    for (const auto& t : b.transitions)
        if (m.count(t.id)) out.insert(t.src);
    return out;
}

std::set<std::string> dest(const AtomicComponent& b, const std::set<std::string>& m) {
    std::set<std::string> out;
    for (const auto& t : b.transitions)
        if (m.count(t.id)) out.insert(t.dest);
    return out;
}

std::set<std::string> siblings(const AtomicComponent& b, const std::set<std::string>& m) {
    auto o = origin(b, m);
    return filter(b, [&](const Transition& t) { return o.count(t.src) > 0; });
}

std::set<std::string> predecessors(const AtomicComponent& b, const std::set<std::string>& m) {
    auto o = origin(b, m);
    return filter(b, [&](const Transition& t) { return o.count(t.dest) > 0; });
}

std::set<std::string> select_local(const AtomicComponent& b, const Lpc& lpc) {
    const std::string& x = lpc.arg;
    switch (lpc.kind) {
        case LpcKind::And:
            return intersect(select_local(b, lpc.operands[0]), select_local(b, lpc.operands[1]));
        case LpcKind::AtLocation:
            return filter(b, [&](const Transition& t) { return t.src == x; });
        case LpcKind::ReadVarGuard:
            return siblings(b, filter(b, [&](const Transition& t) { return var_guard(t).count(x) > 0; }));
        case LpcKind::ReadVarFunc:
            return filter(b, [&](const Transition& t) { return var_read(t.func).count(x) > 0; });
        case LpcKind::Write:
            return filter(b, [&](const Transition& t) { return var_write(t.func).count(x) > 0; });
        case LpcKind::PortEnabled:
            return siblings(b, filter(b, [&](const Transition& t) { return t.port == x; }));
        case LpcKind::PortExecute:
            return filter(b, [&](const Transition& t) { return t.port == x; });
    }
    return {};
}

Lpc simplify_lpc(const Lpc& lpc) {
    auto parts = conjuncts(lpc);
    std::set<std::string> executed;
    for (const auto& c : parts)
        if (c.kind == LpcKind::PortExecute) executed.insert(c.arg);
    std::vector<Lpc> kept;
    for (const auto& c : parts)
        if (!(c.kind == LpcKind::PortEnabled && executed.count(c.arg))) kept.push_back(c);
    if (kept.size() == parts.size()) return lpc;
    return lpc_and_all(kept);
}

std::set<std::string> selected_ports(const Lpc& lpc) {
    std::set<std::string> out;
    for (const auto& c : conjuncts(lpc))
        if (c.kind == LpcKind::PortEnabled) out.insert(c.arg);
    return out;
}

const char* to_string(EditPoint p) {
    switch (p) {
        case EditPoint::PE: return "PE";
        case EditPoint::CB: return "CB";
        case EditPoint::CE: return "CE";
        case EditPoint::RUN: return "RUN";
    }
    return "?";
}

std::string to_string(const EditFrame& f) {
    return std::string("<") + to_string(f.start) + "," + to_string(f.end) + ">";
}

EditFrame edit_frame(const Lpc& lpc) {
    switch (lpc.kind) {
        case LpcKind::AtLocation:
        case LpcKind::ReadVarGuard: return {EditPoint::PE, EditPoint::CB};
        case LpcKind::ReadVarFunc:
        case LpcKind::Write:
        case LpcKind::PortExecute: return {EditPoint::CB, EditPoint::CE};
        case LpcKind::PortEnabled: return {EditPoint::RUN, EditPoint::CB};
        case LpcKind::And: {
            auto a = edit_frame(lpc.operands[0]);
            auto b = edit_frame(lpc.operands[1]);
            return {max_point(a.start, b.start), max_point(a.end, b.end)};
        }
    }
    return {};
}

bool is_canonical(const EditFrame& f) {
    return f == EditFrame{EditPoint::PE, EditPoint::CB} || f == EditFrame{EditPoint::CB, EditPoint::CE} ||
           f == EditFrame{EditPoint::RUN, EditPoint::CB} || f == EditFrame{EditPoint::RUN, EditPoint::CE};
}

bool early(const Lpc& lpc) {
    auto f = edit_frame(lpc);
    return !(f == EditFrame{EditPoint::CB, EditPoint::CE} || f == EditFrame{EditPoint::RUN, EditPoint::CE});
}

Expr mk_guard(const std::set<std::string>& sp, const std::string& location, const AtomicComponent& b,
              const std::set<std::string>& m) {
    std::vector<Expr> per_port;
    for (const auto& p : sp) {
        std::vector<Expr> guards;
        for (const auto& t : b.transitions)
            if (m.count(t.id) && t.src == location && t.port == p) guards.push_back(t.guard);
        per_port.push_back(disj_all(guards));
    }
    return conj_all(per_port);
}

UpdateFunction LocalAspect::set_block() const { return wrap(assign(flag(), bool_lit(true)), id, MarkerRole::Set); }
UpdateFunction LocalAspect::clear_block() const { return wrap(assign(flag(), bool_lit(false)), id, MarkerRole::Clear); }

std::vector<Transition> weave_reset(const LocalAspect& aspect, const std::set<std::string>& anchors) {
    std::vector<Transition> out;
    for (std::size_t j = 0; j < aspect.resets.size(); ++j) {
        const auto& r = aspect.resets[j];
        for (const auto& l : anchors) {
            out.push_back(Transition{"reset_" + aspect.id + "_" + std::to_string(j) + "_" + l, l, aspect.ip_port(),
                                     conj(var(aspect.flag()), r.guard), aspect.clear_block(), r.location});
        }
    }
    return out;
}

std::string format_report(const WeaveReport& r) {
    std::ostringstream os;
    os << "aspect " << r.aspect << " local " << r.instance << " frame " << to_string(r.frame) << "\n";
    os << "  matched: " << join(r.matched) << "\n";
    os << "  modified: " << join(r.modified) << "\n";
    os << "  temp-locations: " << join(r.temp_locations) << "\n";
    os << "  reset-anchors: " << join(r.reset_anchors) << "\n";
    std::set<std::string> added(r.added_transitions.begin(), r.added_transitions.end());
    os << "  added-transitions: " << join(added) << "\n";
    for (const auto& [id, images] : r.g) {
        if (images.size() == 1 && images.front() == id && !r.modified.count(id)) continue;
        os << "  g(" << id << ") =";
        for (const auto& i : images) os << ' ' << i;
        os << "\n";
    }
    return os.str();
}

AtomicComponent weave_frame(const AtomicComponent& b, const std::set<std::string>& m, const LocalAspect& aspect,
                            WeaveReport& report) {
    EditFrame frame = edit_frame(aspect.pointcut);
    if (!is_canonical(frame)) throw WeaveError("aspect " + aspect.id + ": non-canonical edit frame " + to_string(frame));
    for (const auto& id : m)
        if (!b.find_transition(id))
            throw WeaveError("aspect " + aspect.id + ": transition '" + id + "' is not in " + b.name);

    report.aspect = aspect.id;
    report.instance = b.name;
    report.frame = frame;
    report.matched = m;

    const auto fb = aspect.before_block();
    const auto fa = aspect.after_block();
    const auto fset = aspect.set_block();
    const auto fclear = aspect.clear_block();
    const Expr flag = var(aspect.flag());
    const auto org = origin(b, m);
    const auto dst = dest(b, m);
    const auto getp = predecessors(b, m);

    AtomicComponent out = b;
    out.transitions.clear();
    auto emit = [&](const Transition& orig, Transition t) {
        report.g[orig.id].push_back(t.id);
        if (!(t == orig)) report.modified.insert(orig.id);
        out.transitions.push_back(std::move(t));
    };
    auto add_temp = [&](const std::string& l) {
        std::string name = aspect.temp_location(l);
        if (b.has_location(name)) throw WeaveError("aspect " + aspect.id + ": location '" + name + "' already exists");
        out.locations.push_back(name);
        report.temp_locations.insert(name);
        return name;
    };
    // Reset transitions anchored at a temporary location take precedence over the ones leaving it.
    auto not_resetting = [&]() {
        std::vector<Expr> gs;
        for (const auto& r : aspect.resets) gs.push_back(lnot(conj(flag, r.guard)));
        return gs;
    };
    auto added = [&](Transition t) {
        report.added_transitions.push_back(t.id);
        out.transitions.push_back(std::move(t));
    };

    std::set<std::string> anchors;
    std::set<std::string> into_match;  // origin locations whose reset arrivals need instrumentation

    if (frame == EditFrame{EditPoint::CB, EditPoint::CE}) {
        for (const auto& t : b.transitions) {
            Transition n = t;
            if (m.count(t.id))
                n.func = concat({fb, t.func, fset, fa});
            else if (getp.count(t.id))
                n.func = concat(t.func, fclear);
            emit(t, std::move(n));
        }
        anchors = dst;
    } else if (frame == EditFrame{EditPoint::PE, EditPoint::CB}) {
        std::set<std::string> loops = intersect(m, getp);
        std::set<std::string> loop_dests = dest(b, loops);
        for (const auto& d : loop_dests) add_temp(d);
        for (const auto& t : b.transitions) {
            Transition n = t;
            bool in_m = m.count(t.id) > 0;
            bool in_p = getp.count(t.id) > 0;
            if (in_p && !in_m) {
                n.func = concat({t.func, fclear, fb});
            } else if (in_m && in_p) {
                n.func = concat({fa, fset, t.func});
                n.dest = aspect.temp_location(t.dest);
            } else if (in_m) {
                n.func = concat({fa, fset, t.func});
            }
            emit(t, std::move(n));
        }
        for (const auto& d : loop_dests) {
            auto gs = not_resetting();
            added(Transition{aspect.temp_location(d) + "__br", aspect.temp_location(d), aspect.ip_port(), conj_all(gs),
                             concat(fclear, fb), d});
        }
        for (const auto& d : dst)
            if (!loop_dests.count(d)) anchors.insert(d);
        for (const auto& d : loop_dests) anchors.insert(aspect.temp_location(d));
        into_match = org;
    } else {
        const bool cb = frame.end == EditPoint::CB;
        const auto sp = selected_ports(aspect.pointcut);
        const auto sib = siblings(b, m);
        for (const auto& l : org) add_temp(l);
        auto redirect = [&](const std::string& d) { return org.count(d) ? aspect.temp_location(d) : d; };
        for (const auto& t : b.transitions) {
            if (m.count(t.id)) {
                Transition yes = t;
                yes.guard = conj(flag, t.guard);
                yes.func = cb ? concat(fa, t.func) : concat({fb, t.func, fa});
                yes.dest = redirect(t.dest);
                Transition no = t;
                no.id = t.id + "__nb_" + aspect.id;
                no.guard = conj(lnot(flag), t.guard);
                no.dest = redirect(t.dest);
                emit(t, std::move(yes));
                emit(t, std::move(no));
            } else {
                Transition n = t;
                n.dest = redirect(t.dest);
                emit(t, std::move(n));
            }
        }
        for (const auto& l : org) {
            Expr g = mk_guard(sp, l, b, sib);
            std::string tmp = aspect.temp_location(l);
            auto on = not_resetting();
            on.insert(on.begin(), g);
            auto off = not_resetting();
            off.insert(off.begin(), lnot(g));
            added(Transition{tmp + "__set", tmp, aspect.ip_port(), conj_all(on), cb ? concat(fset, fb) : fset, l});
            added(Transition{tmp + "__clr", tmp, aspect.ip_port(), conj_all(off), fclear, l});
        }
        for (const auto& d : dst)
            if (!org.count(d)) anchors.insert(d);
        for (const auto& l : org) anchors.insert(aspect.temp_location(l));
        if (org.count(out.initial)) out.initial = aspect.temp_location(out.initial);
        into_match = org;
    }

    report.reset_anchors = anchors;
    for (auto t : weave_reset(aspect, anchors)) {
        if (into_match.count(t.dest)) {
            if (frame.start == EditPoint::RUN)
                t.dest = aspect.temp_location(t.dest);
            else
                t.func = concat(t.func, fb);
        }
        added(std::move(t));
    }
    return out;
}

namespace {

AtomicComponent& target_of(CompositeComponent& c, const LocalAspect& aspect) {
    AtomicComponent* b = c.find_atom(aspect.instance);
    if (!b) throw WeaveError("aspect " + aspect.id + ": no component instance '" + aspect.instance + "'");
    return *b;
}

void check_scope(const AtomicComponent& b, const LocalAspect& aspect) {
    std::set<std::string> used;
    for (const auto* f : {&aspect.before, &aspect.after}) {
        auto r = var_read(*f);
        auto w = var_write(*f);
        used.insert(r.begin(), r.end());
        used.insert(w.begin(), w.end());
    }
    for (const auto& r : aspect.resets) {
        auto g = var_read(r.guard);
        used.insert(g.begin(), g.end());
        if (!b.has_location(r.location))
            throw WeaveError("aspect " + aspect.id + ": reset location '" + r.location + "' is not in " + b.name);
    }
    for (const auto& v : used) {
        bool ok = b.find_var(v) != nullptr;
        for (const auto& iv : aspect.intertype) ok = ok || iv.name == v;
        if (!ok || v == aspect.flag())
            throw WeaveError("aspect " + aspect.id + ": advice uses variable '" + v + "' outside " + b.name +
                             " and the inter-type variables");
    }
}

}  // namespace

LocalWeave weave_local(const CompositeComponent& c, const std::set<std::string>& m, const LocalAspect& aspect) {
    LocalWeave result;
    CompositeComponent out = c;
    AtomicComponent& b = target_of(out, aspect);
    auto unresolved = unresolved_names(b, aspect.pointcut);
    if (!unresolved.empty())
        throw WeaveError("aspect " + aspect.id + ": pointcut term " + unresolved.front() + " does not resolve in " + b.name);
    check_scope(b, aspect);
    if (b.find_var(aspect.flag()) || b.find_port(aspect.ip_port()) || c.find_interaction(aspect.ip_interaction()))
        throw WeaveError("aspect " + aspect.id + ": reserved names are already used in " + b.name);

    AtomicComponent woven = weave_frame(b, m, aspect, result.report);
    for (const auto& v : aspect.intertype) {
        if (const Variable* existing = woven.find_var(v.name)) {
            if (!(*existing == v))
                throw WeaveError("aspect " + aspect.id + ": inter-type variable '" + v.name + "' clashes with " + b.name);
            continue;
        }
        woven.vars.push_back(v);
    }
    woven.vars.push_back(Variable{aspect.flag(), Type::Bool, 0});
    woven.ports.push_back(Port{aspect.ip_port(), {}});
    b = std::move(woven);

    Interaction aip;
    aip.name = aspect.ip_interaction();
    aip.ports = {PortRef{aspect.instance, aspect.ip_port()}};
    for (const auto& a : c.interactions) out.priorities.push_back(Priority{a.name, aip.name});
    out.interactions.push_back(std::move(aip));
    result.model = std::move(out);
    return result;
}

LocalWeave weave_local(const CompositeComponent& c, const LocalAspect& aspect) {
    const AtomicComponent* b = c.find_atom(aspect.instance);
    if (!b) throw WeaveError("aspect " + aspect.id + ": no component instance '" + aspect.instance + "'");
    return weave_local(c, select_local(*b, aspect.pointcut), aspect);
}

std::optional<LocalEvent> rem_local(const LocalEvent& e, const AtomicComponent& original, const LocalAspect& aspect) {
    if (!original.has_location(e.l())) return std::nullopt;
    auto keep = [&](const LocalSnapshot& s) {
        LocalSnapshot out{s.location, {}};
        for (const auto& [name, value] : s.valuation)
            if (original.find_var(name) && name != aspect.flag()) out.valuation.emplace(name, value);
        return out;
    };
    LocalEvent out{keep(e.q), e.tau, keep(e.q_next)};
    const Expr& g = e.tau.guard;
    if (const auto* bin = std::get_if<Binary>(&g->node); bin && bin->op == BinaryOp::And) {
        auto reads = var_read(bin->lhs);
        if (reads.size() == 1 && *reads.begin() == aspect.flag()) out.tau.guard = bin->rhs;
    }
    out.tau.func = strip_blocks(e.tau.func, aspect.id,
                                {MarkerRole::Before, MarkerRole::After, MarkerRole::Set, MarkerRole::Clear});
    return out;
}

}  // namespace aopbip

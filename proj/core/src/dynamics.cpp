#include "aopbip/dynamics.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace aopbip {

std::size_t GlobalStateHash::operator()(const GlobalState& q) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    auto mix = [&](std::uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (const auto& l : q.locals) {
        mix(l.location);
        for (auto v : l.values) mix(static_cast<std::uint64_t>(v));
    }
    return h;
}

bool operator==(const LocalEvent& a, const LocalEvent& b) {
    return a.q == b.q && a.tau == b.tau && a.q_next == b.q_next;
}

namespace {

// Expression compiled against a slot layout: variables become (instance, slot) pairs.
struct CExpr {
    enum class Kind { Lit, Var, Un, Bin, Ite, Fn } kind = Kind::Lit;
    std::int64_t value = 0;
    std::uint32_t inst = 0;
    std::uint32_t slot = 0;
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    std::string fn;
    std::vector<CExpr> kids;
};

struct CAssign {
    std::uint32_t inst = 0;
    std::uint32_t slot = 0;
    CExpr value;
};

struct Slot {
    std::uint32_t inst;
    std::uint32_t slot;
};

using Resolver = std::function<Slot(const std::string&)>;

CExpr compile(const Expr& e, const Resolver& resolve) {
    CExpr out;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Literal>) {
                out.kind = CExpr::Kind::Lit;
                out.value = x.value;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                out.kind = CExpr::Kind::Var;
                Slot s = resolve(x.name);
                out.inst = s.inst;
                out.slot = s.slot;
            } else if constexpr (std::is_same_v<T, Unary>) {
                out.kind = CExpr::Kind::Un;
                out.uop = x.op;
                out.kids.push_back(compile(x.operand, resolve));
            } else if constexpr (std::is_same_v<T, Binary>) {
                out.kind = CExpr::Kind::Bin;
                out.bop = x.op;
                out.kids.push_back(compile(x.lhs, resolve));
                out.kids.push_back(compile(x.rhs, resolve));
            } else {
                out.kind = x.fn == "ite" ? CExpr::Kind::Ite : CExpr::Kind::Fn;
                out.fn = x.fn;
                for (const auto& a : x.args) out.kids.push_back(compile(a, resolve));
            }
        },
        e->node);
    return out;
}

std::vector<CAssign> compile(const UpdateFunction& f, const Resolver& resolve) {
    std::vector<CAssign> out;
    for (const auto& s : f.stmts) {
        if (const auto* a = std::get_if<Assign>(&s)) {
            Slot t = resolve(a->target);
            out.push_back({t.inst, t.slot, compile(a->value, resolve)});
        }
    }
    return out;
}

std::int64_t eval(const CExpr& e, const std::vector<LocalState>& q) {
    switch (e.kind) {
        case CExpr::Kind::Lit: return e.value;
        case CExpr::Kind::Var: return q[e.inst].values[e.slot];
        case CExpr::Kind::Un: return apply_unary(e.uop, eval(e.kids[0], q));
        case CExpr::Kind::Bin: {
            std::int64_t l = eval(e.kids[0], q);
            if (e.bop == BinaryOp::And && l == 0) return 0;
            if (e.bop == BinaryOp::Or && l != 0) return 1;
            return apply_binary(e.bop, l, eval(e.kids[1], q));
        }
        case CExpr::Kind::Ite: return eval(e.kids[0], q) ? eval(e.kids[1], q) : eval(e.kids[2], q);
        case CExpr::Kind::Fn: {
            std::vector<std::int64_t> args;
            args.reserve(e.kids.size());
            for (const auto& k : e.kids) args.push_back(eval(k, q));
            return apply_builtin(e.fn, args);
        }
    }
    return 0;
}

void exec(const std::vector<CAssign>& f, std::vector<LocalState>& q) {
    for (const auto& a : f) q[a.inst].values[a.slot] = eval(a.value, q);
}

}  // namespace

struct BipSystem::Compiled {
    struct CTransition {
        std::uint32_t src = 0;
        std::uint32_t dest = 0;
        std::uint32_t port = 0;
        CExpr guard;
        std::vector<CAssign> func;
    };
    struct CAtom {
        std::map<std::string, std::uint32_t> loc_index;
        std::map<std::string, std::uint32_t> var_index;
        std::map<std::string, std::uint32_t> port_index;
        std::vector<CTransition> transitions;
        std::vector<std::vector<std::size_t>> by_src;
    };
    struct CInteraction {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> ports;  // (instance, port)
        CExpr guard;
        std::vector<CAssign> func;
        std::vector<std::size_t> dominated_by;
    };
    std::vector<CAtom> atoms;
    std::map<std::string, std::uint32_t> inst_index;
    std::map<std::string, std::size_t> inter_index;
    std::vector<CInteraction> inters;
    GlobalState q0;
};

BipSystem::BipSystem(CompositeComponent model, ValidateOptions opts) : model_(std::move(model)) {
    auto diags = validate(model_, opts);
    if (has_errors(diags)) {
        std::string msg = "invalid model";
        for (const auto& d : diags)
            if (d.severity == Severity::Error) msg += "\n  " + to_string(d);
        throw ModelError(msg);
    }
    c_ = std::make_unique<Compiled>();
    auto& c = *c_;
    for (std::uint32_t i = 0; i < model_.atoms.size(); ++i) {
        const auto& a = model_.atoms[i];
        c.inst_index[a.name] = i;
        Compiled::CAtom ca;
        for (std::uint32_t k = 0; k < a.locations.size(); ++k) ca.loc_index[a.locations[k]] = k;
        for (std::uint32_t k = 0; k < a.vars.size(); ++k) ca.var_index[a.vars[k].name] = k;
        for (std::uint32_t k = 0; k < a.ports.size(); ++k) ca.port_index[a.ports[k].name] = k;
        ca.by_src.resize(a.locations.size());
        Resolver local = [&, i](const std::string& n) { return Slot{i, ca.var_index.at(n)}; };
        for (std::size_t k = 0; k < a.transitions.size(); ++k) {
            const auto& t = a.transitions[k];
            Compiled::CTransition ct;
            ct.src = ca.loc_index.at(t.src);
            ct.dest = ca.loc_index.at(t.dest);
            ct.port = ca.port_index.at(t.port);
            ct.guard = compile(t.guard, local);
            ct.func = compile(t.func, local);
            ca.by_src[ct.src].push_back(k);
            ca.transitions.push_back(std::move(ct));
        }
        LocalState s;
        s.location = ca.loc_index.at(a.initial);
        for (const auto& v : a.vars) s.values.push_back(v.init);
        c.q0.locals.push_back(std::move(s));
        c.atoms.push_back(std::move(ca));
    }
    for (std::size_t i = 0; i < model_.interactions.size(); ++i) {
        const auto& in = model_.interactions[i];
        c.inter_index[in.name] = i;
        Compiled::CInteraction ci;
        std::map<std::string, Slot> names;
        for (const auto& p : in.ports) {
            std::uint32_t inst = c.inst_index.at(p.instance);
            const auto& ca = c.atoms[inst];
            ci.ports.push_back({inst, ca.port_index.at(p.port)});
            for (const auto& v : model_.atoms[inst].find_port(p.port)->vars)
                names[qualified_var(p, v)] = Slot{inst, ca.var_index.at(v)};
        }
        Resolver resolve = [&](const std::string& n) { return names.at(n); };
        ci.guard = compile(in.guard, resolve);
        ci.func = compile(in.func, resolve);
        c.inters.push_back(std::move(ci));
    }
    for (const auto& [lo, hi] : priority_closure(model_.priorities)) {
        auto l = c.inter_index.find(lo);
        auto h = c.inter_index.find(hi);
        if (l != c.inter_index.end() && h != c.inter_index.end()) c.inters[l->second].dominated_by.push_back(h->second);
    }
}

BipSystem::~BipSystem() = default;
BipSystem::BipSystem(const BipSystem& o) : model_(o.model_), c_(std::make_unique<Compiled>(*o.c_)) {}
BipSystem& BipSystem::operator=(const BipSystem& o) {
    if (this != &o) {
        model_ = o.model_;
        c_ = std::make_unique<Compiled>(*o.c_);
    }
    return *this;
}
BipSystem::BipSystem(BipSystem&&) noexcept = default;
BipSystem& BipSystem::operator=(BipSystem&&) noexcept = default;

GlobalState BipSystem::initial() const { return c_->q0; }

std::size_t BipSystem::instance_index(const std::string& name) const {
    auto it = c_->inst_index.find(name);
    if (it == c_->inst_index.end()) throw std::invalid_argument("unknown instance '" + name + "'");
    return it->second;
}

std::optional<std::size_t> BipSystem::interaction_index(const std::string& name) const {
    auto it = c_->inter_index.find(name);
    if (it == c_->inter_index.end()) return std::nullopt;
    return it->second;
}

const std::string& BipSystem::location_name(std::size_t inst, std::uint32_t loc) const {
    return model_.atoms.at(inst).locations.at(loc);
}

std::int64_t BipSystem::value(const GlobalState& q, const std::string& inst, const std::string& var) const {
    std::size_t i = instance_index(inst);
    auto it = c_->atoms[i].var_index.find(var);
    if (it == c_->atoms[i].var_index.end()) throw std::invalid_argument("unknown variable '" + inst + "." + var + "'");
    return q.locals[i].values[it->second];
}

namespace {

template <class W, class F>
auto with_context(W&& what, F&& f) {
    try {
        return f();
    } catch (const EvalError& e) {
        throw EvalError(what() + ": " + e.what());
    }
}

}  // namespace

std::vector<std::size_t> BipSystem::enabled_transitions(std::size_t inst, const LocalState& s) const {
    const auto& ca = c_->atoms.at(inst);
    std::vector<LocalState> ctx;
    std::vector<std::size_t> out;
    for (std::size_t k : ca.by_src.at(s.location)) {
        const auto& t = ca.transitions[k];
        // Guards of a component only read that component's slots.
        std::int64_t ok = with_context([&] { return "guard of " + model_.atoms[inst].name + "." + model_.atoms[inst].transitions[k].id; },
                                       [&] {
                                           if (ctx.empty()) {
                                               ctx.resize(inst + 1);
                                               ctx[inst] = s;
                                           }
                                           return eval(t.guard, ctx);
                                       });
        if (ok) out.push_back(k);
    }
    return out;
}

namespace {

struct Candidate {
    std::size_t interaction;
    std::vector<std::vector<std::size_t>> choices;
};

}  // namespace

static std::vector<Candidate> candidates(const BipSystem::Compiled& c, const CompositeComponent& m,
                                         const GlobalState& q, bool apply_priorities);

std::vector<std::size_t> BipSystem::enabled_interactions(const GlobalState& q, bool apply_priorities) const {
    std::vector<std::size_t> out;
    for (const auto& cand : candidates(*c_, model_, q, apply_priorities)) out.push_back(cand.interaction);
    return out;
}

static std::vector<Candidate> candidates(const BipSystem::Compiled& c, const CompositeComponent& m,
                                         const GlobalState& q, bool apply_priorities) {
    std::vector<Candidate> pre;
    // Enabled transitions per (instance, port) at q, computed lazily.
    std::vector<std::vector<std::vector<std::size_t>>> enabled(c.atoms.size());
    std::vector<bool> done(c.atoms.size(), false);
    auto enabled_on = [&](std::uint32_t inst, std::uint32_t port) -> const std::vector<std::size_t>& {
        if (!done[inst]) {
            const auto& ca = c.atoms[inst];
            enabled[inst].assign(ca.port_index.size(), {});
            for (std::size_t k : ca.by_src[q.locals[inst].location]) {
                const auto& t = ca.transitions[k];
                std::int64_t ok = with_context([&] { return "guard of " + m.atoms[inst].name + "." + m.atoms[inst].transitions[k].id; },
                                               [&] { return eval(t.guard, q.locals); });
                if (ok) enabled[inst][t.port].push_back(k);
            }
            done[inst] = true;
        }
        return enabled[inst][port];
    };
    for (std::size_t i = 0; i < c.inters.size(); ++i) {
        const auto& ci = c.inters[i];
        Candidate cand{i, {}};
        bool ok = true;
        for (const auto& [inst, port] : ci.ports) {
            const auto& ts = enabled_on(inst, port);
            if (ts.empty()) {
                ok = false;
                break;
            }
            cand.choices.push_back(ts);
        }
        if (!ok) continue;
        if (!with_context([&] { return "guard of interaction " + m.interactions[i].name; }, [&] { return eval(ci.guard, q.locals); }))
            continue;
        pre.push_back(std::move(cand));
    }
    if (!apply_priorities) return pre;
    std::vector<bool> present(c.inters.size(), false);
    for (const auto& cand : pre) present[cand.interaction] = true;
    std::vector<Candidate> out;
    for (auto& cand : pre) {
        const auto& dom = c.inters[cand.interaction].dominated_by;
        if (std::none_of(dom.begin(), dom.end(), [&](std::size_t h) { return present[h]; }))
            out.push_back(std::move(cand));
    }
    return out;
}

std::vector<GlobalStep> BipSystem::enabled_steps(const GlobalState& q) const {
    std::vector<GlobalStep> out;
    for (const auto& cand : candidates(*c_, model_, q, true)) {
        std::vector<std::size_t> idx(cand.choices.size(), 0);
        while (true) {
            GlobalStep s{cand.interaction, {}};
            for (std::size_t k = 0; k < idx.size(); ++k) s.transitions.push_back(cand.choices[k][idx[k]]);
            out.push_back(std::move(s));
            std::size_t k = 0;
            for (; k < idx.size(); ++k) {
                if (++idx[k] < cand.choices[k].size()) break;
                idx[k] = 0;
            }
            if (k == idx.size()) break;
        }
    }
    return out;
}

GlobalState BipSystem::apply(const GlobalState& q, const GlobalStep& s, bool check) const {
    auto steps = check ? enabled_steps(q) : std::vector<GlobalStep>{s};
    if (std::find(steps.begin(), steps.end(), s) == steps.end())
        throw std::invalid_argument("step on interaction '" +
                                    (s.interaction < model_.interactions.size() ? interaction_name(s.interaction)
                                                                                : std::string("?")) +
                                    "' is not enabled");
    const auto& ci = c_->inters[s.interaction];
    GlobalState out = q;
    with_context([&] { return "interaction " + interaction_name(s.interaction); }, [&] {
        exec(ci.func, out.locals);
        return 0;
    });
    for (std::size_t k = 0; k < ci.ports.size(); ++k) {
        std::uint32_t inst = ci.ports[k].first;
        const auto& t = c_->atoms[inst].transitions[s.transitions[k]];
        with_context([&] { return "transition " + model_.atoms[inst].name + "." + model_.atoms[inst].transitions[s.transitions[k]].id; },
                     [&] {
                         exec(t.func, out.locals);
                         return 0;
                     });
        out.locals[inst].location = t.dest;
    }
    return out;
}

GlobalState BipSystem::step(const GlobalState& q, const std::string& interaction) const {
    auto idx = interaction_index(interaction);
    if (!idx) throw std::invalid_argument("unknown interaction '" + interaction + "'");
    std::vector<GlobalStep> matching;
    for (auto& s : enabled_steps(q))
        if (s.interaction == *idx) matching.push_back(std::move(s));
    if (matching.empty()) throw std::invalid_argument("interaction '" + interaction + "' is not enabled");
    if (matching.size() > 1)
        throw std::invalid_argument("interaction '" + interaction + "' has a nondeterministic transition choice");
    return apply(q, matching.front());
}

LocalSnapshot BipSystem::snapshot(std::size_t inst, const LocalState& s) const {
    const auto& a = model_.atoms.at(inst);
    LocalSnapshot out;
    out.location = a.locations.at(s.location);
    for (std::size_t k = 0; k < a.vars.size(); ++k) out.valuation[a.vars[k].name] = s.values[k];
    return out;
}

std::string BipSystem::format_local(std::size_t inst, const LocalState& s) const {
    const auto& a = model_.atoms.at(inst);
    std::string out = a.name + "@" + a.locations.at(s.location) + "{";
    for (std::size_t k = 0; k < a.vars.size(); ++k) {
        if (k) out += ",";
        out += a.vars[k].name + "=" + format_value(a.vars[k].type, s.values[k]);
    }
    return out + "}";
}

std::string BipSystem::format(const GlobalState& q) const {
    std::string out;
    for (std::size_t i = 0; i < q.locals.size(); ++i) {
        if (i) out += " ";
        out += format_local(i, q.locals[i]);
    }
    return out;
}

BipTrace run(const BipSystem& sys, std::size_t max_steps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BipTrace rho;
    rho.states.push_back(sys.initial());
    try {
        while (rho.steps.size() < max_steps) {
            auto steps = sys.enabled_steps(rho.states.back());
            if (steps.empty()) {
                rho.deadlock = true;
                break;
            }
            std::uniform_int_distribution<std::size_t> pick(0, steps.size() - 1);
            const GlobalStep& s = steps[pick(rng)];
            GlobalState next = sys.apply(rho.states.back(), s, false);
            rho.steps.push_back(s);
            rho.states.push_back(std::move(next));
        }
        if (!rho.deadlock && rho.steps.size() == max_steps && sys.enabled_steps(rho.states.back()).empty())
            rho.deadlock = true;
    } catch (const EvalError& e) {
        rho.error = e.what();
    }
    return rho;
}

BipTrace replay(const BipSystem& sys, const std::vector<GlobalStep>& steps) {
    BipTrace rho;
    rho.states.push_back(sys.initial());
    for (const auto& s : steps) {
        rho.states.push_back(sys.apply(rho.states.back(), s));
        rho.steps.push_back(s);
    }
    rho.deadlock = sys.enabled_steps(rho.states.back()).empty();
    return rho;
}

std::vector<std::string> global_trace(const BipSystem& sys, const BipTrace& rho) {
    std::vector<std::string> out;
    for (const auto& s : rho.steps) out.push_back(sys.interaction_name(s.interaction));
    return out;
}

std::vector<GlobalEvent> events_of(const BipTrace& rho) {
    std::vector<GlobalEvent> out;
    for (std::size_t i = 0; i < rho.steps.size(); ++i) out.push_back({rho.states[i], rho.steps[i], rho.states[i + 1]});
    return out;
}

std::optional<LocalEvent> map_event(const BipSystem& sys, const GlobalEvent& e, const std::string& instance) {
    std::size_t inst = sys.instance_index(instance);
    const auto& in = sys.model().interactions.at(e.step.interaction);
    for (std::size_t k = 0; k < in.ports.size(); ++k) {
        if (in.ports[k].instance != instance) continue;
        LocalEvent out;
        out.q = sys.snapshot(inst, e.pre.locals[inst]);
        out.tau = sys.model().atoms[inst].transitions.at(e.step.transitions[k]);
        out.q_next = sys.snapshot(inst, e.post.locals[inst]);
        return out;
    }
    return std::nullopt;
}

std::vector<LocalEvent> map_trace(const BipSystem& sys, const std::vector<GlobalEvent>& es, const std::string& instance) {
    std::vector<LocalEvent> out;
    for (const auto& e : es)
        if (auto le = map_event(sys, e, instance)) out.push_back(std::move(*le));
    return out;
}

Exploration explore(const BipSystem& sys, const ExploreOptions& opts) {
    Exploration out;
    std::unordered_set<GlobalState, GlobalStateHash> seen;
    std::deque<std::pair<GlobalState, std::size_t>> frontier;
    GlobalState q0 = sys.initial();
    seen.insert(q0);
    frontier.push_back({q0, 0});
    std::vector<std::set<std::string>> local_seen(sys.model().atoms.size());
    while (!frontier.empty()) {
        auto [q, d] = std::move(frontier.front());
        frontier.pop_front();
        auto steps = sys.enabled_steps(q);
        if (steps.empty()) {
            out.deadlocks.push_back(q);
            continue;
        }
        if (d >= opts.depth) continue;
        for (const auto& s : steps) {
            GlobalState next = sys.apply(q, s, false);
            GlobalEvent ev{q, s, next};
            const auto& in = sys.model().interactions[s.interaction];
            for (const auto& p : in.ports) {
                std::size_t inst = sys.instance_index(p.instance);
                auto le = map_event(sys, ev, p.instance);
                if (le && local_seen[inst].insert(format_local_event(*le)).second)
                    out.local_events[p.instance].push_back(std::move(*le));
            }
            out.events.push_back(std::move(ev));
            if (seen.count(next)) continue;
            if (seen.size() >= opts.state_budget) {
                out.truncated = true;
                continue;
            }
            seen.insert(next);
            frontier.push_back({std::move(next), d + 1});
        }
    }
    out.states = seen.size();
    return out;
}

std::string format_local_event(const LocalEvent& e) {
    auto snap = [](const LocalSnapshot& s) {
        std::string out = s.location + "{";
        bool first = true;
        for (const auto& [k, v] : s.valuation) {
            if (!first) out += ",";
            first = false;
            out += k + "=" + std::to_string(v);
        }
        return out + "}";
    };
    return snap(e.q) + " | " + e.tau.id + ":" + e.tau.port + " | " + snap(e.q_next);
}

std::string format_event(const BipSystem& sys, const GlobalEvent& e) {
    return sys.format(e.pre) + " | " + sys.interaction_name(e.step.interaction) + " | " + sys.format(e.post);
}

std::string dump_trace(const BipSystem& sys, const BipTrace& rho) {
    std::ostringstream os;
    os << "# q0 = " << sys.format(rho.states.front()) << "\n";
    for (const auto& e : events_of(rho)) os << format_event(sys, e) << "\n";
    if (rho.error) os << "# error after step " << rho.steps.size() << ": " << *rho.error << "\n";
    if (rho.deadlock) os << "# deadlock after step " << rho.steps.size() << "\n";
    return os.str();
}

}  // namespace aopbip

#include "oracle.hpp"

#include <set>
#include <stdexcept>

namespace aopbip::testing {

std::int64_t ref_eval(const Expr& e, const std::map<std::string, std::int64_t>& env) {
    if (const auto* l = std::get_if<Literal>(&e->node)) return l->value;
    if (const auto* v = std::get_if<VarRef>(&e->node)) {
        auto it = env.find(v->name);
        if (it == env.end()) throw std::out_of_range("unbound " + v->name);
        return it->second;
    }
    if (const auto* u = std::get_if<Unary>(&e->node)) {
        std::int64_t x = ref_eval(u->operand, env);
        return u->op == UnaryOp::Not ? (x == 0) : -x;
    }
    if (const auto* b = std::get_if<Binary>(&e->node)) {
        // Short-circuit is irrelevant for the generated side-effect-free expressions.
        std::int64_t x = ref_eval(b->lhs, env);
        std::int64_t y = ref_eval(b->rhs, env);
        switch (b->op) {
            case BinaryOp::Add: return x + y;
            case BinaryOp::Sub: return x - y;
            case BinaryOp::Mul: return x * y;
            case BinaryOp::Div: return x / y;
            case BinaryOp::Mod: return x % y;
            case BinaryOp::Lt: return x < y;
            case BinaryOp::Le: return x <= y;
            case BinaryOp::Gt: return x > y;
            case BinaryOp::Ge: return x >= y;
            case BinaryOp::Eq: return x == y;
            case BinaryOp::Ne: return x != y;
            case BinaryOp::And: return x != 0 && y != 0;
            case BinaryOp::Or: return x != 0 || y != 0;
        }
    }
    const auto& c = std::get<Call>(e->node);
    std::vector<std::int64_t> args;
    for (const auto& a : c.args) args.push_back(ref_eval(a, env));
    if (c.fn == "sign") return args[0] * 10 + args[0] % 10;
    if (c.fn == "check") return (args[0] / 10) % 10 == args[0] % 10;
    throw std::invalid_argument("no reference for " + c.fn);
}

void ref_exec(const UpdateFunction& f, std::map<std::string, std::int64_t>& env) {
    for (const auto& s : f.stmts)
        if (const auto* a = std::get_if<Assign>(&s)) env[a->target] = ref_eval(a->value, env);
}

RefState ref_initial(const CompositeComponent& c) {
    RefState q;
    for (const auto& b : c.atoms) {
        q.location[b.name] = b.initial;
        for (const auto& v : b.vars) q.value[b.name + "." + v.name] = v.init;
    }
    return q;
}

namespace {

std::map<std::string, std::int64_t> local_env(const AtomicComponent& b, const RefState& q) {
    std::map<std::string, std::int64_t> env;
    for (const auto& v : b.vars) env[v.name] = q.value.at(b.name + "." + v.name);
    return env;
}

std::map<std::string, std::int64_t> port_env(const CompositeComponent& c, const Interaction& in, const RefState& q) {
    std::map<std::string, std::int64_t> env;
    for (const auto& p : in.ports)
        for (const auto& v : c.find_atom(p.instance)->find_port(p.port)->vars)
            env[p.instance + "." + p.port + "." + v] = q.value.at(p.instance + "." + v);
    return env;
}

std::vector<const Transition*> enabled_on(const AtomicComponent& b, const std::string& port, const RefState& q) {
    std::vector<const Transition*> out;
    auto env = local_env(b, q);
    for (const auto& t : b.transitions)
        if (t.src == q.location.at(b.name) && t.port == port && ref_eval(t.guard, env) != 0) out.push_back(&t);
    return out;
}

}  // namespace

std::vector<RefMove> ref_moves(const CompositeComponent& c, const RefState& q) {
    std::set<std::string> enabled;
    for (const auto& in : c.interactions) {
        bool ok = true;
        for (const auto& p : in.ports) ok = ok && !enabled_on(*c.find_atom(p.instance), p.port, q).empty();
        if (ok && ref_eval(in.guard, port_env(c, in, q)) != 0) enabled.insert(in.name);
    }
    // A dominated interaction is any `low` with a chain of priorities to an enabled `high`.
    auto dominated = [&](const std::string& low) {
        std::set<std::string> seen;
        std::vector<std::string> todo{low};
        while (!todo.empty()) {
            auto cur = todo.back();
            todo.pop_back();
            for (const auto& pr : c.priorities) {
                if (pr.low != cur || !seen.insert(pr.high).second) continue;
                if (enabled.count(pr.high)) return true;
                todo.push_back(pr.high);
            }
        }
        return false;
    };
    std::vector<RefMove> out;
    for (const auto& in : c.interactions) {
        if (!enabled.count(in.name) || dominated(in.name)) continue;
        std::vector<std::vector<const Transition*>> choices;
        for (const auto& p : in.ports) choices.push_back(enabled_on(*c.find_atom(p.instance), p.port, q));
        std::vector<std::size_t> idx(choices.size(), 0);
        for (;;) {
            RefMove m;
            m.interaction = in.name;
            m.post = q;
            auto penv = port_env(c, in, q);
            ref_exec(in.func, penv);
            for (const auto& [name, val] : penv) {
                auto first = name.find('.');
                auto last = name.rfind('.');
                m.post.value[name.substr(0, first) + name.substr(last)] = val;
            }
            for (std::size_t k = 0; k < in.ports.size(); ++k) {
                const auto& b = *c.find_atom(in.ports[k].instance);
                const auto* t = choices[k][idx[k]];
                auto env = local_env(b, m.post);
                ref_exec(t->func, env);
                for (const auto& [v, val] : env) m.post.value[b.name + "." + v] = val;
                m.post.location[b.name] = t->dest;
                m.transitions.push_back(t->id);
            }
            out.push_back(std::move(m));
            std::size_t k = 0;
            for (; k < idx.size(); ++k) {
                if (++idx[k] < choices[k].size()) break;
                idx[k] = 0;
            }
            if (k == idx.size()) break;
        }
    }
    return out;
}

RefState to_ref(const BipSystem& sys, const GlobalState& q) {
    RefState r;
    const auto& m = sys.model();
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
        auto snap = sys.snapshot(i, q.locals[i]);
        r.location[m.atoms[i].name] = snap.location;
        for (const auto& [v, val] : snap.valuation) r.value[m.atoms[i].name + "." + v] = val;
    }
    return r;
}

}  // namespace aopbip::testing

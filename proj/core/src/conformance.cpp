#include "aopbip/conformance.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace aopbip {

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Pass: return "PASS";
        case Outcome::Fail: return "FAIL";
        case Outcome::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

namespace {

// Trace context carried alongside the global state for the local-apply clauses.
struct Aux {
    bool seen = false;     // a local event of the instance already occurred (i != 0)
    bool prev_fb = false;  // the previous local event ended with F_b
    bool pending = false;  // the previous local event is a matched one whose reset guards all hold

    friend bool operator==(const Aux&, const Aux&) = default;
};

struct Key {
    GlobalState q;
    Aux aux;

    friend bool operator==(const Key&, const Key&) = default;
};

struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
        std::size_t h = GlobalStateHash{}(k.q);
        std::size_t bits = (k.aux.seen ? 1u : 0u) | (k.aux.prev_fb ? 2u : 0u) | (k.aux.pending ? 4u : 0u);
        return h ^ (bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
};

// Inspects one event, updating the context for the post state; returns a violation message.
using EventCheck = std::function<std::optional<std::string>(Aux&, const GlobalEvent&)>;

struct SearchResult {
    std::optional<std::string> failure;
    std::vector<GlobalStep> path;
    std::size_t states = 0;
    std::size_t events = 0;
    bool truncated = false;
    std::size_t deadlocks = 0;
    std::vector<std::string> eval_errors;
};

SearchResult search(const BipSystem& sys, const CheckOptions& opts, const EventCheck& check) {
    struct Node {
        GlobalState q;
        Aux aux;
        std::size_t depth;
        std::size_t parent;
        GlobalStep step;
    };
    SearchResult res;
    std::vector<Node> nodes;
    std::unordered_map<Key, std::size_t, KeyHash> index;
    nodes.push_back(Node{sys.initial(), Aux{}, 0, 0, {}});
    index.emplace(Key{nodes[0].q, nodes[0].aux}, 0);

    auto path_to = [&](std::size_t i) {
        std::vector<GlobalStep> p;
        while (i != 0) {
            p.push_back(nodes[i].step);
            i = nodes[i].parent;
        }
        return std::vector<GlobalStep>(p.rbegin(), p.rend());
    };

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].depth >= opts.depth) continue;
        const GlobalState q = nodes[i].q;
        const Aux aux = nodes[i].aux;
        const std::size_t depth = nodes[i].depth;
        std::vector<GlobalStep> steps;
        try {
            steps = sys.enabled_steps(q);
        } catch (const EvalError& e) {
            res.eval_errors.push_back(e.what());
            continue;
        }
        if (steps.empty()) ++res.deadlocks;
        for (const auto& s : steps) {
            GlobalState post;
            try {
                post = sys.apply(q, s, false);
            } catch (const EvalError& e) {
                res.eval_errors.push_back(e.what());
                continue;
            }
            ++res.events;
            Aux next = aux;
            GlobalEvent ev{q, s, post};
            std::optional<std::string> failure;
            try {
                failure = check(next, ev);
            } catch (const EvalError& e) {
                res.eval_errors.push_back(e.what());
                continue;
            }
            if (failure) {
                res.failure = std::move(failure);
                res.path = path_to(i);
                res.path.push_back(s);
                res.states = nodes.size();
                return res;
            }
            Key key{std::move(post), next};
            if (index.count(key)) continue;
            if (nodes.size() >= opts.state_budget) {
                res.truncated = true;
                continue;
            }
            index.emplace(key, nodes.size());
            nodes.push_back(Node{std::move(key.q), next, depth + 1, i, s});
        }
    }
    res.states = nodes.size();
    return res;
}

std::optional<std::string> recheck(const BipSystem& sys, const std::vector<GlobalStep>& steps, const EventCheck& check) {
    BipTrace rho = replay(sys, steps);
    Aux aux;
    for (const auto& e : events_of(rho))
        if (auto failure = check(aux, e)) return failure;
    return std::nullopt;
}

Verdict finish(std::string prop, std::string aspect, const CheckOptions& opts, SearchResult&& r) {
    Verdict v;
    v.proposition = std::move(prop);
    v.aspect = std::move(aspect);
    v.events = r.events;
    v.states = r.states;
    v.depth = opts.depth;
    v.truncated = r.truncated;
    if (r.failure) {
        v.outcome = Outcome::Fail;
        v.reason = *r.failure;
        v.counterexample = std::move(r.path);
    } else if (opts.depth == 0 || r.truncated) {
        v.outcome = Outcome::Inconclusive;
    } else {
        v.outcome = Outcome::Pass;
    }
    for (const auto& e : r.eval_errors)
        v.warnings.push_back(Diagnostic{Severity::Warning, "eval-error", e, ""});
    return v;
}

const Interaction& interaction_of(const BipSystem& sys, const GlobalEvent& e) {
    return sys.model().interactions.at(e.step.interaction);
}

EventCheck global_match_check(const BipSystem& sys, const GlobalAspect& aspect) {
    auto sel = select_global(sys.model(), aspect.pointcut);
    std::set<std::string> selected(sel.begin(), sel.end());
    return [&sys, &aspect, selected](Aux&, const GlobalEvent& e) -> std::optional<std::string> {
        const auto& a = interaction_of(sys, e);
        if (match_global(a, aspect.pointcut) != (selected.count(a.name) > 0))
            return "interaction " + a.name + ": dynamic match and syntactic selection disagree";
        return std::nullopt;
    };
}

EventCheck global_apply_check(const BipSystem& original, const BipSystem& woven, const GlobalAspect& aspect) {
    return [&original, &woven, &aspect](Aux&, const GlobalEvent& e) -> std::optional<std::string> {
        const auto& a = interaction_of(woven, e);
        auto rem = rem_global(a, aspect);
        bool shaped = rem.has_value();
        bool rhs = shaped && match_global(*rem, aspect.pointcut);
        if (shaped != rhs) return "interaction " + a.name + " carries the advice but its stripped form does not match";
        const Interaction* orig = original.model().find_interaction(a.name);
        if (!orig) {
            if (shaped) return "interaction " + a.name + " carries the advice but is not part of the original model";
            return std::nullopt;
        }
        if (match_global(*orig, aspect.pointcut) && !shaped)
            return "interaction " + a.name + " matches the pointcut but does not carry the advice";
        if (shaped && !(*rem == *orig)) return "stripping the advice from " + a.name + " does not restore the original";
        return std::nullopt;
    };
}

EventCheck match_equivalence_check(const BipSystem& sys, const std::string& instance, const Lpc& lpc) {
    const AtomicComponent* b = sys.model().find_atom(instance);
    if (!b) throw std::invalid_argument("no component instance '" + instance + "'");
    auto selected = select_local(*b, lpc);
    return [&sys, b, instance, lpc, selected](Aux&, const GlobalEvent& e) -> std::optional<std::string> {
        auto le = map_event(sys, e, instance);
        if (!le) return std::nullopt;
        bool dyn = match_local(*b, *le, lpc);
        bool stat = selected.count(le->tau.id) > 0;
        if (dyn != stat)
            return "event " + format_local_event(*le) + ": dynamic match " + (dyn ? "holds" : "fails") +
                   " but transition " + le->tau.id + (stat ? " is" : " is not") + " selected";
        return std::nullopt;
    };
}

EventCheck local_apply_check(const BipSystem& original, const BipSystem& woven, const LocalAspect& aspect) {
    const AtomicComponent* b = original.model().find_atom(aspect.instance);
    if (!b) throw std::invalid_argument("no component instance '" + aspect.instance + "'");
    const bool d = early(aspect.pointcut);
    const UpdateFunction fb = aspect.before_block();
    const UpdateFunction fa = aspect.after_block();
    return [&woven, &aspect, b, d, fb, fa](Aux& aux, const GlobalEvent& ge) -> std::optional<std::string> {
        auto e = map_event(woven, ge, aspect.instance);
        if (!e) return std::nullopt;
        const auto& func = e->tau.func;
        if (aux.pending) {
            bool ok = false;
            for (const auto& r : aspect.resets)
                ok = ok || e->l_next() == r.location || e->l_next() == aspect.temp_location(r.location);
            if (!ok)
                return "event " + format_local_event(*e) + " follows a matched event whose reset guards hold, but does not reach a reset location";
        }
        auto stripped = rem_local(*e, *b, aspect);
        bool lhs = stripped && match_local(*b, *stripped, aspect.pointcut);
        bool before = d ? (!aux.seen || aux.prev_fb) : starts_with(func, fb);
        bool after = d ? starts_with(func, fa) : ends_with(func, fa);
        if (lhs != (before && after))
            return "event " + format_local_event(*e) + (lhs ? " is a joinpoint but" : " is not a joinpoint but") +
                   " before=" + (before ? "1" : "0") + " after=" + (after ? "1" : "0");
        aux.seen = true;
        aux.prev_fb = ends_with(func, fb);
        aux.pending = false;
        if (lhs && !aspect.resets.empty()) {
            Lookup lookup = [&](const std::string& n) -> std::int64_t {
                auto it = e->v_next().find(n);
                if (it == e->v_next().end()) throw EvalError("unbound variable '" + n + "' in reset guard");
                return it->second;
            };
            bool all = true;
            for (const auto& r : aspect.resets) all = all && evaluate(r.guard, lookup) != 0;
            aux.pending = all;
        }
        return std::nullopt;
    };
}

void add_deadlock_warning(Verdict& v, const BipSystem& original, const SearchResult& woven, const CheckOptions& opts) {
    if (woven.deadlocks == 0) return;
    auto ex = explore(original, ExploreOptions{opts.depth, opts.state_budget});
    if (!ex.deadlocks.empty()) return;
    v.warnings.push_back(Diagnostic{Severity::Warning, "weave-deadlock",
                                    "the woven system reaches a deadlock that the original does not", ""});
}

}  // namespace

Verdict check_global_match(const BipSystem& sys, const GlobalAspect& aspect, const CheckOptions& opts) {
    return finish("global-match", aspect.id, opts, search(sys, opts, global_match_check(sys, aspect)));
}

Verdict check_global(const BipSystem& original, const BipSystem& woven, const GlobalAspect& aspect,
                     const CheckOptions& opts) {
    auto r = search(woven, opts, global_apply_check(original, woven, aspect));
    auto v = finish("global-apply", aspect.id, opts, SearchResult(r));
    add_deadlock_warning(v, original, r, opts);
    return v;
}

Verdict check_match_equivalence(const BipSystem& sys, const std::string& instance, const Lpc& lpc,
                                const CheckOptions& opts) {
    if (has_port_enabled(lpc)) throw std::invalid_argument("match equivalence requires a pointcut without portEnabled");
    return finish("local-match", instance, opts, search(sys, opts, match_equivalence_check(sys, instance, lpc)));
}

Verdict check_local(const BipSystem& original, const BipSystem& woven, const LocalAspect& aspect,
                    const CheckOptions& opts) {
    auto r = search(woven, opts, local_apply_check(original, woven, aspect));
    auto v = finish("local-apply", aspect.id, opts, SearchResult(r));
    add_deadlock_warning(v, original, r, opts);
    return v;
}

std::optional<std::string> recheck_global(const BipSystem& original, const BipSystem& woven, const GlobalAspect& aspect,
                                          const std::vector<GlobalStep>& steps) {
    return recheck(woven, steps, global_apply_check(original, woven, aspect));
}

std::optional<std::string> recheck_local(const BipSystem& original, const BipSystem& woven, const LocalAspect& aspect,
                                         const std::vector<GlobalStep>& steps) {
    return recheck(woven, steps, local_apply_check(original, woven, aspect));
}

std::optional<std::string> recheck_match(const BipSystem& sys, const std::string& instance, const Lpc& lpc,
                                         const std::vector<GlobalStep>& steps) {
    return recheck(sys, steps, match_equivalence_check(sys, instance, lpc));
}

std::string format_verdict(const BipSystem& sys, const Verdict& v) {
    std::ostringstream os;
    os << "verdict " << v.proposition << ' ' << v.aspect << ' ' << to_string(v.outcome) << " events=" << v.events
       << " states=" << v.states << " depth=" << v.depth << " truncated=" << (v.truncated ? 1 : 0) << "\n";
    for (const auto& w : v.warnings) os << "warning " << w.code << ' ' << w.message << "\n";
    if (v.outcome == Outcome::Fail) {
        os << "# reason: " << v.reason << "\n";
        os << dump_trace(sys, replay(sys, v.counterexample));
    }
    return os.str();
}

}  // namespace aopbip

#include "aopbip/composition.hpp"

#include <algorithm>
#include <sstream>

namespace aopbip {

const std::string& container_name(const Container& c) {
    return std::visit([](const auto& x) -> const std::string& { return x.name; }, c);
}

namespace {

std::set<std::string> transition_ids(const CompositeComponent& c, const std::string& instance) {
    std::set<std::string> out;
    if (const AtomicComponent* b = c.find_atom(instance))
        for (const auto& t : b->transitions) out.insert(t.id);
    return out;
}

void append(Composition& into, Composition&& part) {
    into.model = std::move(part.model);
    for (auto& r : part.reports) into.reports.push_back(std::move(r));
    for (auto& g : part.global_aspects) into.global_aspects.push_back(std::move(g));
    for (auto& w : part.warnings) into.warnings.push_back(std::move(w));
}

}  // namespace

Composition weave_serial_local(const CompositeComponent& c, const std::vector<LocalAspect>& aspects) {
    Composition out;
    out.model = c;
    for (std::size_t i = 0; i < aspects.size(); ++i) {
        const auto& a = aspects[i];
        const AtomicComponent* b = out.model.find_atom(a.instance);
        if (!b) throw WeaveError("aspect " + a.id + " (#" + std::to_string(i + 1) + "): no component instance '" + a.instance + "'");
        auto m = select_local(*b, a.pointcut);
        auto before = transition_ids(c, a.instance);
        std::vector<std::string> created;
        for (const auto& id : m)
            if (!before.count(id)) created.push_back(id);
        if (!created.empty()) {
            std::string list;
            for (const auto& id : created) list += (list.empty() ? "" : ", ") + id;
            out.warnings.push_back(Diagnostic{Severity::Warning, "interference",
                                              "pointcut of " + a.id + " selects transitions created by earlier weaves: " + list,
                                              a.instance});
        }
        LocalWeave w;
        try {
            w = weave_local(out.model, m, a);
        } catch (const WeaveError& e) {
            throw WeaveError(std::string(e.what()) + " (aspect #" + std::to_string(i + 1) + ")");
        }
        out.model = std::move(w.model);
        for (auto& d : w.report.warnings) out.warnings.push_back(d);
        out.reports.push_back(std::move(w.report));
    }
    return out;
}

Composition weave_serial_global(const CompositeComponent& c, const std::vector<GlobalAspect>& aspects) {
    Composition out;
    out.model = c;
    for (std::size_t i = 0; i < aspects.size(); ++i) {
        const auto& a = aspects[i];
        auto sel = select_global(out.model, a.pointcut);
        try {
            out.model = weave_global(out.model, std::set<std::string>(sel.begin(), sel.end()), a);
        } catch (const WeaveError& e) {
            throw WeaveError(std::string(e.what()) + " (aspect #" + std::to_string(i + 1) + ")");
        }
        out.global_aspects.push_back(a.id);
    }
    return out;
}

std::set<std::string> project_match(const std::set<std::string>& m,
                                    const std::vector<const std::map<std::string, std::vector<std::string>>*>& maps) {
    std::set<std::string> cur = m;
    for (const auto* g : maps) {
        std::set<std::string> next;
        for (const auto& t : cur) {
            auto it = g->find(t);
            if (it == g->end()) throw WeaveError("transition '" + t + "' is outside the domain of a weave map");
            next.insert(it->second.begin(), it->second.end());
        }
        cur = std::move(next);
    }
    return cur;
}

Composition weave_all(const CompositeComponent& c, const std::vector<LocalAspect>& aspects) {
    std::vector<std::set<std::string>> matches;
    for (const auto& a : aspects) {
        const AtomicComponent* b = c.find_atom(a.instance);
        if (!b) throw WeaveError("aspect " + a.id + ": no component instance '" + a.instance + "'");
        matches.push_back(select_local(*b, a.pointcut));
    }
    Composition out;
    out.model = c;
    for (std::size_t i = 0; i < aspects.size(); ++i) {
        std::vector<const std::map<std::string, std::vector<std::string>>*> maps;
        for (const auto& r : out.reports)
            if (r.instance == aspects[i].instance) maps.push_back(&r.g);
        LocalWeave w;
        try {
            w = weave_local(out.model, project_match(matches[i], maps), aspects[i]);
        } catch (const WeaveError& e) {
            throw WeaveError(std::string(e.what()) + " (aspect #" + std::to_string(i + 1) + ")");
        }
        out.model = std::move(w.model);
        out.reports.push_back(std::move(w.report));
    }
    return out;
}

Composition weave_files(const CompositeComponent& c, const std::vector<AspectFile>& files, Strategy strategy,
                        ContainerOrder order) {
    Composition out;
    out.model = c;
    auto weave_one = [&](const Container& k) {
        if (const auto* lc = std::get_if<LocalContainer>(&k)) {
            append(out, strategy == Strategy::Serial ? weave_serial_local(out.model, lc->aspects)
                                                     : weave_all(out.model, lc->aspects));
        } else {
            append(out, weave_serial_global(out.model, std::get<GlobalContainer>(k).aspects));
        }
    };
    for (const auto& f : files) {
        if (order == ContainerOrder::FileOrder) {
            for (const auto& k : f.containers) weave_one(k);
            continue;
        }
        for (const auto& k : f.containers)
            if (std::holds_alternative<LocalContainer>(k)) weave_one(k);
        for (const auto& k : f.containers)
            if (std::holds_alternative<GlobalContainer>(k)) weave_one(k);
    }
    return out;
}

std::set<std::string> aspect_ids(const AspectFile& f) {
    std::set<std::string> out;
    for (const auto& k : f.containers)
        std::visit([&](const auto& x) { for (const auto& a : x.aspects) out.insert(a.id); }, k);
    return out;
}

namespace {

bool advised_by(const UpdateFunction& f, const std::set<std::string>& ids) {
    for (const auto& id : ids)
        if (has_block(f, id, MarkerRole::Before) || has_block(f, id, MarkerRole::After)) return true;
    return false;
}

}  // namespace

Coverage coverage(const CompositeComponent& original, const Composition& woven,
                  const std::vector<std::pair<std::string, std::set<std::string>>>& concerns) {
    const std::size_t n = concerns.size();
    // Touched original elements per concern, keyed `inst/transition` or interaction name.
    std::vector<std::set<std::string>> trans(n), inters(n);
    for (const auto& b : original.atoms) {
        std::vector<const std::map<std::string, std::vector<std::string>>*> maps;
        for (const auto& r : woven.reports)
            if (r.instance == b.name) maps.push_back(&r.g);
        const AtomicComponent* wb = woven.model.find_atom(b.name);
        if (!wb) continue;
        for (const auto& t : b.transitions) {
            auto image = project_match({t.id}, maps);
            for (std::size_t k = 0; k < n; ++k)
                for (const auto& id : image)
                    if (const Transition* wt = wb->find_transition(id); wt && advised_by(wt->func, concerns[k].second))
                        trans[k].insert(b.name + "/" + t.id);
        }
    }
    for (const auto& a : original.interactions) {
        const Interaction* wa = woven.model.find_interaction(a.name);
        if (!wa) continue;
        for (std::size_t k = 0; k < n; ++k)
            if (advised_by(wa->func, concerns[k].second)) inters[k].insert(a.name);
    }

    Coverage cov;
    std::set<std::string> all_t, all_i;
    for (std::size_t k = 0; k < n; ++k) {
        CoverageRow row;
        row.concern = concerns[k].first;
        row.transitions = trans[k].size();
        row.interactions = inters[k].size();
        std::set<std::string> ot, oi;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) continue;
            bool overlap = false;
            for (const auto& t : trans[k])
                if (trans[j].count(t)) ot.insert(t), overlap = true;
            for (const auto& i : inters[k])
                if (inters[j].count(i)) oi.insert(i), overlap = true;
            if (overlap) row.overlapping_concerns.push_back(j + 1);
        }
        row.overlapping_transitions = ot.size();
        row.overlapping_interactions = oi.size();
        all_t.insert(trans[k].begin(), trans[k].end());
        all_i.insert(inters[k].begin(), inters[k].end());
        cov.rows.push_back(std::move(row));
    }
    std::set<std::string> ids;
    for (const auto& c : concerns) ids.insert(c.second.begin(), c.second.end());
    std::size_t resets = 0;
    for (const auto& r : woven.reports) {
        if (!ids.count(r.aspect)) continue;
        const AtomicComponent* wb = woven.model.find_atom(r.instance);
        for (const auto& id : r.added_transitions)
            if (id.rfind("reset_", 0) == 0 && wb && wb->find_transition(id)) ++resets;
    }
    cov.total_transitions = all_t.size() + resets;
    cov.total_interactions = all_i.size();
    return cov;
}

std::string format_coverage(const Coverage& cov) {
    std::ostringstream os;
    os << "# concern transitions interactions OT OI OC\n";
    for (std::size_t k = 0; k < cov.rows.size(); ++k) {
        const auto& r = cov.rows[k];
        os << "coverage " << (k + 1) << ' ' << r.concern << ' ' << r.transitions << ' ' << r.interactions << ' '
           << r.overlapping_transitions << ' ' << r.overlapping_interactions << ' ';
        if (r.overlapping_concerns.empty()) os << '-';
        for (std::size_t i = 0; i < r.overlapping_concerns.size(); ++i)
            os << (i ? "," : "") << r.overlapping_concerns[i];
        os << "\n";
    }
    os << "coverage-total " << cov.total_transitions << ' ' << cov.total_interactions << "\n";
    return os.str();
}

}  // namespace aopbip

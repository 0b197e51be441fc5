#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "aopbip/global_aop.hpp"
#include "aopbip/local_aop.hpp"

namespace aopbip {

struct LocalContainer {
    std::string name;
    std::string instance;
    std::vector<Variable> intertype;
    std::vector<LocalAspect> aspects;
};

struct GlobalContainer {
    std::string name;
    std::vector<Variable> intertype;
    std::vector<GlobalAspect> aspects;
};

using Container = std::variant<LocalContainer, GlobalContainer>;

struct AspectFile {
    std::string header;
    std::vector<Container> containers;
};

const std::string& container_name(const Container& c);

enum class Strategy { Serial, All };

struct Composition {
    CompositeComponent model;
    // One report per local weave, in weave order.
    std::vector<WeaveReport> reports;
    std::vector<std::string> global_aspects;
    std::vector<Diagnostic> warnings;
};

// Left fold of weave_local; each pointcut is matched on the intermediate model.
Composition weave_serial_local(const CompositeComponent& c, const std::vector<LocalAspect>& aspects);
// Left fold of weave_global; each pointcut is matched on the intermediate model.
Composition weave_serial_global(const CompositeComponent& c, const std::vector<GlobalAspect>& aspects);

// Image of a transition set through a chain of weave maps; throws WeaveError outside a map's domain.
std::set<std::string> project_match(const std::set<std::string>& m,
                                    const std::vector<const std::map<std::string, std::vector<std::string>>*>& maps);

// Matches every pointcut on `c`, then weaves in order, transporting the matches through earlier maps.
Composition weave_all(const CompositeComponent& c, const std::vector<LocalAspect>& aspects);

enum class ContainerOrder { LocalFirst, FileOrder };

// Weaves the containers of the given files in order.
Composition weave_files(const CompositeComponent& c, const std::vector<AspectFile>& files, Strategy strategy,
                        ContainerOrder order = ContainerOrder::LocalFirst);

struct CoverageRow {
    std::string concern;
    std::size_t transitions = 0;
    std::size_t interactions = 0;
    std::size_t overlapping_transitions = 0;
    std::size_t overlapping_interactions = 0;
    std::vector<std::size_t> overlapping_concerns;  // 1-based row numbers
};

struct Coverage {
    std::vector<CoverageRow> rows;
    std::size_t total_transitions = 0;  // distinct original transitions plus added reset transitions
    std::size_t total_interactions = 0;
};

// `concerns` maps a concern name to the aspect ids it contributed; `original` is the unwoven model.
Coverage coverage(const CompositeComponent& original, const Composition& woven,
                  const std::vector<std::pair<std::string, std::set<std::string>>>& concerns);

std::string format_coverage(const Coverage& cov);

std::set<std::string> aspect_ids(const AspectFile& f);

}  // namespace aopbip

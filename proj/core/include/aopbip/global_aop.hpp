#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "aopbip/model.hpp"

namespace aopbip {

// Variables in `reads`/`writes` are interaction-level names (`inst.port.var`).
struct GlobalPointcut {
    std::set<PortRef> ports;
    std::set<std::string> reads;
    std::set<std::string> writes;
};

struct GlobalAdvice {
    UpdateFunction before;
    UpdateFunction after;
};

// The inter-type component is shared by the aspects of one container. Its variables are
// referenced from advice as `<intertype_instance>.pV.<var>`.
struct GlobalAspect {
    std::string id;
    std::string intertype_instance;
    std::vector<Variable> intertype;
    GlobalPointcut pointcut;
    GlobalAdvice advice;

    PortRef intertype_port() const { return {intertype_instance, "pV"}; }
    UpdateFunction before_block() const;
    UpdateFunction after_block() const;
};

struct WeaveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool match_global(const Interaction& a, const GlobalPointcut& gpc);
// Names of the matching interactions, in model order.
std::vector<std::string> select_global(const CompositeComponent& c, const GlobalPointcut& gpc);

AtomicComponent make_intertype(const std::string& instance, const std::vector<Variable>& vars);

// Variables reachable by the advice: the inter-type variables plus those of the pointcut ports.
std::set<std::string> advice_scope(const CompositeComponent& c, const GlobalAspect& aspect);
// Advice variables outside advice_scope.
std::set<std::string> advice_escapes(const CompositeComponent& c, const GlobalAspect& aspect);

CompositeComponent weave_global(const CompositeComponent& c, const std::set<std::string>& selected,
                                const GlobalAspect& aspect);

std::optional<Interaction> rem_global(const Interaction& a, const GlobalAspect& aspect);

}  // namespace aopbip

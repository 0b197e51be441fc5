#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "aopbip/composition.hpp"
#include "aopbip/dynamics.hpp"
#include "aopbip/global_aop.hpp"
#include "aopbip/local_aop.hpp"

namespace aopbip::testing {

using Rng = std::mt19937_64;

struct GenOptions {
    std::size_t max_atoms = 4;
    std::size_t max_locations = 5;
    std::size_t max_vars = 2;
    std::size_t max_ports = 3;
    std::size_t max_transitions = 7;
    std::size_t max_interactions = 5;
};

// Small models over bounded integer and boolean variables; always valid.
CompositeComponent random_model(Rng& rng, const GenOptions& opts = {});

Expr random_guard(Rng& rng, const AtomicComponent& b);
UpdateFunction random_func(Rng& rng, const AtomicComponent& b);

Lpc random_lpc(Rng& rng, const AtomicComponent& b, bool allow_port_enabled, int depth = 3);

// Advice writes only inter-type variables and may read the component's.
LocalAspect random_local_aspect(Rng& rng, const CompositeComponent& c, const std::string& id, bool allow_port_enabled);
GlobalAspect random_global_aspect(Rng& rng, const CompositeComponent& c, const std::string& id);

// Transitions (`inst.id`) and interactions executed within the exploration bound.
std::set<std::string> reached_transitions(const BipSystem& sys, const Exploration& ex);
std::set<std::string> reached_interactions(const BipSystem& sys, const Exploration& ex);

// Negative controls. Each returns nullopt when no reachable target exists.
std::optional<CompositeComponent> drop_local_advice(Rng& rng, const CompositeComponent& woven, const LocalAspect& a,
                                                   const std::set<std::string>& reached);
std::optional<CompositeComponent> misplace_local_advice(Rng& rng, const CompositeComponent& woven, const LocalAspect& a,
                                                       const std::set<std::string>& reached);
std::optional<CompositeComponent> drop_global_advice(Rng& rng, const CompositeComponent& woven, const GlobalAspect& a,
                                                    const std::set<std::string>& reached);
std::optional<CompositeComponent> misplace_global_advice(Rng& rng, const CompositeComponent& woven,
                                                        const GlobalAspect& a, const std::set<std::string>& reached);

std::string models_dir();
std::string read_text(const std::string& path);
CompositeComponent load_model(const std::string& name);
AspectFile load_aspects(const std::string& name, const CompositeComponent& base);

}  // namespace aopbip::testing

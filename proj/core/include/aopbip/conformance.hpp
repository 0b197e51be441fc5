#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aopbip/dynamics.hpp"
#include "aopbip/global_aop.hpp"
#include "aopbip/local_aop.hpp"

namespace aopbip {

enum class Outcome { Pass, Fail, Inconclusive };

const char* to_string(Outcome o);

struct Verdict {
    std::string proposition;  // global-match, global-apply, local-match, local-apply
    std::string aspect;
    Outcome outcome = Outcome::Inconclusive;
    std::size_t events = 0;
    std::size_t states = 0;
    std::size_t depth = 0;
    bool truncated = false;
    std::string reason;
    // Steps from q0 up to and including the offending one.
    std::vector<GlobalStep> counterexample;
    std::vector<Diagnostic> warnings;
};

struct CheckOptions {
    std::size_t depth = 12;
    std::size_t state_budget = 200000;
};

// Every executed interaction: match_global(a) iff a is in select_global.
Verdict check_global_match(const BipSystem& sys, const GlobalAspect& aspect, const CheckOptions& opts = {});

// Every executed interaction of the woven system: shaped <F_b, F, F_a> iff rem_g(a) matches the pointcut.
// Additionally, an interaction whose original matches must be shaped, and stripping must give the original back.
Verdict check_global(const BipSystem& original, const BipSystem& woven, const GlobalAspect& aspect,
                     const CheckOptions& opts = {});

// Throws std::invalid_argument when the pointcut uses portEnabled.
Verdict check_match_equivalence(const BipSystem& sys, const std::string& instance, const Lpc& lpc,
                                const CheckOptions& opts = {});

// Both clauses of local advice correctness over the local traces of the target instance.
Verdict check_local(const BipSystem& original, const BipSystem& woven, const LocalAspect& aspect,
                    const CheckOptions& opts = {});

// Trace-level re-check of a counterexample; returns the violation found along `steps`, if any.
std::optional<std::string> recheck_global(const BipSystem& original, const BipSystem& woven, const GlobalAspect& aspect,
                                          const std::vector<GlobalStep>& steps);
std::optional<std::string> recheck_local(const BipSystem& original, const BipSystem& woven, const LocalAspect& aspect,
                                         const std::vector<GlobalStep>& steps);
std::optional<std::string> recheck_match(const BipSystem& sys, const std::string& instance, const Lpc& lpc,
                                         const std::vector<GlobalStep>& steps);

// `verdict <prop> <aspect> <outcome> ...` followed by warnings and, on failure, the counterexample dump.
std::string format_verdict(const BipSystem& sys, const Verdict& v);

}  // namespace aopbip

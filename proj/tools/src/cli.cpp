#include "aopbip/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "aopbip/composition.hpp"
#include "aopbip/conformance.hpp"
#include "aopbip/dynamics.hpp"
#include "aopbip/frontend.hpp"

namespace aopbip {

namespace {

// Carries an exit code out of a subcommand.
struct Exit {
    int code;
};

struct Options {
    std::string model;
    std::vector<std::string> aspects;
    std::string strategy = "serial";
    std::string order = "local-first";
    std::uint64_t seed = 0;
    std::optional<std::size_t> depth;
    std::string out;
    std::string pointcut;
    std::string instance;
    std::string woven;
    bool allow_reserved = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void print_diagnostics(std::ostream& err, const std::vector<Diagnostic>& ds, const ParsedModel* parsed,
                       const std::string& file) {
    for (const auto& d : ds) {
        std::string prefix = file;
        if (parsed) {
            auto it = parsed->spans.find(d.where);
            if (it != parsed->spans.end()) prefix = to_string(it->second);
        }
        err << prefix << ": " << to_string(d) << "\n";
    }
}

ParsedModel load_model(const std::string& path, bool allow_reserved, std::ostream& err) {
    ParsedModel parsed;
    try {
        parsed = parse_model(read_file(path), path);
    } catch (const ParseError& e) {
        err << e.what() << "\n";
        throw Exit{kExitParse};
    }
    auto ds = validate(parsed.model, ValidateOptions{allow_reserved});
    print_diagnostics(err, ds, &parsed, path);
    if (has_errors(ds)) throw Exit{kExitValidate};
    return parsed;
}

std::vector<AspectFile> load_aspects(const std::vector<std::string>& paths, const CompositeComponent& base,
                                     std::ostream& err) {
    std::vector<AspectFile> files;
    for (const auto& p : paths) {
        try {
            files.push_back(parse_aspects(read_file(p), base, p));
        } catch (const ParseError& e) {
            err << e.what() << "\n";
            throw Exit{kExitParse};
        }
    }
    return files;
}

Strategy strategy_of(const Options& o) { return o.strategy == "all" ? Strategy::All : Strategy::Serial; }

ContainerOrder order_of(const Options& o) {
    return o.order == "file" ? ContainerOrder::FileOrder : ContainerOrder::LocalFirst;
}

Composition weave_checked(const CompositeComponent& base, const std::vector<AspectFile>& files, const Options& o,
                          std::ostream& err) {
    Composition comp;
    try {
        comp = weave_files(base, files, strategy_of(o), order_of(o));
    } catch (const WeaveError& e) {
        err << "error: weave: " << e.what() << "\n";
        throw Exit{kExitWeave};
    }
    auto ds = validate(comp.model, ValidateOptions{true});
    if (has_errors(ds)) {
        print_diagnostics(err, ds, nullptr, "<woven>");
        throw Exit{kExitWeave};
    }
    return comp;
}

// Writes to --out when given, to `out` otherwise.
void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    f << text;
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

int cmd_weave(const Options& o, std::ostream& out, std::ostream& err) {
    auto parsed = load_model(o.model, o.allow_reserved, err);
    auto files = load_aspects(o.aspects, parsed.model, err);
    auto comp = weave_checked(parsed.model, files, o, err);
    emit(o, out, render_model(comp.model));
    std::ostream& rep = o.out.empty() ? err : out;
    for (const auto& r : comp.reports) rep << format_report(r);
    for (const auto& id : comp.global_aspects) rep << "global " << id << "\n";
    for (const auto& w : comp.warnings) rep << to_string(w) << "\n";
    if (!files.empty()) {
        std::vector<std::pair<std::string, std::set<std::string>>> concerns;
        for (std::size_t i = 0; i < files.size(); ++i) concerns.emplace_back(stem(o.aspects[i]), aspect_ids(files[i]));
        rep << format_coverage(coverage(parsed.model, comp, concerns));
    }
    return kExitOk;
}

// Pointcuts on the command line reuse the aspect grammar.
int cmd_match(const Options& o, std::ostream& out, std::ostream& err) {
    auto parsed = load_model(o.model, o.allow_reserved, err);
    const auto& c = parsed.model;
    std::string text = o.instance.empty()
                           ? "Aspect Cli global { aspect { pointcut " + o.pointcut + "; } }"
                           : "Aspect Cli local " + o.instance + " { aspect { pointcut " + o.pointcut + "; } }";
    AspectFile f;
    try {
        f = parse_aspects(text, c, "<pointcut>");
    } catch (const ParseError& e) {
        err << e.what() << "\n";
        throw Exit{kExitParse};
    }
    const auto& k = f.containers.front();
    if (const auto* g = std::get_if<GlobalContainer>(&k)) {
        for (const auto& name : select_global(c, g->aspects.front().pointcut)) out << name << "\n";
    } else {
        const auto& a = std::get<LocalContainer>(k).aspects.front();
        for (const auto& id : select_local(*c.find_atom(a.instance), a.pointcut)) out << a.instance << "." << id << "\n";
    }
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    auto parsed = load_model(o.model, o.allow_reserved, err);
    auto files = load_aspects(o.aspects, parsed.model, err);
    auto comp = weave_checked(parsed.model, files, o, err);
    BipSystem sys(comp.model);
    auto rho = run(sys, o.depth.value_or(12), o.seed);
    emit(o, out, dump_trace(sys, rho));
    if (rho.error) {
        err << "error: " << *rho.error << "\n";
        return kExitWeave;
    }
    return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
    auto parsed = load_model(o.model, o.allow_reserved, err);
    auto files = load_aspects(o.aspects, parsed.model, err);
    const auto& base = parsed.model;
    BipSystem original(base);
    // A supplied woven model replaces the built-in weave for the apply checks.
    std::optional<BipSystem> supplied;
    if (!o.woven.empty()) supplied.emplace(load_model(o.woven, true, err).model);
    CheckOptions opts;
    opts.depth = o.depth.value_or(opts.depth);
    std::ostringstream os;
    bool failed = false;
    auto report = [&](const BipSystem& sys, const Verdict& v) {
        failed = failed || v.outcome == Outcome::Fail;
        os << format_verdict(sys, v);
    };
    try {
        for (const auto& f : files) {
            for (const auto& k : f.containers) {
                if (const auto* lc = std::get_if<LocalContainer>(&k)) {
                    for (const auto& a : lc->aspects) {
                        if (!has_port_enabled(a.pointcut)) {
                            auto v = check_match_equivalence(original, a.instance, a.pointcut, opts);
                            v.aspect = a.id;
                            report(original, v);
                        }
                        BipSystem woven = supplied ? *supplied : BipSystem(weave_local(base, a).model);
                        report(woven, check_local(original, woven, a, opts));
                    }
                } else {
                    for (const auto& a : std::get<GlobalContainer>(k).aspects) {
                        auto sel = select_global(base, a.pointcut);
                        BipSystem woven =
                            supplied ? *supplied : BipSystem(weave_global(base, {sel.begin(), sel.end()}, a));
                        report(original, check_global_match(original, a, opts));
                        report(woven, check_global(original, woven, a, opts));
                    }
                }
            }
        }
    } catch (const WeaveError& e) {
        err << "error: weave: " << e.what() << "\n";
        throw Exit{kExitWeave};
    }
    emit(o, out, os.str());
    return failed ? kExitConformance : kExitOk;
}

int cmd_dot(const Options& o, std::ostream& out, std::ostream& err) {
    auto parsed = load_model(o.model, o.allow_reserved, err);
    auto files = load_aspects(o.aspects, parsed.model, err);
    auto comp = weave_checked(parsed.model, files, o, err);
    emit(o, out, render_dot(comp.model));
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Aspect weaving for BIP component models", "aopbip"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool with_aspects) {
        sub->add_option("model", o.model, "BIP model (.bip)")->required()->check(CLI::ExistingFile);
        if (with_aspects) {
            sub->add_option("aspects", o.aspects, "Aspect files (.abip), woven in order")->check(CLI::ExistingFile);
            sub->add_option("--strategy", o.strategy, "Local weaving procedure")->check(CLI::IsMember({"serial", "all"}));
            sub->add_option("--container-order", o.order, "Weave order of containers within a file")
                ->check(CLI::IsMember({"local-first", "file"}));
        }
        sub->add_option("--out", o.out, "Output file");
        sub->add_flag("--allow-reserved", o.allow_reserved, "Accept woven identifiers in the input model");
    };

    auto* weave = app.add_subcommand("weave", "Weave aspect files onto a model");
    add_common(weave, true);
    auto* match = app.add_subcommand("match", "List the elements selected by a pointcut");
    add_common(match, false);
    match->add_option("--pointcut", o.pointcut, "Pointcut expression")->required();
    match->add_option("--instance", o.instance, "Component instance; selects a local pointcut");
    auto* simulate = app.add_subcommand("simulate", "Run the (woven) model and dump the trace");
    add_common(simulate, true);
    simulate->add_option("--seed", o.seed, "Scheduler seed");
    simulate->add_option("--depth", o.depth, "Maximum number of steps");
    auto* check = app.add_subcommand("check", "Check weaving correctness of every aspect");
    add_common(check, true);
    check->add_option("--depth", o.depth, "Exploration depth");
    check->add_option("--seed", o.seed, "Unused; accepted for uniformity");
    check->add_option("--woven", o.woven, "Check this woven model instead of weaving each aspect")
        ->check(CLI::ExistingFile);
    auto* dot = app.add_subcommand("dot", "Export the (woven) model to Graphviz");
    add_common(dot, true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (weave->parsed()) return cmd_weave(o, out, err);
        if (match->parsed()) return cmd_match(o, out, err);
        if (simulate->parsed()) return cmd_simulate(o, out, err);
        if (check->parsed()) return cmd_check(o, out, err);
        return cmd_dot(o, out, err);
    } catch (const Exit& e) {
        return e.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace aopbip

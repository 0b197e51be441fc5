#include "aopbip/frontend.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <set>
#include <sstream>

namespace aopbip {

std::string to_string(const SourceSpan& s) {
    return s.file + ":" + std::to_string(s.line) + ":" + std::to_string(s.column);
}

ParseError::ParseError(SourceSpan span, const std::string& message)
    : std::runtime_error(to_string(span) + ": " + message), span_(std::move(span)), message_(message) {}

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceSpan span;
};

class Lexer {
public:
    Lexer(const std::string& text, std::string file) : src_(text), file_(std::move(file)) {}

    Token next() {
        skip_space();
        Token t;
        t.span = here();
        if (pos_ >= src_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t b = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) advance();
            t.kind = Tok::Ident;
            t.text = src_.substr(b, pos_ - b);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t b = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
            t.kind = Tok::Int;
            t.text = src_.substr(b, pos_ - b);
        } else {
            static const char* two[] = {":=", "->", "&&", "||", "==", "!=", "<=", ">=", "{{"};
            t.kind = Tok::Punct;
            for (const char* op : two) {
                if (src_.compare(pos_, 2, op) == 0) {
                    t.text = op;
                    advance();
                    advance();
                    break;
                }
            }
            if (t.text.empty()) {
                if (std::string("(){}[];:,.<>+-*/%!=@").find(c) == std::string::npos)
                    throw ParseError(t.span, std::string("unexpected character '") + c + "'");
                t.text = std::string(1, c);
                advance();
            }
        }
        t.span.end_column = col_;
        return t;
    }

    // Verbatim text up to the closing `}}`; the opening `{{` has been consumed.
    std::string raw_block(const SourceSpan& open) {
        auto end = src_.find("}}", pos_);
        if (end == std::string::npos) throw ParseError(open, "unterminated header block");
        std::string raw = src_.substr(pos_, end - pos_);
        while (pos_ < end + 2) advance();
        return raw;
    }

private:
    SourceSpan here() const { return SourceSpan{file_, line_, col_, col_}; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (src_.compare(pos_, 2, "//") == 0) {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (src_.compare(pos_, 2, "/*") == 0) {
                SourceSpan open = here();
                auto end = src_.find("*/", pos_ + 2);
                if (end == std::string::npos) throw ParseError(open, "unterminated comment");
                while (pos_ < end + 2) advance();
            } else {
                break;
            }
        }
    }

    const std::string& src_;
    std::string file_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class Parser {
public:
    Parser(const std::string& text, const std::string& file) : lex_(text, file) { cur_ = lex_.next(); }

    const Token& cur() const { return cur_; }
    bool at_end() const { return cur_.kind == Tok::End; }

    [[noreturn]] void fail(const std::string& msg) const { fail_at(cur_.span, msg); }
    [[noreturn]] static void fail_at(const SourceSpan& s, const std::string& msg) { throw ParseError(s, msg); }

    std::string describe() const {
        switch (cur_.kind) {
            case Tok::End: return "end of input";
            case Tok::Ident: return "'" + cur_.text + "'";
            case Tok::Int: return "number " + cur_.text;
            case Tok::Punct: return "'" + cur_.text + "'";
        }
        return "?";
    }

    Token take() {
        Token t = cur_;
        cur_ = lex_.next();
        return t;
    }

    bool is(const char* punct) const { return cur_.kind == Tok::Punct && cur_.text == punct; }
    bool is_kw(const char* kw) const { return cur_.kind == Tok::Ident && cur_.text == kw; }

    bool accept(const char* punct) {
        if (!is(punct)) return false;
        take();
        return true;
    }
    bool accept_kw(const char* kw) {
        if (!is_kw(kw)) return false;
        take();
        return true;
    }
    void expect(const char* punct) {
        if (!accept(punct)) fail(std::string("expected '") + punct + "', found " + describe());
    }
    void expect_kw(const char* kw) {
        if (!accept_kw(kw)) fail(std::string("expected '") + kw + "', found " + describe());
    }

    std::string ident(const char* what) {
        if (cur_.kind != Tok::Ident || is_reserved_word(cur_.text)) fail(std::string("expected ") + what + ", found " + describe());
        return take().text;
    }

    std::string dotted(const char* what) {
        std::string name = ident(what);
        while (accept(".")) name += "." + ident(what);
        return name;
    }

    std::string header_block() {
        SourceSpan open = cur_.span;
        if (!is("{{")) fail("expected '{{' after 'header'");
        // The raw text starts right after `{{`, so the lookahead must not have consumed it.
        std::string raw = lex_.raw_block(open);
        cur_ = lex_.next();
        return raw;
    }

    static bool is_reserved_word(const std::string& s) {
        static const std::set<std::string> words = {"and", "or", "not", "true", "false"};
        return words.count(s) > 0;
    }

    // Expressions, lowest precedence first.
    Expr expr() { return or_expr(); }

    Expr or_expr() {
        Expr e = and_expr();
        while (is("||") || is_kw("or")) {
            take();
            e = binary(BinaryOp::Or, e, and_expr());
        }
        return e;
    }

    Expr and_expr() {
        Expr e = eq_expr();
        while (is("&&") || is_kw("and")) {
            take();
            e = binary(BinaryOp::And, e, eq_expr());
        }
        return e;
    }

    Expr eq_expr() {
        Expr e = rel_expr();
        for (;;) {
            if (accept("==")) e = binary(BinaryOp::Eq, e, rel_expr());
            else if (accept("!=")) e = binary(BinaryOp::Ne, e, rel_expr());
            else return e;
        }
    }

    Expr rel_expr() {
        Expr e = add_expr();
        for (;;) {
            if (accept("<=")) e = binary(BinaryOp::Le, e, add_expr());
            else if (accept(">=")) e = binary(BinaryOp::Ge, e, add_expr());
            else if (accept("<")) e = binary(BinaryOp::Lt, e, add_expr());
            else if (accept(">")) e = binary(BinaryOp::Gt, e, add_expr());
            else return e;
        }
    }

    Expr add_expr() {
        Expr e = mul_expr();
        for (;;) {
            if (accept("+")) e = binary(BinaryOp::Add, e, mul_expr());
            else if (accept("-")) e = binary(BinaryOp::Sub, e, mul_expr());
            else return e;
        }
    }

    Expr mul_expr() {
        Expr e = unary_expr();
        for (;;) {
            if (accept("*")) e = binary(BinaryOp::Mul, e, unary_expr());
            else if (accept("/")) e = binary(BinaryOp::Div, e, unary_expr());
            else if (accept("%")) e = binary(BinaryOp::Mod, e, unary_expr());
            else return e;
        }
    }

    Expr unary_expr() {
        if (is("-")) {
            take();
            if (cur_.kind == Tok::Int) return int_literal(true);
            return unary(UnaryOp::Neg, unary_expr());
        }
        if (is("!") || is_kw("not")) {
            take();
            return unary(UnaryOp::Not, unary_expr());
        }
        return atom();
    }

    Expr int_literal(bool negative) {
        Token t = take();
        std::uint64_t mag = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), mag);
        const std::uint64_t limit = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) + (negative ? 1 : 0);
        if (ec != std::errc() || mag > limit) fail_at(t.span, "integer literal out of range");
        if (negative) return int_lit(mag == limit ? std::numeric_limits<std::int64_t>::min() : -static_cast<std::int64_t>(mag));
        return int_lit(static_cast<std::int64_t>(mag));
    }

    Expr atom() {
        if (cur_.kind == Tok::Int) return int_literal(false);
        if (accept_kw("true")) return bool_lit(true);
        if (accept_kw("false")) return bool_lit(false);
        if (accept("(")) {
            Expr e = expr();
            expect(")");
            return e;
        }
        if (cur_.kind == Tok::Ident && !is_reserved_word(cur_.text)) {
            Token first = cur_;
            std::string name = dotted("name");
            if (is("(")) {
                if (name.find('.') != std::string::npos) fail_at(first.span, "qualified name cannot be called");
                const Builtin* b = find_builtin(name);
                if (!b) fail_at(first.span, "unknown function '" + name + "'");
                take();
                std::vector<Expr> args;
                if (!is(")")) {
                    do args.push_back(expr());
                    while (accept(","));
                }
                expect(")");
                if (args.size() != b->arity)
                    fail_at(first.span, "function '" + name + "' takes " + std::to_string(b->arity) + " arguments");
                return call(name, std::move(args));
            }
            return var(name);
        }
        fail("expected expression, found " + describe());
    }

    // `{ stmt* }`
    UpdateFunction block() {
        expect("{");
        UpdateFunction f;
        while (!accept("}")) {
            if (at_end()) fail("unterminated block");
            f.stmts.push_back(stmt());
        }
        return f;
    }

    Stmt stmt() {
        if (accept_kw("skip")) {
            expect(";");
            return Skip{};
        }
        if (accept("@")) {
            Token kw = cur_;
            std::string edge = ident("marker edge");
            if (edge != "begin" && edge != "end") fail_at(kw.span, "marker edge must be 'begin' or 'end'");
            expect("(");
            std::string owner = ident("marker owner");
            expect(",");
            Token rt = cur_;
            auto role = parse_role(ident("marker role"));
            if (!role) fail_at(rt.span, "unknown marker role '" + rt.text + "'");
            expect(")");
            expect(";");
            return Marker{edge == "begin" ? MarkerEdge::Begin : MarkerEdge::End, owner, *role};
        }
        std::string target = dotted("assignment target");
        expect(":=");
        Expr value = expr();
        expect(";");
        return Assign{target, value};
    }

private:
    Lexer lex_;
    Token cur_;
};

Variable var_decl(Parser& p) {
    Variable v;
    Token tt = p.cur();
    std::string type = p.ident("type");
    if (type == "int") v.type = Type::Int;
    else if (type == "bool") v.type = Type::Bool;
    else Parser::fail_at(tt.span, "unknown type '" + type + "'");
    v.name = p.ident("variable name");
    p.expect("=");
    if (v.type == Type::Bool) {
        if (p.accept_kw("true")) v.init = 1;
        else if (p.accept_kw("false")) v.init = 0;
        else p.fail("expected 'true' or 'false'");
    } else {
        bool neg = p.accept("-");
        if (p.cur().kind != Tok::Int) p.fail("expected integer initial value");
        Expr lit = p.int_literal(neg);
        v.init = std::get<Literal>(lit->node).value;
    }
    p.expect(";");
    return v;
}

AtomicComponent atom_decl(Parser& p, ParsedModel& out) {
    AtomicComponent a;
    Token nt = p.cur();
    a.name = p.ident("component name");
    out.spans[a.name] = nt.span;
    p.expect("{");
    bool has_initial = false;
    while (!p.accept("}")) {
        if (p.at_end()) p.fail("unterminated atom '" + a.name + "'");
        if (p.accept_kw("var")) {
            a.vars.push_back(var_decl(p));
        } else if (p.accept_kw("port")) {
            Port port;
            port.name = p.ident("port name");
            if (p.accept("(")) {
                if (!p.is(")")) {
                    do port.vars.push_back(p.ident("variable name"));
                    while (p.accept(","));
                }
                p.expect(")");
            }
            p.expect(";");
            a.ports.push_back(std::move(port));
        } else if (p.accept_kw("location") || p.accept_kw("place")) {
            do a.locations.push_back(p.ident("location name"));
            while (p.accept(","));
            p.expect(";");
        } else if (p.is_kw("initial")) {
            Token it = p.take();
            if (has_initial) Parser::fail_at(it.span, "initial location declared twice");
            has_initial = true;
            a.initial = p.ident("location name");
            p.expect(";");
        } else if (p.is_kw("transition")) {
            Token kw = p.take();
            Transition t;
            t.id = p.ident("transition id");
            out.spans[a.name + "." + t.id] = kw.span;
            p.expect(":");
            t.src = p.ident("location name");
            p.expect("->");
            t.dest = p.ident("location name");
            p.expect_kw("on");
            t.port = p.ident("port name");
            if (p.accept_kw("when")) t.guard = p.expr();
            if (p.accept_kw("do")) t.func = p.block();
            p.expect(";");
            a.transitions.push_back(std::move(t));
        } else {
            p.fail("expected 'var', 'port', 'location', 'initial' or 'transition', found " + p.describe());
        }
    }
    if (!has_initial) Parser::fail_at(nt.span, "atom '" + a.name + "' has no initial location");
    return a;
}

PortRef port_ref(Parser& p) {
    PortRef r;
    r.instance = p.ident("component instance");
    p.expect(".");
    r.port = p.ident("port name");
    return r;
}

Interaction connector_decl(Parser& p, ParsedModel& out) {
    Interaction i;
    Token nt = p.cur();
    i.name = p.ident("connector name");
    out.spans[i.name] = nt.span;
    p.expect("=");
    do i.ports.push_back(port_ref(p));
    while (p.accept(","));
    if (p.accept_kw("when")) i.guard = p.expr();
    if (p.accept_kw("do")) i.func = p.block();
    p.expect(";");
    return i;
}

}  // namespace

ParsedModel parse_model(const std::string& text, const std::string& file) {
    Parser p(text, file);
    ParsedModel out;
    if (p.at_end()) p.fail("empty model");
    p.expect_kw("module");
    out.model.name = p.ident("module name");
    p.expect(";");
    if (p.accept_kw("header")) out.model.header = p.header_block();
    while (!p.at_end()) {
        if (p.accept_kw("atom")) {
            out.model.atoms.push_back(atom_decl(p, out));
        } else if (p.accept_kw("connector")) {
            out.model.interactions.push_back(connector_decl(p, out));
        } else if (p.is_kw("priority")) {
            Token kw = p.take();
            Priority pr;
            pr.low = p.ident("interaction name");
            p.expect("<");
            pr.high = p.ident("interaction name");
            p.expect(";");
            out.spans[pr.low + " < " + pr.high] = kw.span;
            out.model.priorities.push_back(std::move(pr));
        } else {
            p.fail("expected 'atom', 'connector' or 'priority', found " + p.describe());
        }
    }
    return out;
}

namespace {

Lpc lpc_term(Parser& p, const AtomicComponent& b);

Lpc lpc_expr(Parser& p, const AtomicComponent& b) {
    Lpc e = lpc_term(p, b);
    while (p.accept_kw("and")) e = lpc_and(e, lpc_term(p, b));
    return e;
}

Lpc lpc_term(Parser& p, const AtomicComponent& b) {
    if (p.accept("(")) {
        Lpc e = lpc_expr(p, b);
        p.expect(")");
        return e;
    }
    Token kw = p.cur();
    std::string k = p.ident("pointcut term");
    p.expect("(");
    Token at = p.cur();
    std::string arg = p.ident("name");
    p.expect(")");
    Lpc out;
    if (k == "atLocation") out = at_location(arg);
    else if (k == "readVarGuard") out = read_var_guard(arg);
    else if (k == "readVarFunc") out = read_var_func(arg);
    else if (k == "write") out = write_var(arg);
    else if (k == "portEnabled") out = port_enabled(arg);
    else if (k == "portExecute") out = port_execute(arg);
    else Parser::fail_at(kw.span, "unknown pointcut term '" + k + "'");
    if (!unresolved_names(b, out).empty()) Parser::fail_at(at.span, "'" + arg + "' does not resolve in " + b.name);
    return out;
}

std::set<std::string> names_in(const UpdateFunction& f) {
    auto r = var_read(f);
    auto w = var_write(f);
    r.insert(w.begin(), w.end());
    return r;
}

void check_local_names(const AtomicComponent& b, const std::vector<Variable>& intertype, const std::set<std::string>& names,
                       const SourceSpan& where) {
    for (const auto& n : names) {
        bool ok = b.find_var(n) != nullptr;
        for (const auto& v : intertype) ok = ok || v.name == n;
        if (!ok) Parser::fail_at(where, "unknown variable '" + n + "' for " + b.name);
    }
}

LocalAspect local_aspect(Parser& p, const LocalContainer& k, const AtomicComponent& b, std::size_t index) {
    LocalAspect a;
    a.id = k.name + "_" + std::to_string(index);
    a.instance = k.instance;
    a.intertype = k.intertype;
    Token open = p.cur();
    p.expect("{");
    bool has_pc = false;
    while (!p.accept("}")) {
        if (p.at_end()) p.fail("unterminated aspect");
        Token t = p.cur();
        if (p.accept_kw("pointcut")) {
            if (has_pc) Parser::fail_at(t.span, "pointcut declared twice");
            has_pc = true;
            a.pointcut = lpc_expr(p, b);
            p.expect(";");
        } else if (p.accept_kw("before")) {
            a.before = p.block();
            check_local_names(b, a.intertype, names_in(a.before), t.span);
        } else if (p.accept_kw("after")) {
            a.after = p.block();
            check_local_names(b, a.intertype, names_in(a.after), t.span);
        } else if (p.accept_kw("resetTo")) {
            ResetPair r;
            Token lt = p.cur();
            r.location = p.ident("location name");
            if (!b.has_location(r.location)) Parser::fail_at(lt.span, "unknown location '" + r.location + "' in " + b.name);
            if (p.accept_kw("when")) r.guard = p.expr();
            check_local_names(b, a.intertype, var_read(r.guard), t.span);
            p.expect(";");
            a.resets.push_back(std::move(r));
        } else {
            p.fail("expected 'pointcut', 'before', 'after' or 'resetTo', found " + p.describe());
        }
    }
    if (!has_pc) Parser::fail_at(open.span, "aspect without pointcut");
    return a;
}

GlobalAspect global_aspect(Parser& p, const GlobalContainer& k, const CompositeComponent& base, std::size_t index) {
    GlobalAspect a;
    a.id = k.name + "_" + std::to_string(index);
    a.intertype_instance = k.name + "_V";
    a.intertype = k.intertype;
    std::map<std::string, PortRef> aliases;
    auto resolve = [&](const std::string& name) -> std::string {
        auto dot = name.find('.');
        if (dot == std::string::npos) {
            for (const auto& v : k.intertype)
                if (v.name == name) return qualified_var(a.intertype_port(), name);
            return name;
        }
        if (name.find('.', dot + 1) == std::string::npos) {
            auto it = aliases.find(name.substr(0, dot));
            if (it != aliases.end()) return qualified_var(it->second, name.substr(dot + 1));
        }
        return name;
    };
    auto resolve_all = [&](const std::set<std::string>& names) {
        std::map<std::string, std::string> m;
        for (const auto& n : names) m[n] = resolve(n);
        return m;
    };
    auto resolved_var = [&](const Token& at, const std::string& name) {
        std::string q = resolve(name);
        bool ok = false;
        for (const auto& pr : a.pointcut.ports) {
            const AtomicComponent* b = base.find_atom(pr.instance);
            const Port* port = b ? b->find_port(pr.port) : nullptr;
            if (!port) continue;
            for (const auto& v : port->vars) ok = ok || qualified_var(pr, v) == q;
        }
        if (!ok) Parser::fail_at(at.span, "variable '" + name + "' is not attached to a pointcut port");
        return q;
    };

    Token open = p.cur();
    p.expect("{");
    bool has_pc = false;
    while (!p.accept("}")) {
        if (p.at_end()) p.fail("unterminated aspect");
        Token t = p.cur();
        if (p.accept_kw("pointcut")) {
            if (has_pc) Parser::fail_at(t.span, "pointcut declared twice");
            has_pc = true;
            bool any = false;
            if (p.accept_kw("ports")) {
                any = true;
                p.expect("(");
                if (!p.is(")")) {
                    do {
                        Token st = p.cur();
                        std::string first = p.ident("port or alias");
                        std::optional<std::string> alias;
                        PortRef ref;
                        if (p.accept(":")) {
                            alias = first;
                            ref = port_ref(p);
                        } else {
                            p.expect(".");
                            ref = PortRef{first, p.ident("port name")};
                        }
                        const AtomicComponent* b = base.find_atom(ref.instance);
                        if (!b) Parser::fail_at(st.span, "unknown component '" + ref.instance + "'");
                        if (!b->find_port(ref.port)) Parser::fail_at(st.span, "unknown port '" + ref.str() + "'");
                        if (alias && !aliases.emplace(*alias, ref).second)
                            Parser::fail_at(st.span, "alias '" + *alias + "' is bound twice");
                        a.pointcut.ports.insert(ref);
                    } while (p.accept(","));
                }
                p.expect(")");
            }
            for (;;) {
                bool rd = p.is_kw("read");
                if (!rd && !p.is_kw("write")) break;
                any = true;
                p.take();
                p.expect("(");
                if (!p.is(")")) {
                    do {
                        Token vt = p.cur();
                        std::string q = resolved_var(vt, p.dotted("variable name"));
                        (rd ? a.pointcut.reads : a.pointcut.writes).insert(q);
                    } while (p.accept(","));
                }
                p.expect(")");
            }
            if (!any) p.fail("expected 'ports', 'read' or 'write'");
            p.expect(";");
        } else if (p.accept_kw("before")) {
            auto f = p.block();
            a.advice.before = rename_vars(f, resolve_all(names_in(f)));
        } else if (p.accept_kw("after")) {
            auto f = p.block();
            a.advice.after = rename_vars(f, resolve_all(names_in(f)));
        } else {
            p.fail("expected 'pointcut', 'before' or 'after', found " + p.describe());
        }
    }
    if (!has_pc) Parser::fail_at(open.span, "aspect without pointcut");
    auto escapes = advice_escapes(base, a);
    if (!escapes.empty()) Parser::fail_at(open.span, "advice uses variable '" + *escapes.begin() + "' outside the pointcut ports and inter-type variables");
    return a;
}

}  // namespace

AspectFile parse_aspects(const std::string& text, const CompositeComponent& base, const std::string& file) {
    Parser p(text, file);
    AspectFile out;
    if (p.accept_kw("header")) out.header = p.header_block();
    std::set<std::string> names;
    while (!p.at_end()) {
        p.expect_kw("Aspect");
        Token nt = p.cur();
        std::string name = p.ident("container name");
        if (!names.insert(name).second) Parser::fail_at(nt.span, "container '" + name + "' declared twice");
        if (p.accept_kw("local")) {
            LocalContainer k;
            k.name = name;
            Token it = p.cur();
            k.instance = p.ident("component instance");
            const AtomicComponent* b = base.find_atom(k.instance);
            if (!b) Parser::fail_at(it.span, "unknown component '" + k.instance + "'");
            p.expect("{");
            while (!p.accept("}")) {
                if (p.at_end()) p.fail("unterminated container '" + name + "'");
                Token kw = p.cur();
                if (p.accept_kw("intertype")) {
                    Variable v = var_decl(p);
                    if (b->find_var(v.name)) Parser::fail_at(kw.span, "inter-type variable '" + v.name + "' shadows a variable of " + b->name);
                    k.intertype.push_back(v);
                } else if (p.accept_kw("aspect")) {
                    k.aspects.push_back(local_aspect(p, k, *b, k.aspects.size() + 1));
                } else {
                    p.fail("expected 'intertype' or 'aspect', found " + p.describe());
                }
            }
            out.containers.emplace_back(std::move(k));
        } else if (p.accept_kw("global")) {
            GlobalContainer k;
            k.name = name;
            if (base.find_atom(name + "_V")) Parser::fail_at(nt.span, "instance '" + name + "_V' already exists");
            p.expect("{");
            while (!p.accept("}")) {
                if (p.at_end()) p.fail("unterminated container '" + name + "'");
                if (p.accept_kw("intertype")) {
                    k.intertype.push_back(var_decl(p));
                } else if (p.accept_kw("aspect")) {
                    k.aspects.push_back(global_aspect(p, k, base, k.aspects.size() + 1));
                } else {
                    p.fail("expected 'intertype' or 'aspect', found " + p.describe());
                }
            }
            out.containers.emplace_back(std::move(k));
        } else {
            p.fail("expected 'local' or 'global', found " + p.describe());
        }
    }
    return out;
}

namespace {

std::string render_func(const UpdateFunction& f) {
    std::string s;
    for (const auto& st : f.stmts) s += " " + to_string(st);
    return s;
}

std::string join_names(const std::vector<std::string>& xs, const char* sep = ", ") {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + xs[i];
    return s;
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string render_model(const CompositeComponent& c) {
    std::ostringstream os;
    os << "module " << c.name << ";\n";
    if (!c.header.empty()) os << "\nheader {{" << c.header << "}}\n";
    for (const auto& a : c.atoms) {
        os << "\natom " << a.name << " {\n";
        for (const auto& v : a.vars)
            os << "  var " << type_name(v.type) << ' ' << v.name << " = " << format_value(v.type, v.init) << ";\n";
        for (const auto& p : a.ports) {
            os << "  port " << p.name;
            if (!p.vars.empty()) os << '(' << join_names(p.vars) << ')';
            os << ";\n";
        }
        if (!a.locations.empty()) os << "  location " << join_names(a.locations) << ";\n";
        os << "  initial " << a.initial << ";\n";
        for (const auto& t : a.transitions) {
            os << "  transition " << t.id << ": " << t.src << " -> " << t.dest << " on " << t.port;
            if (!is_bool_literal(t.guard, true)) os << " when " << to_string(t.guard);
            if (!t.func.empty()) os << " do {" << render_func(t.func) << " }";
            os << ";\n";
        }
        os << "}\n";
    }
    if (!c.interactions.empty()) os << "\n";
    for (const auto& i : c.interactions) {
        std::vector<std::string> ports;
        for (const auto& p : i.ports) ports.push_back(p.str());
        os << "connector " << i.name << " = " << join_names(ports);
        if (!is_bool_literal(i.guard, true)) os << " when " << to_string(i.guard);
        if (!i.func.empty()) os << " do {" << render_func(i.func) << " }";
        os << ";\n";
    }
    if (!c.priorities.empty()) os << "\n";
    for (const auto& p : c.priorities) os << "priority " << p.low << " < " << p.high << ";\n";
    return os.str();
}

std::string render_dot(const CompositeComponent& c) {
    std::ostringstream os;
    os << "digraph " << c.name << " {\n";
    for (const auto& a : c.atoms) {
        os << "  subgraph \"cluster_" << dot_escape(a.name) << "\" {\n";
        os << "    label=\"" << dot_escape(a.name) << "\";\n";
        for (const auto& l : a.locations)
            os << "    \"" << dot_escape(a.name + "." + l) << "\" [label=\"" << dot_escape(l)
               << "\", shape=" << (l == a.initial ? "doublecircle" : "circle") << "];\n";
        for (const auto& p : a.ports)
            os << "    \"" << dot_escape(a.name + ":" + p.name) << "\" [label=\"" << dot_escape(p.name)
               << "\", shape=plaintext];\n";
        for (const auto& t : a.transitions) {
            std::string label = t.port;
            if (!is_bool_literal(t.guard, true)) label += " [" + to_string(t.guard) + "]";
            if (!t.func.empty()) label += " /" + render_func(t.func);
            os << "    \"" << dot_escape(a.name + "." + t.src) << "\" -> \"" << dot_escape(a.name + "." + t.dest)
               << "\" [label=\"" << dot_escape(label) << "\"];\n";
        }
        os << "  }\n";
    }
    for (const auto& i : c.interactions) {
        os << "  \"" << dot_escape("interaction:" + i.name) << "\" [label=\"" << dot_escape(i.name) << "\", shape=box];\n";
        for (const auto& p : i.ports)
            os << "  \"" << dot_escape("interaction:" + i.name) << "\" -> \"" << dot_escape(p.instance + ":" + p.port)
               << "\" [style=dashed, arrowhead=none];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace aopbip

#include "aopbip/expr.hpp"

#include <array>
#include <limits>
#include <sstream>

namespace aopbip {

const char* type_name(Type t) { return t == Type::Int ? "int" : "bool"; }

Expr int_lit(std::int64_t v) { return std::make_shared<const ExprNode>(ExprNode{Literal{Type::Int, v}}); }

Expr bool_lit(bool v) { return std::make_shared<const ExprNode>(ExprNode{Literal{Type::Bool, v ? 1 : 0}}); }

Expr var(std::string name) { return std::make_shared<const ExprNode>(ExprNode{VarRef{std::move(name)}}); }

Expr unary(UnaryOp op, Expr e) { return std::make_shared<const ExprNode>(ExprNode{Unary{op, std::move(e)}}); }

Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
    return std::make_shared<const ExprNode>(ExprNode{Binary{op, std::move(lhs), std::move(rhs)}});
}

Expr call(std::string fn, std::vector<Expr> args) {
    return std::make_shared<const ExprNode>(ExprNode{Call{std::move(fn), std::move(args)}});
}

Expr lnot(Expr e) { return unary(UnaryOp::Not, std::move(e)); }
Expr conj(Expr a, Expr b) { return binary(BinaryOp::And, std::move(a), std::move(b)); }
Expr disj(Expr a, Expr b) { return binary(BinaryOp::Or, std::move(a), std::move(b)); }

Expr conj_all(const std::vector<Expr>& es) {
    if (es.empty()) return bool_lit(true);
    Expr acc = es.front();
    for (std::size_t i = 1; i < es.size(); ++i) acc = conj(acc, es[i]);
    return acc;
}

Expr disj_all(const std::vector<Expr>& es) {
    if (es.empty()) return bool_lit(false);
    Expr acc = es.front();
    for (std::size_t i = 1; i < es.size(); ++i) acc = disj(acc, es[i]);
    return acc;
}

bool same(const Expr& a, const Expr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, Literal>) {
                return x.type == y.type && x.value == y.value;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, Unary>) {
                return x.op == y.op && same(x.operand, y.operand);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return x.op == y.op && same(x.lhs, y.lhs) && same(x.rhs, y.rhs);
            } else {
                if (x.fn != y.fn || x.args.size() != y.args.size()) return false;
                for (std::size_t i = 0; i < x.args.size(); ++i)
                    if (!same(x.args[i], y.args[i])) return false;
                return true;
            }
        },
        a->node);
}

bool is_bool_literal(const Expr& e, bool value) {
    const auto* lit = std::get_if<Literal>(&e->node);
    return lit && lit->type == Type::Bool && (lit->value != 0) == value;
}

const char* op_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Mod: return "%";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::And: return "&&";
        case BinaryOp::Or: return "||";
    }
    return "?";
}

namespace {

// Binding strength; higher binds tighter. Must agree with the parser.
int precedence(BinaryOp op) {
    switch (op) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Eq:
        case BinaryOp::Ne: return 3;
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge: return 4;
        case BinaryOp::Add:
        case BinaryOp::Sub: return 5;
        case BinaryOp::Mul:
        case BinaryOp::Div:
        case BinaryOp::Mod: return 6;
    }
    return 0;
}

constexpr int kUnaryPrecedence = 7;

int precedence_of(const Expr& e) {
    if (const auto* b = std::get_if<Binary>(&e->node)) return precedence(b->op);
    if (std::holds_alternative<Unary>(e->node)) return kUnaryPrecedence;
    if (const auto* lit = std::get_if<Literal>(&e->node); lit && lit->type == Type::Int && lit->value < 0)
        return kUnaryPrecedence;
    return 8;
}

void print(std::ostream& os, const Expr& e);

void print_child(std::ostream& os, const Expr& child, int min_prec) {
    if (precedence_of(child) < min_prec) {
        os << '(';
        print(os, child);
        os << ')';
    } else {
        print(os, child);
    }
}

void print(std::ostream& os, const Expr& e) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Literal>) {
                os << format_value(x.type, x.value);
            } else if constexpr (std::is_same_v<T, VarRef>) {
                os << x.name;
            } else if constexpr (std::is_same_v<T, Unary>) {
                os << (x.op == UnaryOp::Neg ? "-" : "!");
                // `-5` reads back as a literal, so a negated literal keeps its parentheses.
                bool literal = std::holds_alternative<Literal>(x.operand->node);
                if (literal && x.op == UnaryOp::Neg) {
                    os << '(';
                    print(os, x.operand);
                    os << ')';
                } else {
                    print_child(os, x.operand, kUnaryPrecedence);
                }
            } else if constexpr (std::is_same_v<T, Binary>) {
                int p = precedence(x.op);
                print_child(os, x.lhs, p);
                os << ' ' << op_symbol(x.op) << ' ';
                print_child(os, x.rhs, p + 1);
            } else {
                os << x.fn << '(';
                for (std::size_t i = 0; i < x.args.size(); ++i) {
                    if (i) os << ", ";
                    print(os, x.args[i]);
                }
                os << ')';
            }
        },
        e->node);
}

void collect_reads(const Expr& e, std::set<std::string>& out) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, VarRef>) {
                out.insert(x.name);
            } else if constexpr (std::is_same_v<T, Unary>) {
                collect_reads(x.operand, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                collect_reads(x.lhs, out);
                collect_reads(x.rhs, out);
            } else if constexpr (std::is_same_v<T, Call>) {
                for (const auto& a : x.args) collect_reads(a, out);
            }
        },
        e->node);
}

}  // namespace

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print(os, e);
    return os.str();
}

std::set<std::string> var_read(const Expr& e) {
    std::set<std::string> out;
    collect_reads(e, out);
    return out;
}

Expr rename_vars(const Expr& e, const std::map<std::string, std::string>& names) {
    return std::visit(
        [&](const auto& x) -> Expr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Literal>) {
                return e;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                auto it = names.find(x.name);
                return it == names.end() ? e : var(it->second);
            } else if constexpr (std::is_same_v<T, Unary>) {
                return unary(x.op, rename_vars(x.operand, names));
            } else if constexpr (std::is_same_v<T, Binary>) {
                return binary(x.op, rename_vars(x.lhs, names), rename_vars(x.rhs, names));
            } else {
                std::vector<Expr> args;
                for (const auto& a : x.args) args.push_back(rename_vars(a, names));
                return call(x.fn, std::move(args));
            }
        },
        e->node);
}

const char* role_name(MarkerRole r) {
    switch (r) {
        case MarkerRole::Before: return "before";
        case MarkerRole::After: return "after";
        case MarkerRole::Set: return "set";
        case MarkerRole::Clear: return "clear";
    }
    return "?";
}

std::optional<MarkerRole> parse_role(const std::string& s) {
    if (s == "before") return MarkerRole::Before;
    if (s == "after") return MarkerRole::After;
    if (s == "set") return MarkerRole::Set;
    if (s == "clear") return MarkerRole::Clear;
    return std::nullopt;
}

bool operator==(const Assign& a, const Assign& b) { return a.target == b.target && same(a.value, b.value); }
bool operator==(const Marker& a, const Marker& b) {
    return a.edge == b.edge && a.owner == b.owner && a.role == b.role;
}
bool operator==(const Skip&, const Skip&) { return true; }

std::string to_string(const Stmt& s) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Assign>) {
                return x.target + " := " + to_string(x.value) + ";";
            } else if constexpr (std::is_same_v<T, Marker>) {
                return std::string("@") + (x.edge == MarkerEdge::Begin ? "begin" : "end") + "(" + x.owner + ", " +
                       role_name(x.role) + ");";
            } else {
                return "skip;";
            }
        },
        s);
}

UpdateFunction assign(std::string target, Expr value) {
    return UpdateFunction{{Assign{std::move(target), std::move(value)}}};
}

UpdateFunction concat(const UpdateFunction& f1, const UpdateFunction& f2) {
    UpdateFunction out = f1;
    out.stmts.insert(out.stmts.end(), f2.stmts.begin(), f2.stmts.end());
    return out;
}

UpdateFunction concat(std::initializer_list<UpdateFunction> fs) {
    UpdateFunction out;
    for (const auto& f : fs) out.stmts.insert(out.stmts.end(), f.stmts.begin(), f.stmts.end());
    return out;
}

std::set<std::string> var_read(const UpdateFunction& f) {
    std::set<std::string> out;
    for (const auto& s : f.stmts)
        if (const auto* a = std::get_if<Assign>(&s)) collect_reads(a->value, out);
    return out;
}

std::set<std::string> var_write(const UpdateFunction& f) {
    std::set<std::string> out;
    for (const auto& s : f.stmts)
        if (const auto* a = std::get_if<Assign>(&s)) out.insert(a->target);
    return out;
}

UpdateFunction rename_vars(const UpdateFunction& f, const std::map<std::string, std::string>& names) {
    UpdateFunction out;
    for (const auto& s : f.stmts) {
        if (const auto* a = std::get_if<Assign>(&s)) {
            auto it = names.find(a->target);
            out.stmts.push_back(Assign{it == names.end() ? a->target : it->second, rename_vars(a->value, names)});
        } else {
            out.stmts.push_back(s);
        }
    }
    return out;
}

UpdateFunction wrap(const UpdateFunction& body, const std::string& owner, MarkerRole role) {
    UpdateFunction out;
    out.stmts.push_back(Marker{MarkerEdge::Begin, owner, role});
    out.stmts.insert(out.stmts.end(), body.stmts.begin(), body.stmts.end());
    out.stmts.push_back(Marker{MarkerEdge::End, owner, role});
    return out;
}

bool starts_with(const UpdateFunction& f, const UpdateFunction& prefix) {
    if (prefix.size() > f.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (!(f.stmts[i] == prefix.stmts[i])) return false;
    return true;
}

bool ends_with(const UpdateFunction& f, const UpdateFunction& suffix) {
    if (suffix.size() > f.size()) return false;
    std::size_t off = f.size() - suffix.size();
    for (std::size_t i = 0; i < suffix.size(); ++i)
        if (!(f.stmts[off + i] == suffix.stmts[i])) return false;
    return true;
}

bool has_block(const UpdateFunction& f, const std::string& owner, MarkerRole role) {
    for (const auto& s : f.stmts)
        if (const auto* m = std::get_if<Marker>(&s); m && m->edge == MarkerEdge::Begin && m->owner == owner && m->role == role)
            return true;
    return false;
}

bool has_marker_of(const UpdateFunction& f, const std::string& owner) {
    for (const auto& s : f.stmts)
        if (const auto* m = std::get_if<Marker>(&s); m && m->owner == owner) return true;
    return false;
}

UpdateFunction strip_blocks(const UpdateFunction& f, const std::string& owner, const std::set<MarkerRole>& roles) {
    UpdateFunction out;
    bool inside = false;
    MarkerRole role = MarkerRole::Before;
    for (const auto& s : f.stmts) {
        const auto* m = std::get_if<Marker>(&s);
        bool ours = m && m->owner == owner && roles.count(m->role);
        if (inside) {
            if (ours && m->edge == MarkerEdge::End && m->role == role) inside = false;
            continue;
        }
        if (ours && m->edge == MarkerEdge::Begin) {
            inside = true;
            role = m->role;
            continue;
        }
        out.stmts.push_back(s);
    }
    return out;
}

namespace {

const std::array<Builtin, 8> kBuiltins = {{
    {"abs", 1, Type::Int},
    {"min", 2, Type::Int},
    {"max", 2, Type::Int},
    {"ite", 3, Type::Int},
    {"sign", 1, Type::Int},
    {"check", 1, Type::Int},
    {"unsign", 1, Type::Int},
    {"pfake", 1, Type::Int},
}};

[[noreturn]] void overflow(const char* what) { throw EvalError(std::string("integer overflow in ") + what); }

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) overflow("*");
    return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) overflow("+");
    return r;
}

}  // namespace

const Builtin* find_builtin(const std::string& name) {
    for (const auto& b : kBuiltins)
        if (b.name == name) return &b;
    return nullptr;
}

std::int64_t apply_builtin(const std::string& name, const std::vector<std::int64_t>& a) {
    const Builtin* b = find_builtin(name);
    if (!b) throw EvalError("unknown function '" + name + "'");
    if (a.size() != b->arity) throw EvalError("wrong number of arguments to '" + name + "'");
    if (name == "abs") {
        if (a[0] == std::numeric_limits<std::int64_t>::min()) overflow("abs");
        return a[0] < 0 ? -a[0] : a[0];
    }
    if (name == "min") return std::min(a[0], a[1]);
    if (name == "max") return std::max(a[0], a[1]);
    if (name == "ite") return a[0] ? a[1] : a[2];
    // Packet helpers: a signed packet carries its last digit once more as signature.
    if (name == "sign") return checked_add(checked_mul(a[0], 10), a[0] % 10);
    if (name == "check") return ((a[0] / 10) % 10 == a[0] % 10) ? 1 : 0;
    if (name == "unsign") return a[0] / 10;
    if (name == "pfake") {
        std::int64_t sig = a[0] % 10;
        std::int64_t packet = a[0] / 10;
        std::int64_t last = packet % 10;
        std::int64_t prev = (packet / 10) % 10;
        std::int64_t swapped = packet - last - prev * 10 + last * 10 + prev;
        return checked_add(checked_mul(swapped, 10), sig);
    }
    throw EvalError("unknown function '" + name + "'");
}

std::int64_t apply_binary(BinaryOp op, std::int64_t a, std::int64_t b) {
    std::int64_t r = 0;
    switch (op) {
        case BinaryOp::Add:
            if (__builtin_add_overflow(a, b, &r)) overflow("+");
            return r;
        case BinaryOp::Sub:
            if (__builtin_sub_overflow(a, b, &r)) overflow("-");
            return r;
        case BinaryOp::Mul:
            if (__builtin_mul_overflow(a, b, &r)) overflow("*");
            return r;
        case BinaryOp::Div:
            if (b == 0) throw EvalError("division by zero");
            if (a == std::numeric_limits<std::int64_t>::min() && b == -1) overflow("/");
            return a / b;
        case BinaryOp::Mod:
            if (b == 0) throw EvalError("modulo by zero");
            if (a == std::numeric_limits<std::int64_t>::min() && b == -1) return 0;
            return a % b;
        case BinaryOp::Lt: return a < b;
        case BinaryOp::Le: return a <= b;
        case BinaryOp::Gt: return a > b;
        case BinaryOp::Ge: return a >= b;
        case BinaryOp::Eq: return a == b;
        case BinaryOp::Ne: return a != b;
        case BinaryOp::And: return (a != 0) && (b != 0);
        case BinaryOp::Or: return (a != 0) || (b != 0);
    }
    return 0;
}

std::int64_t apply_unary(UnaryOp op, std::int64_t a) {
    if (op == UnaryOp::Not) return a == 0 ? 1 : 0;
    if (a == std::numeric_limits<std::int64_t>::min()) overflow("unary -");
    return -a;
}

std::int64_t evaluate(const Expr& e, const Lookup& lookup) {
    return std::visit(
        [&](const auto& x) -> std::int64_t {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Literal>) {
                return x.value;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                return lookup(x.name);
            } else if constexpr (std::is_same_v<T, Unary>) {
                return apply_unary(x.op, evaluate(x.operand, lookup));
            } else if constexpr (std::is_same_v<T, Binary>) {
                std::int64_t l = evaluate(x.lhs, lookup);
                if (x.op == BinaryOp::And && l == 0) return 0;
                if (x.op == BinaryOp::Or && l != 0) return 1;
                return apply_binary(x.op, l, evaluate(x.rhs, lookup));
            } else {
                if (x.fn == "ite" && x.args.size() == 3)
                    return evaluate(x.args[0], lookup) ? evaluate(x.args[1], lookup) : evaluate(x.args[2], lookup);
                std::vector<std::int64_t> args;
                for (const auto& a : x.args) args.push_back(evaluate(a, lookup));
                return apply_builtin(x.fn, args);
            }
        },
        e->node);
}

void execute(const UpdateFunction& f, std::map<std::string, std::int64_t>& env) {
    Lookup lookup = [&](const std::string& n) {
        auto it = env.find(n);
        if (it == env.end()) throw EvalError("unbound variable '" + n + "'");
        return it->second;
    };
    for (const auto& s : f.stmts) {
        if (const auto* a = std::get_if<Assign>(&s)) {
            auto it = env.find(a->target);
            if (it == env.end()) throw EvalError("unbound variable '" + a->target + "'");
            it->second = evaluate(a->value, lookup);
        }
    }
}

std::variant<Type, TypeError> type_of(const Expr& e, const TypeEnv& env) {
    using R = std::variant<Type, TypeError>;
    return std::visit(
        [&](const auto& x) -> R {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Literal>) {
                return x.type;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                auto t = env(x.name);
                if (!t) return TypeError{"unknown variable '" + x.name + "'"};
                return *t;
            } else if constexpr (std::is_same_v<T, Unary>) {
                R r = type_of(x.operand, env);
                if (std::holds_alternative<TypeError>(r)) return r;
                Type want = x.op == UnaryOp::Neg ? Type::Int : Type::Bool;
                if (std::get<Type>(r) != want)
                    return TypeError{std::string("operand of '") + (x.op == UnaryOp::Neg ? "-" : "!") + "' must be " +
                                     type_name(want)};
                return want;
            } else if constexpr (std::is_same_v<T, Binary>) {
                R l = type_of(x.lhs, env);
                if (std::holds_alternative<TypeError>(l)) return l;
                R r = type_of(x.rhs, env);
                if (std::holds_alternative<TypeError>(r)) return r;
                Type lt = std::get<Type>(l), rt = std::get<Type>(r);
                std::string sym = op_symbol(x.op);
                switch (x.op) {
                    case BinaryOp::Add:
                    case BinaryOp::Sub:
                    case BinaryOp::Mul:
                    case BinaryOp::Div:
                    case BinaryOp::Mod:
                        if (lt != Type::Int || rt != Type::Int) return TypeError{"operands of '" + sym + "' must be int"};
                        return Type::Int;
                    case BinaryOp::Lt:
                    case BinaryOp::Le:
                    case BinaryOp::Gt:
                    case BinaryOp::Ge:
                        if (lt != Type::Int || rt != Type::Int) return TypeError{"operands of '" + sym + "' must be int"};
                        return Type::Bool;
                    case BinaryOp::Eq:
                    case BinaryOp::Ne:
                        if (lt != rt) return TypeError{"operands of '" + sym + "' have different types"};
                        return Type::Bool;
                    case BinaryOp::And:
                    case BinaryOp::Or:
                        if (lt != Type::Bool || rt != Type::Bool)
                            return TypeError{"operands of '" + sym + "' must be bool"};
                        return Type::Bool;
                }
                return TypeError{"bad operator"};
            } else {
                const Builtin* b = find_builtin(x.fn);
                if (!b) return TypeError{"unknown function '" + x.fn + "'"};
                if (x.args.size() != b->arity)
                    return TypeError{"function '" + x.fn + "' expects " + std::to_string(b->arity) + " argument(s)"};
                std::vector<Type> ts;
                for (const auto& a : x.args) {
                    R r = type_of(a, env);
                    if (std::holds_alternative<TypeError>(r)) return r;
                    ts.push_back(std::get<Type>(r));
                }
                if (x.fn == "ite") {
                    if (ts[0] != Type::Bool) return TypeError{"first argument of 'ite' must be bool"};
                    if (ts[1] != ts[2]) return TypeError{"branches of 'ite' have different types"};
                    return ts[1];
                }
                for (Type t : ts)
                    if (t != Type::Int) return TypeError{"arguments of '" + x.fn + "' must be int"};
                return b->result;
            }
        },
        e->node);
}

bool has_literal_zero_division(const Expr& e) {
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Unary>) {
                return has_literal_zero_division(x.operand);
            } else if constexpr (std::is_same_v<T, Binary>) {
                if (x.op == BinaryOp::Div || x.op == BinaryOp::Mod) {
                    const auto* lit = std::get_if<Literal>(&x.rhs->node);
                    if (lit && lit->value == 0) return true;
                }
                return has_literal_zero_division(x.lhs) || has_literal_zero_division(x.rhs);
            } else if constexpr (std::is_same_v<T, Call>) {
                for (const auto& a : x.args)
                    if (has_literal_zero_division(a)) return true;
                return false;
            } else {
                return false;
            }
        },
        e->node);
}

std::string format_value(Type t, std::int64_t v) {
    if (t == Type::Bool) return v ? "true" : "false";
    return std::to_string(v);
}

}  // namespace aopbip

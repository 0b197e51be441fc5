#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace aopbip {

enum class Type { Int, Bool };

const char* type_name(Type t);

enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

struct ExprNode;
// Immutable expression tree; nodes are shared between copies.
using Expr = std::shared_ptr<const ExprNode>;

struct Literal {
    Type type;
    std::int64_t value;
};

struct VarRef {
    std::string name;
};

struct Unary {
    UnaryOp op;
    Expr operand;
};

struct Binary {
    BinaryOp op;
    Expr lhs;
    Expr rhs;
};

struct Call {
    std::string fn;
    std::vector<Expr> args;
};

struct ExprNode {
    std::variant<Literal, VarRef, Unary, Binary, Call> node;
};

Expr int_lit(std::int64_t v);
Expr bool_lit(bool v);
Expr var(std::string name);
Expr unary(UnaryOp op, Expr e);
Expr binary(BinaryOp op, Expr lhs, Expr rhs);
Expr call(std::string fn, std::vector<Expr> args);
Expr lnot(Expr e);
Expr conj(Expr a, Expr b);
Expr disj(Expr a, Expr b);
// Empty conjunction is `true`, empty disjunction is `false`.
Expr conj_all(const std::vector<Expr>& es);
Expr disj_all(const std::vector<Expr>& es);

bool same(const Expr& a, const Expr& b);
bool is_bool_literal(const Expr& e, bool value);
const char* op_symbol(BinaryOp op);
std::string to_string(const Expr& e);

std::set<std::string> var_read(const Expr& e);
// Renames variable references; names absent from the map are kept.
Expr rename_vars(const Expr& e, const std::map<std::string, std::string>& names);

// Statements and update functions.

enum class MarkerEdge { Begin, End };
enum class MarkerRole { Before, After, Set, Clear };

const char* role_name(MarkerRole r);
std::optional<MarkerRole> parse_role(const std::string& s);

struct Assign {
    std::string target;
    Expr value;
};

struct Marker {
    MarkerEdge edge;
    std::string owner;
    MarkerRole role;
};

struct Skip {};

bool operator==(const Assign& a, const Assign& b);
bool operator==(const Marker& a, const Marker& b);
bool operator==(const Skip&, const Skip&);

using Stmt = std::variant<Assign, Marker, Skip>;

std::string to_string(const Stmt& s);

struct UpdateFunction {
    std::vector<Stmt> stmts;

    bool empty() const { return stmts.empty(); }
    std::size_t size() const { return stmts.size(); }
    friend bool operator==(const UpdateFunction& a, const UpdateFunction& b) { return a.stmts == b.stmts; }
};

UpdateFunction assign(std::string target, Expr value);
UpdateFunction concat(const UpdateFunction& f1, const UpdateFunction& f2);
UpdateFunction concat(std::initializer_list<UpdateFunction> fs);

std::set<std::string> var_read(const UpdateFunction& f);
std::set<std::string> var_write(const UpdateFunction& f);
UpdateFunction rename_vars(const UpdateFunction& f, const std::map<std::string, std::string>& names);

// Marker blocks: begin(owner, role) body end(owner, role).
UpdateFunction wrap(const UpdateFunction& body, const std::string& owner, MarkerRole role);
bool starts_with(const UpdateFunction& f, const UpdateFunction& prefix);
bool ends_with(const UpdateFunction& f, const UpdateFunction& suffix);
bool has_block(const UpdateFunction& f, const std::string& owner, MarkerRole role);
bool has_marker_of(const UpdateFunction& f, const std::string& owner);
// Removes every block owned by `owner` whose role is in `roles`, markers included.
UpdateFunction strip_blocks(const UpdateFunction& f, const std::string& owner, const std::set<MarkerRole>& roles);

// Evaluation.

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Builtin {
    std::string name;
    std::size_t arity;
    Type result;  // ite is polymorphic in its branches
};

// Pure helper functions available in expressions.
const Builtin* find_builtin(const std::string& name);
std::int64_t apply_builtin(const std::string& name, const std::vector<std::int64_t>& args);

std::int64_t apply_binary(BinaryOp op, std::int64_t a, std::int64_t b);
std::int64_t apply_unary(UnaryOp op, std::int64_t a);

using Lookup = std::function<std::int64_t(const std::string&)>;
std::int64_t evaluate(const Expr& e, const Lookup& lookup);
void execute(const UpdateFunction& f, std::map<std::string, std::int64_t>& env);

// Static typing; `type_of_var` returns nullopt for unknown names.
struct TypeError {
    std::string message;
};
using TypeEnv = std::function<std::optional<Type>(const std::string&)>;
std::variant<Type, TypeError> type_of(const Expr& e, const TypeEnv& env);
// Division or modulo whose right operand is the literal 0.
bool has_literal_zero_division(const Expr& e);

std::string format_value(Type t, std::int64_t v);

}  // namespace aopbip

#pragma once

// Fixed-point regular expressions over a finite alphabet: the syntax
// 0 | 1 | a | X | e+f | e.f | mu X e | nu X e, with the structural
// analyses everything else in this project is built on (free variables,
// productivity/guardedness, unfolding, Fischer-Ladner closure, the
// dependency order and finite approximants).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace munu {

enum class ExprKind : std::uint8_t { Zero, One, Letter, Var, Sum, Prod, Mu, Nu };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable AST node. Sum/Prod use lhs/rhs, Mu/Nu store the binder name in
// `var` and the body in `lhs`.
struct Expr {
    ExprKind kind;
    char letter = 0;
    std::string var;
    ExprPtr lhs, rhs;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
    std::size_t position;
};

class DomainError : public std::runtime_error {
  public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Constructors.
ExprPtr mk_zero();
ExprPtr mk_one();
ExprPtr mk_letter(char a);
ExprPtr mk_var(const std::string& name);
ExprPtr mk_sum(ExprPtr a, ExprPtr b);
ExprPtr mk_prod(ExprPtr a, ExprPtr b);
ExprPtr mk_mu(const std::string& var, ExprPtr body);
ExprPtr mk_nu(const std::string& var, ExprPtr body);

// Letters admitted by the concrete syntax: a..z plus the bracket pair < >
// used for Dyck-style examples.
bool is_letter_char(char c);

// Parse the concrete syntax. `alphabet` restricts the permitted letters;
// an empty set admits every letter character. `require_closed` rejects
// free variables.
ExprPtr parse_expr(const std::string& text, const std::set<char>& alphabet = {},
                   bool require_closed = true);

// Pretty printer (keeps user-chosen binder names).
std::string print_expr(const ExprPtr& e);

// Canonical form: bound variables renamed V0, V1, ... in traversal order.
// Two expressions are alpha-equivalent iff their canonical prints agree.
ExprPtr canon(const ExprPtr& e);
std::string canon_print(const ExprPtr& e);
bool alpha_equal(const ExprPtr& a, const ExprPtr& b);

std::set<std::string> free_vars(const ExprPtr& e);
bool is_closed(const ExprPtr& e);

// Letters literally occurring in e.
std::set<char> letters_of(const ExprPtr& e);

// AST size (number of nodes).
int expr_size(const ExprPtr& e);

struct Classification {
    bool productive = false;
    bool left_productive = false;
    bool guarded = false;
    bool left_guarded = false;
};
Classification classify(const ExprPtr& e);

bool is_mu_only(const ExprPtr& e);

// Capture-avoiding substitution of `value` for free occurrences of `var`.
ExprPtr subst(const ExprPtr& e, const std::string& var, const ExprPtr& value);

// One unfolding of a fixed point: mu X f  |->  f[X := mu X f] (same for nu).
// Throws DomainError on anything else.
ExprPtr unfold(const ExprPtr& e);

// n-th approximant of a mu-expression: f^0(0) = 0, f^{n+1}(0) = f(f^n(0)).
ExprPtr approximant(const ExprPtr& e, int n);

// Fischer-Ladner closure: smallest set containing e closed under closed
// subformulas and fixed-point unfoldings. Finite; linear in |e|.
std::vector<ExprPtr> fl_closure(const ExprPtr& e);

// Paths into the AST (child indices; Mu/Nu body is child 0).
using Path = std::vector<int>;
ExprPtr subexpr_at(const ExprPtr& e, const Path& path);
ExprPtr replace_at(const ExprPtr& e, const Path& path, const ExprPtr& value);
// Paths of all free occurrences of `var` in e.
std::vector<Path> var_paths(const ExprPtr& e, const std::string& var);

// Total well-order extending the dependency order <=_FL x (reverse
// subformula). Returns <0, 0, >0 like strcmp; 0 means alpha-equal.
int dependency_compare(const ExprPtr& a, const ExprPtr& b);

// Convenience ordering functor for containers keyed by expression.
struct ExprCanonLess {
    bool operator()(const ExprPtr& a, const ExprPtr& b) const {
        return canon_print(a) < canon_print(b);
    }
};

// A cedent is an ordered list of expressions, read as their product.
using Cedent = std::vector<ExprPtr>;

// Product of a cedent's items (1 when empty), grouped to the right.
ExprPtr cedent_product(const Cedent& c);

// True iff a occurs as a subformula of b, up to alpha-equivalence.
bool is_subformula(const ExprPtr& a, const ExprPtr& b);

}  // namespace munu

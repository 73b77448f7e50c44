#include "munu/expr.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace munu {

namespace {

ExprPtr make(ExprKind k) {
    auto e = std::make_shared<Expr>();
    const_cast<Expr&>(*e).kind = k;
    return e;
}

}  // namespace

ExprPtr mk_zero() {
    static ExprPtr z = make(ExprKind::Zero);
    return z;
}

ExprPtr mk_one() {
    static ExprPtr o = make(ExprKind::One);
    return o;
}

ExprPtr mk_letter(char a) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Letter;
    e->letter = a;
    return e;
}

ExprPtr mk_var(const std::string& name) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Var;
    e->var = name;
    return e;
}

ExprPtr mk_sum(ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Sum;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

ExprPtr mk_prod(ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Prod;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

ExprPtr mk_mu(const std::string& var, ExprPtr body) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Mu;
    e->var = var;
    e->lhs = std::move(body);
    return e;
}

ExprPtr mk_nu(const std::string& var, ExprPtr body) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Nu;
    e->var = var;
    e->lhs = std::move(body);
    return e;
}

bool is_letter_char(char c) {
    return (c >= 'a' && c <= 'z') || c == '<' || c == '>';
}

// ---------------------------------------------------------------------------
// Parser.
//
// expr    := sum
// sum     := prod ('+' prod)*
// prod    := atom+            (juxtaposition, grouped to the right: a b c = a(bc))
// atom    := '0' | '1' | letter | VAR | '(' expr ')' | ('mu'|'nu') VAR '.' expr
//
// A binder's body extends maximally to the right, so a binder can only be the
// last factor of a product unless parenthesised.
// ---------------------------------------------------------------------------

namespace {

struct Parser {
    const std::string& text;
    std::size_t pos = 0;
    const std::set<char>& alphabet;

    explicit Parser(const std::string& t, const std::set<char>& a) : text(t), alphabet(a) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) pos++;
    }

    bool eof() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    bool starts_ident() {
        char c = peek();
        return c >= 'A' && c <= 'Z';
    }

    std::string read_ident() {
        skip_ws();
        std::size_t start = pos;
        if (!(text[pos] >= 'A' && text[pos] <= 'Z')) throw ParseError("expected identifier", pos);
        pos++;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            pos++;
        return text.substr(start, pos - start);
    }

    // "mu" / "nu" keyword lookahead: an identifier-like lowercase word.
    std::optional<std::string> peek_keyword() {
        skip_ws();
        if (pos + 1 < text.size() && (text.compare(pos, 2, "mu") == 0 || text.compare(pos, 2, "nu") == 0)) {
            // must not be followed by another letter (which would be a product
            // of letters like "m u" -- but 'm','u' are letters themselves, so
            // require whitespace or uppercase after the keyword)
            if (pos + 2 >= text.size()) return std::nullopt;
            char c = text[pos + 2];
            if (std::isspace(static_cast<unsigned char>(c)) || (c >= 'A' && c <= 'Z'))
                return text.substr(pos, 2);
        }
        return std::nullopt;
    }

    ExprPtr parse_sum() {
        ExprPtr acc = parse_prod();
        while (peek() == '+') {
            pos++;
            ExprPtr rhs = parse_prod();
            acc = mk_sum(acc, rhs);
        }
        return acc;
    }

    bool at_atom_start() {
        char c = peek();
        if (c == '0' || c == '1' || c == '(') return true;
        if (is_letter_char(c)) return true;
        if (c >= 'A' && c <= 'Z') return true;
        return false;
    }

    ExprPtr parse_binder() {
        std::string kw = *peek_keyword();
        pos += 2;
        std::string v = read_ident();
        skip_ws();
        if (peek() != '.') throw ParseError("expected '.' after binder variable", pos);
        pos++;
        ExprPtr body = parse_sum();  // maximal right scope
        return kw == "mu" ? mk_mu(v, body) : mk_nu(v, body);
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos >= text.size()) throw ParseError("unexpected end of input", pos);
        char c = text[pos];
        if (c == '0') {
            pos++;
            return mk_zero();
        }
        if (c == '1') {
            pos++;
            return mk_one();
        }
        if (c == '(') {
            pos++;
            ExprPtr e = parse_sum();
            if (peek() != ')') throw ParseError("expected ')'", pos);
            pos++;
            return e;
        }
        if (is_letter_char(c)) {
            if (!alphabet.empty() && !alphabet.count(c))
                throw ParseError(std::string("unknown letter '") + c + "'", pos);
            pos++;
            return mk_letter(c);
        }
        if (c >= 'A' && c <= 'Z') return mk_var(read_ident());
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }

    ExprPtr parse_prod() {
        std::vector<ExprPtr> factors;
        for (;;) {
            if (peek_keyword()) {
                // keyword check must come before letter handling: 'm','u','n'
                // are letter characters
                factors.push_back(parse_binder());
                break;  // binder swallowed the rest
            }
            if (!at_atom_start()) break;
            factors.push_back(parse_atom());
        }
        if (factors.empty()) throw ParseError("expected an expression", pos);
        // right-nested product: a b c = a (b c)
        ExprPtr acc = factors.back();
        for (int i = static_cast<int>(factors.size()) - 2; i >= 0; --i)
            acc = mk_prod(factors[i], acc);
        return acc;
    }
};

void collect_free(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out) {
    switch (e->kind) {
        case ExprKind::Zero:
        case ExprKind::One:
        case ExprKind::Letter:
            return;
        case ExprKind::Var:
            if (!bound.count(e->var)) out.insert(e->var);
            return;
        case ExprKind::Sum:
        case ExprKind::Prod:
            collect_free(e->lhs, bound, out);
            collect_free(e->rhs, bound, out);
            return;
        case ExprKind::Mu:
        case ExprKind::Nu: {
            bool fresh = bound.insert(e->var).second;
            collect_free(e->lhs, bound, out);
            if (fresh) bound.erase(e->var);
            return;
        }
    }
}

}  // namespace

ExprPtr parse_expr(const std::string& text, const std::set<char>& alphabet, bool require_closed) {
    Parser p(text, alphabet);
    ExprPtr e = p.parse_sum();
    if (!p.eof()) throw ParseError("trailing input", p.pos);
    if (require_closed) {
        auto fv = free_vars(e);
        if (!fv.empty()) throw ParseError("unbound variable '" + *fv.begin() + "'", 0);
    }
    return e;
}

std::set<std::string> free_vars(const ExprPtr& e) {
    std::set<std::string> bound, out;
    collect_free(e, bound, out);
    return out;
}

bool is_closed(const ExprPtr& e) { return free_vars(e).empty(); }

std::set<char> letters_of(const ExprPtr& e) {
    std::set<char> out;
    std::function<void(const ExprPtr&)> go = [&](const ExprPtr& x) {
        if (x->kind == ExprKind::Letter) out.insert(x->letter);
        if (x->lhs) go(x->lhs);
        if (x->rhs) go(x->rhs);
    };
    go(e);
    return out;
}

int expr_size(const ExprPtr& e) {
    int n = 1;
    if (e->lhs) n += expr_size(e->lhs);
    if (e->rhs) n += expr_size(e->rhs);
    return n;
}

// ---------------------------------------------------------------------------
// Printing.
// ---------------------------------------------------------------------------

namespace {

// context: 0 = sum position (lowest), 1 = product factor, 2 = left factor of
// a product. `is_last` tracks whether this subterm's print ends the enclosing
// delimited region; a binder printed anywhere else must be parenthesised,
// since its body scopes maximally to the right.
void print_rec(const ExprPtr& e, std::ostringstream& out, int context, bool is_last) {
    switch (e->kind) {
        case ExprKind::Zero:
            out << '0';
            return;
        case ExprKind::One:
            out << '1';
            return;
        case ExprKind::Letter:
            out << e->letter;
            return;
        case ExprKind::Var:
            out << e->var;
            return;
        case ExprKind::Sum: {
            bool parens = context >= 1;
            if (parens) out << '(';
            print_rec(e->lhs, out, 0, false);
            out << " + ";
            // a right-nested sum needs parens to round-trip (sums print
            // left-nested flat)
            print_rec(e->rhs, out, e->rhs->kind == ExprKind::Sum ? 1 : 0,
                      parens ? true : is_last);
            if (parens) out << ')';
            return;
        }
        case ExprKind::Prod: {
            bool parens = context >= 2;
            if (parens) out << '(';
            print_rec(e->lhs, out, 2, false);
            out << ' ';
            print_rec(e->rhs, out, 1, parens ? true : is_last);
            if (parens) out << ')';
            return;
        }
        case ExprKind::Mu:
        case ExprKind::Nu: {
            bool parens = !is_last;
            if (parens) out << '(';
            out << (e->kind == ExprKind::Mu ? "mu " : "nu ") << e->var << ".";
            print_rec(e->lhs, out, 0, true);
            if (parens) out << ')';
            return;
        }
    }
}

}  // namespace

std::string print_expr(const ExprPtr& e) {
    std::ostringstream out;
    print_rec(e, out, 0, true);
    return out.str();
}

// ---------------------------------------------------------------------------
// Canonical renaming and alpha-equality.
// ---------------------------------------------------------------------------

namespace {

ExprPtr canon_rec(const ExprPtr& e, std::map<std::string, std::string>& env, int& counter) {
    switch (e->kind) {
        case ExprKind::Zero:
        case ExprKind::One:
        case ExprKind::Letter:
            return e;
        case ExprKind::Var: {
            auto it = env.find(e->var);
            return it == env.end() ? e : mk_var(it->second);
        }
        case ExprKind::Sum: {
            return mk_sum(canon_rec(e->lhs, env, counter), canon_rec(e->rhs, env, counter));
        }
        case ExprKind::Prod: {
            return mk_prod(canon_rec(e->lhs, env, counter), canon_rec(e->rhs, env, counter));
        }
        case ExprKind::Mu:
        case ExprKind::Nu: {
            std::string fresh = "V" + std::to_string(counter++);
            auto saved = env.find(e->var) == env.end() ? std::optional<std::string>{}
                                                       : std::optional<std::string>{env[e->var]};
            env[e->var] = fresh;
            ExprPtr body = canon_rec(e->lhs, env, counter);
            if (saved)
                env[e->var] = *saved;
            else
                env.erase(e->var);
            return e->kind == ExprKind::Mu ? mk_mu(fresh, body) : mk_nu(fresh, body);
        }
    }
    return e;
}

}  // namespace

ExprPtr canon(const ExprPtr& e) {
    std::map<std::string, std::string> env;
    int counter = 0;
    return canon_rec(e, env, counter);
}

std::string canon_print(const ExprPtr& e) { return print_expr(canon(e)); }

bool alpha_equal(const ExprPtr& a, const ExprPtr& b) { return canon_print(a) == canon_print(b); }

// ---------------------------------------------------------------------------
// Productivity / guardedness.
// ---------------------------------------------------------------------------

namespace {

bool productive_rec(const ExprPtr& e, bool left_only) {
    switch (e->kind) {
        case ExprKind::Letter:
            return true;
        case ExprKind::Sum:
            return productive_rec(e->lhs, left_only) && productive_rec(e->rhs, left_only);
        case ExprKind::Prod:
            if (left_only) return productive_rec(e->lhs, left_only);
            return productive_rec(e->lhs, left_only) || productive_rec(e->rhs, left_only);
        case ExprKind::Mu:
        case ExprKind::Nu:
            return productive_rec(e->lhs, left_only);
        default:
            return false;
    }
}

// Every variable occurrence must occur free in a productive subexpression.
// Walk with the stack of enclosing subexpressions; at an occurrence of X,
// scan outward until a binder of X (exclusive) looking for a productive
// frame.
bool guarded_rec(const ExprPtr& e, std::vector<ExprPtr>& stack, bool left_only) {
    stack.push_back(e);
    bool ok = true;
    switch (e->kind) {
        case ExprKind::Var: {
            ok = false;
            for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
                if (productive_rec(*it, left_only)) {
                    ok = true;
                    break;
                }
                // moving past a binder of this variable leaves its scope
                if (it + 1 != stack.rend()) {
                    const ExprPtr& parent = *(it + 1);
                    if ((parent->kind == ExprKind::Mu || parent->kind == ExprKind::Nu) &&
                        parent->var == e->var)
                        break;
                }
            }
            break;
        }
        case ExprKind::Sum:
        case ExprKind::Prod:
            ok = guarded_rec(e->lhs, stack, left_only) && guarded_rec(e->rhs, stack, left_only);
            break;
        case ExprKind::Mu:
        case ExprKind::Nu:
            ok = guarded_rec(e->lhs, stack, left_only);
            break;
        default:
            break;
    }
    stack.pop_back();
    return ok;
}

}  // namespace

Classification classify(const ExprPtr& e) {
    Classification c;
    c.productive = productive_rec(e, false);
    c.left_productive = productive_rec(e, true);
    std::vector<ExprPtr> stack;
    c.guarded = guarded_rec(e, stack, false);
    stack.clear();
    c.left_guarded = guarded_rec(e, stack, true);
    return c;
}

bool is_mu_only(const ExprPtr& e) {
    if (e->kind == ExprKind::Nu) return false;
    if (e->lhs && !is_mu_only(e->lhs)) return false;
    if (e->rhs && !is_mu_only(e->rhs)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Substitution, unfolding, approximants.
// ---------------------------------------------------------------------------

namespace {

ExprPtr subst_rec(const ExprPtr& e, const std::string& var, const ExprPtr& value,
                  const std::set<std::string>& value_fv, int& fresh_counter) {
    switch (e->kind) {
        case ExprKind::Zero:
        case ExprKind::One:
        case ExprKind::Letter:
            return e;
        case ExprKind::Var:
            return e->var == var ? value : e;
        case ExprKind::Sum:
            return mk_sum(subst_rec(e->lhs, var, value, value_fv, fresh_counter),
                          subst_rec(e->rhs, var, value, value_fv, fresh_counter));
        case ExprKind::Prod:
            return mk_prod(subst_rec(e->lhs, var, value, value_fv, fresh_counter),
                           subst_rec(e->rhs, var, value, value_fv, fresh_counter));
        case ExprKind::Mu:
        case ExprKind::Nu: {
            if (e->var == var) return e;  // shadowed
            if (value_fv.count(e->var)) {
                // rename the binder to avoid capture
                std::string fresh;
                do {
                    fresh = e->var + "_" + std::to_string(fresh_counter++);
                } while (value_fv.count(fresh) || free_vars(e->lhs).count(fresh));
                ExprPtr renamed_body = subst(e->lhs, e->var, mk_var(fresh));
                ExprPtr body = subst_rec(renamed_body, var, value, value_fv, fresh_counter);
                return e->kind == ExprKind::Mu ? mk_mu(fresh, body) : mk_nu(fresh, body);
            }
            ExprPtr body = subst_rec(e->lhs, var, value, value_fv, fresh_counter);
            return e->kind == ExprKind::Mu ? mk_mu(e->var, body) : mk_nu(e->var, body);
        }
    }
    return e;
}

}  // namespace

ExprPtr subst(const ExprPtr& e, const std::string& var, const ExprPtr& value) {
    auto fv = free_vars(value);
    int counter = 0;
    return subst_rec(e, var, value, fv, counter);
}

ExprPtr unfold(const ExprPtr& e) {
    if (e->kind != ExprKind::Mu && e->kind != ExprKind::Nu)
        throw DomainError("unfold: not a fixed-point expression: " + print_expr(e));
    return subst(e->lhs, e->var, e);
}

ExprPtr approximant(const ExprPtr& e, int n) {
    if (e->kind != ExprKind::Mu)
        throw DomainError("approximant: not a mu-expression: " + print_expr(e));
    ExprPtr acc = mk_zero();
    for (int i = 0; i < n; ++i) acc = subst(e->lhs, e->var, acc);
    return acc;
}

// ---------------------------------------------------------------------------
// Fischer-Ladner closure.
// ---------------------------------------------------------------------------

namespace {

void closed_subformulas(const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (is_closed(e)) out.push_back(e);
    if (e->lhs) closed_subformulas(e->lhs, out);
    if (e->rhs) closed_subformulas(e->rhs, out);
}

}  // namespace

std::vector<ExprPtr> fl_closure(const ExprPtr& e) {
    std::map<std::string, ExprPtr> seen;
    std::vector<ExprPtr> work{e};
    seen[canon_print(e)] = e;
    while (!work.empty()) {
        ExprPtr cur = work.back();
        work.pop_back();
        std::vector<ExprPtr> next;
        closed_subformulas(cur, next);
        if (cur->kind == ExprKind::Mu || cur->kind == ExprKind::Nu) next.push_back(unfold(cur));
        for (auto& f : next) {
            std::string key = canon_print(f);
            if (!seen.count(key)) {
                seen[key] = f;
                work.push_back(f);
            }
        }
    }
    std::vector<ExprPtr> out;
    out.reserve(seen.size());
    for (auto& [k, v] : seen) out.push_back(v);
    return out;
}

// ---------------------------------------------------------------------------
// Paths.
// ---------------------------------------------------------------------------

ExprPtr subexpr_at(const ExprPtr& e, const Path& path) {
    ExprPtr cur = e;
    for (int step : path) {
        if (step == 0 && cur->lhs)
            cur = cur->lhs;
        else if (step == 1 && cur->rhs)
            cur = cur->rhs;
        else
            throw DomainError("subexpr_at: invalid path");
    }
    return cur;
}

ExprPtr replace_at(const ExprPtr& e, const Path& path, const ExprPtr& value) {
    if (path.empty()) return value;
    Path rest(path.begin() + 1, path.end());
    auto copy = std::make_shared<Expr>(*e);
    if (path[0] == 0 && e->lhs)
        copy->lhs = replace_at(e->lhs, rest, value);
    else if (path[0] == 1 && e->rhs)
        copy->rhs = replace_at(e->rhs, rest, value);
    else
        throw DomainError("replace_at: invalid path");
    return copy;
}

namespace {

void var_paths_rec(const ExprPtr& e, const std::string& var, Path& cur, std::vector<Path>& out) {
    switch (e->kind) {
        case ExprKind::Var:
            if (e->var == var) out.push_back(cur);
            return;
        case ExprKind::Sum:
        case ExprKind::Prod:
            cur.push_back(0);
            var_paths_rec(e->lhs, var, cur, out);
            cur.back() = 1;
            var_paths_rec(e->rhs, var, cur, out);
            cur.pop_back();
            return;
        case ExprKind::Mu:
        case ExprKind::Nu:
            if (e->var == var) return;  // shadowed
            cur.push_back(0);
            var_paths_rec(e->lhs, var, cur, out);
            cur.pop_back();
            return;
        default:
            return;
    }
}

}  // namespace

std::vector<Path> var_paths(const ExprPtr& e, const std::string& var) {
    std::vector<Path> out;
    Path cur;
    var_paths_rec(e, var, cur, out);
    return out;
}

// ---------------------------------------------------------------------------
// Dependency order.
//
// The key (|FL(e)|, -|e|, canonical print), compared lexicographically, is a
// total well-order refining the dependency order: e <_FL f forces a strictly
// smaller closure, and within an =_FL class a proper superformula has
// strictly larger size and must come first.
// ---------------------------------------------------------------------------

int dependency_compare(const ExprPtr& a, const ExprPtr& b) {
    std::string pa = canon_print(a), pb = canon_print(b);
    if (pa == pb) return 0;
    auto ka = static_cast<long>(fl_closure(a).size());
    auto kb = static_cast<long>(fl_closure(b).size());
    if (ka != kb) return ka < kb ? -1 : 1;
    int sa = expr_size(a), sb = expr_size(b);
    if (sa != sb) return sa > sb ? -1 : 1;  // larger formula precedes
    return pa < pb ? -1 : 1;
}

ExprPtr cedent_product(const Cedent& c) {
    if (c.empty()) return mk_one();
    ExprPtr acc = c.back();
    for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i) acc = mk_prod(c[i], acc);
    return acc;
}

bool is_subformula(const ExprPtr& a, const ExprPtr& b) {
    std::string target = canon_print(a);
    std::function<bool(const ExprPtr&)> go = [&](const ExprPtr& x) -> bool {
        if (canon_print(x) == target) return true;
        if (x->lhs && go(x->lhs)) return true;
        if (x->rhs && go(x->rhs)) return true;
        return false;
    };
    return go(b);
}

}  // namespace munu

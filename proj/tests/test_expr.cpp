#include "doctest.h"
#include "munu/expr.hpp"

#include <random>

using namespace munu;

namespace {

ExprPtr P(const std::string& s) { return parse_expr(s, {}, false); }

// Random expression generator used by the property tests below. Guardedness
// is obtained by rejection sampling.
struct Gen {
    std::mt19937 rng;
    std::vector<char> alpha{'a', 'b'};
    explicit Gen(unsigned seed) : rng(seed) {}

    int pick(int n) { return static_cast<int>(rng() % n); }

    ExprPtr expr(int budget, std::vector<std::string>& scope, bool allow_nu) {
        if (budget <= 1) {
            int c = pick(scope.empty() ? 3 : 4);
            switch (c) {
                case 0: return mk_zero();
                case 1: return mk_one();
                case 2: return mk_letter(alpha[pick((int)alpha.size())]);
                default: return mk_var(scope[pick((int)scope.size())]);
            }
        }
        int c = pick(allow_nu ? 4 : 3);
        switch (c) {
            case 0: {
                int l = 1 + pick(budget - 1);
                return mk_sum(expr(l, scope, allow_nu), expr(budget - l, scope, allow_nu));
            }
            case 1: {
                int l = 1 + pick(budget - 1);
                return mk_prod(expr(l, scope, allow_nu), expr(budget - l, scope, allow_nu));
            }
            case 2: {
                std::string v = "X" + std::to_string(scope.size());
                scope.push_back(v);
                ExprPtr body = expr(budget - 1, scope, allow_nu);
                scope.pop_back();
                return mk_mu(v, body);
            }
            default: {
                std::string v = "X" + std::to_string(scope.size());
                scope.push_back(v);
                ExprPtr body = expr(budget - 1, scope, allow_nu);
                scope.pop_back();
                return mk_nu(v, body);
            }
        }
    }

    ExprPtr closed_guarded_mu_only(int budget) {
        for (;;) {
            std::vector<std::string> scope;
            ExprPtr e = expr(budget, scope, false);
            if (classify(e).guarded) return e;
        }
    }
};

}  // namespace

TEST_CASE("parse shapes match the expected ASTs") {
    ExprPtr e = P("mu X.(1 + a X b)");
    REQUIRE(e->kind == ExprKind::Mu);
    ExprPtr body = e->lhs;
    REQUIRE(body->kind == ExprKind::Sum);
    CHECK(body->lhs->kind == ExprKind::One);
    // products group to the right: a (X b)
    ExprPtr prod = body->rhs;
    REQUIRE(prod->kind == ExprKind::Prod);
    CHECK(prod->lhs->kind == ExprKind::Letter);
    REQUIRE(prod->rhs->kind == ExprKind::Prod);
    CHECK(prod->rhs->lhs->kind == ExprKind::Var);
    CHECK(prod->rhs->rhs->kind == ExprKind::Letter);

    CHECK(P("0")->kind == ExprKind::Zero);

    ExprPtr z = P("nu Z.(a b Z)");
    REQUIRE(z->kind == ExprKind::Nu);
    REQUIRE(z->lhs->kind == ExprKind::Prod);
    CHECK(z->lhs->lhs->kind == ExprKind::Letter);
    CHECK(z->lhs->rhs->kind == ExprKind::Prod);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_expr("mu X.(a X", {}), ParseError);
    CHECK_THROWS_AS(parse_expr("a X b", {}), ParseError);  // unbound var, closed required
    CHECK_THROWS_AS(parse_expr("c", {'a', 'b'}), ParseError);
    CHECK_NOTHROW(parse_expr("a X b", {}, false));
}

TEST_CASE("free variables") {
    CHECK(free_vars(P("mu X.(a X)")).empty());
    auto fv = free_vars(mk_sum(mk_var("X"), mk_mu("X", mk_var("X"))));
    CHECK(fv == std::set<std::string>{"X"});
    fv = free_vars(mk_prod(mk_var("X"), mk_var("Y")));
    CHECK(fv == std::set<std::string>{"X", "Y"});
}

TEST_CASE("classification") {
    auto c = classify(P("mu X.(1 + a X + X b)"));
    CHECK(c.guarded);
    CHECK_FALSE(c.left_guarded);

    CHECK_FALSE(classify(P("mu X.X")).guarded);
    CHECK(classify(P("mu X.(a X)")).left_guarded);

    // monotonicity
    Gen g(7);
    std::vector<std::string> scope;
    for (int i = 0; i < 300; ++i) {
        ExprPtr e = g.expr(1 + g.pick(12), scope, true);
        auto k = classify(e);
        if (k.left_guarded) CHECK(k.guarded);
        if (k.left_productive) CHECK(k.productive);
    }
}

TEST_CASE("unfold") {
    ExprPtr m = P("mu X.(1 + a X b)");
    CHECK(canon_print(unfold(m)) == canon_print(mk_sum(mk_one(), mk_prod(mk_letter('a'), mk_prod(m, mk_letter('b'))))));
    ExprPtr n = P("nu Z.(a b Z)");
    CHECK(canon_print(unfold(n)) ==
          canon_print(mk_prod(mk_letter('a'), mk_prod(mk_letter('b'), n))));
    ExprPtr s = P("mu X.(a X)");
    CHECK(canon_print(unfold(s)) == canon_print(mk_prod(mk_letter('a'), s)));
    CHECK_THROWS_AS(unfold(P("a")), DomainError);
}

TEST_CASE("fl closure") {
    auto fl1 = fl_closure(P("a"));
    CHECK(fl1.size() == 1);

    ExprPtr m = P("mu X.(a X)");
    auto fl2 = fl_closure(m);
    CHECK(fl2.size() == 3);
    std::set<std::string> prints;
    for (auto& f : fl2) prints.insert(canon_print(f));
    CHECK(prints.count(canon_print(m)) == 1);
    CHECK(prints.count(canon_print(mk_letter('a'))) == 1);
    CHECK(prints.count(canon_print(mk_prod(mk_letter('a'), m))) == 1);

    auto fl3 = fl_closure(P("mu X.(1 + a X b)"));
    CHECK(fl3.size() <= 8);
    std::set<std::string> p3;
    for (auto& f : fl3) p3.insert(canon_print(f));
    CHECK(p3.count("1") == 1);
    CHECK(p3.count("a") == 1);
    CHECK(p3.count("b") == 1);
}

TEST_CASE("fl closure linear bound on random expressions") {
    Gen g(99);
    int tried = 0;
    while (tried < 150) {
        std::vector<std::string> scope;
        ExprPtr e = g.expr(1 + g.pick(40), scope, true);
        if (!is_closed(e)) continue;
        tried++;
        CHECK((int)fl_closure(e).size() <= 2 * expr_size(e));
    }
}

TEST_CASE("approximants") {
    ExprPtr m = P("mu X.(1 + a X b)");
    CHECK(canon_print(approximant(m, 0)) == "0");
    CHECK(canon_print(approximant(m, 1)) == canon_print(P("1 + a 0 b")));
    CHECK_THROWS_AS(approximant(P("nu X.(a X)"), 1), DomainError);
}

TEST_CASE("dependency order") {
    ExprPtr a = P("a");
    ExprPtr m = P("mu X.(a X)");
    ExprPtr am = mk_prod(a, m);
    CHECK(dependency_compare(a, m) < 0);
    CHECK(dependency_compare(m, m) == 0);
    // within an FL class the larger formula precedes
    CHECK(dependency_compare(m, am) > 0);
    CHECK(dependency_compare(am, m) < 0);
}

TEST_CASE("dependency order is total on FL closures") {
    Gen g(3);
    for (int round = 0; round < 40; ++round) {
        ExprPtr e = g.closed_guarded_mu_only(1 + g.pick(10));
        if (!is_closed(e)) continue;
        auto fl = fl_closure(e);
        for (auto& x : fl)
            for (auto& y : fl) {
                int xy = dependency_compare(x, y);
                int yx = dependency_compare(y, x);
                CHECK(xy == -yx);
                if (xy == 0) CHECK(alpha_equal(x, y));
                for (auto& z : fl) {
                    if (xy <= 0 && dependency_compare(y, z) <= 0)
                        CHECK(dependency_compare(x, z) <= 0);
                }
            }
    }
}

TEST_CASE("print/parse round trip is alpha-identity") {
    Gen g(42);
    std::vector<std::string> scope;
    int done = 0;
    while (done < 400) {
        ExprPtr e = g.expr(1 + g.pick(14), scope, true);
        if (!is_closed(e)) continue;
        done++;
        ExprPtr back = parse_expr(print_expr(e), {});
        CHECK(canon_print(back) == canon_print(e));
    }
}

TEST_CASE("alpha equality via canonical renaming") {
    CHECK(alpha_equal(P("mu X.(a X)"), P("mu Y.(a Y)")));
    CHECK_FALSE(alpha_equal(P("mu X.(a X)"), P("mu Y.(b Y)")));
    // shadowing (binders parenthesised: an unparenthesised binder scopes
    // maximally right)
    CHECK(alpha_equal(P("mu X.(a (mu X.(b X)) X)"), P("mu Y.(a (mu Z.(b Z)) Y)")));
    CHECK_FALSE(alpha_equal(P("mu X.(a mu X.(b X) X)"), P("mu Y.(a (mu Z.(b Z)) Y)")));
}

TEST_CASE("substitution avoids capture") {
    // subst X := Y inside mu Y.(a X): binder must be renamed
    ExprPtr e = mk_mu("Y", mk_prod(mk_letter('a'), mk_var("X")));
    ExprPtr r = subst(e, "X", mk_var("Y"));
    auto fv = free_vars(r);
    CHECK(fv == std::set<std::string>{"Y"});
    REQUIRE(r->kind == ExprKind::Mu);
    CHECK(r->var != "Y");
}

TEST_CASE("paths") {
    ExprPtr e = P("mu X.(1 + a X b)");
    CHECK(canon_print(subexpr_at(e, {0, 1, 0})) == "a");
    ExprPtr r = replace_at(e, {0, 0}, mk_zero());
    CHECK(canon_print(r) == canon_print(P("mu X.(0 + a X b)")));
    auto paths = var_paths(e->lhs, "X");
    REQUIRE(paths.size() == 1);
    CHECK(paths[0] == Path{1, 1, 0});
}

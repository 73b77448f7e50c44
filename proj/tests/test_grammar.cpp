#include "doctest.h"
#include "munu/grammar.hpp"

#include <algorithm>
#include <functional>
#include <random>

using namespace munu;

namespace {

ExprPtr P(const std::string& s) { return parse_expr(s); }

std::vector<std::string> words(const std::string& expr, int max_len) {
    return enumerate_words(Cedent{P(expr)}, max_len);
}

ExprPtr random_guarded(std::mt19937& rng, int budget) {
    std::function<ExprPtr(int, std::vector<std::string>&)> gen =
        [&](int b, std::vector<std::string>& scope) -> ExprPtr {
        if (b <= 1) {
            switch (rng() % (scope.empty() ? 3 : 4)) {
                case 0: return mk_zero();
                case 1: return mk_one();
                case 2: return mk_letter(rng() % 2 ? 'a' : 'b');
                default: return mk_var(scope[rng() % scope.size()]);
            }
        }
        switch (rng() % 3) {
            case 0: {
                int l = 1 + (int)(rng() % (b - 1));
                return mk_sum(gen(l, scope), gen(b - l, scope));
            }
            case 1: {
                int l = 1 + (int)(rng() % (b - 1));
                return mk_prod(gen(l, scope), gen(b - l, scope));
            }
            default: {
                std::string v = "X" + std::to_string(scope.size());
                scope.push_back(v);
                ExprPtr body = gen(b - 1, scope);
                scope.pop_back();
                return mk_mu(v, body);
            }
        }
    };
    for (;;) {
        std::vector<std::string> scope;
        ExprPtr e = gen(budget, scope);
        if (is_closed(e) && classify(e).guarded) return e;
    }
}

}  // namespace

TEST_CASE("canonical grammar for a single letter") {
    Cfg g = to_canonical_cfg(P("a"));
    CHECK(g.names.size() == 1);
    CHECK(g.names[g.start] == "X_a");
    REQUIRE(g.prods[g.start].size() == 1);
    REQUIRE(g.prods[g.start][0].size() == 1);
    CHECK(g.prods[g.start][0][0].terminal);
    CHECK(g.prods[g.start][0][0].letter == 'a');
}

TEST_CASE("canonical grammar of mu X.(a X) generates nothing") {
    ExprPtr e = P("mu X.(a X)");
    Cfg g = to_canonical_cfg(e);
    CHECK(g.names.size() == 3);
    for (auto& w : all_words({'a'}, 12)) CHECK_FALSE(cfg_derives(g, g.start, w));
    CHECK(enumerate_words(Cedent{e}, 6).empty());
}

TEST_CASE("canonical grammar rejects nu and unguarded input") {
    CHECK_THROWS_AS(to_canonical_cfg(P("nu X.(a X)")), DomainError);
    CHECK_THROWS_AS(to_canonical_cfg(P("mu X.X")), DomainError);
}

TEST_CASE("anbn bounded language") {
    auto ws = words("mu X.(1 + a X b)", 4);
    CHECK(ws == std::vector<std::string>{"", "ab", "aabb"});
    CHECK(member_finite("aabb", {P("mu X.(1 + a X b)")}));
    CHECK_FALSE(member_finite("a", {P("mu X.(1 + a X b)")}));
    CHECK(member_finite("", {P("1")}));
}

TEST_CASE("a*b* bounded language") {
    auto ws = words("mu X.(1 + a X + X b)", 2);
    CHECK(ws == std::vector<std::string>{"", "a", "b", "aa", "ab", "bb"});
}

TEST_CASE("enumerate of 0 is empty") { CHECK(enumerate_words(Cedent{mk_zero()}, 5).empty()); }

TEST_CASE("epsilon-freeness of left-productive expressions") {
    std::mt19937 rng(11);
    int done = 0;
    while (done < 60) {
        ExprPtr e = random_guarded(rng, 1 + (int)(rng() % 10));
        if (!classify(e).left_productive) continue;
        done++;
        for (auto& w : enumerate_words(Cedent{e}, 3)) CHECK(w != "");
    }
}

TEST_CASE("oracle agreement on random guarded expressions") {
    std::mt19937 rng(5);
    for (int i = 0; i < 60; ++i) {
        ExprPtr e = random_guarded(rng, 1 + (int)(rng() % 12));
        MembershipOracle oracle(Cedent{e});
        // member() itself cross-checks both backends
        for (auto& w : all_words(oracle.letters(), 6)) oracle.member(w);
    }
}

TEST_CASE("canonical grammar bounded language equals oracle language") {
    std::mt19937 rng(17);
    for (int i = 0; i < 40; ++i) {
        ExprPtr e = random_guarded(rng, 1 + (int)(rng() % 10));
        Cfg g = to_canonical_cfg(e);
        MembershipOracle oracle(Cedent{e});
        for (auto& w : all_words(oracle.letters(), 5))
            CHECK(cfg_derives(g, g.start, w) == oracle.member(w));
    }
}

TEST_CASE("approximant chain") {
    ExprPtr m = P("mu X.(1 + a X b)");
    CHECK(enumerate_words(Cedent{approximant(m, 3)}, 6) ==
          std::vector<std::string>{"", "ab", "aabb"});
    std::vector<std::string> prev;
    auto full = enumerate_words(Cedent{m}, 8);
    for (int n = 1; n <= 4; ++n) {
        auto cur = enumerate_words(Cedent{approximant(m, n)}, 8);
        for (auto& w : prev) CHECK(std::find(cur.begin(), cur.end(), w) != cur.end());
        for (auto& w : cur) CHECK(std::find(full.begin(), full.end(), w) != full.end());
        prev = cur;
    }
}

TEST_CASE("cfg_to_expr single equation") {
    std::map<std::string, ExprPtr> sys{{"X", parse_expr("a X + b", {}, false)}};
    ExprPtr e = cfg_to_expr(sys, "X");
    CHECK(is_closed(e));
    CHECK(classify(e).left_guarded);
    CHECK(enumerate_words(Cedent{e}, 3) == std::vector<std::string>{"b", "ab", "aab"});

    std::map<std::string, ExprPtr> triv{{"X", P("a")}};
    CHECK(enumerate_words(Cedent{cfg_to_expr(triv, "X")}, 2) == std::vector<std::string>{"a"});
}

TEST_CASE("cfg_to_expr two equations") {
    std::map<std::string, ExprPtr> sys{{"X", parse_expr("a Y", {}, false)},
                                       {"Y", parse_expr("b X + b", {}, false)}};
    ExprPtr e = cfg_to_expr(sys, "X");
    CHECK(enumerate_words(Cedent{e}, 4) == std::vector<std::string>{"ab", "abab"});
    std::map<std::string, ExprPtr> bad{{"X", parse_expr("X a", {}, false)}};
    CHECK_THROWS_AS(cfg_to_expr(bad, "X"), DomainError);
}

TEST_CASE("lasso normalization") {
    LassoWord w = normalize_lasso("a", "ba");
    CHECK(w.prefix == "");
    CHECK(w.loop == "ab");
    LassoWord v = normalize_lasso("", "abab");
    CHECK(v.loop == "ab");
    CHECK(lasso_equal(LassoWord{"a", "ba"}, LassoWord{"", "ab"}));
    CHECK_FALSE(lasso_equal(LassoWord{"", "ab"}, LassoWord{"", "ba"}));
    CHECK_THROWS_AS(normalize_lasso("a", ""), DomainError);
}

TEST_CASE("muller grammar accepts (ab)^omega for nu Z.(a b Z)") {
    MullerCfg m = to_muller_cfg(P("nu Z.(a b Z)"));
    CHECK(accepts_lasso(m, LassoWord{"", "ab"}) == Tri::Yes);
    CHECK(accepts_lasso(m, LassoWord{"a", "ba"}) == Tri::Yes);
    CHECK(accepts_lasso(m, LassoWord{"", "ba"}) == Tri::No);
    CHECK(accepts_lasso(m, LassoWord{"", "a"}) == Tri::No);
}

TEST_CASE("muller grammar on the Dyck omega examples") {
    // d = mu X.(<> + <X>X), d^omega = nu Y.(d Y)
    ExprPtr d = P("mu X.(< > + < X > X)");
    ExprPtr dw = mk_nu("Y", mk_prod(d, mk_var("Y")));
    REQUIRE(classify(dw).left_guarded);
    MullerCfg m = to_muller_cfg(dw);
    CHECK(accepts_lasso(m, LassoWord{"", "<>"}) == Tri::Yes);
    CHECK(accepts_lasso(m, LassoWord{"", "<"}) == Tri::No);
}

TEST_CASE("muller grammar rejects non-left-guarded input") {
    CHECK_THROWS_AS(to_muller_cfg(P("mu X.(1 + a X + X b)")), DomainError);
}

TEST_CASE("muller acceptance predicate") {
    ExprPtr e = P("nu Z.(a b Z)");
    MullerCfg m = to_muller_cfg(e);
    int marked_root = m.cfg.start;
    CHECK(m.cfg.marked[marked_root]);
    CHECK(m.acceptable({marked_root}));
    // a mu-least marked set is not acceptable
    ExprPtr ones = P("mu X.(a + a X)");
    MullerCfg m2 = to_muller_cfg(ones);
    CHECK_FALSE(m2.acceptable({m2.cfg.start}));
    // empty marked part is not acceptable
    CHECK_FALSE(m.acceptable({0}));
}

TEST_CASE("grammar JSON is deterministic and alpha-invariant") {
    std::string j1 = cfg_to_json(to_canonical_cfg(P("mu X.(1 + a X b)")));
    std::string j2 = cfg_to_json(to_canonical_cfg(P("mu Y.(1 + a Y b)")));
    CHECK(j1 == j2);
    CHECK(j1.find("\"start\"") != std::string::npos);
    MullerCfg m = to_muller_cfg(P("nu Z.(a b Z)"));
    CHECK(muller_to_json(m).find("acceptable_base") != std::string::npos);
}

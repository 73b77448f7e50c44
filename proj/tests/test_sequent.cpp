#include "doctest.h"
#include "munu/sequent.hpp"

#include <functional>
#include <random>

using namespace munu;

namespace {

ExprPtr P(const std::string& s) { return parse_expr(s); }
Hypersequent S(const std::string& s) { return parse_sequent(s); }

const char* ANBN = "mu X.(1 + a X b)";
const char* ASBS = "mu X.(1 + a X + X b)";

}  // namespace

TEST_CASE("sequent parsing and canonical form") {
    Hypersequent s = S("{mu X.(1+a X b)} |- [(mu X.(1+a X+X b))]");
    REQUIRE(s.lhs.size() == 1);
    CHECK(alpha_equal(s.lhs[0], P(ANBN)));
    REQUIRE(s.rhs.size() == 1);
    CHECK(alpha_equal(s.rhs[0][0], P(ASBS)));

    // duplicate cedents collapse; order is canonical
    Hypersequent t = S("a |- [b], [a], [b]");
    CHECK(t.rhs.size() == 2);
    CHECK(cedent_key(t.rhs[0]) == "[a]");
    CHECK(cedent_key(t.rhs[1]) == "[b]");

    Hypersequent empty_rhs = S("0 |- {}");
    CHECK(empty_rhs.rhs.empty());
    Hypersequent empty_ced = S("|- []");
    REQUIRE(empty_ced.rhs.size() == 1);
    CHECK(empty_ced.rhs[0].empty());

    // round trip through print
    CHECK(parse_sequent(s.print()).key() == s.key());
    CHECK(parse_sequent(empty_rhs.print()).key() == empty_rhs.key());
    CHECK(parse_sequent(empty_ced.print()).key() == empty_ced.key());
}

TEST_CASE("mu-l on anbn mirrors the unfolding") {
    Hypersequent s = S(std::string(ANBN) + " |- [" + ASBS + "]");
    RuleInstance inst = apply_rule(s, RuleKind::MuL, Principal{-1, 0});
    REQUIRE(inst.premisses.size() == 1);
    Hypersequent expect = S(std::string("1 + a (") + ANBN + ") b |- [" + ASBS + "]");
    CHECK(inst.premisses[0].key() == expect.key());
    // ancestry: the unfolding is the immediate descendant of the principal
    REQUIRE(inst.ancestry[0].lhs.size() == 1);
    CHECK(inst.ancestry[0].lhs[0] == 0);
}

TEST_CASE("init has zero premisses and a fixed conclusion shape") {
    RuleInstance inst = apply_rule(S("|- []"), RuleKind::Init, {});
    CHECK(inst.premisses.empty());
    CHECK_THROWS_AS(apply_rule(S("a |- []"), RuleKind::Init, {}), DomainError);
    CHECK_THROWS_AS(apply_rule(S("|- [a]"), RuleKind::Init, {}), DomainError);
}

TEST_CASE("sum-l yields two premisses in schema order") {
    Hypersequent s = S("a, b + c, a |- [a]");
    RuleInstance inst = apply_rule(s, RuleKind::SumL, Principal{-1, 1});
    REQUIRE(inst.premisses.size() == 2);
    CHECK(inst.premisses[0].key() == S("a, b, a |- [a]").key());
    CHECK(inst.premisses[1].key() == S("a, c, a |- [a]").key());
    CHECK(inst.ancestry[0].lhs == std::vector<int>{0, 1, 2});
}

TEST_CASE("prod-l splits and shifts ancestry") {
    Hypersequent s = S("a b, c |- [a]");
    RuleInstance inst = apply_rule(s, RuleKind::ProdL, Principal{-1, 0});
    CHECK(inst.premisses[0].key() == S("a, b, c |- [a]").key());
    CHECK(inst.ancestry[0].lhs == std::vector<int>{0, 0, 1});
}

TEST_CASE("k-l consumes the head letter everywhere") {
    Hypersequent s = S("a, b |- [a, c], [a]");
    RuleInstance inst = apply_rule(s, RuleKind::KL, {});
    CHECK(inst.letter == 'a');
    CHECK(inst.premisses[0].key() == S("b |- [c], []").key());
    // side condition: every cedent must start with the letter
    CHECK_THROWS_AS(apply_rule(S("a |- [b]"), RuleKind::KL, {}), DomainError);
    CHECK_THROWS_AS(apply_rule(S("a |- [a], []"), RuleKind::KL, {}), DomainError);
    // empty RHS set is fine (aS with S empty)
    CHECK(apply_rule(S("a, b |- {}"), RuleKind::KL, {}).premisses[0].key() == S("b |- {}").key());
}

TEST_CASE("k-r consumes the tail letter everywhere") {
    Hypersequent s = S("b, a |- [c, a], [a]");
    RuleInstance inst = apply_rule(s, RuleKind::KR, {});
    CHECK(inst.letter == 'a');
    CHECK(inst.premisses[0].key() == S("b |- [c], []").key());
}

TEST_CASE("w-r discards one cedent and records it") {
    Hypersequent s = S("a |- [a], [b]");
    RuleInstance inst = apply_rule(s, RuleKind::WeakR, Principal{1, 0});
    CHECK(inst.premisses[0].key() == S("a |- [a]").key());
    CHECK(cedent_key(inst.weakened) == "[b]");
}

TEST_CASE("sum-r puts both cedents in one premiss") {
    Hypersequent s = S("a |- [b + c, d]");
    RuleInstance inst = apply_rule(s, RuleKind::SumR, Principal{0, 0});
    REQUIRE(inst.premisses.size() == 1);
    CHECK(inst.premisses[0].key() == S("a |- [b, d], [c, d]").key());
}

TEST_CASE("0-r drops the whole cedent") {
    // canonical order sorts [a] before [b, 0, c]
    RuleInstance inst = apply_rule(S("a |- [b, 0, c], [a]"), RuleKind::ZeroR, Principal{1, 1});
    CHECK(inst.premisses[0].key() == S("a |- [a]").key());
}

TEST_CASE("rhs set collapse keeps a single ancestor per occurrence") {
    // +-r creates a duplicate of an existing cedent; the set collapses and
    // every premiss occurrence still has exactly one ancestor
    Hypersequent s = S("a |- [a + b], [a]");
    RuleInstance inst = apply_rule(s, RuleKind::SumR, Principal{0, 0});
    REQUIRE(inst.premisses.size() == 1);
    CHECK(inst.premisses[0].key() == S("a |- [a], [b]").key());
    auto& anc = inst.ancestry[0];
    REQUIRE(anc.rhs.size() == 2);
    for (auto& ced : anc.rhs)
        for (auto& occ : ced) {
            CHECK(occ.cedent >= 0);
            CHECK(occ.cedent < (int)s.rhs.size());
        }
}

TEST_CASE("is_leftmost") {
    // nu-r on a singleton cedent is leftmost
    Hypersequent s1 = S("|- [nu X.(a X)]");
    CHECK(is_leftmost(apply_rule(s1, RuleKind::NuR, Principal{0, 0})));
    // the same step at index 1 is not
    Hypersequent s2 = S("|- [a, nu X.(a X)]");
    CHECK_FALSE(is_leftmost(apply_rule(s2, RuleKind::NuR, Principal{0, 1})));
    // k-r is never leftmost
    Hypersequent s3 = S("a |- [a]");
    CHECK_FALSE(is_leftmost(apply_rule(s3, RuleKind::KR, {})));
    CHECK(is_leftmost(apply_rule(s3, RuleKind::KL, {})));
}

TEST_CASE("seq_valid_upto") {
    CHECK(seq_valid_upto(S(std::string(ANBN) + " |- [" + ASBS + "]"), 8).valid_upto());
    auto r = seq_valid_upto(S(std::string(ASBS) + " |- [" + ANBN + "]"), 8);
    REQUIRE(r.counterexample.has_value());
    CHECK(*r.counterexample == "a");
    CHECK(seq_valid_upto(S("0 |- {}"), 6).valid_upto());
    CHECK_THROWS_AS(seq_valid_upto(S("nu X.(a X) |- {}"), 4), DomainError);
}

// --------------------------------------------------------------------------
// Bounded local soundness (every rule), invertibility (logical rules) and
// the modal property, on randomized instances.
// --------------------------------------------------------------------------

namespace {

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

Hypersequent random_sequent(std::mt19937& rng) {
    auto gen_cedent = [&](int max_items) {
        Cedent c;
        int n = (int)(rng() % (max_items + 1));
        for (int i = 0; i < n; ++i) c.push_back(random_guarded(rng, 1 + (int)(rng() % 5)));
        return c;
    };
    Cedent lhs = gen_cedent(3);
    std::vector<Cedent> rhs;
    int k = (int)(rng() % 3);
    for (int i = 0; i < k; ++i) rhs.push_back(gen_cedent(2));
    // occasionally prepend/append a shared letter so k rules fire
    if (rng() % 3 == 0) {
        char a = rng() % 2 ? 'a' : 'b';
        lhs.insert(lhs.begin(), mk_letter(a));
        for (auto& c : rhs) c.insert(c.begin(), mk_letter(a));
    }
    if (rng() % 3 == 0) {
        char a = rng() % 2 ? 'a' : 'b';
        lhs.push_back(mk_letter(a));
        for (auto& c : rhs) c.push_back(mk_letter(a));
    }
    return Hypersequent::make(std::move(lhs), std::move(rhs));
}

}  // namespace

TEST_CASE("bounded local soundness and invertibility on random instances") {
    std::mt19937 rng(2024);
    const int bound = 6;
    int tested = 0;
    while (tested < 250) {
        Hypersequent s = random_sequent(rng);
        auto apps = enumerate_applicable(s);
        if (apps.empty()) continue;
        auto& pick = apps[rng() % apps.size()];
        RuleInstance inst = apply_rule(s, pick.rule, pick.pos, pick.letter);
        tested++;

        bool premisses_valid = true;
        for (auto& p : inst.premisses)
            if (!seq_valid_upto(p, bound).valid_upto()) premisses_valid = false;
        if (premisses_valid) {
            int concl_bound = bound - (inst.rule == RuleKind::KL || inst.rule == RuleKind::KR ? 1 : 0);
            auto r = seq_valid_upto(s, concl_bound);
            CHECK(r.valid_upto());
        }
        if (rule_is_logical(inst.rule) && seq_valid_upto(s, bound).valid_upto()) {
            for (auto& p : inst.premisses) CHECK(seq_valid_upto(p, bound).valid_upto());
        }
    }
}

TEST_CASE("bounded modal property") {
    // if no w (|w| <= k) in L(a Gamma) \ ({eps} + a L(S_a)) then no w'
    // (|w'| <= k-1) in L(Gamma) \ L(S_a)
    std::mt19937 rng(77);
    const int bound = 6;
    int tested = 0;
    while (tested < 120) {
        char a = rng() % 2 ? 'a' : 'b';
        Cedent lhs{mk_letter(a), random_guarded(rng, 1 + (int)(rng() % 5))};
        std::vector<Cedent> rhs;
        int k = 1 + (int)(rng() % 2);
        for (int i = 0; i < k; ++i) {
            Cedent c{mk_letter(a), random_guarded(rng, 1 + (int)(rng() % 4))};
            rhs.push_back(c);
        }
        Hypersequent with_letter = Hypersequent::make(lhs, rhs);
        if (!seq_valid_upto(with_letter, bound).valid_upto()) continue;
        tested++;
        Cedent inner_lhs(lhs.begin() + 1, lhs.end());
        std::vector<Cedent> inner_rhs;
        for (auto& c : rhs) inner_rhs.push_back(Cedent(c.begin() + 1, c.end()));
        Hypersequent inner = Hypersequent::make(inner_lhs, inner_rhs);
        CHECK(seq_valid_upto(inner, bound - 1).valid_upto());
    }
}

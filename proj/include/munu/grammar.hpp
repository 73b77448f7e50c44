#pragma once

// Grammar backends: the canonical CFG for mu-expressions, its Muller
// extension for omega-words, Bekic-style synthesis of an expression from a
// guarded grammar system, and the word-membership oracles (two independent
// algorithms that must agree) used as ground truth by the proof machinery.

#include "munu/expr.hpp"

#include <optional>
#include <string>
#include <vector>

namespace munu {

struct Cfg {
    struct Sym {
        bool terminal = false;
        char letter = 0;  // when terminal
        int nt = -1;      // when nonterminal
    };
    using Rhs = std::vector<Sym>;

    std::vector<std::string> names;       // nonterminal index -> name
    std::vector<ExprPtr> formulas;        // index -> FL formula (canonical grammars)
    std::vector<bool> marked;             // index -> marked copy (Muller grammars)
    std::vector<std::vector<Rhs>> prods;  // index -> alternatives
    int start = -1;

    int find(const std::string& name) const;
};

struct MullerCfg {
    Cfg cfg;
    // Per nonterminal: rank in the total dependency order over FL(e), and
    // whether the underlying formula is a nu-formula. Acceptance of a set G
    // of nonterminals: the marked part of G must be nonempty, have a unique
    // subformula-least element, and that element must be a nu-formula.
    std::vector<int> dep_rank;
    std::vector<bool> is_nu;

    bool acceptable(const std::vector<int>& nts) const;
};

// Canonical grammar over FL(e): nonterminals X_f for f in FL(e), start X_e.
// Requires e closed, guarded, mu-only.
Cfg to_canonical_cfg(const ExprPtr& e);

// Muller grammar with marked/normal copies guessing a nu-thread on the fly.
// Requires e closed and left-guarded.
MullerCfg to_muller_cfg(const ExprPtr& e);

// Least solution of a guarded equational system {X_i -> e_i} by eliminating
// one variable at a time. RHSs must be left-guarded (in bound and system
// variables alike); result is closed and left-guarded.
ExprPtr cfg_to_expr(const std::map<std::string, ExprPtr>& system, const std::string& start);

// JSON (text, sorted keys, trailing newline) for diff-able goldens.
std::string cfg_to_json(const Cfg& g);
std::string muller_to_json(const MullerCfg& g);

// ---------------------------------------------------------------------------
// Finite-word membership.
// ---------------------------------------------------------------------------

// Derivability of w from a single nonterminal, memoized top-down search with
// split-point enumeration. Works on any Cfg.
bool cfg_derives(const Cfg& g, int nt, const std::string& w);

// Membership oracle for a cedent of closed, guarded, mu-only expressions.
// Both backends (derivation search and a chart parser) run on every query
// and must agree.
class MembershipOracle {
  public:
    explicit MembershipOracle(const Cedent& cedent);
    bool member(const std::string& w) const;
    const std::set<char>& letters() const { return letters_; }

  private:
    Cfg grammar_;
    std::set<char> letters_;
};

bool member_finite(const std::string& w, const Cedent& cedent);

// Exactly { w : |w| <= max_len, member_finite(w, cedent) }, in length-then-
// lexicographic order.
std::vector<std::string> enumerate_words(const Cedent& cedent, int max_len);
std::vector<std::string> enumerate_words(const MembershipOracle& oracle, int max_len);

// All words over `letters` of length <= max_len, shortest first.
std::vector<std::string> all_words(const std::set<char>& letters, int max_len);

// ---------------------------------------------------------------------------
// Lasso words and omega-acceptance.
// ---------------------------------------------------------------------------

// u . v^omega with v primitive and the representation rotation-normalized.
struct LassoWord {
    std::string prefix;
    std::string loop;

    char at(std::size_t i) const {
        return i < prefix.size() ? prefix[i]
                                 : loop[(i - prefix.size()) % loop.size()];
    }
    std::string str() const { return prefix + ":" + loop; }
};

LassoWord normalize_lasso(std::string prefix, std::string loop);
bool lasso_equal(const LassoWord& a, const LassoWord& b);

enum class Tri { Yes, No, Unknown };

struct LassoBounds {
    int max_sentential = 64;
    int max_cycle_depth = 0;  // 0: auto (10 * |FL(e)|)
    int max_states = 20000;
};

// Bounded search for an accepting lasso-shaped leftmost derivation of w.
Tri accepts_lasso(const MullerCfg& g, const LassoWord& w, const LassoBounds& bounds = {});

}  // namespace munu

#pragma once

// Hypersequents Gamma -> S and the inference rules: schema application with
// principal/auxiliary tracking (immediate-ancestor maps), the leftmost-step
// predicate, and bounded semantic validity of mu-only sequents.

#include "munu/grammar.hpp"

#include <optional>
#include <string>
#include <vector>

namespace munu {

std::string cedent_print(const Cedent& c);
std::string cedent_key(const Cedent& c);

// RHS is a set of cedents: stored sorted by canonical print, duplicates
// removed.
struct Hypersequent {
    Cedent lhs;
    std::vector<Cedent> rhs;

    static Hypersequent make(Cedent lhs, std::vector<Cedent> rhs);
    std::string key() const;  // canonical identity (alpha + set semantics)
    std::string print() const;
    bool mu_only() const;
};

Hypersequent parse_sequent(const std::string& text, const std::set<char>& alphabet = {});

// Parses "[e1, e2, ...]" (or a bare comma-separated list) into a cedent.
Cedent parse_cedent(const std::string& text, const std::set<char>& alphabet = {});

enum class RuleKind {
    Init,
    WeakR,
    KL,
    KR,
    ZeroL,
    OneL,
    ProdL,
    SumL,
    MuL,
    NuL,
    ZeroR,
    OneR,
    ProdR,
    SumR,
    MuR,
    NuR,
};

bool rule_is_logical(RuleKind r);
bool rule_is_left(RuleKind r);
std::string rule_name(RuleKind r, char letter = 0);
std::pair<RuleKind, char> parse_rule_name(const std::string& name);

// Occurrence reference: cedent == -1 addresses the LHS.
struct Occ {
    int cedent = -1;
    int index = 0;
    bool operator==(const Occ&) const = default;
    bool operator<(const Occ& o) const {
        return cedent != o.cedent ? cedent < o.cedent : index < o.index;
    }
};

// Principal position: LHS index, RHS (cedent, index), or for w-r the
// discarded cedent (index unused).
struct Principal {
    int cedent = -1;
    int index = 0;
};

struct RuleInstance {
    RuleKind rule = RuleKind::Init;
    char letter = 0;  // k rules
    Hypersequent conclusion;
    Principal principal{};
    Cedent weakened;  // w-r: the discarded cedent
    std::vector<Hypersequent> premisses;

    // Immediate-ancestor map, one per premiss: every premiss occurrence maps
    // to exactly one conclusion occurrence.
    struct AncMap {
        std::vector<int> lhs;                // premiss LHS idx -> conclusion LHS idx
        std::vector<std::vector<Occ>> rhs;   // [cedent][idx] -> conclusion occurrence
    };
    std::vector<AncMap> ancestry;
};

// Build the unique rule instance with the given conclusion, rule and
// principal position. Throws DomainError when the rule does not match.
RuleInstance apply_rule(const Hypersequent& conclusion, RuleKind rule, Principal pos,
                        char letter = 0);

// All rule instances applicable to a sequent (for tests and search).
struct Applicable {
    RuleKind rule;
    Principal pos;
    char letter;
};
std::vector<Applicable> enumerate_applicable(const Hypersequent& s);

// True iff logical steps act on position 0 of their cedent and the rule is
// not k-r.
bool is_leftmost(const RuleInstance& step);

// Bounded proxy for L(Gamma) subset of L(S): the shortest counterexample of
// length <= max_len, if any. mu-only sequents only.
struct ValidityResult {
    std::optional<std::string> counterexample;
    bool valid_upto() const { return !counterexample.has_value(); }
};
ValidityResult seq_valid_upto(const Hypersequent& s, int max_len);

}  // namespace munu

#pragma once

// Regular (cyclic) preproofs as finite rooted graphs with back-edges:
// well-formedness, thread analysis, and the decidable progress criteria for
// the mu-only and mu/nu systems.

#include "munu/sequent.hpp"

#include <map>
#include <string>
#include <vector>

namespace munu {

struct Preproof {
    struct Child {
        int id = -1;
        bool backedge = false;
    };
    struct Node {
        RuleInstance step;
        std::vector<Child> children;
        bool valid = true;  // apply_rule succeeded when loading
        std::string error;
    };
    std::map<int, Node> nodes;
    int root = 0;

    const Hypersequent& sequent_of(int id) const { return nodes.at(id).step.conclusion; }
};

// Canonical JSON (sorted keys, two-space indent, trailing newline).
std::string preproof_to_json(const Preproof& p);
Preproof preproof_from_json(const std::string& text);

// Indented tree rendering with back-edge bullets, for manual inspection.
std::string preproof_pretty(const Preproof& p);

struct WellformedReport {
    struct Defect {
        int node;
        std::string what;
    };
    std::vector<Defect> defects;
    bool ok() const { return defects.empty(); }
    std::string describe() const;
};
WellformedReport check_wellformed(const Preproof& p);

// mu-only progress: no cycle avoids mu-l. Throws DomainError if a nu rule
// occurs.
bool check_progress_mu(const Preproof& p);

// Thread-based progress for the full system, decided by composing
// occurrence-relation profiles over the proof graph (Ramsey-style: every
// realizable idempotent cycle profile must contain a progressing self-loop).
bool check_progress_munu(const Preproof& p);

struct ProgressResult {
    bool progressing = false;
    // on failure: a branch with no progressing thread, as stem + cycle
    std::vector<int> stem;   // node ids, root first, ending at the cycle anchor
    std::vector<int> cycle;  // node ids around the bad cycle (anchor first)
};
ProgressResult check_progress_munu_witness(const Preproof& p);

bool is_leftmost_proof(const Preproof& p);

// Thread automaton over a single candidate cycle: states are formula
// occurrences, transitions follow immediate ancestry, marks record principal
// events. Used to decide whether repeating the cycle forever yields a
// progressing branch.
struct ThreadAutomaton {
    // (occ at step boundary i) -> (occ at boundary i+1, principal formula or null)
    struct Edge {
        int from, to;
        ExprPtr event;  // principal formula on the traced occurrence, if any
    };
    std::vector<int> occ_counts;        // per boundary
    std::vector<std::vector<Edge>> edges;  // per step
    std::vector<char> from_lhs;         // per boundary-0 occ: on the LHS?
};
ThreadAutomaton thread_automaton_for_cycle(const std::vector<const RuleInstance*>& steps,
                                           const std::vector<int>& premiss_taken);
bool cycle_progressing(const std::vector<const RuleInstance*>& steps,
                       const std::vector<int>& premiss_taken);

}  // namespace munu

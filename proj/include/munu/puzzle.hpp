#pragma once

// The one-player evaluation puzzle: positions (w, Gamma), moves that
// decompose the head formula, and winning-play search for finite words and
// lasso omega-words. A lasso play wins when its loop carries a thread whose
// subformula-least infinitely-often-principal formula is a nu-formula;
// threads are traced with cedent positions as nodes, one guessed thread at a
// time.

#include "munu/grammar.hpp"
#include "munu/sequent.hpp"

#include <optional>
#include <string>
#include <vector>

namespace munu {

class PuzzleBoundExceeded : public std::runtime_error {
  public:
    explicit PuzzleBoundExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

struct PuzzleBounds {
    int max_cedent = 32;
    int max_states = 50000;
};

// A puzzle position: the remaining input (finite suffix, or a consumed-count
// pointer into a lasso word) and the current cedent.
struct PuzzlePosition {
    bool finite = true;
    std::string suffix;   // finite words: the remaining input
    LassoWord lasso;      // omega-words
    long consumed = 0;    // omega-words: letters consumed so far
    Cedent cedent;

    char head_letter_available(bool* any) const;
};

// Successor positions per the puzzle rules: deterministic except at sums.
std::vector<PuzzlePosition> puzzle_moves(const PuzzlePosition& p);

// Finite-word evaluation: is there a play reaching the winning state
// (epsilon, [])? Agrees with member_finite on mu-only cedents. Throws
// PuzzleBoundExceeded when the cedent bound cut off the search without a
// definite verdict.
bool evaluate_finite(const std::string& w, const Cedent& cedent, const PuzzleBounds& b = {});

struct PuzzleOutcome {
    Tri verdict = Tri::Unknown;
    std::vector<PuzzlePosition> play;  // certificate for yes answers
    int loop_start = -1;               // lasso plays: index where the loop begins
    std::vector<int> nu_thread;        // tracked cedent positions along the loop
};

PuzzleOutcome evaluate_finite_play(const std::string& w, const Cedent& cedent,
                                   const PuzzleBounds& b = {});

// Lasso-word evaluation: yes iff a lasso-shaped play with a nu-thread on its
// loop is found; no iff the bounded space is exhausted; unknown on a bound
// hit. Requires closed, left-guarded expressions.
PuzzleOutcome evaluate_lasso(const LassoWord& w, const Cedent& cedent,
                             const PuzzleBounds& b = {});

// Replays a certificate: every consecutive pair must be a legal move.
bool replay_play(const std::vector<PuzzlePosition>& play);

std::string puzzle_outcome_to_json(const PuzzleOutcome& o);

}  // namespace munu

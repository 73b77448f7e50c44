#include "munu/puzzle.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <tuple>

#include "json.hpp"

namespace munu {

namespace {

char word_head(const PuzzlePosition& p, bool* any) {
    if (p.finite) {
        if (p.suffix.empty()) {
            *any = false;
            return 0;
        }
        *any = true;
        return p.suffix[0];
    }
    *any = true;
    return p.lasso.at(static_cast<std::size_t>(p.consumed));
}

PuzzlePosition advance_word(const PuzzlePosition& p) {
    PuzzlePosition q = p;
    if (p.finite)
        q.suffix = p.suffix.substr(1);
    else
        q.consumed = p.consumed + 1;
    return q;
}

}  // namespace

char PuzzlePosition::head_letter_available(bool* any) const { return word_head(*this, any); }

std::vector<PuzzlePosition> puzzle_moves(const PuzzlePosition& p) {
    std::vector<PuzzlePosition> out;
    if (p.cedent.empty()) return out;  // terminal: winning iff the word is spent
    const ExprPtr& head = p.cedent[0];
    Cedent rest(p.cedent.begin() + 1, p.cedent.end());
    switch (head->kind) {
        case ExprKind::Zero:
            return out;
        case ExprKind::Letter: {
            bool any = false;
            char c = word_head(p, &any);
            if (!any || c != head->letter) return out;
            PuzzlePosition q = advance_word(p);
            q.cedent = rest;
            out.push_back(std::move(q));
            return out;
        }
        case ExprKind::One: {
            PuzzlePosition q = p;
            q.cedent = rest;
            out.push_back(std::move(q));
            return out;
        }
        case ExprKind::Sum: {
            for (const ExprPtr& part : {head->lhs, head->rhs}) {
                PuzzlePosition q = p;
                q.cedent = rest;
                q.cedent.insert(q.cedent.begin(), part);
                out.push_back(std::move(q));
            }
            return out;
        }
        case ExprKind::Prod: {
            PuzzlePosition q = p;
            q.cedent = rest;
            q.cedent.insert(q.cedent.begin(), head->rhs);
            q.cedent.insert(q.cedent.begin(), head->lhs);
            out.push_back(std::move(q));
            return out;
        }
        case ExprKind::Mu:
        case ExprKind::Nu: {
            PuzzlePosition q = p;
            q.cedent = rest;
            q.cedent.insert(q.cedent.begin(), unfold(head));
            out.push_back(std::move(q));
            return out;
        }
        case ExprKind::Var:
            throw DomainError("puzzle position contains a free variable");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Finite-word evaluation: memoized search for the winning state.
// ---------------------------------------------------------------------------

namespace {

void check_cedent_pre(const Cedent& cedent, bool need_left_guarded) {
    for (auto& e : cedent) {
        if (!is_closed(e)) throw DomainError("puzzle: expressions must be closed");
        auto c = classify(e);
        if (need_left_guarded ? !c.left_guarded : !c.guarded)
            throw DomainError(need_left_guarded ? "puzzle: expressions must be left-guarded"
                                                : "puzzle: expressions must be guarded");
    }
}

struct FiniteSearch {
    const PuzzleBounds& bounds;
    bool bound_hit = false;
    std::map<std::pair<std::string, std::string>, int> seen;  // (suffix, cedent key)
    std::vector<PuzzlePosition> positions;
    std::vector<int> parent;

    explicit FiniteSearch(const PuzzleBounds& b) : bounds(b) {}

    int found = -1;

    void run(const PuzzlePosition& start) {
        std::deque<int> queue;
        auto intern = [&](const PuzzlePosition& p, int par) -> int {
            auto key = std::make_pair(p.suffix, cedent_key(p.cedent));
            auto it = seen.find(key);
            if (it != seen.end()) return -1;
            int id = static_cast<int>(positions.size());
            seen[key] = id;
            positions.push_back(p);
            parent.push_back(par);
            queue.push_back(id);
            return id;
        };
        intern(start, -1);
        while (!queue.empty() && found < 0) {
            int cur = queue.front();
            queue.pop_front();
            const PuzzlePosition p = positions[cur];
            if (p.suffix.empty() && p.cedent.empty()) {
                found = cur;
                return;
            }
            if (static_cast<int>(p.cedent.size()) > bounds.max_cedent) {
                bound_hit = true;
                continue;
            }
            if (static_cast<int>(positions.size()) > bounds.max_states) {
                bound_hit = true;
                return;
            }
            for (auto& q : puzzle_moves(p)) intern(q, cur);
        }
    }
};

}  // namespace

PuzzleOutcome evaluate_finite_play(const std::string& w, const Cedent& cedent,
                                   const PuzzleBounds& b) {
    check_cedent_pre(cedent, false);
    PuzzlePosition start;
    start.finite = true;
    start.suffix = w;
    start.cedent = cedent;
    FiniteSearch search(b);
    search.run(start);
    PuzzleOutcome out;
    if (search.found >= 0) {
        out.verdict = Tri::Yes;
        std::vector<int> path;
        for (int cur = search.found; cur >= 0; cur = search.parent[cur]) path.push_back(cur);
        std::reverse(path.begin(), path.end());
        for (int id : path) out.play.push_back(search.positions[id]);
    } else {
        out.verdict = search.bound_hit ? Tri::Unknown : Tri::No;
    }
    return out;
}

bool evaluate_finite(const std::string& w, const Cedent& cedent, const PuzzleBounds& b) {
    PuzzleOutcome out = evaluate_finite_play(w, cedent, b);
    if (out.verdict == Tri::Unknown)
        throw PuzzleBoundExceeded("evaluate_finite: cedent bound exceeded without a verdict");
    return out.verdict == Tri::Yes;
}

// ---------------------------------------------------------------------------
// Lasso evaluation. States are (consumed mod loop, cedent); a winning play is
// a reachable cycle carrying a thread (traced through cedent positions) whose
// max-rank principal formula is a nu. The thread is guessed explicitly: the
// cycle search walks extended states (state, tracked position).
// ---------------------------------------------------------------------------

namespace {

struct LassoGraph {
    std::vector<PuzzlePosition> states;  // consumed = normalized position
    struct Arc {
        int to;
        bool consumed;
        // ancestry: tracked position -> successor positions, with the
        // principal event rank (-1 when the tracked occurrence is not
        // principal); head-consuming moves end the thread (no successor).
        std::vector<std::vector<std::pair<int, int>>> trace;
    };
    std::vector<std::vector<Arc>> arcs;
    bool bound_hit = false;
};

struct RankedFormulas {
    std::map<std::string, int> rank_of;
    std::vector<ExprPtr> formulas;

    void build(const Cedent& cedent) {
        std::vector<ExprPtr> all;
        for (auto& e : cedent)
            for (auto& f : fl_closure(e)) all.push_back(f);
        std::sort(all.begin(), all.end(), [](const ExprPtr& a, const ExprPtr& b) {
            return dependency_compare(a, b) < 0;
        });
        all.erase(std::unique(all.begin(), all.end(),
                              [](const ExprPtr& a, const ExprPtr& b) { return alpha_equal(a, b); }),
                  all.end());
        formulas = all;
        for (std::size_t i = 0; i < all.size(); ++i) rank_of[canon_print(all[i])] = (int)i;
    }
};

long norm_consumed(const LassoWord& w, long consumed) {
    long plen = static_cast<long>(w.prefix.size());
    long llen = static_cast<long>(w.loop.size());
    return consumed < plen ? consumed : plen + (consumed - plen) % llen;
}

LassoGraph explore_lasso(const LassoWord& w, const Cedent& cedent, const PuzzleBounds& bounds,
                         const RankedFormulas& ranks) {
    LassoGraph g;
    std::map<std::pair<long, std::string>, int> seen;
    std::deque<int> queue;
    auto intern = [&](PuzzlePosition p) -> int {
        p.consumed = norm_consumed(w, p.consumed);
        auto key = std::make_pair(p.consumed, cedent_key(p.cedent));
        auto it = seen.find(key);
        if (it != seen.end()) return it->second;
        int id = static_cast<int>(g.states.size());
        seen[key] = id;
        g.states.push_back(std::move(p));
        g.arcs.emplace_back();
        queue.push_back(id);
        return id;
    };
    PuzzlePosition start;
    start.finite = false;
    start.lasso = w;
    start.consumed = 0;
    start.cedent = cedent;
    intern(start);
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        if (static_cast<int>(g.states.size()) > bounds.max_states) {
            g.bound_hit = true;
            break;
        }
        PuzzlePosition p = g.states[cur];
        if (static_cast<int>(p.cedent.size()) > bounds.max_cedent) {
            g.bound_hit = true;
            continue;
        }
        if (p.cedent.empty()) continue;  // dead end: infinite word never spent
        const ExprPtr& head = p.cedent[0];
        int n = static_cast<int>(p.cedent.size());
        auto moves = puzzle_moves(p);
        // build ancestry per move kind; moves order mirrors puzzle_moves
        for (std::size_t mi = 0; mi < moves.size(); ++mi) {
            LassoGraph::Arc arc;
            arc.consumed = head->kind == ExprKind::Letter;
            arc.to = intern(moves[mi]);
            arc.trace.resize(n);
            int rank = -1;
            if (head->kind == ExprKind::Sum || head->kind == ExprKind::Prod ||
                head->kind == ExprKind::Mu || head->kind == ExprKind::Nu)
                rank = ranks.rank_of.at(canon_print(head));
            switch (head->kind) {
                case ExprKind::Letter:
                case ExprKind::One:
                    // head dies; context shifts down
                    for (int i = 1; i < n; ++i) arc.trace[i].push_back({i - 1, -1});
                    break;
                case ExprKind::Sum:
                    arc.trace[0].push_back({0, rank});
                    for (int i = 1; i < n; ++i) arc.trace[i].push_back({i, -1});
                    break;
                case ExprKind::Prod:
                    arc.trace[0].push_back({0, rank});
                    arc.trace[0].push_back({1, rank});
                    for (int i = 1; i < n; ++i) arc.trace[i].push_back({i + 1, -1});
                    break;
                case ExprKind::Mu:
                case ExprKind::Nu:
                    arc.trace[0].push_back({0, rank});
                    for (int i = 1; i < n; ++i) arc.trace[i].push_back({i, -1});
                    break;
                default:
                    break;
            }
            g.arcs[cur].push_back(std::move(arc));
        }
    }
    return g;
}

}  // namespace

PuzzleOutcome evaluate_lasso(const LassoWord& w0, const Cedent& cedent, const PuzzleBounds& b) {
    check_cedent_pre(cedent, true);
    LassoWord w = normalize_lasso(w0.prefix, w0.loop);
    RankedFormulas ranks;
    ranks.build(cedent);
    LassoGraph g = explore_lasso(w, cedent, b, ranks);
    long plen = static_cast<long>(w.prefix.size());

    PuzzleOutcome out;
    // cycle search: anchor on (state in loop region, tracked position)
    for (int anchor = 0; anchor < static_cast<int>(g.states.size()); ++anchor) {
        if (g.states[anchor].consumed < plen) continue;
        int ncedent = static_cast<int>(g.states[anchor].cedent.size());
        for (int tracked0 = 0; tracked0 < ncedent; ++tracked0) {
            // DFS over (state, tracked, runmax); runmax -1 = no event yet
            struct Item {
                int state, tracked, runmax;
                std::vector<std::tuple<int, int>> path;  // (state, tracked) along the way
            };
            std::set<std::tuple<int, int, int>> visited;
            std::vector<Item> stack{{anchor, tracked0, -1, {{anchor, tracked0}}}};
            while (!stack.empty()) {
                Item item = std::move(stack.back());
                stack.pop_back();
                for (auto& arc : g.arcs[item.state]) {
                    if (item.tracked >= static_cast<int>(arc.trace.size())) continue;
                    for (auto& [next_pos, rank] : arc.trace[item.tracked]) {
                        int nmax = std::max(item.runmax, rank);
                        if (arc.to == anchor && next_pos == tracked0 && nmax >= 0) {
                            const ExprPtr& least = ranks.formulas[nmax];
                            if (least->kind != ExprKind::Mu && least->kind != ExprKind::Nu)
                                throw std::logic_error(
                                    "evaluate_lasso: least i.o.p. formula is not a fixed point");
                            if (least->kind == ExprKind::Nu) {
                                // certificate: stem (BFS) + the loop just found
                                out.verdict = Tri::Yes;
                                std::map<int, int> par;
                                std::deque<int> bfs{0};
                                par[0] = -1;
                                while (!bfs.empty()) {
                                    int cur = bfs.front();
                                    bfs.pop_front();
                                    for (auto& a : g.arcs[cur])
                                        if (!par.count(a.to)) {
                                            par[a.to] = cur;
                                            bfs.push_back(a.to);
                                        }
                                }
                                std::vector<int> stem;
                                for (int cur = anchor; cur != -1; cur = par.at(cur))
                                    stem.push_back(cur);
                                std::reverse(stem.begin(), stem.end());
                                for (std::size_t i = 0; i + 1 < stem.size(); ++i)
                                    out.play.push_back(g.states[stem[i]]);
                                out.loop_start = static_cast<int>(out.play.size());
                                for (auto& [st, tr] : item.path) {
                                    out.play.push_back(g.states[st]);
                                    out.nu_thread.push_back(tr);
                                }
                                out.play.push_back(g.states[anchor]);
                                out.nu_thread.push_back(tracked0);
                                return out;
                            }
                        }
                        auto vkey = std::make_tuple(arc.to, next_pos, nmax);
                        if ((arc.to != anchor || next_pos != tracked0) && !visited.count(vkey)) {
                            visited.insert(vkey);
                            Item next{arc.to, next_pos, nmax, item.path};
                            next.path.push_back({arc.to, next_pos});
                            stack.push_back(std::move(next));
                        }
                    }
                }
            }
        }
    }
    out.verdict = g.bound_hit ? Tri::Unknown : Tri::No;
    return out;
}

bool replay_play(const std::vector<PuzzlePosition>& play) {
    for (std::size_t i = 0; i + 1 < play.size(); ++i) {
        auto succs = puzzle_moves(play[i]);
        bool ok = false;
        for (auto& s : succs) {
            bool word_match = s.finite ? s.suffix == play[i + 1].suffix
                                       : norm_consumed(s.lasso, s.consumed) ==
                                             norm_consumed(s.lasso, play[i + 1].consumed);
            if (word_match && cedent_key(s.cedent) == cedent_key(play[i + 1].cedent)) {
                ok = true;
                break;
            }
        }
        if (!ok) return false;
    }
    return true;
}

std::string puzzle_outcome_to_json(const PuzzleOutcome& o) {
    nlohmann::json j;
    j["verdict"] = o.verdict == Tri::Yes ? "yes" : o.verdict == Tri::No ? "no" : "unknown";
    if (o.verdict == Tri::Yes) {
        nlohmann::json play = nlohmann::json::array();
        for (auto& p : o.play) {
            nlohmann::json step;
            if (p.finite)
                step["rest"] = p.suffix;
            else
                step["at"] = p.consumed;
            step["cedent"] = cedent_print(p.cedent);
            play.push_back(step);
        }
        j["play"] = play;
        if (o.loop_start >= 0) {
            j["loop_start"] = o.loop_start;
            j["nu_thread"] = o.nu_thread;
        }
    }
    return j.dump(2) + "\n";
}

}  // namespace munu

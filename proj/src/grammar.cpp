#include "munu/grammar.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace munu {

int Cfg::find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

// ---------------------------------------------------------------------------
// Canonical grammar (nonterminals = FL closure).
// ---------------------------------------------------------------------------

namespace {

struct FlIndex {
    std::vector<ExprPtr> formulas;        // sorted by canonical print
    std::map<std::string, int> by_print;  // canon print -> index

    explicit FlIndex(const ExprPtr& e) {
        formulas = fl_closure(e);
        std::sort(formulas.begin(), formulas.end(), ExprCanonLess{});
        for (std::size_t i = 0; i < formulas.size(); ++i)
            by_print[canon_print(formulas[i])] = static_cast<int>(i);
    }
    int of(const ExprPtr& f) const {
        auto it = by_print.find(canon_print(f));
        if (it == by_print.end()) throw DomainError("formula not in FL closure: " + print_expr(f));
        return it->second;
    }
};

// Production right-hand sides per the canonical grammar schema; `mark` builds
// the marked copy (exactly one marked symbol on each RHS except 1 and
// letters, which end the thread).
std::vector<Cfg::Rhs> schema_rhs(const ExprPtr& f, const FlIndex& fl,
                                 const std::function<int(int, bool)>& sym_of, bool mark) {
    auto nt = [&](const ExprPtr& g, bool m) {
        Cfg::Sym s;
        s.terminal = false;
        s.nt = sym_of(fl.of(g), m);
        return s;
    };
    auto term = [&](char c) {
        Cfg::Sym s;
        s.terminal = true;
        s.letter = c;
        return s;
    };
    switch (f->kind) {
        case ExprKind::Zero:
            return {};
        case ExprKind::One:
            return {Cfg::Rhs{}};
        case ExprKind::Letter:
            return {Cfg::Rhs{term(f->letter)}};
        case ExprKind::Sum:
            return {Cfg::Rhs{nt(f->lhs, mark)}, Cfg::Rhs{nt(f->rhs, mark)}};
        case ExprKind::Prod:
            if (mark)
                return {Cfg::Rhs{nt(f->lhs, true), nt(f->rhs, false)},
                        Cfg::Rhs{nt(f->lhs, false), nt(f->rhs, true)}};
            return {Cfg::Rhs{nt(f->lhs, false), nt(f->rhs, false)}};
        case ExprKind::Mu:
        case ExprKind::Nu:
            return {Cfg::Rhs{nt(unfold(f), mark)}};
        case ExprKind::Var:
            throw DomainError("open formula in FL closure");
    }
    return {};
}

}  // namespace

Cfg to_canonical_cfg(const ExprPtr& e) {
    if (!is_closed(e)) throw DomainError("to_canonical_cfg: expression must be closed");
    if (!is_mu_only(e)) throw DomainError("to_canonical_cfg: nu is not allowed here");
    if (!classify(e).guarded) throw DomainError("to_canonical_cfg: expression must be guarded");

    FlIndex fl(e);
    Cfg g;
    g.formulas = fl.formulas;
    g.marked.assign(fl.formulas.size(), false);
    for (auto& f : fl.formulas) g.names.push_back("X_" + canon_print(f));
    auto sym_of = [](int idx, bool) { return idx; };
    for (auto& f : fl.formulas) g.prods.push_back(schema_rhs(f, fl, sym_of, false));
    g.start = fl.of(e);
    return g;
}

MullerCfg to_muller_cfg(const ExprPtr& e) {
    if (!is_closed(e)) throw DomainError("to_muller_cfg: expression must be closed");
    if (!classify(e).left_guarded)
        throw DomainError("to_muller_cfg: expression must be left-guarded");

    FlIndex fl(e);
    int n = static_cast<int>(fl.formulas.size());
    MullerCfg m;
    Cfg& g = m.cfg;
    // indices: 0..n-1 normal, n..2n-1 marked
    for (int copy = 0; copy < 2; ++copy)
        for (auto& f : fl.formulas) {
            g.names.push_back((copy ? "Xm_" : "X_") + canon_print(f));
            g.formulas.push_back(f);
            g.marked.push_back(copy == 1);
        }
    auto sym_of = [n](int idx, bool marked) { return marked ? idx + n : idx; };
    for (int copy = 0; copy < 2; ++copy)
        for (auto& f : fl.formulas) g.prods.push_back(schema_rhs(f, fl, sym_of, copy == 1));
    g.start = sym_of(fl.of(e), true);

    // dependency ranks over FL(e)
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return dependency_compare(fl.formulas[a], fl.formulas[b]) < 0;
    });
    std::vector<int> rank(n);
    for (int i = 0; i < n; ++i) rank[order[i]] = i;
    m.dep_rank.resize(2 * n);
    m.is_nu.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        m.dep_rank[i] = rank[i % n];
        m.is_nu[i] = g.formulas[i]->kind == ExprKind::Nu;
    }
    return m;
}

bool MullerCfg::acceptable(const std::vector<int>& nts) const {
    std::vector<int> marked_nts;
    for (int x : nts)
        if (cfg.marked[x]) marked_nts.push_back(x);
    if (marked_nts.empty()) return false;
    // unique subformula-least element, which must be a nu-formula
    for (int cand : marked_nts) {
        bool least = true;
        for (int other : marked_nts)
            if (!is_subformula(cfg.formulas[cand], cfg.formulas[other])) {
                least = false;
                break;
            }
        if (least) return is_nu[cand];
    }
    return false;
}

// ---------------------------------------------------------------------------
// Bekic elimination.
// ---------------------------------------------------------------------------

ExprPtr cfg_to_expr(const std::map<std::string, ExprPtr>& system, const std::string& start) {
    if (!system.count(start)) throw DomainError("cfg_to_expr: start variable not in system");
    for (auto& [name, rhs] : system)
        if (!classify(rhs).left_guarded)
            throw DomainError("cfg_to_expr: right-hand side for " + name + " is not left-guarded");

    // Solve all variables, eliminating the last (in name order) first.
    std::function<std::map<std::string, ExprPtr>(std::map<std::string, ExprPtr>)> solve =
        [&](std::map<std::string, ExprPtr> sys) -> std::map<std::string, ExprPtr> {
        auto last = std::prev(sys.end());
        std::string xn = last->first;
        ExprPtr en = last->second;
        ExprPtr en_closed = mk_mu(xn, en);  // e_n' := mu X_n e_n
        if (sys.size() == 1) return {{xn, en_closed}};
        std::map<std::string, ExprPtr> reduced;
        for (auto it = sys.begin(); it != last; ++it)
            reduced[it->first] = subst(it->second, xn, en_closed);
        auto sols = solve(std::move(reduced));
        ExprPtr fn = en_closed;
        for (auto& [v, f] : sols) fn = subst(fn, v, f);
        sols[xn] = fn;
        return sols;
    };

    auto sols = solve(system);
    ExprPtr out = sols.at(start);
    if (!is_closed(out)) throw DomainError("cfg_to_expr: solution is not closed");
    if (!classify(out).left_guarded) throw DomainError("cfg_to_expr: solution is not left-guarded");
    return out;
}

// ---------------------------------------------------------------------------
// JSON serialization.
// ---------------------------------------------------------------------------

namespace {

nlohmann::json cfg_json_body(const Cfg& g) {
    nlohmann::json j;
    std::vector<std::string> names = g.names;
    std::sort(names.begin(), names.end());
    j["nonterminals"] = names;
    j["start"] = g.names[g.start];
    nlohmann::json prods(nlohmann::json::value_t::object);
    for (std::size_t i = 0; i < g.names.size(); ++i) {
        std::vector<std::vector<std::string>> alts;
        for (auto& rhs : g.prods[i]) {
            std::vector<std::string> syms;
            for (auto& s : rhs)
                syms.push_back(s.terminal ? std::string(1, s.letter) : g.names[s.nt]);
            alts.push_back(std::move(syms));
        }
        std::sort(alts.begin(), alts.end());
        prods[g.names[i]] = alts;
    }
    j["productions"] = prods;
    return j;
}

}  // namespace

std::string cfg_to_json(const Cfg& g) { return cfg_json_body(g).dump(2) + "\n"; }

std::string muller_to_json(const MullerCfg& m) {
    nlohmann::json j = cfg_json_body(m.cfg);
    // Base sets: per nu-formula g, the up-closure {Xm_f : g subformula of f}.
    // A set G is acceptable iff its marked part lies inside some base and
    // contains that base's least element; normal nonterminals are free.
    std::vector<std::vector<std::string>> bases;
    int n = static_cast<int>(m.cfg.names.size()) / 2;
    for (int i = n; i < 2 * n; ++i) {
        if (!m.is_nu[i]) continue;
        std::vector<std::string> base;
        for (int k = n; k < 2 * n; ++k)
            if (is_subformula(m.cfg.formulas[i], m.cfg.formulas[k]))
                base.push_back(m.cfg.names[k]);
        std::sort(base.begin(), base.end());
        bases.push_back(std::move(base));
    }
    std::sort(bases.begin(), bases.end());
    j["acceptable_base"] = bases;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Backend A: memoized top-down derivation search with split enumeration.
//
// Least-fixpoint tabling: a query that re-enters an in-progress entry is
// assumed false; a false computed under such an assumption is tainted and
// not cached (re-queried later against a larger table), true results are
// always sound to cache.
// ---------------------------------------------------------------------------

namespace {

struct DeriveCtx {
    const Cfg& g;
    const std::string& w;
    std::unordered_map<long, int> memo;  // 1 = true, 2 = false (final)
    std::unordered_set<long> in_progress;

    DeriveCtx(const Cfg& gg, const std::string& ww) : g(gg), w(ww) {}

    long key(int nt, int i, int j) const {
        long n = static_cast<long>(w.size()) + 1;
        return (static_cast<long>(nt) * n + i) * n + j;
    }

    bool seq(const Cfg::Rhs& rhs, std::size_t k, int i, int j, bool& taint) {
        if (k == rhs.size()) return i == j;
        const Cfg::Sym& s = rhs[k];
        if (s.terminal) {
            if (i < j && w[i] == s.letter) return seq(rhs, k + 1, i + 1, j, taint);
            return false;
        }
        for (int split = i; split <= j; ++split) {
            if (nt(s.nt, i, split, taint) && seq(rhs, k + 1, split, j, taint)) return true;
        }
        return false;
    }

    bool nt(int n, int i, int j, bool& taint) {
        long k = key(n, i, j);
        auto it = memo.find(k);
        if (it != memo.end()) return it->second == 1;
        if (in_progress.count(k)) {
            taint = true;
            return false;
        }
        in_progress.insert(k);
        bool any = false;
        bool local_taint = false;
        for (auto& rhs : g.prods[n])
            if (seq(rhs, 0, i, j, local_taint)) {
                any = true;
                break;
            }
        in_progress.erase(k);
        if (any)
            memo[k] = 1;
        else if (!local_taint)
            memo[k] = 2;
        else
            taint = true;
        return any;
    }
};

}  // namespace

bool cfg_derives(const Cfg& g, int nt, const std::string& w) {
    DeriveCtx ctx(g, w);
    bool r = false;
    // tainted negatives are re-queried against the growing table; true
    // entries only accumulate, so this converges
    for (int round = 0; round < 8; ++round) {
        bool taint = false;
        r = ctx.nt(nt, 0, static_cast<int>(w.size()), taint);
        if (r || !taint) break;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Backend B: chart parser (bottom-up fixpoint over spans).
// ---------------------------------------------------------------------------

namespace {

bool chart_parse(const Cfg& g, const std::string& w) {
    int n = static_cast<int>(w.size());
    int nts = static_cast<int>(g.names.size());
    auto idx = [n](int i, int j) { return i * (n + 1) + j; };
    std::vector<std::vector<char>> chart(nts, std::vector<char>((n + 1) * (n + 1), 0));

    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < nts; ++a) {
            for (int i = 0; i <= n; ++i)
                for (int j = i; j <= n; ++j) {
                    if (chart[a][idx(i, j)]) continue;
                    bool ok = false;
                    for (auto& rhs : g.prods[a]) {
                        // positions reachable after matching a prefix of rhs
                        std::vector<char> front(n + 1, 0);
                        front[i] = 1;
                        for (auto& s : rhs) {
                            std::vector<char> next(n + 1, 0);
                            for (int p = i; p <= j; ++p) {
                                if (!front[p]) continue;
                                if (s.terminal) {
                                    if (p < j && w[p] == s.letter) next[p + 1] = 1;
                                } else {
                                    for (int q = p; q <= j; ++q)
                                        if (chart[s.nt][idx(p, q)]) next[q] = 1;
                                }
                            }
                            front.swap(next);
                        }
                        if (front[j]) {
                            ok = true;
                            break;
                        }
                    }
                    if (ok) {
                        chart[a][idx(i, j)] = 1;
                        changed = true;
                    }
                }
        }
    }
    return chart[g.start][idx(0, n)] != 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Membership oracle.
// ---------------------------------------------------------------------------

MembershipOracle::MembershipOracle(const Cedent& cedent) {
    ExprPtr prod = cedent_product(cedent);
    if (!is_closed(prod)) throw DomainError("member_finite: expressions must be closed");
    if (!is_mu_only(prod)) throw DomainError("member_finite: nu is not allowed here");
    if (!classify(prod).guarded) throw DomainError("member_finite: expressions must be guarded");
    grammar_ = to_canonical_cfg(prod);
    letters_ = letters_of(prod);
}

bool MembershipOracle::member(const std::string& w) const {
    for (char c : w)
        if (!letters_.count(c)) return false;
    bool a = cfg_derives(grammar_, grammar_.start, w);
    bool b = chart_parse(grammar_, w);
    if (a != b) throw std::logic_error("membership backends disagree on '" + w + "'");
    return a;
}

bool member_finite(const std::string& w, const Cedent& cedent) {
    return MembershipOracle(cedent).member(w);
}

std::vector<std::string> all_words(const std::set<char>& letters, int max_len) {
    std::vector<std::string> out{""};
    std::vector<std::string> layer{""};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<std::string> next;
        for (auto& w : layer)
            for (char c : letters) next.push_back(w + c);
        out.insert(out.end(), next.begin(), next.end());
        layer.swap(next);
    }
    return out;
}

std::vector<std::string> enumerate_words(const MembershipOracle& oracle, int max_len) {
    std::vector<std::string> out;
    for (auto& w : all_words(oracle.letters(), max_len))
        if (oracle.member(w)) out.push_back(w);
    return out;
}

std::vector<std::string> enumerate_words(const Cedent& cedent, int max_len) {
    MembershipOracle oracle(cedent);
    return enumerate_words(oracle, max_len);
}

// ---------------------------------------------------------------------------
// Lasso words.
// ---------------------------------------------------------------------------

LassoWord normalize_lasso(std::string prefix, std::string loop) {
    if (loop.empty()) throw DomainError("lasso loop must be non-empty");
    // primitive root
    for (std::size_t d = 1; d <= loop.size() / 2; ++d) {
        if (loop.size() % d) continue;
        bool period = true;
        for (std::size_t i = d; i < loop.size() && period; ++i)
            if (loop[i] != loop[i - d]) period = false;
        if (period) {
            loop = loop.substr(0, d);
            break;
        }
    }
    // absorb a prefix tail matching the loop tail: u a . (v a)^w = u . (a v)^w
    while (!prefix.empty() && prefix.back() == loop.back()) {
        prefix.pop_back();
        loop = loop.back() + loop.substr(0, loop.size() - 1);
    }
    return LassoWord{std::move(prefix), std::move(loop)};
}

bool lasso_equal(const LassoWord& a, const LassoWord& b) {
    LassoWord na = normalize_lasso(a.prefix, a.loop);
    LassoWord nb = normalize_lasso(b.prefix, b.loop);
    return na.prefix == nb.prefix && na.loop == nb.loop;
}

// ---------------------------------------------------------------------------
// accepts_lasso: bounded search for an accepting lasso-shaped leftmost
// derivation. States are (word position, sentential suffix); terminals are
// consumed eagerly, so the suffix always starts with a nonterminal.
//
// Two reductions keep the space finite in practice:
//   - an accepting run's mark never dies, so symbols behind the marked
//     nonterminal are never rewritten or consumed: states are truncated at
//     the mark;
//   - a symbol in front of the mark that cannot derive any word over the
//     letters still available blocks the mark forever: such states are
//     definite dead ends, not bound hits.
// ---------------------------------------------------------------------------

namespace {

struct LassoState {
    int pos;                // letters consumed, normalized into the loop
    std::vector<int> rest;  // sentential suffix: nonterminal index or -(letter)
};

std::string state_key(const LassoState& s) {
    std::string k = std::to_string(s.pos);
    for (int x : s.rest) {
        k += ',';
        k += std::to_string(x);
    }
    return k;
}

// can_over[n]: n derives some finite word using only letters from L.
std::vector<char> derivable_over(const Cfg& g, const std::set<char>& L) {
    std::vector<char> can(g.names.size(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t n = 0; n < g.names.size(); ++n) {
            if (can[n]) continue;
            for (auto& rhs : g.prods[n]) {
                bool ok = true;
                for (auto& s : rhs) {
                    if (s.terminal ? !L.count(s.letter) : !can[s.nt]) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    can[n] = 1;
                    changed = true;
                    break;
                }
            }
        }
    }
    return can;
}

}  // namespace

Tri accepts_lasso(const MullerCfg& m, const LassoWord& w0, const LassoBounds& bounds) {
    const Cfg& g = m.cfg;
    LassoWord w = normalize_lasso(w0.prefix, w0.loop);
    int plen = static_cast<int>(w.prefix.size());
    int llen = static_cast<int>(w.loop.size());
    int cycle_depth = bounds.max_cycle_depth > 0 ? bounds.max_cycle_depth
                                                 : 10 * static_cast<int>(g.names.size() / 2);

    auto norm_pos = [&](int pos) { return pos < plen ? pos : plen + (pos - plen) % llen; };
    auto letter_at = [&](int pos) {
        return pos < plen ? w.prefix[pos] : w.loop[(pos - plen) % llen];
    };

    std::set<char> loop_letters(w.loop.begin(), w.loop.end());
    std::set<char> all_letters = loop_letters;
    all_letters.insert(w.prefix.begin(), w.prefix.end());
    std::vector<char> can_loop = derivable_over(g, loop_letters);
    std::vector<char> can_all = derivable_over(g, all_letters);

    bool bound_hit = false;

    struct Succ {
        LassoState state;
        int marked_nt = -1;  // nonterminal expanded while marked
        bool consumed = false;
    };
    auto expand = [&](const LassoState& s) {
        std::vector<Succ> out;
        if (s.rest.empty()) return out;  // derivation ended at a finite word
        int head = s.rest.front();
        for (auto& rhs : g.prods[head]) {
            Succ succ;
            std::vector<int> form;
            for (auto& sym : rhs) form.push_back(sym.terminal ? -(int)sym.letter : sym.nt);
            form.insert(form.end(), s.rest.begin() + 1, s.rest.end());
            // consume leading terminals
            std::size_t k = 0;
            int pos = s.pos;
            bool dead = false;
            while (k < form.size() && form[k] < 0) {
                if (letter_at(pos) != static_cast<char>(-form[k])) {
                    dead = true;
                    break;
                }
                pos++;
                k++;
                succ.consumed = true;
            }
            if (dead) continue;
            succ.state.pos = norm_pos(pos);
            succ.state.rest.assign(form.begin() + k, form.end());
            // truncate behind the mark; a markless run can never be acceptable
            int mark_at = -1;
            for (std::size_t i = 0; i < succ.state.rest.size(); ++i) {
                int x = succ.state.rest[i];
                if (x >= 0 && g.marked[x]) {
                    mark_at = static_cast<int>(i);
                    break;
                }
            }
            if (mark_at < 0) continue;
            succ.state.rest.resize(mark_at + 1);
            // a blocked symbol in front of the mark is a definite dead end
            const std::vector<char>& can = succ.state.pos >= plen ? can_loop : can_all;
            const std::set<char>& letters = succ.state.pos >= plen ? loop_letters : all_letters;
            for (int i = 0; i < mark_at && !dead; ++i) {
                int x = succ.state.rest[i];
                if (x < 0 ? !letters.count(static_cast<char>(-x)) : !can[x]) dead = true;
            }
            if (dead) continue;
            if (static_cast<int>(succ.state.rest.size()) > bounds.max_sentential) {
                bound_hit = true;
                continue;
            }
            if (g.marked[head]) succ.marked_nt = head;
            out.push_back(std::move(succ));
        }
        return out;
    };

    // BFS over reachable states.
    std::map<std::string, int> state_id;
    std::vector<LassoState> states;
    std::deque<int> queue;
    LassoState init{0, {g.start}};
    state_id[state_key(init)] = 0;
    states.push_back(init);
    queue.push_back(0);
    std::vector<std::vector<std::pair<int, Succ>>> edges(1);
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        if (static_cast<int>(states.size()) > bounds.max_states) {
            bound_hit = true;
            break;
        }
        auto succs = expand(states[cur]);
        for (auto& s : succs) {
            std::string key = state_key(s.state);
            auto it = state_id.find(key);
            int id;
            if (it == state_id.end()) {
                id = static_cast<int>(states.size());
                state_id[key] = id;
                states.push_back(s.state);
                queue.push_back(id);
                edges.emplace_back();
            } else {
                id = it->second;
            }
            edges[cur].push_back({id, s});
        }
        if (edges.size() < states.size()) edges.resize(states.size());
    }
    edges.resize(states.size());

    // Cycle search from each loop-region state: DFS over (state, running max
    // rank of marked-expansion formulas, letter consumed?) triples.
    int nranks = static_cast<int>(g.names.size() / 2);
    for (int origin = 0; origin < static_cast<int>(states.size()); ++origin) {
        if (states[origin].pos < plen) continue;  // cycles live in the loop region
        std::set<std::tuple<int, int, int>> visited;
        std::vector<std::tuple<int, int, bool, int>> stack{{origin, -1, false, 0}};
        while (!stack.empty()) {
            auto [cur, maxrank, consumed, depth] = stack.back();
            stack.pop_back();
            if (depth >= cycle_depth) {
                bound_hit = true;
                continue;
            }
            for (auto& [next, info] : edges[cur]) {
                int nrank = maxrank;
                if (info.marked_nt >= 0) nrank = std::max(nrank, m.dep_rank[info.marked_nt]);
                bool ncons = consumed || info.consumed;
                if (next == origin && ncons && nrank >= 0) {
                    // the max-rank formula is the subformula-least recurring
                    // formula of the guessed thread; it must be a fixed point
                    ExprPtr least;
                    for (int i = 0; i < nranks; ++i)
                        if (m.dep_rank[i] == nrank) least = g.formulas[i];
                    if (least && least->kind != ExprKind::Mu && least->kind != ExprKind::Nu)
                        throw std::logic_error(
                            "accepts_lasso: least recurring formula is not a fixed point");
                    if (least && least->kind == ExprKind::Nu) return Tri::Yes;
                }
                auto vkey = std::make_tuple(next, nrank + 1, ncons ? 1 : 0);
                if (next != origin && !visited.count(vkey)) {
                    visited.insert(vkey);
                    stack.push_back({next, nrank, ncons, depth + 1});
                }
            }
        }
    }
    return bound_hit ? Tri::Unknown : Tri::No;
}

}  // namespace munu

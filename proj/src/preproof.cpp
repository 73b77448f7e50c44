#include "munu/preproof.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace munu {

// ---------------------------------------------------------------------------
// JSON round trip.
// ---------------------------------------------------------------------------

std::string preproof_to_json(const Preproof& p) {
    nlohmann::json j;
    j["root"] = p.root;
    nlohmann::json nodes(nlohmann::json::value_t::object);
    for (auto& [id, node] : p.nodes) {
        nlohmann::json n;
        n["sequent"] = node.step.conclusion.print();
        n["rule"] = rule_name(node.step.rule, node.step.letter);
        switch (node.step.rule) {
            case RuleKind::Init:
            case RuleKind::KL:
            case RuleKind::KR:
                break;
            case RuleKind::WeakR:
                n["principal"] = node.step.principal.cedent;
                n["weakened"] = cedent_print(node.step.weakened);
                break;
            default:
                if (rule_is_left(node.step.rule))
                    n["principal"] = node.step.principal.index;
                else
                    n["principal"] =
                        nlohmann::json::array({node.step.principal.cedent, node.step.principal.index});
        }
        nlohmann::json kids = nlohmann::json::array();
        for (auto& c : node.children) {
            if (c.backedge)
                kids.push_back(nlohmann::json{{"backedge", c.id}});
            else
                kids.push_back(c.id);
        }
        n["children"] = kids;
        nodes[std::to_string(id)] = n;
    }
    j["nodes"] = nodes;
    return j.dump(2) + "\n";
}

Preproof preproof_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Preproof p;
    p.root = j.at("root").get<int>();
    for (auto& [key, n] : j.at("nodes").items()) {
        int id = std::stoi(key);
        Preproof::Node node;
        std::string seq_text = n.at("sequent").get<std::string>();
        std::string rname = n.at("rule").get<std::string>();
        try {
            Hypersequent seq = parse_sequent(seq_text);
            auto [rule, letter] = parse_rule_name(rname);
            Principal pos;
            if (n.contains("principal")) {
                if (n["principal"].is_array()) {
                    pos.cedent = n["principal"][0].get<int>();
                    pos.index = n["principal"][1].get<int>();
                } else if (rule == RuleKind::WeakR) {
                    pos.cedent = n["principal"].get<int>();
                } else {
                    pos.cedent = -1;
                    pos.index = n["principal"].get<int>();
                }
            }
            node.step = apply_rule(seq, rule, pos, letter);
            if (n.contains("weakened") &&
                cedent_key(parse_cedent(n["weakened"].get<std::string>())) !=
                    cedent_key(node.step.weakened))
                throw DomainError("weakened cedent does not match the rule instance");
        } catch (const std::exception& ex) {
            node.valid = false;
            node.error = ex.what();
        }
        if (n.contains("children"))
            for (auto& c : n["children"]) {
                if (c.is_object())
                    node.children.push_back({c.at("backedge").get<int>(), true});
                else
                    node.children.push_back({c.get<int>(), false});
            }
        p.nodes[id] = std::move(node);
    }
    return p;
}

std::string preproof_pretty(const Preproof& p) {
    std::ostringstream out;
    std::function<void(int, int)> go = [&](int id, int depth) {
        auto it = p.nodes.find(id);
        for (int i = 0; i < depth; ++i) out << "  ";
        if (it == p.nodes.end()) {
            out << "[" << id << "] <missing>\n";
            return;
        }
        const auto& node = it->second;
        out << "[" << id << "] " << rule_name(node.step.rule, node.step.letter) << ": "
            << node.step.conclusion.print() << "\n";
        for (auto& c : node.children) {
            if (c.backedge) {
                for (int i = 0; i < depth + 1; ++i) out << "  ";
                out << "* back to [" << c.id << "]\n";
            } else {
                go(c.id, depth + 1);
            }
        }
    };
    go(p.root, 0);
    return out.str();
}

// ---------------------------------------------------------------------------
// Well-formedness.
// ---------------------------------------------------------------------------

std::string WellformedReport::describe() const {
    if (defects.empty()) return "ok";
    std::string out;
    for (auto& d : defects)
        out += "node " + std::to_string(d.node) + ": " + d.what + "\n";
    return out;
}

WellformedReport check_wellformed(const Preproof& p) {
    WellformedReport report;
    auto defect = [&](int id, const std::string& what) {
        report.defects.push_back({id, what});
    };
    if (!p.nodes.count(p.root)) {
        defect(p.root, "root node missing");
        return report;
    }
    for (auto& [id, node] : p.nodes) {
        if (!node.valid) {
            defect(id, "invalid rule instance: " + node.error);
            continue;
        }
        // re-derive the instance from its conclusion; apply_rule is the schema
        // authority
        try {
            RuleInstance fresh = apply_rule(node.step.conclusion, node.step.rule,
                                            node.step.principal, node.step.letter);
            if (fresh.premisses.size() != node.children.size()) {
                defect(id, "child count does not match rule arity");
                continue;
            }
            for (std::size_t k = 0; k < fresh.premisses.size(); ++k) {
                int target = node.children[k].id;
                auto it = p.nodes.find(target);
                if (it == p.nodes.end()) {
                    defect(id, "child " + std::to_string(target) + " missing");
                    continue;
                }
                if (it->second.valid &&
                    it->second.step.conclusion.key() != fresh.premisses[k].key())
                    defect(id, "premiss " + std::to_string(k) + " is '" +
                                   fresh.premisses[k].key() + "' but child " +
                                   std::to_string(target) + " proves '" +
                                   it->second.step.conclusion.key() + "'");
            }
        } catch (const DomainError& ex) {
            defect(id, ex.what());
        }
    }
    // reachability
    std::set<int> seen{p.root};
    std::deque<int> queue{p.root};
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        auto it = p.nodes.find(cur);
        if (it == p.nodes.end()) continue;
        for (auto& c : it->second.children)
            if (seen.insert(c.id).second) queue.push_back(c.id);
    }
    for (auto& [id, node] : p.nodes)
        if (!seen.count(id)) defect(id, "unreachable from root");
    return report;
}

// ---------------------------------------------------------------------------
// mu-only progress: no cycle of non-mu-l nodes.
// ---------------------------------------------------------------------------

bool check_progress_mu(const Preproof& p) {
    for (auto& [id, node] : p.nodes) {
        RuleKind r = node.step.rule;
        if (r == RuleKind::NuL || r == RuleKind::NuR)
            throw DomainError("check_progress_mu: nu rule present");
        for (auto& c : node.step.conclusion.lhs)
            if (!is_mu_only(c)) throw DomainError("check_progress_mu: nu formula present");
    }
    // DFS cycle detection on the subgraph of non-mu-l nodes
    std::map<int, int> color;  // 0 white, 1 gray, 2 black
    std::function<bool(int)> dfs = [&](int id) -> bool {
        auto it = p.nodes.find(id);
        if (it == p.nodes.end()) return false;
        if (it->second.step.rule == RuleKind::MuL) return false;  // not in subgraph
        int& c = color[id];
        if (c == 1) return true;  // cycle
        if (c == 2) return false;
        c = 1;
        for (auto& ch : it->second.children)
            if (dfs(ch.id)) return true;
        c = 2;
        return false;
    };
    for (auto& [id, node] : p.nodes) {
        (void)node;
        if (color[id] == 0 && dfs(id)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Thread profiles.
//
// A profile of a path between two nodes is the set of triples
// (occurrence at the start, occurrence at the end, max principal rank on the
// connecting ancestry path), with rank -1 for "never principal". Profiles
// compose relationally with max-combination; every realizable idempotent
// cycle profile must contain a self-loop whose rank is a mu-formula on the
// left or a nu-formula on the right (the max-rank formula of a recurring
// thread is its subformula-least infinitely-often-principal formula).
// ---------------------------------------------------------------------------

namespace {

using Triple = std::tuple<int, int, int>;
using Profile = std::vector<Triple>;  // sorted, unique

Profile compose(const Profile& a, const Profile& b) {
    std::set<Triple> out;
    std::map<int, std::vector<std::pair<int, int>>> by_from;
    for (auto& [y, z, s] : b) by_from[y].push_back({z, s});
    for (auto& [x, y, r] : a) {
        auto it = by_from.find(y);
        if (it == by_from.end()) continue;
        for (auto& [z, s] : it->second) out.insert({x, z, std::max(r, s)});
    }
    return Profile(out.begin(), out.end());
}

struct RankTable {
    std::map<std::string, int> rank_of;
    std::vector<ExprKind> kind;
    std::vector<ExprPtr> formula;

    void build(const std::vector<ExprPtr>& principals) {
        std::vector<ExprPtr> sorted = principals;
        std::sort(sorted.begin(), sorted.end(),
                  [](const ExprPtr& a, const ExprPtr& b) { return dependency_compare(a, b) < 0; });
        sorted.erase(std::unique(sorted.begin(), sorted.end(),
                                 [](const ExprPtr& a, const ExprPtr& b) {
                                     return alpha_equal(a, b);
                                 }),
                     sorted.end());
        for (auto& f : sorted) {
            rank_of[canon_print(f)] = static_cast<int>(kind.size());
            kind.push_back(f->kind);
            formula.push_back(f);
        }
    }
};

int enc_occ(const Hypersequent& s, const Occ& o) {
    if (o.cedent < 0) return o.index;
    int base = static_cast<int>(s.lhs.size());
    for (int c = 0; c < o.cedent; ++c) base += static_cast<int>(s.rhs[c].size());
    return base + o.index;
}

bool occ_on_lhs(const Hypersequent& s, int enc) { return enc < static_cast<int>(s.lhs.size()); }

// Profile of a single inference edge (conclusion -> premiss k).
Profile edge_profile(const RuleInstance& step, int k, const RankTable& ranks) {
    const Hypersequent& concl = step.conclusion;
    const Hypersequent& prem = step.premisses[k];
    int principal_enc = -1;
    if (rule_is_logical(step.rule)) {
        Occ po{step.principal.cedent, step.principal.index};
        principal_enc = enc_occ(concl, po);
    }
    ExprPtr pf;
    if (principal_enc >= 0) {
        if (step.principal.cedent < 0)
            pf = concl.lhs[step.principal.index];
        else
            pf = concl.rhs[step.principal.cedent][step.principal.index];
    }
    std::set<Triple> out;
    const auto& anc = step.ancestry[k];
    for (std::size_t i = 0; i < anc.lhs.size(); ++i) {
        int from = anc.lhs[i];  // conclusion lhs index == encoding
        int ev = (from == principal_enc && pf) ? ranks.rank_of.at(canon_print(pf)) : -1;
        out.insert({from, static_cast<int>(i), ev});
    }
    for (std::size_t c = 0; c < anc.rhs.size(); ++c)
        for (std::size_t i = 0; i < anc.rhs[c].size(); ++i) {
            int from = enc_occ(concl, anc.rhs[c][i]);
            int to = enc_occ(prem, Occ{static_cast<int>(c), static_cast<int>(i)});
            int ev = (from == principal_enc && pf) ? ranks.rank_of.at(canon_print(pf)) : -1;
            out.insert({from, to, ev});
        }
    return Profile(out.begin(), out.end());
}

bool profile_has_good_loop(const Profile& prof, const Hypersequent& at, const RankTable& ranks,
                           bool* fact48_violated = nullptr) {
    for (auto& [x, y, r] : prof) {
        if (x != y || r < 0) continue;
        ExprKind k = ranks.kind[r];
        if (k != ExprKind::Mu && k != ExprKind::Nu) {
            // the max-rank formula of a recurring thread is its
            // subformula-least i.o.p. formula and must be a fixed point
            if (fact48_violated) *fact48_violated = true;
            throw std::logic_error("progress check: least i.o.p. formula is not a fixed point");
        }
        bool lhs = occ_on_lhs(at, x);
        if ((lhs && k == ExprKind::Mu) || (!lhs && k == ExprKind::Nu)) return true;
    }
    return false;
}

Profile profile_power_idempotent(const Profile& p) {
    std::vector<Profile> powers{p};
    for (int i = 0; i < 256; ++i) {
        Profile next = compose(powers.back(), p);
        for (std::size_t j = 0; j < powers.size(); ++j)
            if (powers[j] == next) {
                // powers repeat with period d from index j; P^k is idempotent
                // for the smallest multiple k of d with k > j
                std::size_t d = powers.size() - j;
                std::size_t k = ((j / d) + 1) * d;
                while (k <= j) k += d;
                Profile idem = powers[0];
                for (std::size_t t = 1; t < k; ++t) idem = compose(idem, powers[0]);
                return idem;
            }
        powers.push_back(std::move(next));
    }
    throw std::logic_error("profile power iteration did not stabilize");
}

}  // namespace

ProgressResult check_progress_munu_witness(const Preproof& p) {
    // collect principal formulas
    std::vector<ExprPtr> principals;
    for (auto& [id, node] : p.nodes) {
        (void)id;
        if (!node.valid) throw DomainError("check_progress_munu: ill-formed proof");
        if (!rule_is_logical(node.step.rule)) continue;
        const auto& s = node.step.conclusion;
        principals.push_back(node.step.principal.cedent < 0
                                 ? s.lhs[node.step.principal.index]
                                 : s.rhs[node.step.principal.cedent][node.step.principal.index]);
    }
    RankTable ranks;
    ranks.build(principals);

    // closure of path profiles, worklist over right-extension by edges
    struct Key {
        int from, to;
        Profile prof;
        bool operator<(const Key& o) const {
            return std::tie(from, to, prof) < std::tie(o.from, o.to, o.prof);
        }
    };
    std::map<Key, std::vector<int>> paths;  // witness node path (from..to)
    std::deque<Key> work;
    // edge profiles
    std::map<int, std::vector<std::pair<int, Profile>>> out_edges;
    for (auto& [id, node] : p.nodes) {
        for (std::size_t k = 0; k < node.children.size(); ++k) {
            Profile prof = edge_profile(node.step, static_cast<int>(k), ranks);
            out_edges[id].push_back({node.children[k].id, prof});
            Key key{id, node.children[k].id, prof};
            if (!paths.count(key)) {
                paths[key] = {id, node.children[k].id};
                work.push_back(key);
            }
        }
    }
    const std::size_t budget = 2'000'000;
    std::size_t triples = 0;
    while (!work.empty()) {
        Key cur = work.front();
        work.pop_front();
        auto path_it = paths.find(cur);
        for (auto& [next, eprof] : out_edges[cur.to]) {
            Profile comp = compose(cur.prof, eprof);
            Key key{cur.from, next, comp};
            if (paths.count(key)) continue;
            triples += comp.size() + 1;
            if (triples > budget)
                throw DomainError("check_progress_munu: profile budget exceeded");
            std::vector<int> path = path_it->second;
            path.push_back(next);
            paths[key] = std::move(path);
            work.push_back(key);
        }
    }

    // every realizable idempotent cycle profile needs a good self-loop
    for (auto& [key, path] : paths) {
        if (key.from != key.to) continue;
        if (compose(key.prof, key.prof) != key.prof) continue;
        if (!profile_has_good_loop(key.prof, p.sequent_of(key.from), ranks)) {
            ProgressResult res;
            res.progressing = false;
            // stem: BFS root -> anchor
            std::map<int, int> parent;
            std::deque<int> queue{p.root};
            parent[p.root] = p.root;
            while (!queue.empty()) {
                int cur = queue.front();
                queue.pop_front();
                for (auto& [next, eprof] : out_edges[cur]) {
                    (void)eprof;
                    if (!parent.count(next)) {
                        parent[next] = cur;
                        queue.push_back(next);
                    }
                }
            }
            int anchor = key.from;
            std::vector<int> stem;
            for (int cur = anchor;; cur = parent.at(cur)) {
                stem.push_back(cur);
                if (cur == p.root) break;
            }
            std::reverse(stem.begin(), stem.end());
            res.stem = stem;
            res.cycle = path;
            res.cycle.pop_back();  // path ends where it starts
            return res;
        }
    }
    ProgressResult res;
    res.progressing = true;
    return res;
}

bool check_progress_munu(const Preproof& p) { return check_progress_munu_witness(p).progressing; }

bool is_leftmost_proof(const Preproof& p) {
    for (auto& [id, node] : p.nodes) {
        (void)id;
        if (!node.valid) return false;
        if (!is_leftmost(node.step)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Single-cycle thread automaton (used by the search when folding back-edges).
// ---------------------------------------------------------------------------

ThreadAutomaton thread_automaton_for_cycle(const std::vector<const RuleInstance*>& steps,
                                           const std::vector<int>& premiss_taken) {
    ThreadAutomaton ta;
    std::vector<ExprPtr> principals;
    for (auto* s : steps)
        if (rule_is_logical(s->rule))
            principals.push_back(s->principal.cedent < 0
                                     ? s->conclusion.lhs[s->principal.index]
                                     : s->conclusion.rhs[s->principal.cedent][s->principal.index]);
    RankTable ranks;
    ranks.build(principals);

    for (std::size_t i = 0; i < steps.size(); ++i) {
        const RuleInstance& step = *steps[i];
        const Hypersequent& concl = step.conclusion;
        int count = static_cast<int>(concl.lhs.size());
        for (auto& c : concl.rhs) count += static_cast<int>(c.size());
        ta.occ_counts.push_back(count);
        if (i == 0) {
            ta.from_lhs.resize(count);
            for (int o = 0; o < count; ++o) ta.from_lhs[o] = occ_on_lhs(concl, o) ? 1 : 0;
        }
        Profile prof = edge_profile(step, premiss_taken[i], ranks);
        std::vector<ThreadAutomaton::Edge> es;
        for (auto& [from, to, r] : prof)
            es.push_back({from, to, r >= 0 ? ranks.formula[r] : nullptr});
        ta.edges.push_back(std::move(es));
    }
    return ta;
}

bool cycle_progressing(const std::vector<const RuleInstance*>& steps,
                       const std::vector<int>& premiss_taken) {
    if (steps.empty()) return false;
    std::vector<ExprPtr> principals;
    for (auto* s : steps)
        if (rule_is_logical(s->rule))
            principals.push_back(s->principal.cedent < 0
                                     ? s->conclusion.lhs[s->principal.index]
                                     : s->conclusion.rhs[s->principal.cedent][s->principal.index]);
    RankTable ranks;
    ranks.build(principals);
    Profile acc;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        Profile ep = edge_profile(*steps[i], premiss_taken[i], ranks);
        acc = i == 0 ? ep : compose(acc, ep);
    }
    Profile idem = profile_power_idempotent(acc);
    return profile_has_good_loop(idem, steps[0]->conclusion, ranks);
}

}  // namespace munu

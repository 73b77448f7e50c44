#include "munu/sequent.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace munu {

std::string cedent_print(const Cedent& c) {
    std::string out = "[";
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) out += ", ";
        out += print_expr(c[i]);
    }
    return out + "]";
}

std::string cedent_key(const Cedent& c) {
    std::string out = "[";
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) out += ", ";
        out += canon_print(c[i]);
    }
    return out + "]";
}

Hypersequent Hypersequent::make(Cedent lhs, std::vector<Cedent> rhs) {
    Hypersequent s;
    s.lhs = std::move(lhs);
    std::sort(rhs.begin(), rhs.end(),
              [](const Cedent& a, const Cedent& b) { return cedent_key(a) < cedent_key(b); });
    std::string prev;
    bool first = true;
    for (auto& c : rhs) {
        std::string k = cedent_key(c);
        if (first || k != prev) s.rhs.push_back(c);
        prev = std::move(k);
        first = false;
    }
    return s;
}

std::string Hypersequent::key() const {
    std::string out = cedent_key(lhs).substr(1);
    out.pop_back();  // bare item list for the LHS
    out += " |- ";
    if (rhs.empty()) return out + "{}";
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        if (i) out += ", ";
        out += cedent_key(rhs[i]);
    }
    return out;
}

std::string Hypersequent::print() const {
    std::string out;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        if (i) out += ", ";
        out += print_expr(lhs[i]);
    }
    if (!lhs.empty()) out += " ";
    out += "|- ";
    if (rhs.empty()) return out + "{}";
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        if (i) out += ", ";
        out += cedent_print(rhs[i]);
    }
    return out;
}

bool Hypersequent::mu_only() const {
    for (auto& e : lhs)
        if (!is_mu_only(e)) return false;
    for (auto& c : rhs)
        for (auto& e : c)
            if (!is_mu_only(e)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

namespace {

// split on top-level commas (parens are the only nesting inside expressions)
std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char ch : s) {
        if (ch == '(') depth++;
        if (ch == ')') depth--;
        if (ch == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\n");
    return s.substr(a, b - a + 1);
}

Cedent parse_cedent_items(const std::string& body, const std::set<char>& alphabet) {
    Cedent c;
    if (trim(body).empty()) return c;
    for (auto& item : split_commas(body)) c.push_back(parse_expr(trim(item), alphabet));
    return c;
}

}  // namespace

Cedent parse_cedent(const std::string& text, const std::set<char>& alphabet) {
    std::string body = trim(text);
    if (!body.empty() && body.front() == '[' && body.back() == ']')
        body = body.substr(1, body.size() - 2);
    return parse_cedent_items(body, alphabet);
}

Hypersequent parse_sequent(const std::string& text, const std::set<char>& alphabet) {
    std::size_t sep = text.find("|-");
    if (sep == std::string::npos) throw ParseError("expected '|-' in sequent", 0);
    std::string left = trim(text.substr(0, sep));
    std::string right = trim(text.substr(sep + 2));
    // tolerate a braced LHS cedent: {e1, e2} |- ...
    if (!left.empty() && left.front() == '{' && left.back() == '}')
        left = trim(left.substr(1, left.size() - 2));
    Cedent lhs = parse_cedent_items(left, alphabet);

    std::vector<Cedent> rhs;
    if (right == "{}" || right.empty()) return Hypersequent::make(std::move(lhs), {});
    // sequence of [ ... ] groups separated by commas
    std::size_t i = 0;
    while (i < right.size()) {
        while (i < right.size() && (std::isspace((unsigned char)right[i]) || right[i] == ','))
            i++;
        if (i >= right.size()) break;
        if (right[i] != '[') throw ParseError("expected '[' in sequent right-hand side", i);
        std::size_t close = right.find(']', i);
        if (close == std::string::npos) throw ParseError("unterminated cedent", i);
        rhs.push_back(parse_cedent_items(right.substr(i + 1, close - i - 1), alphabet));
        i = close + 1;
    }
    return Hypersequent::make(std::move(lhs), std::move(rhs));
}

// ---------------------------------------------------------------------------
// Rule names.
// ---------------------------------------------------------------------------

bool rule_is_logical(RuleKind r) {
    switch (r) {
        case RuleKind::Init:
        case RuleKind::WeakR:
        case RuleKind::KL:
        case RuleKind::KR:
            return false;
        default:
            return true;
    }
}

bool rule_is_left(RuleKind r) {
    switch (r) {
        case RuleKind::ZeroL:
        case RuleKind::OneL:
        case RuleKind::ProdL:
        case RuleKind::SumL:
        case RuleKind::MuL:
        case RuleKind::NuL:
            return true;
        default:
            return false;
    }
}

std::string rule_name(RuleKind r, char letter) {
    switch (r) {
        case RuleKind::Init: return "init";
        case RuleKind::WeakR: return "w-r";
        case RuleKind::KL: return std::string("k-l(") + letter + ")";
        case RuleKind::KR: return std::string("k-r(") + letter + ")";
        case RuleKind::ZeroL: return "0-l";
        case RuleKind::OneL: return "1-l";
        case RuleKind::ProdL: return ".-l";
        case RuleKind::SumL: return "+-l";
        case RuleKind::MuL: return "mu-l";
        case RuleKind::NuL: return "nu-l";
        case RuleKind::ZeroR: return "0-r";
        case RuleKind::OneR: return "1-r";
        case RuleKind::ProdR: return ".-r";
        case RuleKind::SumR: return "+-r";
        case RuleKind::MuR: return "mu-r";
        case RuleKind::NuR: return "nu-r";
    }
    return "?";
}

std::pair<RuleKind, char> parse_rule_name(const std::string& name) {
    static const std::map<std::string, RuleKind> plain{
        {"init", RuleKind::Init},  {"w-r", RuleKind::WeakR}, {"0-l", RuleKind::ZeroL},
        {"1-l", RuleKind::OneL},   {".-l", RuleKind::ProdL}, {"+-l", RuleKind::SumL},
        {"mu-l", RuleKind::MuL},   {"nu-l", RuleKind::NuL},  {"0-r", RuleKind::ZeroR},
        {"1-r", RuleKind::OneR},   {".-r", RuleKind::ProdR}, {"+-r", RuleKind::SumR},
        {"mu-r", RuleKind::MuR},   {"nu-r", RuleKind::NuR},
    };
    auto it = plain.find(name);
    if (it != plain.end()) return {it->second, 0};
    if (name.size() == 6 && name.compare(0, 4, "k-l(") == 0 && name[5] == ')')
        return {RuleKind::KL, name[4]};
    if (name.size() == 6 && name.compare(0, 4, "k-r(") == 0 && name[5] == ')')
        return {RuleKind::KR, name[4]};
    throw DomainError("unknown rule name: " + name);
}

// ---------------------------------------------------------------------------
// Rule application.
// ---------------------------------------------------------------------------

namespace {

// A premiss under construction: cedents paired with the conclusion occurrence
// of each formula. Cedents are then sorted/deduplicated; the first cedent
// with a given key wins, so callers list principal-derived cedents first
// (their ancestry takes priority on a set-collapse).
struct RawPremiss {
    Cedent lhs;
    std::vector<int> lhs_map;
    std::vector<std::pair<Cedent, std::vector<Occ>>> cedents;

    Hypersequent finish(RuleInstance::AncMap& anc) const {
        std::vector<int> order(cedents.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::vector<std::string> keys(cedents.size());
        for (std::size_t i = 0; i < cedents.size(); ++i) keys[i] = cedent_key(cedents[i].first);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return keys[a] < keys[b]; });
        Hypersequent s;
        s.lhs = lhs;
        anc.lhs = lhs_map;
        std::string prev;
        bool first = true;
        for (int idx : order) {
            if (!first && keys[idx] == prev) continue;
            prev = keys[idx];
            first = false;
            s.rhs.push_back(cedents[idx].first);
            anc.rhs.push_back(cedents[idx].second);
        }
        return s;
    }
};

std::vector<Occ> identity_occs(int cedent, std::size_t n) {
    std::vector<Occ> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = Occ{cedent, static_cast<int>(i)};
    return v;
}

void copy_context(const Hypersequent& s, RawPremiss& raw, int skip_cedent = -2) {
    for (std::size_t c = 0; c < s.rhs.size(); ++c) {
        if (static_cast<int>(c) == skip_cedent) continue;
        raw.cedents.push_back({s.rhs[c], identity_occs(static_cast<int>(c), s.rhs[c].size())});
    }
}

void copy_lhs(const Hypersequent& s, RawPremiss& raw) {
    raw.lhs = s.lhs;
    raw.lhs_map.resize(s.lhs.size());
    for (std::size_t i = 0; i < s.lhs.size(); ++i) raw.lhs_map[i] = static_cast<int>(i);
}

[[noreturn]] void mismatch(const Hypersequent& s, RuleKind rule, const std::string& why) {
    throw DomainError("rule " + rule_name(rule) + " does not apply to '" + s.print() +
                      "': " + why);
}

}  // namespace

RuleInstance apply_rule(const Hypersequent& conclusion, RuleKind rule, Principal pos,
                        char letter) {
    RuleInstance inst;
    inst.rule = rule;
    inst.conclusion = conclusion;
    inst.principal = pos;
    const Hypersequent& s = conclusion;

    auto lhs_at = [&](int i) -> const ExprPtr& {
        if (i < 0 || i >= static_cast<int>(s.lhs.size()))
            mismatch(s, rule, "LHS position out of range");
        return s.lhs[i];
    };
    auto rhs_at = [&](int c, int i) -> const ExprPtr& {
        if (c < 0 || c >= static_cast<int>(s.rhs.size()))
            mismatch(s, rule, "RHS cedent out of range");
        if (i < 0 || i >= static_cast<int>(s.rhs[c].size()))
            mismatch(s, rule, "RHS position out of range");
        return s.rhs[c][i];
    };
    auto push_premiss = [&](RawPremiss& raw) {
        RuleInstance::AncMap anc;
        inst.premisses.push_back(raw.finish(anc));
        inst.ancestry.push_back(std::move(anc));
    };

    switch (rule) {
        case RuleKind::Init: {
            if (!s.lhs.empty() || s.rhs.size() != 1 || !s.rhs[0].empty())
                mismatch(s, rule, "conclusion must be '|- []'");
            break;
        }
        case RuleKind::WeakR: {
            if (pos.cedent < 0 || pos.cedent >= static_cast<int>(s.rhs.size()))
                mismatch(s, rule, "no such cedent");
            inst.weakened = s.rhs[pos.cedent];
            RawPremiss raw;
            copy_lhs(s, raw);
            copy_context(s, raw, pos.cedent);
            push_premiss(raw);
            break;
        }
        case RuleKind::KL: {
            if (s.lhs.empty() || s.lhs[0]->kind != ExprKind::Letter)
                mismatch(s, rule, "LHS must start with a letter");
            if (letter == 0) letter = s.lhs[0]->letter;
            if (s.lhs[0]->letter != letter) mismatch(s, rule, "letter does not match LHS head");
            for (auto& c : s.rhs)
                if (c.empty() || c[0]->kind != ExprKind::Letter || c[0]->letter != letter)
                    mismatch(s, rule, "every RHS cedent must start with the letter");
            inst.letter = letter;
            RawPremiss raw;
            raw.lhs.assign(s.lhs.begin() + 1, s.lhs.end());
            for (std::size_t i = 0; i + 1 < s.lhs.size(); ++i)
                raw.lhs_map.push_back(static_cast<int>(i) + 1);
            for (std::size_t c = 0; c < s.rhs.size(); ++c) {
                Cedent rest(s.rhs[c].begin() + 1, s.rhs[c].end());
                std::vector<Occ> occs;
                for (std::size_t i = 0; i + 1 < s.rhs[c].size(); ++i)
                    occs.push_back(Occ{static_cast<int>(c), static_cast<int>(i) + 1});
                raw.cedents.push_back({std::move(rest), std::move(occs)});
            }
            push_premiss(raw);
            break;
        }
        case RuleKind::KR: {
            if (s.lhs.empty() || s.lhs.back()->kind != ExprKind::Letter)
                mismatch(s, rule, "LHS must end with a letter");
            if (letter == 0) letter = s.lhs.back()->letter;
            if (s.lhs.back()->letter != letter) mismatch(s, rule, "letter does not match LHS tail");
            for (auto& c : s.rhs)
                if (c.empty() || c.back()->kind != ExprKind::Letter || c.back()->letter != letter)
                    mismatch(s, rule, "every RHS cedent must end with the letter");
            inst.letter = letter;
            RawPremiss raw;
            raw.lhs.assign(s.lhs.begin(), s.lhs.end() - 1);
            for (std::size_t i = 0; i + 1 < s.lhs.size(); ++i)
                raw.lhs_map.push_back(static_cast<int>(i));
            for (std::size_t c = 0; c < s.rhs.size(); ++c) {
                Cedent rest(s.rhs[c].begin(), s.rhs[c].end() - 1);
                raw.cedents.push_back({std::move(rest), identity_occs(static_cast<int>(c), s.rhs[c].size() - 1)});
            }
            push_premiss(raw);
            break;
        }
        case RuleKind::ZeroL: {
            if (lhs_at(pos.index)->kind != ExprKind::Zero)
                mismatch(s, rule, "principal formula is not 0");
            break;  // axiom
        }
        case RuleKind::OneL:
        case RuleKind::ProdL:
        case RuleKind::MuL:
        case RuleKind::NuL: {
            const ExprPtr& f = lhs_at(pos.index);
            RawPremiss raw;
            copy_context(s, raw);
            auto add = [&](int concl_idx) { raw.lhs_map.push_back(concl_idx); };
            for (int i = 0; i < pos.index; ++i) {
                raw.lhs.push_back(s.lhs[i]);
                add(i);
            }
            if (rule == RuleKind::OneL) {
                if (f->kind != ExprKind::One) mismatch(s, rule, "principal formula is not 1");
            } else if (rule == RuleKind::ProdL) {
                if (f->kind != ExprKind::Prod)
                    mismatch(s, rule, "principal formula is not a product");
                raw.lhs.push_back(f->lhs);
                add(pos.index);
                raw.lhs.push_back(f->rhs);
                add(pos.index);
            } else {
                if ((rule == RuleKind::MuL && f->kind != ExprKind::Mu) ||
                    (rule == RuleKind::NuL && f->kind != ExprKind::Nu))
                    mismatch(s, rule, "principal formula is not the right fixed point");
                raw.lhs.push_back(unfold(f));
                add(pos.index);
            }
            for (int i = pos.index + 1; i < static_cast<int>(s.lhs.size()); ++i) {
                raw.lhs.push_back(s.lhs[i]);
                add(i);
            }
            push_premiss(raw);
            break;
        }
        case RuleKind::SumL: {
            const ExprPtr& f = lhs_at(pos.index);
            if (f->kind != ExprKind::Sum) mismatch(s, rule, "principal formula is not a sum");
            for (ExprPtr part : {f->lhs, f->rhs}) {
                RawPremiss raw;
                copy_context(s, raw);
                raw.lhs = s.lhs;
                raw.lhs[pos.index] = part;
                for (std::size_t i = 0; i < s.lhs.size(); ++i)
                    raw.lhs_map.push_back(static_cast<int>(i));
                push_premiss(raw);
            }
            break;
        }
        case RuleKind::ZeroR: {
            if (rhs_at(pos.cedent, pos.index)->kind != ExprKind::Zero)
                mismatch(s, rule, "principal formula is not 0");
            RawPremiss raw;
            copy_lhs(s, raw);
            copy_context(s, raw, pos.cedent);
            push_premiss(raw);
            break;
        }
        case RuleKind::OneR:
        case RuleKind::ProdR:
        case RuleKind::MuR:
        case RuleKind::NuR: {
            const ExprPtr& f = rhs_at(pos.cedent, pos.index);
            Cedent ced;
            std::vector<Occ> occs;
            const Cedent& orig = s.rhs[pos.cedent];
            for (int i = 0; i < pos.index; ++i) {
                ced.push_back(orig[i]);
                occs.push_back(Occ{pos.cedent, i});
            }
            if (rule == RuleKind::OneR) {
                if (f->kind != ExprKind::One) mismatch(s, rule, "principal formula is not 1");
            } else if (rule == RuleKind::ProdR) {
                if (f->kind != ExprKind::Prod)
                    mismatch(s, rule, "principal formula is not a product");
                ced.push_back(f->lhs);
                occs.push_back(Occ{pos.cedent, pos.index});
                ced.push_back(f->rhs);
                occs.push_back(Occ{pos.cedent, pos.index});
            } else {
                if ((rule == RuleKind::MuR && f->kind != ExprKind::Mu) ||
                    (rule == RuleKind::NuR && f->kind != ExprKind::Nu))
                    mismatch(s, rule, "principal formula is not the right fixed point");
                ced.push_back(unfold(f));
                occs.push_back(Occ{pos.cedent, pos.index});
            }
            for (int i = pos.index + 1; i < static_cast<int>(orig.size()); ++i) {
                ced.push_back(orig[i]);
                occs.push_back(Occ{pos.cedent, i});
            }
            RawPremiss raw;
            copy_lhs(s, raw);
            raw.cedents.push_back({std::move(ced), std::move(occs)});
            copy_context(s, raw, pos.cedent);
            push_premiss(raw);
            break;
        }
        case RuleKind::SumR: {
            const ExprPtr& f = rhs_at(pos.cedent, pos.index);
            if (f->kind != ExprKind::Sum) mismatch(s, rule, "principal formula is not a sum");
            RawPremiss raw;
            copy_lhs(s, raw);
            const Cedent& orig = s.rhs[pos.cedent];
            for (ExprPtr part : {f->lhs, f->rhs}) {
                Cedent ced = orig;
                ced[pos.index] = part;
                raw.cedents.push_back(
                    {std::move(ced), identity_occs(pos.cedent, orig.size())});
            }
            copy_context(s, raw, pos.cedent);
            push_premiss(raw);
            break;
        }
    }
    return inst;
}

std::vector<Applicable> enumerate_applicable(const Hypersequent& s) {
    std::vector<Applicable> out;
    auto try_add = [&](RuleKind r, Principal p, char letter = 0) {
        try {
            apply_rule(s, r, p, letter);
            out.push_back(Applicable{r, p, letter});
        } catch (const DomainError&) {
        }
    };
    try_add(RuleKind::Init, {});
    if (!s.lhs.empty() && s.lhs[0]->kind == ExprKind::Letter)
        try_add(RuleKind::KL, {}, s.lhs[0]->letter);
    if (!s.lhs.empty() && s.lhs.back()->kind == ExprKind::Letter)
        try_add(RuleKind::KR, {}, s.lhs.back()->letter);
    for (int c = 0; c < static_cast<int>(s.rhs.size()); ++c)
        try_add(RuleKind::WeakR, Principal{c, 0});
    for (int i = 0; i < static_cast<int>(s.lhs.size()); ++i) {
        switch (s.lhs[i]->kind) {
            case ExprKind::Zero: try_add(RuleKind::ZeroL, Principal{-1, i}); break;
            case ExprKind::One: try_add(RuleKind::OneL, Principal{-1, i}); break;
            case ExprKind::Prod: try_add(RuleKind::ProdL, Principal{-1, i}); break;
            case ExprKind::Sum: try_add(RuleKind::SumL, Principal{-1, i}); break;
            case ExprKind::Mu: try_add(RuleKind::MuL, Principal{-1, i}); break;
            case ExprKind::Nu: try_add(RuleKind::NuL, Principal{-1, i}); break;
            default: break;
        }
    }
    for (int c = 0; c < static_cast<int>(s.rhs.size()); ++c)
        for (int i = 0; i < static_cast<int>(s.rhs[c].size()); ++i) {
            switch (s.rhs[c][i]->kind) {
                case ExprKind::Zero: try_add(RuleKind::ZeroR, Principal{c, i}); break;
                case ExprKind::One: try_add(RuleKind::OneR, Principal{c, i}); break;
                case ExprKind::Prod: try_add(RuleKind::ProdR, Principal{c, i}); break;
                case ExprKind::Sum: try_add(RuleKind::SumR, Principal{c, i}); break;
                case ExprKind::Mu: try_add(RuleKind::MuR, Principal{c, i}); break;
                case ExprKind::Nu: try_add(RuleKind::NuR, Principal{c, i}); break;
                default: break;
            }
        }
    return out;
}

bool is_leftmost(const RuleInstance& step) {
    if (step.rule == RuleKind::KR) return false;
    if (!rule_is_logical(step.rule)) return true;
    return step.principal.index == 0;
}

ValidityResult seq_valid_upto(const Hypersequent& s, int max_len) {
    if (!s.mu_only()) throw DomainError("seq_valid_upto: nu is not allowed here");
    MembershipOracle lhs_oracle(s.lhs);
    std::vector<MembershipOracle> rhs_oracles;
    rhs_oracles.reserve(s.rhs.size());
    for (auto& c : s.rhs) rhs_oracles.emplace_back(c);
    for (auto& w : all_words(lhs_oracle.letters(), max_len)) {
        if (!lhs_oracle.member(w)) continue;
        bool covered = false;
        for (auto& oracle : rhs_oracles)
            if (oracle.member(w)) {
                covered = true;
                break;
            }
        if (!covered) return ValidityResult{w};
    }
    return ValidityResult{};
}

}  // namespace munu

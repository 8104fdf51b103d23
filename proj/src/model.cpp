/*
 * Copyright 2026 The coltree authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "coltree/model.hpp"

#include <algorithm>
#include <functional>

namespace coltree {

ValidationReport FiniteModel::check() const {
    ValidationReport report;
    for (const auto& rel : relations) {
        if (rel.arity == 0) report.add("relation " + rel.name + " has arity 0");
        for (const auto& tuple : rel.tuples) {
            if (tuple.size() != rel.arity)
                report.add("tuple arity mismatch in relation " + rel.name);
            for (Elem e : tuple)
                if (e >= universeSize)
                    report.add("tuple element out of universe in relation " + rel.name);
        }
    }
    return report;
}

std::string AtomicType::encode() const {
    if (atoms.empty()) return "-";
    std::string out;
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (i) out += '&';
        const Atom& atom = atoms[i];
        if (!atom.positive) out += '!';
        out += atom.relation;
        out += '(';
        for (size_t j = 0; j < atom.args.size(); ++j) {
            if (j) out += ',';
            out += atom.args[j] == Atom::SUBJECT ? "y" : "b" + std::to_string(atom.args[j]);
        }
        out += ')';
    }
    return out;
}

AtomicType AtomicType::decode(std::string_view text, uint32_t parameterCount) {
    AtomicType type;
    type.parameterCount = parameterCount;
    if (text == "-") return type;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t amp = text.find('&', pos);
        std::string_view part =
            text.substr(pos, amp == std::string_view::npos ? amp : amp - pos);
        Atom atom;
        if (!part.empty() && part[0] == '!') {
            atom.positive = false;
            part.remove_prefix(1);
        }
        size_t open = part.find('(');
        if (open == std::string_view::npos || part.back() != ')')
            throw std::runtime_error("bad atomic type literal");
        atom.relation = std::string(part.substr(0, open));
        std::string_view args = part.substr(open + 1, part.size() - open - 2);
        size_t apos = 0;
        while (apos <= args.size() && !args.empty()) {
            size_t comma = args.find(',', apos);
            std::string_view arg =
                args.substr(apos, comma == std::string_view::npos ? comma : comma - apos);
            if (arg == "y")
                atom.args.push_back(Atom::SUBJECT);
            else if (!arg.empty() && arg[0] == 'b')
                atom.args.push_back(
                    static_cast<uint32_t>(std::stoul(std::string(arg.substr(1)))));
            else
                throw std::runtime_error("bad atom argument");
            if (comma == std::string_view::npos) break;
            apos = comma + 1;
        }
        type.atoms.push_back(std::move(atom));
        if (amp == std::string_view::npos) break;
        pos = amp + 1;
    }
    std::sort(type.atoms.begin(), type.atoms.end());
    return type;
}

namespace {

// All argument patterns of the given arity over {SUBJECT, 0..k-1} that
// mention the subject at least once.
void patterns(uint32_t arity, uint32_t k, std::vector<uint32_t>& current,
              std::vector<std::vector<uint32_t>>& out) {
    if (current.size() == arity) {
        for (uint32_t a : current)
            if (a == AtomicType::Atom::SUBJECT) {
                out.push_back(current);
                return;
            }
        return;
    }
    current.push_back(AtomicType::Atom::SUBJECT);
    patterns(arity, k, current, out);
    current.pop_back();
    for (uint32_t i = 0; i < k; ++i) {
        current.push_back(i);
        patterns(arity, k, current, out);
        current.pop_back();
    }
}

bool atomHolds(const FiniteModel::Relation& rel, const std::vector<uint32_t>& pattern,
               Elem subject, const std::vector<Elem>& params) {
    std::vector<Elem> tuple(pattern.size());
    for (size_t i = 0; i < pattern.size(); ++i)
        tuple[i] = pattern[i] == AtomicType::Atom::SUBJECT ? subject : params[pattern[i]];
    return rel.tuples.count(tuple) > 0;
}

}  // namespace

AtomicType atomicType(const FiniteModel& M, Elem a, const std::vector<Elem>& params) {
    for (Elem b : params)
        if (b == a) throw PreconditionError("subject occurs among the parameters");
    AtomicType type;
    type.parameterCount = static_cast<uint32_t>(params.size());
    for (const auto& rel : M.relations) {
        std::vector<std::vector<uint32_t>> pats;
        std::vector<uint32_t> current;
        patterns(rel.arity, type.parameterCount, current, pats);
        for (auto& pattern : pats) {
            AtomicType::Atom atom;
            atom.relation = rel.name;
            atom.positive = atomHolds(rel, pattern, a, params);
            atom.args = std::move(pattern);
            type.atoms.push_back(std::move(atom));
        }
    }
    std::sort(type.atoms.begin(), type.atoms.end());
    return type;
}

std::vector<Elem> realizers(const FiniteModel& M, const AtomicType& type,
                            const std::vector<Elem>& params) {
    std::vector<Elem> out;
    for (Elem y = 0; y < M.universeSize; ++y) {
        if (std::find(params.begin(), params.end(), y) != params.end()) continue;
        bool ok = true;
        for (const auto& atom : type.atoms) {
            const FiniteModel::Relation* rel = nullptr;
            for (const auto& r : M.relations)
                if (r.name == atom.relation) rel = &r;
            if (!rel) {
                ok = false;
                break;
            }
            if (atomHolds(*rel, atom.args, y, params) != atom.positive) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(y);
    }
    return out;
}

bool independentTheta(const FiniteModel& M, uint32_t theta, const ElemSet& w) {
    for (Elem a : w) {
        std::vector<Elem> params;
        for (Elem b : w)
            if (b != a) params.push_back(b);
        if (realizers(M, atomicType(M, a, params), params).size() < theta) return false;
    }
    return true;
}

namespace {

struct RankMemo {
    const FiniteModel& M;
    uint32_t theta;
    std::map<ElemSet, uint32_t> memo;

    uint32_t rank(const ElemSet& w) {
        auto it = memo.find(w);
        if (it != memo.end()) return it->second;
        uint32_t best = UINT32_MAX;
        for (Elem a : w) {
            std::vector<Elem> params;
            for (Elem b : w)
                if (b != a) params.push_back(b);
            AtomicType type = atomicType(M, a, params);
            int64_t maxv = -1;
            for (Elem a2 : realizers(M, type, params)) {
                if (a2 == a) continue;
                ElemSet w2 = w;
                w2.insert(std::lower_bound(w2.begin(), w2.end(), a2), a2);
                if (!independentTheta(M, theta, w2)) continue;
                maxv = std::max<int64_t>(maxv, rank(w2));
            }
            best = std::min<uint32_t>(best, static_cast<uint32_t>(maxv + 1));
        }
        if (best == UINT32_MAX) best = 0;
        memo[w] = best;
        return best;
    }
};

}  // namespace

uint32_t rankTheta(const FiniteModel& M, uint32_t theta, const ElemSet& w) {
    if (!independentTheta(M, theta, w))
        throw PreconditionError("rankTheta requires a theta-independent set");
    RankMemo memo{M, theta, {}};
    return memo.rank(w);
}

uint32_t rankThetaModel(const FiniteModel& M, uint32_t theta) {
    RankMemo memo{M, theta, {}};
    uint32_t best = 0;
    bool any = false;
    std::function<void(ElemSet&, Elem)> walk = [&](ElemSet& w, Elem next) {
        for (Elem e = next; e < M.universeSize; ++e) {
            w.push_back(e);
            if (independentTheta(M, theta, w)) {
                any = true;
                best = std::max(best, memo.rank(w) + 1);
                walk(w, e + 1);
            }
            w.pop_back();
        }
    };
    ElemSet w;
    walk(w, 0);
    return any ? best : 0;
}

std::pair<Elem, AtomicType> critical(const FiniteModel& M, uint32_t theta, const ElemSet& w) {
    if (!independentTheta(M, theta, w))
        throw PreconditionError("critical requires a theta-independent set");
    RankMemo memo{M, theta, {}};
    const uint32_t value = memo.rank(w);
    for (Elem a : w) {
        std::vector<Elem> params;
        for (Elem b : w)
            if (b != a) params.push_back(b);
        AtomicType type = atomicType(M, a, params);
        int64_t maxv = -1;
        for (Elem a2 : realizers(M, type, params)) {
            if (a2 == a) continue;
            ElemSet w2 = w;
            w2.insert(std::lower_bound(w2.begin(), w2.end(), a2), a2);
            if (!independentTheta(M, theta, w2)) continue;
            maxv = std::max<int64_t>(maxv, memo.rank(w2));
        }
        if (maxv + 1 == static_cast<int64_t>(value)) return {a, type};
    }
    throw std::logic_error("no critical element found; rank recursion inconsistent");
}

OrdinalCNF RankedModelOracle::modelRank() const {
    OrdinalCNF best;
    for (const auto& [w, r] : rank) {
        if (w.empty()) continue;
        OrdinalCNF candidate = r;
        // candidate + 1 on finite ordinals; for CNF with trailing finite
        // part, increment the constant term.
        if (candidate.terms.empty() || candidate.terms.back().first != 0)
            candidate.terms.emplace_back(0, 1);
        else
            candidate.terms.back().second += 1;
        if (ordLess(best, candidate)) best = candidate;
    }
    return best;
}

RankedModelOracle buildOracle(const FiniteModel& M, uint32_t theta) {
    RankedModelOracle O;
    O.universeSize = M.universeSize;
    std::function<void(ElemSet&, Elem)> walk = [&](ElemSet& w, Elem next) {
        for (Elem e = next; e < M.universeSize; ++e) {
            w.push_back(e);
            if (independentTheta(M, theta, w)) {
                O.rank[w] = OrdinalCNF::nat(rankTheta(M, theta, w));
                auto [elem, type] = critical(M, theta, w);
                O.critElem[w] = elem;
                O.critType[w] = type;
                walk(w, e + 1);
            }
            w.pop_back();
        }
    };
    ElemSet w;
    walk(w, 0);
    return O;
}

ValidationReport validateOracle(const RankedModelOracle& O, const FiniteModel* M,
                                uint32_t theta) {
    ValidationReport report;
    auto setName = [](const ElemSet& w) {
        std::string out = "{";
        for (size_t i = 0; i < w.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(w[i]);
        }
        return out + "}";
    };
    for (const auto& [w, r] : O.rank) {
        auto ce = O.critElem.find(w);
        auto ct = O.critType.find(w);
        if (ce == O.critElem.end() || ct == O.critType.end()) {
            report.add("missing critical data for " + setName(w));
            continue;
        }
        if (!std::binary_search(w.begin(), w.end(), ce->second))
            report.add("critical element outside set " + setName(w));
        for (Elem e : w)
            if (e >= O.universeSize) report.add("element out of universe in " + setName(w));

        std::vector<Elem> params;
        for (Elem b : w)
            if (b != ce->second) params.push_back(b);
        if (ct->second.parameterCount != params.size())
            report.add("critical type parameter count mismatch for " + setName(w));

        if (M) {
            // critType must be satisfied by the critical element.
            auto rs = realizers(*M, ct->second, params);
            if (!std::binary_search(rs.begin(), rs.end(), ce->second))
                report.add("critical element does not satisfy its type for " + setName(w));
            // A2: adjoining any other realizer drops the rank.
            for (Elem x : rs) {
                if (x == ce->second) continue;
                ElemSet w2 = w;
                if (!std::binary_search(w2.begin(), w2.end(), x))
                    w2.insert(std::lower_bound(w2.begin(), w2.end(), x), x);
                if (w2 == w) continue;
                auto it2 = O.rank.find(w2);
                if (it2 == O.rank.end()) continue;  // outside domain
                if (!ordLess(it2->second, r))
                    report.add("(A2) rank does not drop from " + setName(w) + " to " +
                               setName(w2));
            }
        } else if (ct->second.atoms.empty()) {
            // Equality-only type: realizers are all non-parameters.
            for (Elem x = 0; x < O.universeSize; ++x) {
                if (x == ce->second) continue;
                if (std::find(params.begin(), params.end(), x) != params.end()) continue;
                ElemSet w2 = w;
                if (!std::binary_search(w2.begin(), w2.end(), x))
                    w2.insert(std::lower_bound(w2.begin(), w2.end(), x), x);
                if (w2 == w) continue;
                auto it2 = O.rank.find(w2);
                if (it2 == O.rank.end()) continue;
                if (!ordLess(it2->second, r))
                    report.add("(A2) rank does not drop from " + setName(w) + " to " +
                               setName(w2));
            }
        }
    }
    if (M) {
        if (M->universeSize != O.universeSize)
            report.add("universe size mismatch between oracle and model");
        for (const auto& [w, r] : O.rank) {
            if (w.empty()) continue;
            if (!independentTheta(*M, theta, w)) {
                report.add("domain set not theta-independent: " + setName(w));
                continue;
            }
            uint32_t computed = rankTheta(*M, theta, w);
            if (!(r == OrdinalCNF::nat(computed)))
                report.add("rank disagrees with rank_theta for " + setName(w));
            auto [elem, type] = critical(*M, theta, w);
            if (O.critElem.at(w) != elem)
                report.add("critical element disagrees for " + setName(w));
            if (!(O.critType.at(w) == type))
                report.add("critical type disagrees for " + setName(w));
        }
    }
    return report;
}

}  // namespace coltree

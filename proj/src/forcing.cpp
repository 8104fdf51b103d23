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

#include "coltree/forcing.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace coltree {

namespace {

std::pair<Seq, Seq> orient(Seq x, Seq y) {
    if (y < x) std::swap(x, y);
    return {std::move(x), std::move(y)};
}

std::string setName(const ElemSet& w) {
    std::string out = "{";
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(w[i]);
    }
    return out + "}";
}

/// The approximation (eta[v], g^v) of a condition's subset.
BasicApproximation subsetApprox(const ForcingCondition& p, const ElemSet& v) {
    BasicApproximation a;
    a.level = p.n;
    for (Elem e : v) a.v.push_back(p.eta.at(e));
    seqSetCanon(a.v);
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = i + 1; j < v.size(); ++j)
            a.h[orient(p.eta.at(v[i]), p.eta.at(v[j]))] = p.color(v[i], v[j]);
    return a;
}

void forEachSubset(const ElemSet& w, uint32_t minSize,
                   const std::function<void(const ElemSet&)>& f) {
    const uint64_t limit = uint64_t{1} << w.size();
    for (uint64_t mask = 1; mask < limit; ++mask) {
        if (static_cast<uint32_t>(__builtin_popcountll(mask)) < minSize) continue;
        ElemSet v;
        for (size_t i = 0; i < w.size(); ++i)
            if (mask & (uint64_t{1} << i)) v.push_back(w[i]);
        f(v);
    }
}

bool inSupport(const RankedTree& U, uint32_t n, const Seq& s) {
    auto support = U.base.supportAt(n);
    return std::binary_search(support.begin(), support.end(), s);
}

}  // namespace

ValidationReport validateCondition(const ForcingCondition& p, const RankedModelOracle& O,
                                   const RankedTree& U) {
    ValidationReport report;
    // (i) eta total, injective, level-n support values.
    std::set<Seq> images;
    for (Elem e : p.w) {
        auto it = p.eta.find(e);
        if (it == p.eta.end()) {
            report.add("eta missing element " + std::to_string(e));
            continue;
        }
        if (it->second.size() != p.n)
            report.add("eta value of wrong length for " + std::to_string(e));
        else if (!inSupport(U, p.n, it->second))
            report.add("eta value outside the level-" + std::to_string(p.n) + " support");
        if (!images.insert(it->second).second)
            report.add("eta not injective at " + std::to_string(e));
        if (e >= O.universeSize)
            report.add("element outside the oracle universe: " + std::to_string(e));
    }
    if (!report.ok()) return report;
    // (ii) every pair is a node.
    for (size_t i = 0; i < p.w.size(); ++i)
        for (size_t j = i + 1; j < p.w.size(); ++j) {
            Elem a = p.w[i], b = p.w[j];
            auto it = p.g.find({a, b});
            if (it == p.g.end()) {
                report.add("pair {" + std::to_string(a) + "," + std::to_string(b) +
                           "} uncolored");
                continue;
            }
            if (!U.base.hasTriple(p.n, p.eta.at(a), p.eta.at(b), it->second))
                report.add("pair {" + std::to_string(a) + "," + std::to_string(b) +
                           "} is not a node at level " + std::to_string(p.n));
        }
    if (!report.ok()) return report;
    // (iii) rank/critical coherence over oracle-domain subsets.
    forEachSubset(p.w, 2, [&](const ElemSet& v) {
        if (!O.inDomain(v)) return;
        BasicApproximation a = subsetApprox(p, v);
        const OrdinalCNF* r = U.rOf(a);
        const Seq* c = U.cOf(a);
        if (!r || !c) {
            report.add("no rank entry for the approximation of " + setName(v));
            return;
        }
        if (ordCmp(O.rank.at(v), *r) == Ord::Greater)
            report.add("oracle rank exceeds r at " + setName(v));
        if (p.eta.at(O.critElem.at(v)) != *c)
            report.add("critical element mismatch at " + setName(v));
    });
    return report;
}

bool condLeq(const ForcingCondition& p, const ForcingCondition& q) {
    if (p.n > q.n) return false;
    for (Elem e : p.w) {
        if (!std::binary_search(q.w.begin(), q.w.end(), e)) return false;
        if (seqRestrict(q.eta.at(e), p.n) != p.eta.at(e)) return false;
    }
    for (const auto& [pair, color] : p.g) {
        auto it = q.g.find(pair);
        if (it == q.g.end() || it->second != color) return false;
    }
    return true;
}

namespace {

/// Zero-lift of a condition by one level.
ForcingCondition liftOnce(const ForcingCondition& p) {
    ForcingCondition q = p;
    q.n = p.n + 1;
    for (auto& [e, s] : q.eta) s = seqChild(s, 0);
    return q;
}

/// The simple one-point template of the density argument: level-0 support
/// w^p, level-1 the zero children plus one fresh child of the least
/// element, carrying the oracle's ranks and criticals over w^p + {alpha}.
/// chiZero/chiOne translate support labels back to model elements.
struct DensityTemplate {
    RankedTree S;
    Embedding partial;            // level-0 placement into U
    std::map<Seq, Elem> chi;      // level-1 support -> model element
    std::map<uint32_t, std::pair<Elem, Elem>> freshColorToPair;
};

OrdinalCNF oracleRankOr0(const RankedModelOracle& O, const ElemSet& v) {
    auto it = O.rank.find(v);
    return it == O.rank.end() ? OrdinalCNF{} : it->second;
}

Elem oracleCritOrMin(const RankedModelOracle& O, const ElemSet& v) {
    auto it = O.critElem.find(v);
    return it == O.critElem.end() ? v.front() : it->second;
}

/// Builds (r, c) tables of a two-level template from the oracle through
/// the element translation chi.
void oracleTables(RankedTree& S, const std::map<Seq, Elem>& chiLevel0,
                  const std::map<Seq, Elem>& chiLevel1, const RankedModelOracle& O,
                  uint32_t baseLevel) {
    auto fill = [&](uint32_t level, const std::map<Seq, Elem>& chi) {
        if (level >= S.base.height) return;
        for (const BasicApproximation& a : basicApproximations(S.base, level)) {
            ElemSet v;
            for (const Seq& s : a.v) v.push_back(chi.at(s));
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            S.r[basicApproxKey(a)] = oracleRankOr0(O, v);
            Elem crit = oracleCritOrMin(O, v);
            // the support element mapping to the critical element
            for (const Seq& s : a.v)
                if (chi.at(s) == crit) {
                    S.c[basicApproxKey(a)] = s;
                    break;
                }
        }
    };
    fill(baseLevel, chiLevel0);
    fill(baseLevel + 1, chiLevel1);
}

DensityTemplate densityTemplate(const ForcingCondition& p, Elem alpha,
                                const RankedModelOracle& O, const RankedTree& U) {
    DensityTemplate out;
    RankedTree& S = out.S;
    S.gamma = U.gamma;
    S.base.height = 3;
    S.base.minLevel = 1;
    S.base.levels.resize(3);

    std::map<Seq, Elem> chi0;
    std::map<Elem, uint32_t> indexOf;
    for (size_t i = 0; i < p.w.size(); ++i) indexOf[p.w[i]] = static_cast<uint32_t>(i);
    for (size_t i = 0; i < p.w.size(); ++i) chi0[Seq{static_cast<uint32_t>(i)}] = p.w[i];

    uint32_t nextTemplateColor = 0;
    // Level-0 nodes carry the condition's colors literally, so the partial
    // color map is the identity.
    for (size_t i = 0; i < p.w.size(); ++i)
        for (size_t j = i + 1; j < p.w.size(); ++j) {
            uint32_t k = p.color(p.w[i], p.w[j]);
            S.base.addNode(Seq{static_cast<uint32_t>(i)}, Seq{static_cast<uint32_t>(j)}, k);
            nextTemplateColor = std::max(nextTemplateColor, k + 1);
            out.partial.fStar[k] = k;
        }
    const uint32_t i0 = 0;  // least element of w^p
    // Level-1: zero children plus the fresh child of x0.
    for (size_t i = 0; i < p.w.size(); ++i)
        for (size_t j = i + 1; j < p.w.size(); ++j)
            S.base.addNode(Seq{static_cast<uint32_t>(i), 0},
                           Seq{static_cast<uint32_t>(j), 0}, p.color(p.w[i], p.w[j]));
    for (size_t i = 0; i < p.w.size(); ++i) {
        uint32_t fresh = nextTemplateColor++;
        S.base.addNode(Seq{static_cast<uint32_t>(i), 0}, Seq{i0, 1}, fresh);
        out.freshColorToPair[fresh] = {std::min(p.w[i], alpha), std::max(p.w[i], alpha)};
    }
    S.base.canonicalize();

    for (size_t i = 0; i < p.w.size(); ++i) {
        out.chi[Seq{static_cast<uint32_t>(i), 0}] = p.w[i];
        out.partial.f[Seq{static_cast<uint32_t>(i)}] = p.eta.at(p.w[i]);
    }
    out.chi[Seq{i0, 1}] = alpha;
    oracleTables(S, chi0, out.chi, O, 1);
    return out;
}

ForcingCondition joinElement(const ForcingCondition& p, Elem alpha,
                             const RankedModelOracle& O, const RankedTree& U,
                             const ApproxOptions& opt) {
    if (p.w.empty()) {
        // Bootstrap: map alpha onto the zero spine at the current level.
        ForcingCondition q;
        q.w = {alpha};
        q.n = p.n;
        Seq spine(p.n, 0);
        if (!inSupport(U, p.n, spine))
            throw BoundsError("zero spine missing at level " + std::to_string(p.n));
        q.eta[alpha] = spine;
        return q;
    }
    DensityTemplate D = densityTemplate(p, alpha, O, U);
    auto result = extendTemplateEmbedding(U, D.S, D.partial, opt);
    if (std::holds_alternative<EmbedFailure>(result))
        throw BoundsError("universality bounds exceeded joining element " +
                          std::to_string(alpha) + " at level " + std::to_string(p.n) +
                          " (deepest " +
                          std::to_string(std::get<EmbedFailure>(result).deepestLevel) + ")");
    const Embedding& psi = std::get<Embedding>(result);

    ForcingCondition q;
    q.w = p.w;
    q.w.insert(std::lower_bound(q.w.begin(), q.w.end(), alpha), alpha);
    // Level of the embedded level-1 images.
    uint32_t level = 0;
    for (const auto& [src, dst] : psi.f)
        if (src.size() == 2) level = static_cast<uint32_t>(dst.size());
    q.n = level;
    for (const auto& [src, dst] : psi.f) {
        if (src.size() != 2) continue;
        q.eta[D.chi.at(src)] = dst;
    }
    for (size_t i = 0; i < q.w.size(); ++i)
        for (size_t j = i + 1; j < q.w.size(); ++j) {
            Elem a = q.w[i], b = q.w[j];
            if (a != alpha && b != alpha) {
                q.g[{a, b}] = p.color(a, b);
            }
        }
    for (const auto& [fresh, pair] : D.freshColorToPair) q.g[pair] = psi.fStar.at(fresh);
    return q;
}

}  // namespace

ForcingCondition extendIntoDense(const ForcingCondition& p, Elem alpha, uint32_t n,
                                 const RankedModelOracle& O, const RankedTree& U,
                                 const ApproxOptions& opt) {
    if (alpha >= O.universeSize)
        throw PreconditionError("element outside the oracle universe");
    ForcingCondition q = p;
    while (true) {
        const bool joined = std::binary_search(q.w.begin(), q.w.end(), alpha);
        if (joined && q.n >= n) break;
        if (!joined) {
            q = joinElement(q, alpha, O, U, opt);
        } else {
            if (q.n + 1 >= U.base.height)
                throw BoundsError("universal tree too short to reach level " +
                                  std::to_string(n));
            q = liftOnce(q);
        }
    }
    return q;
}

ForcingCondition amalgamate(const ForcingCondition& p, const ForcingCondition& q,
                            const std::map<Elem, Elem>& f, const RankedModelOracle& O,
                            const RankedTree& U, const ApproxOptions& opt) {
    // --- preconditions -------------------------------------------------
    if (p.n != q.n) throw PreconditionError("conditions on different levels");
    if (f.size() != p.w.size()) throw PreconditionError("f is not defined on w^p");
    ElemSet image;
    {
        Elem last = 0;
        bool first = true;
        for (Elem e : p.w) {
            auto it = f.find(e);
            if (it == f.end()) throw PreconditionError("f misses an element of w^p");
            if (!first && it->second <= last)
                throw PreconditionError("f is not order-preserving");
            last = it->second;
            first = false;
            image.push_back(it->second);
        }
    }
    if (image != q.w) throw PreconditionError("f does not map onto w^q");
    ElemSet root;
    std::set_intersection(p.w.begin(), p.w.end(), q.w.begin(), q.w.end(),
                          std::back_inserter(root));
    for (Elem e : root)
        if (f.at(e) != e) throw PreconditionError("f does not fix the Delta-root");
    // (a) same placement and colors through f.
    for (Elem e : p.w)
        if (q.eta.at(f.at(e)) != p.eta.at(e))
            throw PreconditionError("clause (a): eta disagrees through f");
    for (size_t i = 0; i < p.w.size(); ++i)
        for (size_t j = i + 1; j < p.w.size(); ++j)
            if (q.color(f.at(p.w[i]), f.at(p.w[j])) != p.color(p.w[i], p.w[j]))
                throw PreconditionError("clause (a): colors disagree through f");
    // (b) oracle data agrees positionally through f.
    {
        bool ok = true;
        forEachSubset(p.w, 1, [&](const ElemSet& v) {
            ElemSet fv;
            for (Elem e : v) fv.push_back(f.at(e));
            std::sort(fv.begin(), fv.end());
            const bool dv = O.inDomain(v), dfv = O.inDomain(fv);
            if (dv != dfv) {
                ok = false;
                return;
            }
            if (!dv) return;
            if (!(O.rank.at(v) == O.rank.at(fv))) ok = false;
            if (O.critElem.at(fv) != f.at(O.critElem.at(v))) ok = false;
            if (!(O.critType.at(fv) == O.critType.at(v))) ok = false;
        });
        if (!ok) throw PreconditionError("clause (b): oracle data disagrees through f");
    }

    // --- the amalgamation template --------------------------------------
    RankedTree S;
    S.gamma = U.gamma;
    S.base.height = 3;
    S.base.minLevel = 1;
    S.base.levels.resize(3);
    Embedding partial;
    std::map<Seq, Elem> chi0, chi1;
    std::vector<uint32_t> wingIdx;  // indices of w^p \ root
    for (size_t i = 0; i < p.w.size(); ++i) {
        chi0[Seq{static_cast<uint32_t>(i)}] = p.w[i];
        partial.f[Seq{static_cast<uint32_t>(i)}] = p.eta.at(p.w[i]);
        if (!std::binary_search(root.begin(), root.end(), p.w[i]))
            wingIdx.push_back(static_cast<uint32_t>(i));
    }
    uint32_t nextColor = 0;
    for (size_t i = 0; i < p.w.size(); ++i)
        for (size_t j = i + 1; j < p.w.size(); ++j) {
            uint32_t k = p.color(p.w[i], p.w[j]);
            S.base.addNode(Seq{static_cast<uint32_t>(i)}, Seq{static_cast<uint32_t>(j)}, k);
            S.base.addNode(Seq{static_cast<uint32_t>(i), 0},
                           Seq{static_cast<uint32_t>(j), 0}, k);
            partial.fStar[k] = k;
            nextColor = std::max(nextColor, k + 1);
        }
    const uint32_t kStar = nextColor;
    for (uint32_t i : wingIdx) {
        // cross pairs to the root keep their colors
        for (size_t j = 0; j < p.w.size(); ++j) {
            if (std::find(wingIdx.begin(), wingIdx.end(), j) != wingIdx.end()) continue;
            S.base.addNode(Seq{static_cast<uint32_t>(j), 0}, Seq{i, 1},
                           p.color(p.w[j], p.w[i]));
        }
        // wing copies keep their internal colors
        for (uint32_t j : wingIdx)
            if (j > i) S.base.addNode(Seq{i, 1}, Seq{j, 1}, p.color(p.w[i], p.w[j]));
        // zero-vs-copy pairs inside the wing share the fresh color
        for (uint32_t j : wingIdx) S.base.addNode(Seq{j, 0}, Seq{i, 1}, kStar);
    }
    S.base.canonicalize();
    for (size_t i = 0; i < p.w.size(); ++i) chi1[Seq{static_cast<uint32_t>(i), 0}] = p.w[i];
    for (uint32_t i : wingIdx) chi1[Seq{i, 1}] = f.at(p.w[i]);
    oracleTables(S, chi0, chi1, O, 1);
    {
        ValidationReport tv = validateTemplate(S, opt);
        if (!tv.ok())
            throw BoundsError("amalgamation template invalid: " + tv.violations.front());
    }

    auto result = extendTemplateEmbedding(U, S, partial, opt);
    if (std::holds_alternative<EmbedFailure>(result))
        throw BoundsError("universality bounds exceeded amalgamating at level " +
                          std::to_string(p.n));
    const Embedding& psi = std::get<Embedding>(result);

    ForcingCondition t;
    t.w = p.w;
    for (Elem e : q.w)
        if (!std::binary_search(t.w.begin(), t.w.end(), e))
            t.w.insert(std::lower_bound(t.w.begin(), t.w.end(), e), e);
    for (const auto& [src, dst] : psi.f) {
        if (src.size() != 2) continue;
        t.n = static_cast<uint32_t>(dst.size());
        t.eta[chi1.at(src)] = dst;
    }
    for (size_t i = 0; i < t.w.size(); ++i)
        for (size_t j = i + 1; j < t.w.size(); ++j) {
            Elem a = t.w[i], b = t.w[j];
            const Seq &ea = t.eta.at(a), &eb = t.eta.at(b);
            auto colors = U.base.pairColors(t.n, ea, eb);
            if (colors.empty())
                throw std::logic_error("amalgamated pair uncolored in the universal tree");
            t.g[{a, b}] = colors.front();
        }
    return t;
}

HomogeneousFamily genericHomogeneous(const RankedModelOracle& O, const RankedTree& U,
                                     uint32_t depth, const ApproxOptions& opt) {
    HomogeneousFamily fam;
    ForcingCondition p;
    fam.chain.push_back(p);
    // Canonical order over the finite dense family: all joins first
    // (level-0 targets ascending by element), then the level pushes; the
    // join levels then stay within the truncation.
    for (uint32_t k = 0; k <= depth; ++k) {
        for (Elem alpha = 0; alpha < O.universeSize; ++alpha) {
            ForcingCondition next = extendIntoDense(p, alpha, k, O, U, opt);
            // Record first co-occurrence levels.
            for (Elem other : next.w) {
                if (other == alpha) continue;
                auto key = other < alpha ? std::make_pair(other, alpha)
                                         : std::make_pair(alpha, other);
                if (!std::binary_search(p.w.begin(), p.w.end(), alpha) ||
                    !std::binary_search(p.w.begin(), p.w.end(), other))
                    fam.certBase.emplace(key, next.n);
            }
            p = std::move(next);
            fam.chain.push_back(p);
        }
    }
    fam.eta = p.eta;
    fam.colors.clear();
    for (const auto& [pair, color] : p.g) fam.colors[pair] = color;
    return fam;
}

ValidationReport verifyFamily(const HomogeneousFamily& family, const RankedTree& U,
                              uint32_t depth) {
    ValidationReport report;
    std::set<Seq> seen;
    for (const auto& [e, s] : family.eta)
        if (!seen.insert(s).second) report.add("family eta not injective");
    for (const auto& [pair, color] : family.colors) {
        auto it = family.certBase.find(pair);
        if (it == family.certBase.end()) {
            report.add("missing certificate base for a pair");
            continue;
        }
        const Seq& x = family.eta.at(pair.first);
        const Seq& y = family.eta.at(pair.second);
        for (uint32_t m = it->second; m <= depth; ++m) {
            if (m > x.size() || m > y.size()) break;
            if (!U.base.hasTriple(m, seqRestrict(x, m), seqRestrict(y, m), color))
                report.add("certificate fails for pair {" + std::to_string(pair.first) +
                           "," + std::to_string(pair.second) + "} at level " +
                           std::to_string(m));
        }
    }
    return report;
}

Prop42Report verifyProp42(const RankedTree& U, const HomogeneousFamily& family,
                          const RankedModelOracle& O, uint32_t depth, uint32_t cap,
                          const ApproxOptions& opt) {
    Prop42Report report;
    ElemSet universe;
    for (const auto& [e, s] : family.eta) universe.push_back(e);
    std::sort(universe.begin(), universe.end());
    BasicRankMemo memo(U.base, opt);
    forEachSubset(universe, 2, [&](const ElemSet& w) {
        if (w.size() > cap) return;
        // Lowest level >= depth where the restrictions are distinct and
        // every pair's color is already a node (the approximation
        // determined by w only exists from there on).
        uint32_t m = depth;
        uint32_t minLen = UINT32_MAX;
        for (Elem e : w) minLen = std::min(minLen, static_cast<uint32_t>(family.eta.at(e).size()));
        while (m <= minLen) {
            std::set<Seq> restrictions;
            for (Elem e : w) restrictions.insert(seqRestrict(family.eta.at(e), m));
            bool ok = restrictions.size() == w.size();
            for (size_t i = 0; i < w.size() && ok; ++i)
                for (size_t j = i + 1; j < w.size() && ok; ++j) {
                    uint32_t color = family.colors.count({w[i], w[j]})
                                         ? family.colors.at({w[i], w[j]})
                                         : family.colors.at({w[j], w[i]});
                    if (!U.base.hasTriple(m, seqRestrict(family.eta.at(w[i]), m),
                                          seqRestrict(family.eta.at(w[j]), m), color))
                        ok = false;
                }
            if (ok) break;
            ++m;
        }
        if (m > minLen) return;  // never realized within the truncation
        Prop42Entry entry;
        entry.w = w;
        entry.level = m;
        entry.oracleRank = oracleRankOr0(O, w);
        BasicApproximation a;
        a.level = m;
        for (Elem e : w) a.v.push_back(seqRestrict(family.eta.at(e), m));
        seqSetCanon(a.v);
        for (size_t i = 0; i < w.size(); ++i)
            for (size_t j = i + 1; j < w.size(); ++j) {
                auto key = orient(seqRestrict(family.eta.at(w[i]), m),
                                  seqRestrict(family.eta.at(w[j]), m));
                uint32_t color = family.colors.count({w[i], w[j]})
                                     ? family.colors.at({w[i], w[j]})
                                     : family.colors.at({w[j], w[i]});
                a.h[key] = color;
            }
        entry.computedRank = memo.rank(a);
        const uint32_t headroom = U.base.height - 1 - m;
        entry.fail = ordLess(OrdinalCNF::nat(entry.computedRank), entry.oracleRank) &&
                     entry.computedRank < headroom;
        report.entries.push_back(std::move(entry));
    });
    return report;
}

}  // namespace coltree

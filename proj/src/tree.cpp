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

#include "coltree/tree.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>

namespace coltree {

void ColoringTree::addNode(std::vector<Seq> v, Seq t) {
    seqSetCanon(v);
    const uint32_t n = static_cast<uint32_t>(t.size());
    if (v.size() != arity) throw PreconditionError("node support size != arity");
    for (const Seq& s : v)
        if (s.size() != n) throw PreconditionError("node support length != level");
    if (levels.size() < height) levels.resize(height);
    if (n >= height || n < minLevel) throw PreconditionError("node level out of range");
    levels[n].push_back(TreeNode{std::move(v), std::move(t)});
    index_.clear();
}

void ColoringTree::canonicalize() {
    if (levels.size() < height) levels.resize(height);
    for (auto& L : levels) {
        std::sort(L.begin(), L.end(), [](const TreeNode& a, const TreeNode& b) {
            if (a.v != b.v) return a.v < b.v;
            return a.t < b.t;
        });
        L.erase(std::unique(L.begin(), L.end(),
                            [](const TreeNode& a, const TreeNode& b) {
                                return a.v == b.v && a.t == b.t;
                            }),
                L.end());
    }
    index_.clear();
}

void ColoringTree::buildIndex() const {
    index_.assign(height, {});
    for (uint32_t n = 0; n < levels.size() && n < height; ++n) {
        for (const TreeNode& node : levels[n]) {
            index_[n][seqSetEncode(node.v)].push_back(node.t);
        }
    }
    for (auto& m : index_)
        for (auto& [k, w] : m) {
            std::sort(w.begin(), w.end());
            w.erase(std::unique(w.begin(), w.end()), w.end());
        }
}

std::vector<Seq> ColoringTree::levelVertices(uint32_t n) const {
    std::vector<Seq> out;
    if (n < levels.size())
        for (const TreeNode& node : levels[n])
            for (const Seq& s : node.v) out.push_back(s);
    seqSetCanon(out);
    return out;
}

const std::vector<Seq>* ColoringTree::witnesses(uint32_t n,
                                                const std::vector<Seq>& vset) const {
    if (index_.empty()) buildIndex();
    if (n >= index_.size()) return nullptr;
    auto it = index_[n].find(seqSetEncode(vset));
    return it == index_[n].end() ? nullptr : &it->second;
}

bool ColoringTree::hasNode(uint32_t n, const std::vector<Seq>& vset, const Seq& t) const {
    const std::vector<Seq>* w = witnesses(n, vset);
    return w && std::binary_search(w->begin(), w->end(), t);
}

std::string approxKey(const Approximation& a) {
    std::string out = "[";
    out += seqSetEncode(a.v);
    out += '|';
    bool first = true;
    for (const auto& [u, t] : a.h) {
        if (!first) out += ';';
        first = false;
        for (size_t i = 0; i < u.size(); ++i) {
            if (i) out += ';';
            out += seqEncode(u[i]);
        }
        out += ':';
        out += seqEncode(t);
    }
    out += ']';
    return out;
}

bool approxBelow(const Approximation& a, const Approximation& b) {
    if (a.level >= b.level) return false;
    if (seqSetRestrict(b.v, a.level) != a.v) return false;
    // Witness compatibility along restricting N-subsets.
    for (const auto& [u2, t2] : b.h) {
        std::vector<Seq> u = seqSetRestrict(u2, a.level);
        if (u.size() != u2.size()) continue;  // collapsed, not a restricting subset
        auto it = a.h.find(u);
        if (it == a.h.end()) return false;  // cannot happen for genuine approximations
        if (!seqIsPrefix(it->second, t2)) return false;
    }
    return true;
}

namespace {

// Enumerates subsets v (canonical order) of the level vertex set such that
// every N-subset of v has a witness, emitting the product of witness
// choices for each v with |v| >= N.
struct ApproxEnumerator {
    const ColoringTree& T;
    uint32_t n;
    ApproxOptions opt;
    std::vector<Seq> vertices;
    std::vector<Approximation> out;
    Budget budget;

    ApproxEnumerator(const ColoringTree& t, uint32_t lvl, const ApproxOptions& o)
        : T(t), n(lvl), opt(o) {
        budget.limit = o.budget;
        vertices = T.levelVertices(n);
    }

    void run() {
        if (opt.sizeCap < T.arity)
            throw std::invalid_argument("approximation size cap below arity");
        std::vector<Seq> current;
        extend(current, 0);
        std::sort(out.begin(), out.end());
    }

    void extend(std::vector<Seq>& current, size_t next) {
        if (current.size() >= T.arity) emit(current);
        if (current.size() == opt.sizeCap) return;
        for (size_t i = next; i < vertices.size(); ++i) {
            current.push_back(vertices[i]);
            if (feasible(current)) extend(current, i + 1);
            current.pop_back();
        }
    }

    // Every N-subset containing the newest element must have a witness.
    bool feasible(const std::vector<Seq>& current) {
        if (current.size() < T.arity) return true;
        const Seq& newest = current.back();
        std::vector<Seq> subset;
        std::vector<size_t> idx(T.arity - 1);
        return chooseRest(current, newest, idx, 0, 0);
    }

    bool chooseRest(const std::vector<Seq>& current, const Seq& newest,
                    std::vector<size_t>& idx, size_t pos, size_t from) {
        if (pos == idx.size()) {
            std::vector<Seq> subset;
            subset.reserve(T.arity);
            for (size_t k : idx) subset.push_back(current[k]);
            subset.push_back(newest);
            seqSetCanon(subset);
            return T.witnesses(n, subset) != nullptr;
        }
        for (size_t i = from; i + 1 < current.size(); ++i) {
            idx[pos] = i;
            if (!chooseRest(current, newest, idx, pos + 1, i + 1)) return false;
        }
        return true;
    }

    void emit(const std::vector<Seq>& v) {
        // Collect N-subsets and their witness lists.
        std::vector<std::vector<Seq>> subsets;
        std::vector<const std::vector<Seq>*> choices;
        std::vector<size_t> idx(T.arity);
        collectSubsets(v, idx, 0, 0, subsets, choices);
        // Cartesian product of witness choices.
        std::vector<size_t> pick(subsets.size(), 0);
        while (true) {
            budget.charge(1, "approximation enumeration");
            Approximation a;
            a.level = n;
            a.v = v;
            for (size_t i = 0; i < subsets.size(); ++i) a.h[subsets[i]] = (*choices[i])[pick[i]];
            out.push_back(std::move(a));
            size_t i = 0;
            for (; i < pick.size(); ++i) {
                if (++pick[i] < choices[i]->size()) break;
                pick[i] = 0;
            }
            if (i == pick.size()) break;
        }
    }

    void collectSubsets(const std::vector<Seq>& v, std::vector<size_t>& idx, size_t pos,
                        size_t from, std::vector<std::vector<Seq>>& subsets,
                        std::vector<const std::vector<Seq>*>& choices) {
        if (pos == idx.size()) {
            std::vector<Seq> subset;
            subset.reserve(idx.size());
            for (size_t k : idx) subset.push_back(v[k]);
            const std::vector<Seq>* w = T.witnesses(n, subset);
            assert(w);
            subsets.push_back(std::move(subset));
            choices.push_back(w);
            return;
        }
        for (size_t i = from; i < v.size(); ++i) {
            idx[pos] = i;
            collectSubsets(v, idx, pos + 1, i + 1, subsets, choices);
        }
    }
};

}  // namespace

std::vector<Approximation> approximations(const ColoringTree& T, uint32_t n,
                                          const ApproxOptions& opt) {
    if (n < T.minLevel || n >= T.height)
        throw PreconditionError("approximation level out of range");
    ApproxEnumerator e(T, n, opt);
    e.run();
    return std::move(e.out);
}

ValidationReport validateTree(const ColoringTree& T) {
    ValidationReport report;
    if (T.arity < 2) report.add("arity must be at least 2");
    if (T.minLevel >= T.height) report.add("minLevel must be below height");
    for (uint32_t n = 0; n < T.levels.size() && n < T.height; ++n) {
        for (const TreeNode& node : T.levels[n]) {
            for (uint32_t m = n + 1; m < T.height; ++m) {
                bool extended = false;
                if (m < T.levels.size()) {
                    for (const TreeNode& cand : T.levels[m]) {
                        if (seqIsPrefix(node.t, cand.t) &&
                            seqSetRestrict(cand.v, n) == node.v) {
                            extended = true;
                            break;
                        }
                    }
                }
                if (!extended) {
                    report.add("node (" + seqSetEncode(node.v) + "; t=" + seqEncode(node.t) +
                               ") at level " + std::to_string(n) +
                               " has no extension at level " + std::to_string(m));
                }
            }
        }
    }
    return report;
}

std::optional<uint32_t> RankReport::value(const Approximation& a) const {
    auto it = std::lower_bound(assignment.begin(), assignment.end(), a,
                               [](const auto& p, const Approximation& x) { return p.first < x; });
    if (it == assignment.end() || !(it->first == a)) return std::nullopt;
    return it->second;
}

namespace {

// Links b (at a higher level) to each lower approximation it extends,
// with the bitmask of which members of the lower v split in b.v.
struct RankGraph {
    std::vector<std::vector<Approximation>> app;  // per level
    // edges[lvl][i] = list of (level, index, splitMask) of extensions of app[lvl][i]
    struct Edge {
        uint32_t level;
        uint32_t index;
        uint64_t splitMask;
    };
    std::vector<std::vector<std::vector<Edge>>> edges;

    void build(const ColoringTree& T, const ApproxOptions& opt) {
        app.resize(T.height);
        Budget budget;
        budget.limit = opt.budget;
        for (uint32_t n = T.minLevel; n < T.height; ++n) {
            app[n] = approximations(T, n, opt);
            budget.charge(app[n].size(), "rank fixpoint approximation set");
        }
        edges.resize(T.height);
        for (uint32_t n = T.minLevel; n < T.height; ++n)
            edges[n].resize(app[n].size());
        // Group lower approximations by key for restriction lookups.
        std::vector<std::unordered_map<std::string, std::vector<uint32_t>>> byEnc(T.height);
        for (uint32_t n = T.minLevel; n < T.height; ++n)
            for (uint32_t i = 0; i < app[n].size(); ++i)
                byEnc[n][seqSetEncode(app[n][i].v)].push_back(i);
        for (uint32_t m = T.minLevel + 1; m < T.height; ++m) {
            for (const Approximation& b : app[m]) {
                for (uint32_t n = T.minLevel; n < m; ++n) {
                    auto it = byEnc[n].find(seqSetEncode(seqSetRestrict(b.v, n)));
                    if (it == byEnc[n].end()) continue;
                    for (uint32_t i : it->second) {
                        const Approximation& a = app[n][i];
                        if (!approxBelow(a, b)) continue;
                        uint64_t mask = 0;
                        for (size_t p = 0; p < a.v.size(); ++p) {
                            int count = 0;
                            for (const Seq& s : b.v)
                                if (seqIsPrefix(a.v[p], s) && ++count >= 2) break;
                            if (count >= 2) mask |= uint64_t{1} << p;
                        }
                        uint32_t bIndex = 0;
                        {
                            auto jt = std::lower_bound(app[m].begin(), app[m].end(), b);
                            bIndex = static_cast<uint32_t>(jt - app[m].begin());
                        }
                        edges[n][i].push_back(Edge{m, bIndex, mask});
                    }
                }
            }
        }
    }
};

}  // namespace

RankReport rankAll(const ColoringTree& T, const ApproxOptions& opt) {
    RankGraph g;
    g.build(T, opt);
    std::vector<std::vector<uint32_t>> value(T.height);
    for (uint32_t n = T.minLevel; n < T.height; ++n) value[n].resize(g.app[n].size());
    for (uint32_t n = T.height; n-- > T.minLevel;) {
        for (uint32_t i = 0; i < g.app[n].size(); ++i) {
            const Approximation& a = g.app[n][i];
            uint32_t best = UINT32_MAX;
            for (size_t p = 0; p < a.v.size(); ++p) {
                int64_t maxv = -1;
                for (const auto& e : g.edges[n][i]) {
                    if (e.splitMask & (uint64_t{1} << p))
                        maxv = std::max<int64_t>(maxv, value[e.level][e.index]);
                }
                best = std::min<uint32_t>(best, static_cast<uint32_t>(maxv + 1));
            }
            value[n][i] = best == UINT32_MAX ? 0 : best;
        }
    }
    RankReport report;
    for (uint32_t n = T.minLevel; n < T.height; ++n)
        for (uint32_t i = 0; i < g.app[n].size(); ++i)
            report.assignment.emplace_back(g.app[n][i], value[n][i]);
    std::sort(report.assignment.begin(), report.assignment.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    report.treeRank = 0;
    for (const auto& [a, r] : report.assignment)
        report.treeRank = std::max(report.treeRank, r + 1);
    return report;
}

namespace {

struct OracleState {
    const ColoringTree& T;
    ApproxOptions opt;
    std::map<std::string, uint32_t> memo;
    std::vector<std::optional<std::vector<Approximation>>> appCache;
    Budget budget;

    explicit OracleState(const ColoringTree& t, const ApproxOptions& o) : T(t), opt(o) {
        budget.limit = o.budget;
        appCache.resize(T.height);
    }

    const std::vector<Approximation>& app(uint32_t m) {
        if (!appCache[m]) {
            appCache[m] = approximations(T, m, opt);
            budget.charge(appCache[m]->size(), "rank oracle");
        }
        return *appCache[m];
    }

    uint32_t rank(const Approximation& a) {
        const std::string key = approxKey(a);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        memo.emplace(key, 0);  // provisional; recursion is on strictly higher levels
        uint32_t best = UINT32_MAX;
        for (size_t p = 0; p < a.v.size() && best > 0; ++p) {
            int64_t maxv = -1;
            for (uint32_t m = a.level + 1; m < T.height; ++m) {
                for (const Approximation& b : app(m)) {
                    if (!approxBelow(a, b)) continue;
                    int count = 0;
                    for (const Seq& s : b.v)
                        if (seqIsPrefix(a.v[p], s) && ++count >= 2) break;
                    if (count < 2) continue;
                    maxv = std::max<int64_t>(maxv, rank(b));
                }
            }
            best = std::min<uint32_t>(best, static_cast<uint32_t>(maxv + 1));
        }
        if (best == UINT32_MAX) best = 0;
        memo[key] = best;
        return best;
    }
};

}  // namespace

uint32_t rankOracle(const ColoringTree& T, const Approximation& a, const ApproxOptions& opt) {
    OracleState st(T, opt);
    return st.rank(a);
}

namespace {

struct ChainSearch {
    const ColoringTree& T;
    uint32_t depth;
    Budget budget;
    std::vector<Approximation> chain;
    std::vector<Approximation> bestFrontier;
    uint32_t deepestLevel = 0;
    bool found = false;

    bool step() {
        if (chain.size() == depth + 1) {
            found = true;
            return true;
        }
        const Approximation& a = chain.back();
        for (uint32_t m = a.level + 1; m < T.height && !found; ++m) {
            std::vector<std::vector<Seq>> buckets(a.v.size());
            bool viable = true;
            for (size_t p = 0; p < a.v.size(); ++p) {
                for (const Seq& s : T.levelVertices(m))
                    if (seqIsPrefix(a.v[p], s)) buckets[p].push_back(s);
                if (buckets[p].size() < 2) viable = false;
            }
            if (!viable) continue;
            std::vector<std::vector<Seq>> picked(a.v.size());
            choose(m, buckets, picked, 0);
        }
        return found;
    }

    // Choose, for each member p of the current top, a subset of its
    // extension bucket of size >= 2; then assemble witnesses.
    void choose(uint32_t m, const std::vector<std::vector<Seq>>& buckets,
                std::vector<std::vector<Seq>>& picked, size_t p) {
        if (found) return;
        if (p == buckets.size()) {
            assemble(m, picked);
            return;
        }
        const auto& bucket = buckets[p];
        const uint64_t limit = uint64_t{1} << bucket.size();
        for (uint64_t mask = 0; mask < limit && !found; ++mask) {
            if (static_cast<size_t>(__builtin_popcountll(mask)) < 2) continue;
            budget.charge(1, "splitting chain search");
            picked[p].clear();
            for (size_t i = 0; i < bucket.size(); ++i)
                if (mask & (uint64_t{1} << i)) picked[p].push_back(bucket[i]);
            choose(m, buckets, picked, p + 1);
        }
    }

    void assemble(uint32_t m, const std::vector<std::vector<Seq>>& picked) {
        const Approximation& a = chain.back();
        std::vector<Seq> v2;
        for (const auto& part : picked) v2.insert(v2.end(), part.begin(), part.end());
        seqSetCanon(v2);
        // Witness products over N-subsets of v2, filtered by compatibility.
        std::vector<std::vector<Seq>> subsets;
        std::vector<std::vector<Seq>> choices;
        if (!collect(m, a, v2, subsets, choices)) return;
        std::vector<size_t> pick(subsets.size(), 0);
        while (!found) {
            budget.charge(1, "splitting chain search");
            Approximation b;
            b.level = m;
            b.v = v2;
            for (size_t i = 0; i < subsets.size(); ++i) b.h[subsets[i]] = choices[i][pick[i]];
            if (approxBelow(a, b)) {
                chain.push_back(std::move(b));
                if (chain.size() > bestFrontier.size()) {
                    bestFrontier = chain;
                    deepestLevel = m;
                }
                if (step()) return;
                chain.pop_back();
            }
            size_t i = 0;
            for (; i < pick.size(); ++i) {
                if (++pick[i] < choices[i].size()) break;
                pick[i] = 0;
            }
            if (i == pick.size()) break;
        }
    }

    bool collect(uint32_t m, const Approximation& a, const std::vector<Seq>& v2,
                 std::vector<std::vector<Seq>>& subsets, std::vector<std::vector<Seq>>& choices) {
        std::vector<size_t> idx(T.arity);
        return collectRec(m, a, v2, idx, 0, 0, subsets, choices);
    }

    bool collectRec(uint32_t m, const Approximation& a, const std::vector<Seq>& v2,
                    std::vector<size_t>& idx, size_t pos, size_t from,
                    std::vector<std::vector<Seq>>& subsets,
                    std::vector<std::vector<Seq>>& choices) {
        if (pos == idx.size()) {
            std::vector<Seq> subset;
            for (size_t k : idx) subset.push_back(v2[k]);
            const std::vector<Seq>* w = T.witnesses(m, subset);
            if (!w) return false;
            // Pre-filter witnesses by prefix compatibility with a.h.
            std::vector<Seq> compat;
            std::vector<Seq> down = seqSetRestrict(subset, a.level);
            const Seq* base = nullptr;
            if (down.size() == subset.size()) {
                auto it = a.h.find(down);
                if (it == a.h.end()) return false;
                base = &it->second;
            }
            for (const Seq& t : *w)
                if (!base || seqIsPrefix(*base, t)) compat.push_back(t);
            if (compat.empty()) return false;
            subsets.push_back(std::move(subset));
            choices.push_back(std::move(compat));
            return true;
        }
        for (size_t i = from; i < v2.size(); ++i) {
            idx[pos] = i;
            if (!collectRec(m, a, v2, idx, pos + 1, i + 1, subsets, choices)) return false;
        }
        return true;
    }
};

}  // namespace

std::variant<std::vector<Approximation>, ChainFailure> extractSplittingChain(
    const ColoringTree& T, const Approximation& a, uint32_t depth, uint64_t budget) {
    ChainSearch search{T, depth, {}, {}, {}};
    search.budget.limit = budget;
    search.chain.push_back(a);
    search.bestFrontier.push_back(a);
    search.deepestLevel = a.level;
    if (search.step()) return search.chain;
    return ChainFailure{search.bestFrontier, search.deepestLevel};
}

Approximation approxFromFamily(const ColoringTree& T, const std::vector<Seq>& points,
                               const std::map<std::vector<Seq>, Seq>& witnesses,
                               uint32_t m) {
    Approximation a;
    a.level = m;
    a.v = seqSetRestrict(points, m);
    if (a.v.size() != points.size())
        throw PreconditionError("restriction collision: two points share a length-" +
                                std::to_string(m) + " prefix");
    if (a.v.size() < T.arity) throw PreconditionError("family smaller than arity");
    for (const auto& [subset, witness] : witnesses) {
        if (subset.size() != T.arity) throw PreconditionError("witness subset size != arity");
        std::vector<Seq> down = seqSetRestrict(subset, m);
        Seq t = seqRestrict(witness, m);
        if (!T.hasNode(m, down, t))
            throw PreconditionError("missing node (" + seqSetEncode(down) + "; t=" +
                                    seqEncode(t) + ") at level " + std::to_string(m));
        a.h[down] = t;
    }
    // Every N-subset of the restricted family must have received a witness.
    size_t expected = 1;
    for (size_t i = 0; i < T.arity; ++i) expected = expected * (a.v.size() - i) / (i + 1);
    if (a.h.size() != expected)
        throw PreconditionError("witness map does not cover all subsets of the family");
    return a;
}

}  // namespace coltree

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

#include "coltree/basic.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace coltree {

namespace {

std::string pairKey(const Seq& x, const Seq& y) { return seqEncode(x) + ";" + seqEncode(y); }

std::pair<Seq, Seq> orient(Seq x, Seq y) {
    if (y < x) std::swap(x, y);
    return {std::move(x), std::move(y)};
}

}  // namespace

void BasicColoringTree::addNode(Seq x, Seq y, uint32_t k) {
    if (x.size() != y.size()) throw PreconditionError("triple coordinates of unequal length");
    auto [a, b] = orient(std::move(x), std::move(y));
    const uint32_t n = static_cast<uint32_t>(a.size());
    if (n >= height) throw PreconditionError("triple level out of range");
    if (levels.size() < height) levels.resize(height);
    levels[n].push_back(BasicNode{std::move(a), std::move(b), k});
    if (dirty_.size() < height) dirty_.resize(height, true);
    dirty_[n] = true;
}

void BasicColoringTree::canonicalize() {
    if (levels.size() < height) levels.resize(height);
    dirty_.assign(height, true);
    for (auto& L : levels) {
        std::sort(L.begin(), L.end());
        L.erase(std::unique(L.begin(), L.end()), L.end());
    }
}

void BasicColoringTree::canonicalizeLevel(uint32_t n) {
    if (levels.size() < height) levels.resize(height);
    if (dirty_.size() < height) dirty_.resize(height, true);
    auto& L = levels[n];
    std::sort(L.begin(), L.end());
    L.erase(std::unique(L.begin(), L.end()), L.end());
    dirty_[n] = true;
}

void BasicColoringTree::refreshIndex() const {
    if (index_.size() != height) {
        index_.assign(height, {});
        dirty_.assign(height, true);
    }
    for (uint32_t n = 0; n < levels.size() && n < height; ++n) {
        if (!dirty_[n]) continue;
        index_[n].clear();
        for (const BasicNode& node : levels[n])
            index_[n][pairKey(node.x, node.y)].push_back(node.k);
        for (auto& [k, cs] : index_[n]) {
            std::sort(cs.begin(), cs.end());
            cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
        }
        dirty_[n] = false;
    }
}

std::vector<uint32_t> BasicColoringTree::pairColors(uint32_t n, const Seq& x,
                                                    const Seq& y) const {
    refreshIndex();
    if (n >= index_.size()) return {};
    auto [a, b] = orient(x, y);
    auto it = index_[n].find(pairKey(a, b));
    return it == index_[n].end() ? std::vector<uint32_t>{} : it->second;
}

bool BasicColoringTree::hasTriple(uint32_t n, const Seq& x, const Seq& y, uint32_t k) const {
    auto cs = pairColors(n, x, y);
    return std::binary_search(cs.begin(), cs.end(), k);
}

std::vector<Seq> BasicColoringTree::levelCoordinates(uint32_t n) const {
    std::vector<Seq> out;
    if (n < levels.size())
        for (const BasicNode& node : levels[n]) {
            if (node.diagonal()) continue;
            out.push_back(node.x);
            out.push_back(node.y);
        }
    seqSetCanon(out);
    return out;
}

std::vector<Seq> BasicColoringTree::supportAt(uint32_t n) const {
    std::vector<Seq> out;
    for (uint32_t m = n; m < height && m < levels.size(); ++m)
        for (const BasicNode& node : levels[m]) {
            if (node.x.size() >= n) out.push_back(seqRestrict(node.x, n));
            if (node.y.size() >= n) out.push_back(seqRestrict(node.y, n));
        }
    seqSetCanon(out);
    return out;
}

std::set<uint32_t> BasicColoringTree::colorsAt(uint32_t n) const {
    std::set<uint32_t> out;
    if (n < levels.size())
        for (const BasicNode& node : levels[n]) out.insert(node.k);
    return out;
}

std::set<uint32_t> BasicColoringTree::colors() const {
    std::set<uint32_t> out;
    for (const auto& L : levels)
        for (const BasicNode& node : L) out.insert(node.k);
    return out;
}

std::string basicApproxKey(const BasicApproximation& a) {
    std::string out = "[";
    out += seqSetEncode(a.v);
    out += '|';
    bool first = true;
    for (const auto& [pq, k] : a.h) {
        if (!first) out += ';';
        first = false;
        out += seqEncode(pq.first);
        out += ';';
        out += seqEncode(pq.second);
        out += ':';
        out += std::to_string(k);
    }
    out += ']';
    return out;
}

bool basicApproxBelow(const BasicApproximation& a, const BasicApproximation& b) {
    if (a.level >= b.level) return false;
    if (seqSetRestrict(b.v, a.level) != a.v) return false;
    for (const auto& [pq, k] : b.h) {
        Seq px = seqRestrict(pq.first, a.level);
        Seq py = seqRestrict(pq.second, a.level);
        if (px == py) continue;  // collapsed pair imposes nothing
        auto it = a.h.find(orient(px, py));
        if (it == a.h.end() || it->second != k) return false;
    }
    return true;
}

namespace {

struct BasicApproxEnumerator {
    const BasicColoringTree& T;
    uint32_t n;
    ApproxOptions opt;
    std::vector<Seq> vertices;
    std::vector<std::vector<uint32_t>> adjacency;  // sorted neighbor indices
    std::vector<BasicApproximation> out;
    Budget budget;

    BasicApproxEnumerator(const BasicColoringTree& t, uint32_t lvl, const ApproxOptions& o)
        : T(t), n(lvl), opt(o) {
        budget.limit = o.budget;
        vertices = T.levelCoordinates(n);
        adjacency.resize(vertices.size());
        auto indexOf = [&](const Seq& s) {
            return static_cast<uint32_t>(
                std::lower_bound(vertices.begin(), vertices.end(), s) - vertices.begin());
        };
        if (n < T.levels.size())
            for (const BasicNode& node : T.levels[n]) {
                if (node.diagonal()) continue;
                uint32_t i = indexOf(node.x), j = indexOf(node.y);
                adjacency[i].push_back(j);
                adjacency[j].push_back(i);
            }
        for (auto& a : adjacency) {
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
        }
    }

    void run() {
        if (opt.sizeCap < 2) throw std::invalid_argument("approximation size cap below 2");
        std::vector<Seq> current;
        std::vector<uint32_t> candidates(vertices.size());
        for (uint32_t i = 0; i < vertices.size(); ++i) candidates[i] = i;
        extend(current, candidates);
        std::sort(out.begin(), out.end());
    }

    // `candidates` holds indices > the last chosen one adjacent to every
    // chosen vertex.
    void extend(std::vector<Seq>& current, const std::vector<uint32_t>& candidates) {
        if (current.size() >= 2) emit(current);
        if (current.size() == opt.sizeCap) return;
        for (size_t ci = 0; ci < candidates.size(); ++ci) {
            uint32_t i = candidates[ci];
            std::vector<uint32_t> narrowed;
            std::set_intersection(candidates.begin() + ci + 1, candidates.end(),
                                  adjacency[i].begin(), adjacency[i].end(),
                                  std::back_inserter(narrowed));
            current.push_back(vertices[i]);
            extend(current, narrowed);
            current.pop_back();
        }
    }

    void emit(const std::vector<Seq>& v) {
        std::vector<std::pair<Seq, Seq>> pairs;
        std::vector<std::vector<uint32_t>> choices;
        for (size_t i = 0; i < v.size(); ++i)
            for (size_t j = i + 1; j < v.size(); ++j) {
                pairs.push_back(orient(v[i], v[j]));
                choices.push_back(T.pairColors(n, v[i], v[j]));
            }
        std::vector<size_t> pick(pairs.size(), 0);
        while (true) {
            budget.charge(1, "basic approximation enumeration");
            BasicApproximation a;
            a.level = n;
            a.v = v;
            for (size_t i = 0; i < pairs.size(); ++i) a.h[pairs[i]] = choices[i][pick[i]];
            out.push_back(std::move(a));
            size_t i = 0;
            for (; i < pick.size(); ++i) {
                if (++pick[i] < choices[i].size()) break;
                pick[i] = 0;
            }
            if (i == pick.size()) break;
        }
    }
};

}  // namespace

std::vector<BasicApproximation> basicApproximations(const BasicColoringTree& T, uint32_t n,
                                                    const ApproxOptions& opt) {
    if (n < T.minLevel || n >= T.height)
        throw PreconditionError("approximation level out of range");
    BasicApproxEnumerator e(T, n, opt);
    e.run();
    return std::move(e.out);
}

ValidationReport validateBasic(const BasicColoringTree& T) {
    ValidationReport report;
    if (T.minLevel >= T.height) report.add("minLevel must be below height");
    for (uint32_t n = 0; n < T.levels.size() && n < T.height; ++n) {
        for (const BasicNode& node : T.levels[n]) {
            if (node.x.size() != n || node.y.size() != n) {
                report.add("triple (" + seqEncode(node.x) + "," + seqEncode(node.y) + "," +
                           std::to_string(node.k) + ") stored at wrong level " +
                           std::to_string(n));
                continue;
            }
            for (uint32_t m = n + 1; m < T.height; ++m) {
                bool extended = false;
                if (m < T.levels.size()) {
                    for (const BasicNode& cand : T.levels[m]) {
                        if (cand.k != node.k) continue;
                        if ((seqIsPrefix(node.x, cand.x) && seqIsPrefix(node.y, cand.y)) ||
                            (seqIsPrefix(node.x, cand.y) && seqIsPrefix(node.y, cand.x))) {
                            extended = true;
                            break;
                        }
                    }
                }
                if (!extended)
                    report.add("triple (" + seqEncode(node.x) + "," + seqEncode(node.y) + "," +
                               std::to_string(node.k) + ") at level " + std::to_string(n) +
                               " has no same-color extension at level " + std::to_string(m));
            }
        }
    }
    return report;
}

BasicColoringTree basicFromClosed(
    const std::vector<std::vector<std::pair<Seq, Seq>>>& pairSets, uint32_t H) {
    BasicColoringTree T;
    T.height = H;
    T.minLevel = 0;
    T.levels.resize(H);
    for (uint32_t k = 0; k < pairSets.size(); ++k) {
        for (const auto& [x, y] : pairSets[k]) {
            if (x.size() != H || y.size() != H)
                throw PreconditionError("malformed pair-tree: strings must have length " +
                                        std::to_string(H));
            if (x == y) throw PreconditionError("malformed pair-tree: pair members equal");
            for (uint32_t n = k; n < H; ++n)
                T.addNode(seqRestrict(x, n), seqRestrict(y, n), k);
        }
    }
    T.canonicalize();
    return T;
}

std::vector<std::set<std::pair<Seq, Seq>>> inducedPairsAtTop(const BasicColoringTree& T,
                                                             uint32_t colorCount) {
    std::vector<std::set<std::pair<Seq, Seq>>> out(colorCount);
    if (T.height == 0) return out;
    const uint32_t top = T.height - 1;
    if (top >= T.levels.size()) return out;
    for (const BasicNode& node : T.levels[top]) {
        if (node.k >= colorCount) continue;
        bool allBelow = true;
        for (uint32_t n = std::max(T.minLevel, node.k); n < top; ++n)
            if (!T.hasTriple(n, seqRestrict(node.x, n), seqRestrict(node.y, n), node.k)) {
                allBelow = false;
                break;
            }
        if (allBelow) out[node.k].insert({node.x, node.y});
    }
    return out;
}

ColoringTree basicToGeneral(const BasicColoringTree& T) {
    ColoringTree G;
    G.arity = 2;
    G.height = T.height;
    G.minLevel = T.minLevel;
    G.levels.resize(T.height);
    for (uint32_t n = 0; n < T.levels.size() && n < T.height; ++n)
        for (const BasicNode& node : T.levels[n]) {
            if (node.diagonal()) continue;
            G.addNode({node.x, node.y}, Seq(n, node.k));
        }
    G.canonicalize();
    return G;
}

std::optional<uint32_t> BasicRankReport::value(const BasicApproximation& a) const {
    auto it = std::lower_bound(assignment.begin(), assignment.end(), a,
                               [](const auto& p, const BasicApproximation& x) {
                                   return p.first < x;
                               });
    if (it == assignment.end() || !(it->first == a)) return std::nullopt;
    return it->second;
}

BasicRankReport rankAllBasic(const BasicColoringTree& T, const ApproxOptions& opt) {
    std::vector<std::vector<BasicApproximation>> app(T.height);
    Budget budget;
    budget.limit = opt.budget;
    for (uint32_t n = T.minLevel; n < T.height; ++n) {
        app[n] = basicApproximations(T, n, opt);
        budget.charge(app[n].size(), "basic rank fixpoint");
    }
    std::vector<std::unordered_map<std::string, std::vector<uint32_t>>> byEnc(T.height);
    for (uint32_t n = T.minLevel; n < T.height; ++n)
        for (uint32_t i = 0; i < app[n].size(); ++i)
            byEnc[n][seqSetEncode(app[n][i].v)].push_back(i);

    struct Edge {
        uint32_t level, index;
        uint64_t splitMask;
    };
    std::vector<std::vector<std::vector<Edge>>> edges(T.height);
    for (uint32_t n = T.minLevel; n < T.height; ++n) edges[n].resize(app[n].size());
    for (uint32_t m = T.minLevel + 1; m < T.height; ++m) {
        for (uint32_t bi = 0; bi < app[m].size(); ++bi) {
            const BasicApproximation& b = app[m][bi];
            for (uint32_t n = T.minLevel; n < m; ++n) {
                auto it = byEnc[n].find(seqSetEncode(seqSetRestrict(b.v, n)));
                if (it == byEnc[n].end()) continue;
                for (uint32_t i : it->second) {
                    const BasicApproximation& a = app[n][i];
                    if (!basicApproxBelow(a, b)) continue;
                    uint64_t mask = 0;
                    for (size_t p = 0; p < a.v.size(); ++p) {
                        int count = 0;
                        for (const Seq& s : b.v)
                            if (seqIsPrefix(a.v[p], s) && ++count >= 2) break;
                        if (count >= 2) mask |= uint64_t{1} << p;
                    }
                    edges[n][i].push_back(Edge{m, bi, mask});
                }
            }
        }
    }
    std::vector<std::vector<uint32_t>> value(T.height);
    for (uint32_t n = T.minLevel; n < T.height; ++n) value[n].resize(app[n].size());
    for (uint32_t n = T.height; n-- > T.minLevel;) {
        for (uint32_t i = 0; i < app[n].size(); ++i) {
            const BasicApproximation& a = app[n][i];
            uint32_t best = UINT32_MAX;
            for (size_t p = 0; p < a.v.size(); ++p) {
                int64_t maxv = -1;
                for (const auto& e : edges[n][i])
                    if (e.splitMask & (uint64_t{1} << p))
                        maxv = std::max<int64_t>(maxv, value[e.level][e.index]);
                best = std::min<uint32_t>(best, static_cast<uint32_t>(maxv + 1));
            }
            value[n][i] = best == UINT32_MAX ? 0 : best;
        }
    }
    BasicRankReport report;
    for (uint32_t n = T.minLevel; n < T.height; ++n)
        for (uint32_t i = 0; i < app[n].size(); ++i)
            report.assignment.emplace_back(app[n][i], value[n][i]);
    std::sort(report.assignment.begin(), report.assignment.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [a, r] : report.assignment)
        report.treeRank = std::max(report.treeRank, r + 1);
    return report;
}

std::vector<BasicApproximation> BasicRankMemo::extensionsAbove(const BasicApproximation& a,
                                                               uint32_t m) {
    // Buckets of level-m coordinates extending each member of a.v.
    std::vector<std::vector<Seq>> buckets(a.v.size());
    for (const Seq& s : tree_.levelCoordinates(m)) {
        Seq down = seqRestrict(s, a.level);
        for (size_t p = 0; p < a.v.size(); ++p)
            if (down == a.v[p]) buckets[p].push_back(s);
    }
    std::vector<BasicApproximation> out;
    for (const auto& bucket : buckets)
        if (bucket.empty()) return out;
    // Admissible colors of a candidate pair: restriction-compatible with
    // a.h when the parents differ.
    auto pairChoices = [&](const Seq& x, const Seq& y) {
        auto colors = tree_.pairColors(m, x, y);
        Seq dx = seqRestrict(x, a.level), dy = seqRestrict(y, a.level);
        if (dx != dy) {
            uint32_t wanted = a.h.at(dx < dy ? std::make_pair(dx, dy)
                                             : std::make_pair(dy, dx));
            std::vector<uint32_t> filtered;
            for (uint32_t k : colors)
                if (k == wanted) filtered.push_back(k);
            return filtered;
        }
        return colors;
    };
    // DFS over nonempty subsets of each bucket, pruning as soon as a chosen
    // pair has no admissible color.
    std::vector<Seq> current;
    std::function<void(size_t)> rec = [&](size_t p) {
        budget_.charge(1, "lazy basic rank");
        if (p == buckets.size()) {
            std::vector<Seq> v = current;
            seqSetCanon(v);
            if (v.size() < 2) return;
            std::vector<std::pair<Seq, Seq>> pairs;
            std::vector<std::vector<uint32_t>> choices;
            for (size_t i = 0; i < v.size(); ++i)
                for (size_t j = i + 1; j < v.size(); ++j) {
                    auto colors = pairChoices(v[i], v[j]);
                    if (colors.empty()) return;
                    pairs.push_back(orient(v[i], v[j]));
                    choices.push_back(std::move(colors));
                }
            std::vector<size_t> pick(pairs.size(), 0);
            while (true) {
                budget_.charge(1, "lazy basic rank");
                BasicApproximation b;
                b.level = m;
                b.v = v;
                for (size_t i = 0; i < pairs.size(); ++i) b.h[pairs[i]] = choices[i][pick[i]];
                out.push_back(std::move(b));
                size_t i = 0;
                for (; i < pick.size(); ++i) {
                    if (++pick[i] < choices[i].size()) break;
                    pick[i] = 0;
                }
                if (i == pick.size()) break;
            }
            return;
        }
        const auto& bucket = buckets[p];
        // Bucket members compatible with everything chosen so far.
        std::vector<Seq> live;
        for (const Seq& s : bucket) {
            bool ok = true;
            for (const Seq& t : current)
                if (pairChoices(std::min(s, t), std::max(s, t)).empty()) {
                    ok = false;
                    break;
                }
            if (ok) live.push_back(s);
        }
        // Nonempty pairwise-compatible subsets of `live`, grown as cliques.
        const size_t before = current.size();
        std::function<void(size_t, size_t)> grow = [&](size_t from, size_t taken) {
            budget_.charge(1, "lazy basic rank");
            if (taken > 0) rec(p + 1);
            for (size_t i = from; i < live.size(); ++i) {
                if (current.size() >= opt_.sizeCap) break;
                bool ok = true;
                for (size_t j = before; j < current.size(); ++j)
                    if (pairChoices(std::min(live[i], current[j]),
                                    std::max(live[i], current[j]))
                            .empty()) {
                        ok = false;
                        break;
                    }
                if (!ok) continue;
                current.push_back(live[i]);
                grow(i + 1, taken + 1);
                current.pop_back();
            }
        };
        grow(0, 0);
    };
    rec(0);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

uint32_t BasicRankMemo::rank(const BasicApproximation& a) {
    budget_.limit = std::max(budget_.limit, opt_.budget);
    const std::string key = basicApproxKey(a);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    memo_.emplace(key, 0);
    uint32_t best = UINT32_MAX;
    // Per-member maxima over splitting extensions, min over members.
    std::vector<int64_t> perMember(a.v.size(), -1);
    for (uint32_t m = a.level + 1; m < tree_.height; ++m) {
        for (const BasicApproximation& b : extensionsAbove(a, m)) {
            if (!basicApproxBelow(a, b)) continue;
            uint32_t rb = UINT32_MAX;
            for (size_t p = 0; p < a.v.size(); ++p) {
                int count = 0;
                for (const Seq& s : b.v)
                    if (seqIsPrefix(a.v[p], s) && ++count >= 2) break;
                if (count >= 2) {
                    if (rb == UINT32_MAX) rb = rank(b);
                    perMember[p] = std::max<int64_t>(perMember[p], rb);
                }
            }
        }
    }
    for (int64_t mx : perMember) best = std::min<uint32_t>(best, static_cast<uint32_t>(mx + 1));
    if (best == UINT32_MAX) best = 0;
    memo_[key] = best;
    return best;
}

const OrdinalCNF* RankedTree::rOf(const BasicApproximation& a) const {
    auto it = r.find(basicApproxKey(a));
    return it == r.end() ? nullptr : &it->second;
}

const Seq* RankedTree::cOf(const BasicApproximation& a) const {
    auto it = c.find(basicApproxKey(a));
    return it == c.end() ? nullptr : &it->second;
}

namespace {

// The unique candidate restriction of b to level m, if it is an
// approximation of T (consistent transported colors, all pairs present).
std::optional<BasicApproximation> restrictionAt(const BasicColoringTree& T,
                                                const BasicApproximation& b, uint32_t m) {
    BasicApproximation a;
    a.level = m;
    a.v = seqSetRestrict(b.v, m);
    if (a.v.size() < 2) return std::nullopt;
    for (const auto& [pq, k] : b.h) {
        Seq px = seqRestrict(pq.first, m), py = seqRestrict(pq.second, m);
        if (px == py) continue;
        auto key = px < py ? std::make_pair(px, py) : std::make_pair(py, px);
        auto it = a.h.find(key);
        if (it != a.h.end()) {
            if (it->second != k) return std::nullopt;  // inconsistent transport
        } else {
            if (!T.hasTriple(m, key.first, key.second, k)) return std::nullopt;
            a.h[key] = k;
        }
    }
    // Totality: every pair of a.v must have been covered.
    if (a.h.size() != a.v.size() * (a.v.size() - 1) / 2) return std::nullopt;
    return a;
}

uint64_t splitMaskOf(const BasicApproximation& a, const BasicApproximation& b) {
    uint64_t mask = 0;
    for (size_t p = 0; p < a.v.size(); ++p) {
        int count = 0;
        for (const Seq& s : b.v)
            if (seqIsPrefix(a.v[p], s) && ++count >= 2) break;
        if (count >= 2) mask |= uint64_t{1} << p;
    }
    return mask;
}

bool splitsIn(const Seq& element, const BasicApproximation& b) {
    int count = 0;
    for (const Seq& s : b.v)
        if (seqIsPrefix(element, s) && ++count >= 2) return true;
    return false;
}

}  // namespace

ValidationReport validateRanked(const RankedTree& R, const ApproxOptions& opt) {
    ValidationReport report;
    const BasicColoringTree& T = R.base;
    std::vector<std::vector<BasicApproximation>> app(T.height);
    Budget budget;
    budget.limit = opt.budget;
    for (uint32_t n = T.minLevel; n < T.height; ++n) {
        app[n] = basicApproximations(T, n, opt);
        budget.charge(app[n].size(), "validate ranked");
    }
    for (uint32_t n = T.minLevel; n < T.height; ++n) {
        for (const BasicApproximation& a : app[n]) {
            const OrdinalCNF* r = R.rOf(a);
            const Seq* c = R.cOf(a);
            if (!r || !c) {
                report.add("missing r/c entry for " + basicApproxKey(a));
                continue;
            }
            if (!ordLess(*r, R.gamma))
                report.add("r value " + ordPrint(*r) + " not below gamma for " +
                           basicApproxKey(a));
            if (std::find(a.v.begin(), a.v.end(), *c) == a.v.end())
                report.add("critical element outside v for " + basicApproxKey(a));
        }
    }
    // (U1), (U2) over all comparable pairs via unique restrictions.
    for (uint32_t n = T.minLevel; n < T.height; ++n) {
        for (const BasicApproximation& b : app[n]) {
            const OrdinalCNF* rb = R.rOf(b);
            if (!rb) continue;
            for (uint32_t m = T.minLevel; m < n; ++m) {
                auto a = restrictionAt(T, b, m);
                if (!a || !basicApproxBelow(*a, b)) continue;
                const OrdinalCNF* ra = R.rOf(*a);
                const Seq* ca = R.cOf(*a);
                if (!ra || !ca) continue;  // reported above
                if (ordLess(*ra, *rb))
                    report.add("(U1) r drops upward: " + basicApproxKey(*a) + " -> " +
                               basicApproxKey(b));
                if (splitsIn(*ca, b) && ordCmp(*ra, *rb) != Ord::Greater)
                    report.add("(U1) critical element splits without rank drop: " +
                               basicApproxKey(*a) + " -> " + basicApproxKey(b));
                if (ordCmp(*ra, *rb) == Ord::Equal && a->v.size() == b.v.size()) {
                    const Seq* cb = R.cOf(b);
                    if (cb && !seqIsPrefix(*ca, *cb))
                        report.add("(U2) critical element not inherited: " +
                                   basicApproxKey(*a) + " -> " + basicApproxKey(b));
                }
            }
        }
    }
    // (U3): subsets dominate.
    for (uint32_t n = T.minLevel; n < T.height; ++n) {
        for (const BasicApproximation& a : app[n]) {
            const OrdinalCNF* ra = R.rOf(a);
            if (!ra || a.v.size() <= 2) continue;
            const uint64_t limit = uint64_t{1} << a.v.size();
            for (uint64_t mask = 0; mask < limit; ++mask) {
                const int bits = __builtin_popcountll(mask);
                if (bits < 2 || bits == static_cast<int>(a.v.size())) continue;
                budget.charge(1, "validate ranked (U3)");
                BasicApproximation w;
                w.level = a.level;
                for (size_t i = 0; i < a.v.size(); ++i)
                    if (mask & (uint64_t{1} << i)) w.v.push_back(a.v[i]);
                for (size_t i = 0; i < w.v.size(); ++i)
                    for (size_t j = i + 1; j < w.v.size(); ++j) {
                        auto key = orient(w.v[i], w.v[j]);
                        w.h[key] = a.h.at(key);
                    }
                const OrdinalCNF* rw = R.rOf(w);
                if (!rw) continue;
                if (ordLess(*rw, *ra))
                    report.add("(U3) subset rank below superset: " + basicApproxKey(w) +
                               " < " + basicApproxKey(a));
            }
        }
    }
    return report;
}

RankedTree deriveRanked(const BasicColoringTree& T, const ApproxOptions& opt) {
    RankedTree R;
    R.base = T;
    BasicRankReport ranks = rankAllBasic(T, opt);
    R.gamma = OrdinalCNF::nat(ranks.treeRank);

    // Splitting-extension structure is needed to identify critical elements.
    std::vector<std::vector<BasicApproximation>> app(T.height);
    for (uint32_t n = T.minLevel; n < T.height; ++n) app[n] = basicApproximations(T, n, opt);

    // Ascending levels so (U2) inheritance can consult lower choices.
    for (uint32_t n = T.minLevel; n < T.height; ++n) {
        for (const BasicApproximation& a : app[n]) {
            const uint32_t value = *ranks.value(a);
            R.r[basicApproxKey(a)] = OrdinalCNF::nat(value);

            // Critical elements: members whose splitting extensions all
            // rank strictly below value.
            std::vector<int64_t> perMember(a.v.size(), -1);
            for (uint32_t m = n + 1; m < T.height; ++m)
                for (const BasicApproximation& b : app[m]) {
                    if (!basicApproxBelow(a, b)) continue;
                    uint64_t mask = splitMaskOf(a, b);
                    if (!mask) continue;
                    uint32_t rb = *ranks.value(b);
                    for (size_t p = 0; p < a.v.size(); ++p)
                        if (mask & (uint64_t{1} << p))
                            perMember[p] = std::max<int64_t>(perMember[p], rb);
                }
            std::vector<size_t> critical;
            for (size_t p = 0; p < a.v.size(); ++p)
                if (perMember[p] + 1 == static_cast<int64_t>(value)) critical.push_back(p);
            if (critical.empty())
                throw std::logic_error("rank recursion without a critical element");

            // (U2) coherence: inherit from the highest equal-rank,
            // equal-size restriction that is itself an approximation.
            Seq chosen;
            bool inherited = false;
            for (uint32_t m = n; m-- > T.minLevel && !inherited;) {
                if (seqSetRestrict(a.v, m).size() != a.v.size()) break;  // collapse persists downward
                auto pred = restrictionAt(T, a, m);
                if (!pred) continue;
                if (!basicApproxBelow(*pred, a)) continue;
                if (*ranks.value(*pred) != value) continue;
                auto it = R.c.find(basicApproxKey(*pred));
                if (it == R.c.end()) continue;
                for (size_t p : critical)
                    if (seqIsPrefix(it->second, a.v[p])) {
                        chosen = a.v[p];
                        inherited = true;
                        break;
                    }
                if (!inherited) {
                    // The predecessor's critical element must extend into a
                    // critical element; fall back to the extension itself.
                    for (const Seq& s : a.v)
                        if (seqIsPrefix(it->second, s)) {
                            chosen = s;
                            inherited = true;
                            break;
                        }
                }
            }
            if (!inherited) chosen = a.v[critical.front()];
            R.c[basicApproxKey(a)] = chosen;
        }
    }
    return R;
}

ValidationReport checkRankBound(const RankedTree& R, const ApproxOptions& opt) {
    ValidationReport report;
    BasicRankReport ranks = rankAllBasic(R.base, opt);
    for (const auto& [a, value] : ranks.assignment) {
        const OrdinalCNF* r = R.rOf(a);
        if (!r) {
            report.add("missing r entry for " + basicApproxKey(a));
            continue;
        }
        if (ordLess(*r, OrdinalCNF::nat(value)))
            report.add("computed rank " + std::to_string(value) + " exceeds bound " +
                       ordPrint(*r) + " for " + basicApproxKey(a));
    }
    return report;
}

}  // namespace coltree

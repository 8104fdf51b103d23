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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coltree/ordinal.hpp"
#include "coltree/report.hpp"
#include "coltree/seq.hpp"
#include "coltree/tree.hpp"

namespace coltree {

/// A triple (x, y, k) of a basic (pair) coloring tree, stored unordered as
/// x <= y. Diagonal triples (x == y) arise from restricting a pair of
/// strings below their splitting level; they carry the extension semantics
/// but never enter approximations.
struct BasicNode {
    Seq x, y;
    uint32_t k = 0;

    uint32_t level() const { return static_cast<uint32_t>(x.size()); }
    bool diagonal() const { return x == y; }

    bool operator==(const BasicNode& o) const { return x == o.x && y == o.y && k == o.k; }
    bool operator<(const BasicNode& o) const {
        if (x != o.x) return x < o.x;
        if (y != o.y) return y < o.y;
        return k < o.k;
    }
};

/// Finite truncation of a basic coloring tree (pair coloring with integer
/// colors and finitely branching support).
struct BasicColoringTree {
    uint32_t height = 1;
    uint32_t minLevel = 0;
    std::vector<std::vector<BasicNode>> levels;  // indexed 0..height-1

    void addNode(Seq x, Seq y, uint32_t k);
    void canonicalize();
    /// Sorts and deduplicates one level (for incremental construction).
    void canonicalizeLevel(uint32_t n);

    /// Colors of the pair {x, y} at level n (sorted; empty if uncolored).
    std::vector<uint32_t> pairColors(uint32_t n, const Seq& x, const Seq& y) const;
    bool hasTriple(uint32_t n, const Seq& x, const Seq& y, uint32_t k) const;

    /// Distinct sequences appearing as coordinates of level-n triples.
    std::vector<Seq> levelCoordinates(uint32_t n) const;

    /// Support of the tree at level n: coordinates plus prefixes of
    /// higher-level coordinates.
    std::vector<Seq> supportAt(uint32_t n) const;

    std::set<uint32_t> colorsAt(uint32_t n) const;
    std::set<uint32_t> colors() const;

  private:
    mutable std::vector<std::map<std::string, std::vector<uint32_t>>> index_;
    mutable std::vector<bool> dirty_;
    void refreshIndex() const;
};

/// A basic approximation: v with |v| >= 2 plus a total coloring of its
/// 2-subsets, each (pair, color) a triple of the tree.
struct BasicApproximation {
    uint32_t level = 0;
    std::vector<Seq> v;                              // sorted, distinct
    std::map<std::pair<Seq, Seq>, uint32_t> h;       // (x < y) -> color

    bool operator==(const BasicApproximation& o) const {
        return level == o.level && v == o.v && h == o.h;
    }
    bool operator<(const BasicApproximation& o) const {
        if (level != o.level) return level < o.level;
        if (v != o.v) return v < o.v;
        return h < o.h;
    }
};

/// Canonical key [<seq>,...|x;y:k;...] with sorted components.
std::string basicApproxKey(const BasicApproximation& a);

/// The strict order: level increase, support restriction, color equality
/// along restricting pairs.
bool basicApproxBelow(const BasicApproximation& a, const BasicApproximation& b);

/// All level-n approximations within the size cap, canonical order.
std::vector<BasicApproximation> basicApproximations(const BasicColoringTree& T, uint32_t n,
                                                    const ApproxOptions& opt = {});

/// Checks the same-color extension condition (ii) and structural sanity.
ValidationReport validateBasic(const BasicColoringTree& T);

/// Claim 5.2 construction: T = {(x|n, y|n, k) : {x,y} in C_k, k <= n < H}
/// from depth-H pair sets (pairs of distinct length-H strings).
BasicColoringTree basicFromClosed(const std::vector<std::vector<std::pair<Seq, Seq>>>& pairSets,
                                  uint32_t H);

/// Pairs of top-level (length H-1) restrictions induced per color,
/// including diagonal collapses; the exact inverse of basicFromClosed at
/// the top stored level.
std::vector<std::set<std::pair<Seq, Seq>>> inducedPairsAtTop(const BasicColoringTree& T,
                                                             uint32_t colorCount);

/// The induced N=2 general coloring tree: node ({x,y}, const-k sequence)
/// per non-diagonal triple (x, y, k).
ColoringTree basicToGeneral(const BasicColoringTree& T);

struct BasicRankReport {
    std::vector<std::pair<BasicApproximation, uint32_t>> assignment;
    uint32_t treeRank = 0;

    std::optional<uint32_t> value(const BasicApproximation& a) const;
};

/// Pair-tree rank fixpoint (the N=2 specialization, computed directly on
/// basic approximations; cross-checked against the general fixpoint on the
/// basicToGeneral image).
BasicRankReport rankAllBasic(const BasicColoringTree& T, const ApproxOptions& opt = {});

/// Lazy memoized truncation rank of a single approximation; explores only
/// extensions reachable above `a`, so it scales to large trees.
class BasicRankMemo {
  public:
    explicit BasicRankMemo(const BasicColoringTree& T, const ApproxOptions& opt = {})
        : tree_(T), opt_(opt) {}
    uint32_t rank(const BasicApproximation& a);

  private:
    const BasicColoringTree& tree_;
    ApproxOptions opt_;
    std::map<std::string, uint32_t> memo_;
    Budget budget_;

    std::vector<BasicApproximation> extensionsAbove(const BasicApproximation& a, uint32_t m);
};

/// A gamma-ranked coloring tree: rank bound r and critical element c per
/// approximation, subject to (U1)-(U3).
struct RankedTree {
    BasicColoringTree base;
    OrdinalCNF gamma;
    std::map<std::string, OrdinalCNF> r;
    std::map<std::string, Seq> c;

    const OrdinalCNF* rOf(const BasicApproximation& a) const;
    const Seq* cOf(const BasicApproximation& a) const;
};

/// Exhaustive (U1)-(U3) check plus table totality, r < gamma, c in v.
ValidationReport validateRanked(const RankedTree& R, const ApproxOptions& opt = {});

/// Claim 5.4 converse: annotate with r = computed rank, c = canonical
/// critical elements, gamma = least ordinal exceeding every rank.
RankedTree deriveRanked(const BasicColoringTree& T, const ApproxOptions& opt = {});

/// Claim 5.4: reports every approximation whose computed truncation rank
/// exceeds its r bound (expected empty on valid ranked trees).
ValidationReport checkRankBound(const RankedTree& R, const ApproxOptions& opt = {});

}  // namespace coltree

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
#include <string>
#include <variant>
#include <vector>

#include "coltree/report.hpp"
#include "coltree/seq.hpp"

namespace coltree {

/// A node (v, t) of an N-coloring tree: v is a set of exactly N distinct
/// sequences of length n, t a witness sequence of length n.
struct TreeNode {
    std::vector<Seq> v;  // sorted, |v| == arity, all members of length == level
    Seq t;

    uint32_t level() const { return static_cast<uint32_t>(t.size()); }
};

/// A finite truncation of an N-coloring tree: levels minLevel..height-1,
/// finitely many nodes per level, subject to the extension condition
/// (every node extends to every higher level below the height).
struct ColoringTree {
    uint32_t arity = 2;     // N >= 2
    uint32_t height = 1;    // H >= 1
    uint32_t minLevel = 0;  // < H
    std::vector<std::vector<TreeNode>> levels;  // indexed 0..H-1

    void addNode(std::vector<Seq> v, Seq t);
    void canonicalize();  // sort/dedup nodes per level

    /// Distinct sequences appearing in level-n node supports, sorted.
    std::vector<Seq> levelVertices(uint32_t n) const;

    /// Witnesses t with (vset, t) a node at level n; vset must be sorted.
    const std::vector<Seq>* witnesses(uint32_t n, const std::vector<Seq>& vset) const;

    bool hasNode(uint32_t n, const std::vector<Seq>& vset, const Seq& t) const;

  private:
    mutable std::vector<std::map<std::string, std::vector<Seq>>> index_;
    void buildIndex() const;
};

/// An n-approximation (v, h): v a finite set of at-least-N sequences of
/// length n, h assigns to every N-subset of v a witness such that each
/// (subset, witness) is a node.
struct Approximation {
    uint32_t level = 0;
    std::vector<Seq> v;                  // sorted
    std::map<std::vector<Seq>, Seq> h;   // sorted N-subset -> witness

    bool operator==(const Approximation& o) const {
        return level == o.level && v == o.v && h == o.h;
    }
    bool operator<(const Approximation& o) const {
        if (level != o.level) return level < o.level;
        if (v != o.v) return v < o.v;
        return h < o.h;
    }
};

/// Canonical key: [<seq>,...|<s1>;..;<sN>:<witness>;...] with sorted parts.
std::string approxKey(const Approximation& a);

/// The strict order on approximations: a < b iff a.level < b.level, a.v is
/// the restriction of b.v, and witnesses extend along restricting N-subsets.
bool approxBelow(const Approximation& a, const Approximation& b);

struct ApproxOptions {
    uint32_t sizeCap = 6;          // cap on |v|
    uint64_t budget = 1'000'000;   // cap on enumerated approximations
};

/// All n-approximations of T with |v| <= cap, in canonical order.
std::vector<Approximation> approximations(const ColoringTree& T, uint32_t n,
                                          const ApproxOptions& opt = {});

/// Rank assignment for every enumerated approximation plus the tree rank
/// sup(value + 1) (0 when there are no approximations).
struct RankReport {
    std::vector<std::pair<Approximation, uint32_t>> assignment;  // canonical order
    uint32_t treeRank = 0;

    std::optional<uint32_t> value(const Approximation& a) const;
};

/// Checks the extension condition; lists every violating node.
ValidationReport validateTree(const ColoringTree& T);

/// Monotone fixpoint rank over the finite approximation poset.
RankReport rankAll(const ColoringTree& T, const ApproxOptions& opt = {});

/// Independent cross-check: direct memoized recursion on the rank
/// definition. Must agree with rankAll on every approximation.
uint32_t rankOracle(const ColoringTree& T, const Approximation& a,
                    const ApproxOptions& opt = {});

struct ChainFailure {
    std::vector<Approximation> frontier;  // deepest partial chain reached
    uint32_t deepestLevel = 0;
};

/// Splitting chain a0=a < a1 < ... < a_depth where every member of a_i.v
/// has at least two extensions in a_{i+1}.v; on failure returns the deepest
/// frontier reached by exhaustive backtracking.
std::variant<std::vector<Approximation>, ChainFailure> extractSplittingChain(
    const ColoringTree& T, const Approximation& a, uint32_t depth,
    uint64_t budget = 1'000'000);

/// The approximation "determined by" a family: restrict points and
/// witnesses to length m. Errors on restriction collisions and on
/// restricted subsets that are not nodes of T.
Approximation approxFromFamily(const ColoringTree& T, const std::vector<Seq>& points,
                               const std::map<std::vector<Seq>, Seq>& witnesses,
                               uint32_t m);

}  // namespace coltree

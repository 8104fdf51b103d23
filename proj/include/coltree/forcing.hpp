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
#include <vector>

#include "coltree/model.hpp"
#include "coltree/universal.hpp"

namespace coltree {

/// A condition of the homogeneous-set poset: a finite set of model
/// elements placed injectively on one support level of the universal tree,
/// with colored pairs, rank-coherent with the model oracle.
struct ForcingCondition {
    ElemSet w;                                     // sorted model elements
    uint32_t n = 0;                                // level
    std::map<Elem, Seq> eta;                       // w -> level-n support
    std::map<std::pair<Elem, Elem>, uint32_t> g;   // (a < b) -> color

    uint32_t color(Elem a, Elem b) const {
        return g.at(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    }
};

/// Checks (i) injectivity/level/range, (ii) node membership of every pair,
/// (iii) rank domination and critical-element coherence for every subset
/// of size >= 2 in the oracle's domain.
ValidationReport validateCondition(const ForcingCondition& p, const RankedModelOracle& O,
                                   const RankedTree& U);

/// The (non-strict) extension order of the poset.
bool condLeq(const ForcingCondition& p, const ForcingCondition& q);

/// Meets the dense set D_{alpha, n}: returns q >= p with alpha in w and
/// level >= n, joining fresh elements through the simple one-point
/// template of the density argument and lifting along zero children.
/// Throws BoundsError when the universal tree is too short.
ForcingCondition extendIntoDense(const ForcingCondition& p, Elem alpha, uint32_t n,
                                 const RankedModelOracle& O, const RankedTree& U,
                                 const ApproxOptions& opt = {});

/// Amalgamates two isomorphic conditions with a common Delta-root through
/// the two-wing template of the ccc argument; f is the order isomorphism
/// w^p -> w^q fixing the root. Returns t >= p, q.
ForcingCondition amalgamate(const ForcingCondition& p, const ForcingCondition& q,
                            const std::map<Elem, Elem>& f, const RankedModelOracle& O,
                            const RankedTree& U, const ApproxOptions& opt = {});

struct HomogeneousFamily {
    std::map<Elem, Seq> eta;
    std::map<std::pair<Elem, Elem>, uint32_t> colors;
    std::map<std::pair<Elem, Elem>, uint32_t> certBase;  // n0 per pair
    std::vector<ForcingCondition> chain;                 // every intermediate condition
};

/// Rasiowa-Sikorski over the finite dense family {D_{alpha, k}}: iterates
/// extendIntoDense in canonical order (k major, alpha minor, which keeps
/// the join levels within the truncation) and reads the family off the
/// chain's union.
HomogeneousFamily genericHomogeneous(const RankedModelOracle& O, const RankedTree& U,
                                     uint32_t depth, const ApproxOptions& opt = {});

/// Checks the homogeneity certificates: every pair's color is a node of U
/// at every level from its n0 up to `depth`, and eta is injective.
ValidationReport verifyFamily(const HomogeneousFamily& family, const RankedTree& U,
                              uint32_t depth);

struct Prop42Entry {
    ElemSet w;
    uint32_t level = 0;
    OrdinalCNF oracleRank;
    uint32_t computedRank = 0;
    bool fail = false;
};

struct Prop42Report {
    std::vector<Prop42Entry> entries;
    bool ok() const {
        for (const auto& e : entries)
            if (e.fail) return false;
        return true;
    }
};

/// Rank-domination verification: for every subset w of the family's index
/// set (2 <= |w| <= cap) builds the approximation determined by w at the
/// lowest collision-free level >= depth and compares its truncation rank
/// with the oracle rank. A FAIL needs the computed rank strictly below
/// both the oracle rank and the remaining headroom H-1-level.
Prop42Report verifyProp42(const RankedTree& U, const HomogeneousFamily& family,
                          const RankedModelOracle& O, uint32_t depth, uint32_t cap = 4,
                          const ApproxOptions& opt = {});

}  // namespace coltree

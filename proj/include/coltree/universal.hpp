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
#include <string>
#include <variant>
#include <vector>

#include "coltree/basic.hpp"
#include "coltree/ordinal.hpp"
#include "coltree/report.hpp"

namespace coltree {

/// An embedding of ranked trees: injective order- and level-preserving map
/// on supports plus the induced injective color map.
struct Embedding {
    std::map<Seq, Seq> f;
    std::map<uint32_t, uint32_t> fStar;
};

/// Checks injectivity, order/level preservation, color coherence, and the
/// rank/critical coherence on every approximation of S.
ValidationReport validateEmbedding(const Embedding& e, const RankedTree& S,
                                   const RankedTree& T, const ApproxOptions& opt = {});

/// Structural template check: exactly two occupied adjacent levels, binary
/// support growth, every level-0 node extended, plus the ranked-tree
/// conditions.
ValidationReport validateTemplate(const RankedTree& S, const ApproxOptions& opt = {});

/// Level-0 node level of a two-level template.
uint32_t templateBaseLevel(const RankedTree& S);

/// Canonical encoding minimized over support and color relabelings;
/// templates are isomorphic iff their keys are equal.
std::string templateCanonicalKey(const RankedTree& S);

struct TemplateEnumOptions {
    uint32_t nodeBound = 2;
    uint32_t colorBound = 2;
    std::vector<OrdinalCNF> ranks;
    uint64_t budget = 2'000'000;
};

/// One representative per isomorphism type of template with level-0
/// support below nodeBound, colors below colorBound, rank range inside
/// `ranks`. Templates color each pair at most once and have at least one
/// level-0 node.
std::vector<RankedTree> enumerateTemplates(const TemplateEnumOptions& opt);

/// The serviced-template menu of the universal construction: the
/// enumerateTemplates domain further restricted to zero-coherent templates
/// (first children mirror the level-0 coloring exactly) carrying the
/// maximal consistent rank completion of (r0, c0). This is the family the
/// per-level service records and the acceptance check quantifies over.
std::vector<RankedTree> serviceMenu(uint32_t nodeBound, uint32_t colorBound,
                                    const std::vector<OrdinalCNF>& ranks);

struct LevelRecord {
    uint32_t nodeBound = 0;   // serviced |level-0 support| bound (exclusive)
    uint32_t colorBound = 0;  // serviced |colors| bound (exclusive)
    std::vector<OrdinalCNF> ranks;
    uint32_t realizations = 0;
    uint32_t planted = 0;
    uint32_t skipped = 0;  // placements rejected by the coherence filter
};

struct UniversalTree {
    RankedTree tree;
    std::vector<LevelRecord> records;          // per level
    std::vector<std::vector<Seq>> laneCliques;  // growing spine clique per level
    std::map<Seq, uint64_t> birth;              // support element -> join order
};

struct BuildOptions {
    uint32_t serviceCap = 3;          // cap on the recorded node bound
    uint32_t serviceLevelCutoff = 4;  // enumerated-template service stops here
    uint32_t wingCap = 2;             // amalgamation wing size served per level
    ApproxOptions approx{8, 4'000'000};
};

/// Level-by-level universal construction: zero-extension, enumerated
/// template service within recorded bounds, spine-clique growth and wing
/// service, and one-time planting of template roots below the zero spine.
UniversalTree buildUniversal(const OrdinalCNF& gamma, uint32_t H,
                             const BuildOptions& opt = {});

struct EmbedFailure {
    uint32_t deepestLevel = 0;
    std::string reason;
};

/// Extends a partial embedding (defined on the template's level-0 support)
/// to a full embedding into U, searching target levels exhaustively in
/// canonical order. S must be a two-level ranked tree.
std::variant<Embedding, EmbedFailure> extendTemplateEmbedding(const RankedTree& U,
                                                              const RankedTree& S,
                                                              const Embedding& partial,
                                                              const ApproxOptions& opt = {});

/// All valid placements of S's level-0 part onto the given support level
/// of U, in canonical order.
std::vector<Embedding> enumeratePartialEmbeddings(const RankedTree& S, const RankedTree& U,
                                                  uint32_t level,
                                                  const ApproxOptions& opt = {});

/// The two-level ranked subtree on levels n, n+1 with restricted r and c.
RankedTree sliceOf(const RankedTree& S, uint32_t n);

/// Lemma 5.7: embeds a whole ranked tree by iterating slice extensions.
/// Throws BoundsError when S is too wide or U too short.
Embedding embedRanked(const RankedTree& S, const RankedTree& U,
                      const ApproxOptions& opt = {});

/// Thm 5.8 preprocessing: adjoin a fresh base-point branch colored with a
/// fresh color against every full branch of the support. Reports the fresh
/// color through freshColor when non-null.
BasicColoringTree augmentWithBasePoint(const BasicColoringTree& S,
                                       const std::vector<Seq>& extraBranches,
                                       uint32_t* freshColor = nullptr);

/// Thm 5.8: embeds the coloring induced by S into the one induced by U;
/// returns the injective prefix-preserving map on top-level support
/// strings.
std::map<Seq, Seq> embedColoring(const BasicColoringTree& S, const RankedTree& U,
                                 const std::vector<Seq>& extraBranches = {},
                                 const ApproxOptions& opt = {});

}  // namespace coltree

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

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "coltree/report.hpp"
#include "coltree/seq.hpp"

namespace coltree {

using Rational = mpq_class;
using RationalPoint = std::vector<Rational>;  // 2N-1 exact coordinates

/// Exact realization state: moment-curve points indexed by depth-H binary
/// strings, the coloring sets C_m, and the removed tuples F_m.
struct Scene {
    uint32_t N = 2;
    uint32_t H = 1;
    uint32_t mMax = 1;
    std::map<Seq, RationalPoint> points;
    std::vector<std::set<std::vector<Seq>>> coloring;          // C_m: sorted N-subsets
    std::vector<std::vector<std::vector<RationalPoint>>> removed;  // F_m tuples

    uint32_t dimension() const { return 2 * N - 1; }
};

/// Moment-curve point for a binary string: t = sum s_i 3^-(i+1), then
/// (t, t^2, ..., t^(2N-1)).
RationalPoint pointOf(const Seq& s, uint32_t N);

/// Barycentric coordinates of b in the affine hull of T (exactly N
/// affinely independent points); nullopt when b is off the hull.
std::optional<std::vector<Rational>> barycentric(const RationalPoint& b,
                                                 const std::vector<RationalPoint>& T);

/// Convex-hull membership: barycentric coordinates exist and are >= 0.
bool convMembership(const RationalPoint& b, const std::vector<RationalPoint>& T);

/// Relative-interior membership: coordinates exist and are > 0.
bool relintMembership(const RationalPoint& b, const std::vector<RationalPoint>& T);

/// Affine independence of up to dimension+1 points via exact rank.
bool affinelyIndependent(const std::vector<RationalPoint>& pts);

/// Checks every 2N-subset for affine independence; with more subsets than
/// the guard, certifies analytically through the Vandermonde determinant
/// (distinct moment-curve parameters).
ValidationReport verifyGeneralPosition(const Scene& scene, uint64_t guard = 20000);

/// The removed tuple b_m(x) for an N-subset x: each point pulled towards
/// the centroid by mu_m = 1/(m+1).
std::vector<RationalPoint> removedTuple(const std::vector<RationalPoint>& simplex,
                                        uint32_t m);

/// Emptiness of I(x0) and I(x1)'s intersection (relative interiors of the
/// two simplices), decided exactly by maximizing the minimal barycentric
/// coordinate via rational pivoting; true when the interiors are disjoint.
bool relintDisjoint(const std::vector<RationalPoint>& x0,
                    const std::vector<RationalPoint>& x1);

/// Defectedness of an N-subset of strings: some removed point lies in the
/// convex hull of its points.
bool checkDefect(const Scene& scene, const std::vector<Seq>& strings);

/// Builds the scene: moment-curve points, removed tuples, general-position
/// and interior-disjointness certificates, and the full defect sweep
/// against the input coloring.
Scene realize(const std::vector<std::set<std::vector<Seq>>>& coloring, uint32_t N,
              uint32_t H, uint32_t mMax, bool certify = true);

/// The Thm 6.2 equivalence sweep: checkDefect(T) holds exactly for the
/// N-subsets of the coloring. Returns the report of mismatches.
ValidationReport defectSweep(const Scene& scene);

}  // namespace coltree

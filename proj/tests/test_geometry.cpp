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

#include "coltree/geometry.hpp"

#include <random>

#include "doctest.h"

using namespace coltree;

namespace {

std::vector<Seq> binaryStrings(uint32_t n) {
    std::vector<Seq> out;
    for (uint32_t bits = 0; bits < (1u << n); ++bits) {
        Seq s(n);
        for (uint32_t i = 0; i < n; ++i) s[i] = (bits >> (n - 1 - i)) & 1;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST_CASE("moment curve points") {
    // s = 0^H maps to the origin.
    RationalPoint origin = pointOf(Seq{0, 0, 0}, 2);
    for (const auto& c : origin) CHECK(c == 0);
    // s = "1", H = 1, N = 2: t = 1/3 -> (1/3, 1/9, 1/27).
    RationalPoint p = pointOf(Seq{1}, 2);
    CHECK(p == RationalPoint{Rational(1, 3), Rational(1, 9), Rational(1, 27)});
    // distinct strings give distinct parameters
    CHECK(pointOf(Seq{0, 1}, 2)[0] != pointOf(Seq{1, 0}, 2)[0]);
}

TEST_CASE("barycentric coordinates") {
    std::vector<RationalPoint> T = {pointOf(Seq{0, 0}, 2), pointOf(Seq{0, 1}, 2)};
    // centroid -> (1/2, 1/2)
    RationalPoint centroid(3);
    for (size_t c = 0; c < 3; ++c) centroid[c] = (T[0][c] + T[1][c]) / 2;
    auto lambda = barycentric(centroid, T);
    REQUIRE(lambda.has_value());
    CHECK((*lambda)[0] == Rational(1, 2));
    CHECK((*lambda)[1] == Rational(1, 2));
    // vertex -> indicator
    auto vertex = barycentric(T[1], T);
    REQUIRE(vertex.has_value());
    CHECK((*vertex)[0] == 0);
    CHECK((*vertex)[1] == 1);
    // off the affine hull -> none
    RationalPoint off = centroid;
    off[2] += 1;
    CHECK(!barycentric(off, T).has_value());
}

TEST_CASE("hull and interior membership") {
    std::vector<RationalPoint> T = {pointOf(Seq{0, 0}, 2), pointOf(Seq{1, 1}, 2)};
    RationalPoint centroid(3);
    for (size_t c = 0; c < 3; ++c) centroid[c] = (T[0][c] + T[1][c]) / 2;
    CHECK(convMembership(centroid, T));
    CHECK(relintMembership(centroid, T));
    CHECK(convMembership(T[0], T));
    CHECK(!relintMembership(T[0], T));
    // exterior point: beyond a vertex on the same line
    RationalPoint outside(3);
    for (size_t c = 0; c < 3; ++c) outside[c] = 2 * T[1][c] - T[0][c];
    CHECK(!convMembership(outside, T));
}

TEST_CASE("general position of moment-curve scenes") {
    Scene scene = realize({}, 2, 3, 1, false);
    CHECK(verifyGeneralPosition(scene).ok());
    // explicit 4-point determinant case: affinely independent
    std::vector<RationalPoint> four = {pointOf(Seq{0, 0}, 2), pointOf(Seq{0, 1}, 2),
                                       pointOf(Seq{1, 0}, 2), pointOf(Seq{1, 1}, 2)};
    CHECK(affinelyIndependent(four));
    // duplicate point -> failure even through the analytic certificate
    Scene broken = scene;
    broken.points[Seq{0, 0, 0}] = broken.points.at(Seq{1, 1, 1});
    CHECK(!verifyGeneralPosition(broken).ok());
    CHECK(!verifyGeneralPosition(broken, 0).ok());  // force the certificate path
}

TEST_CASE("removed points sit in the interior and approach the vertices") {
    std::vector<RationalPoint> T = {pointOf(Seq{0, 1}, 2), pointOf(Seq{1, 0}, 2)};
    auto tuple1 = removedTuple(T, 1);  // mu = 1/2: midpoint of vertex and centroid
    RationalPoint expected(3);
    for (size_t c = 0; c < 3; ++c) expected[c] = Rational(3, 4) * T[0][c] + Rational(1, 4) * T[1][c];
    CHECK(tuple1[0] == expected);
    for (uint32_t m = 0; m < 4; ++m)
        for (const auto& p : removedTuple(T, m)) CHECK(relintMembership(p, T));
    // p(s) approaches s as m grows: coefficient of the own vertex rises
    auto t2 = removedTuple(T, 2);
    auto l1 = barycentric(tuple1[0], T), l2 = barycentric(t2[0], T);
    CHECK((*l2)[0] > (*l1)[0]);
}

TEST_CASE("relative interior disjointness") {
    std::vector<RationalPoint> a = {pointOf(Seq{0, 0}, 2), pointOf(Seq{0, 1}, 2)};
    std::vector<RationalPoint> b = {pointOf(Seq{1, 0}, 2), pointOf(Seq{1, 1}, 2)};
    CHECK(relintDisjoint(a, b));      // disjoint segments on the moment curve
    CHECK(!relintDisjoint(a, a));     // the same segment overlaps itself
    // segments sharing exactly one endpoint: interiors still disjoint
    std::vector<RationalPoint> c = {pointOf(Seq{0, 1}, 2), pointOf(Seq{1, 1}, 2)};
    CHECK(relintDisjoint(a, c));
    // genuinely crossing segments in the plane (padded to 3 coordinates)
    std::vector<RationalPoint> d = {{Rational(0), Rational(0), Rational(0)},
                                    {Rational(1), Rational(1), Rational(0)}};
    std::vector<RationalPoint> e = {{Rational(0), Rational(1), Rational(0)},
                                    {Rational(1), Rational(0), Rational(0)}};
    CHECK(!relintDisjoint(d, e));
}

TEST_CASE("defect detection on a single colored pair") {
    std::set<std::vector<Seq>> c0 = {{Seq{0, 0, 0}, Seq{1, 1, 1}}};
    Scene scene = realize({c0}, 2, 3, 1);
    CHECK(checkDefect(scene, {Seq{0, 0, 0}, Seq{1, 1, 1}}));
    CHECK(!checkDefect(scene, {Seq{0, 0, 0}, Seq{0, 1, 1}}));
    CHECK(defectSweep(scene).ok());
}

TEST_CASE("empty coloring has no defects") {
    Scene scene = realize({}, 2, 3, 2);
    auto strings = binaryStrings(3);
    for (size_t i = 0; i < strings.size(); ++i)
        for (size_t j = i + 1; j < strings.size(); ++j)
            CHECK(!checkDefect(scene, {strings[i], strings[j]}));
}

TEST_CASE("a subset repeated across levels keeps the defect correct") {
    std::set<std::vector<Seq>> c = {{Seq{0, 0, 0}, Seq{1, 1, 1}}};
    Scene scene = realize({c, c}, 2, 3, 2);
    CHECK(defectSweep(scene).ok());
}

TEST_CASE("random colorings satisfy the defect equivalence") {
    std::mt19937 rng(777);
    auto strings = binaryStrings(4);
    std::uniform_int_distribution<size_t> pick(0, strings.size() - 1);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<std::set<std::vector<Seq>>> coloring(3);
        for (int p = 0; p < 8; ++p) {
            size_t i = pick(rng), j = pick(rng);
            if (i == j) continue;
            std::vector<Seq> subset = {strings[i], strings[j]};
            seqSetCanon(subset);
            coloring[p % 3].insert(subset);
        }
        Scene scene = realize(coloring, 2, 4, 3);
        CHECK(defectSweep(scene).ok());
    }
}

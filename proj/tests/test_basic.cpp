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

#include "doctest.h"
#include "fixtures.hpp"

using namespace coltree;
using namespace coltree::fixtures;

namespace {

/// Basic analogue of B(H): all distinct pairs of 2^n colored 0, 1 <= n < H.
BasicColoringTree basicB(uint32_t H) {
    BasicColoringTree T;
    T.height = H;
    T.minLevel = 1;
    T.levels.resize(H);
    for (uint32_t n = 1; n < H; ++n) {
        auto strings = binaryStrings(n);
        for (size_t i = 0; i < strings.size(); ++i)
            for (size_t j = i + 1; j < strings.size(); ++j)
                T.addNode(strings[i], strings[j], 0);
    }
    T.canonicalize();
    return T;
}

/// Basic analogue of L(H): the single pair (0^n, 1^n) colored 0.
BasicColoringTree basicL(uint32_t H) {
    BasicColoringTree T;
    T.height = H;
    T.minLevel = 1;
    T.levels.resize(H);
    for (uint32_t n = 1; n < H; ++n) T.addNode(Seq(n, 0), Seq(n, 1), 0);
    T.canonicalize();
    return T;
}

std::vector<std::vector<std::pair<Seq, Seq>>> randomPairSets(std::mt19937& rng, uint32_t H,
                                                             uint32_t colors, uint32_t pairs,
                                                             uint32_t branching) {
    std::uniform_int_distribution<uint32_t> digit(0, branching - 1);
    std::uniform_int_distribution<uint32_t> colorOf(0, colors - 1);
    auto randomSeq = [&](uint32_t len) {
        Seq s(len);
        for (auto& x : s) x = digit(rng);
        return s;
    };
    std::vector<std::vector<std::pair<Seq, Seq>>> sets(colors);
    uint32_t made = 0;
    for (uint32_t k = 0; k < pairs * 4 && made < pairs; ++k) {
        Seq x = randomSeq(H), y = randomSeq(H);
        if (x == y) continue;
        sets[colorOf(rng)].emplace_back(x, y);
        ++made;
    }
    return sets;
}

}  // namespace

TEST_CASE("validate accepts the basic full binary tree") {
    CHECK(validateBasic(basicB(3)).ok());
    CHECK(validateBasic(basicL(4)).ok());
}

TEST_CASE("validate reports a dropped extension") {
    BasicColoringTree T = basicL(3);
    T.levels[2].clear();  // remove all level-2 extensions of the level-1 pair
    T.canonicalize();
    ValidationReport report = validateBasic(T);
    CHECK(!report.ok());
}

TEST_CASE("validate reports colors that do not persist upward") {
    BasicColoringTree T;
    T.height = 3;
    T.minLevel = 1;
    T.levels.resize(3);
    // Color n at level n, never carried up: violates the same-color clause.
    T.addNode(Seq{0}, Seq{1}, 1);
    T.addNode(Seq{0, 0}, Seq{1, 1}, 2);
    T.canonicalize();
    ValidationReport report = validateBasic(T);
    CHECK(!report.ok());
}

TEST_CASE("basicFromClosed unrolls the definition") {
    // C_0 = all pairs of 2^H: the basic full binary tree with color 0.
    const uint32_t H = 3;
    std::vector<std::pair<Seq, Seq>> all;
    auto strings = binaryStrings(H);
    for (size_t i = 0; i < strings.size(); ++i)
        for (size_t j = i + 1; j < strings.size(); ++j) all.emplace_back(strings[i], strings[j]);
    BasicColoringTree T = basicFromClosed({all}, H);
    CHECK(validateBasic(T).ok());
    // Non-diagonal triples at levels 1, 2 match basicB(3).
    BasicColoringTree B = basicB(3);
    for (uint32_t n = 1; n < 3; ++n) {
        auto a = T.levelCoordinates(n);
        auto b = B.levelCoordinates(n);
        CHECK(a == b);
    }
    // Diagonal collapse triples are present below the splitting level.
    CHECK(T.hasTriple(1, Seq{0}, Seq{0}, 0));
}

TEST_CASE("basicFromClosed honors the color delay clause") {
    // C_1 = {{0^H, 1^H}}: nodes (0^n, 1^n, 1) for 1 <= n < H only.
    const uint32_t H = 4;
    std::vector<std::vector<std::pair<Seq, Seq>>> sets(2);
    sets[1].emplace_back(Seq(H, 0), Seq(H, 1));
    BasicColoringTree T = basicFromClosed(sets, H);
    CHECK(T.levels[0].empty());
    for (uint32_t n = 1; n < H; ++n) {
        CHECK(T.hasTriple(n, Seq(n, 0), Seq(n, 1), 1));
        CHECK(T.levels[n].size() == 1);
    }
    CHECK(validateBasic(T).ok());
}

TEST_CASE("basicFromClosed on the empty input") {
    BasicColoringTree T = basicFromClosed({}, 3);
    CHECK(validateBasic(T).ok());
    for (const auto& L : T.levels) CHECK(L.empty());
}

TEST_CASE("basicFromClosed rejects malformed pair trees") {
    CHECK_THROWS_AS(basicFromClosed({{{Seq{0, 1}, Seq{0}}}}, 2), PreconditionError);
    CHECK_THROWS_AS(basicFromClosed({{{Seq{0, 1}, Seq{0, 1}}}}, 2), PreconditionError);
}

TEST_CASE("induced pairs at the top level reproduce the input") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const uint32_t H = 4, colors = 3;
        auto sets = randomPairSets(rng, H, colors, 6, 2);
        BasicColoringTree T = basicFromClosed(sets, H);
        auto induced = inducedPairsAtTop(T, colors);
        for (uint32_t k = 0; k < colors; ++k) {
            std::set<std::pair<Seq, Seq>> expected;
            for (const auto& [x, y] : sets[k]) {
                Seq a = seqRestrict(x, H - 1), b = seqRestrict(y, H - 1);
                if (b < a) std::swap(a, b);
                expected.insert({a, b});
            }
            CHECK(induced[k] == expected);
        }
    }
}

TEST_CASE("basicToGeneral translates triples to constant-witness nodes") {
    BasicColoringTree T;
    T.height = 2;
    T.minLevel = 1;
    T.levels.resize(2);
    T.addNode(Seq{0}, Seq{1}, 5);
    T.canonicalize();
    ColoringTree G = basicToGeneral(T);
    CHECK(G.arity == 2);
    REQUIRE(G.levels[1].size() == 1);
    CHECK(G.levels[1][0].v == std::vector<Seq>{Seq{0}, Seq{1}});
    CHECK(G.levels[1][0].t == Seq{5});

    BasicColoringTree empty;
    empty.height = 2;
    empty.levels.resize(2);
    ColoringTree G2 = basicToGeneral(empty);
    for (const auto& L : G2.levels) CHECK(L.empty());
}

TEST_CASE("basic rank fixpoint matches the general fixpoint on the image") {
    std::mt19937 rng(99);
    std::vector<BasicColoringTree> trees = {basicB(4), basicL(3)};
    for (int trial = 0; trial < 10; ++trial)
        trees.push_back(basicFromClosed(randomPairSets(rng, 4, 2, 5, 3), 4));
    for (const BasicColoringTree& T : trees) {
        REQUIRE(validateBasic(T).ok());
        BasicRankReport basic = rankAllBasic(T);
        RankReport general = rankAll(basicToGeneral(T));
        REQUIRE(basic.assignment.size() == general.assignment.size());
        for (const auto& [a, value] : basic.assignment) {
            Approximation g;
            g.level = a.level;
            g.v = a.v;
            for (const auto& [pq, k] : a.h)
                g.h[{pq.first, pq.second}] = Seq(a.level, k);
            auto gv = general.value(g);
            REQUIRE(gv.has_value());
            CHECK(*gv == value);
        }
    }
}

TEST_CASE("basic rank of the full binary tree follows the closed form") {
    BasicRankReport report = rankAllBasic(basicB(4));
    for (const auto& [a, value] : report.assignment)
        if (a.v.size() == 2) CHECK(value == 3 - a.level);
}

TEST_CASE("lazy rank agrees with the fixpoint") {
    std::mt19937 rng(5);
    std::vector<BasicColoringTree> trees = {basicB(4), basicL(3),
                                            basicFromClosed(randomPairSets(rng, 4, 2, 5, 2), 4)};
    for (const BasicColoringTree& T : trees) {
        BasicRankReport report = rankAllBasic(T);
        BasicRankMemo memo(T);
        for (const auto& [a, value] : report.assignment) CHECK(memo.rank(a) == value);
    }
}

TEST_CASE("deriveRanked on the two-branch tree") {
    BasicColoringTree T = basicL(3);
    RankedTree R = deriveRanked(T);
    CHECK(R.gamma == OrdinalCNF::nat(1));
    for (const auto& [key, r] : R.r) CHECK(r.isZero());
    // Lexicographically least element chosen, inherited along the chain.
    BasicApproximation a;
    a.level = 1;
    a.v = {Seq{0}, Seq{1}};
    a.h[{Seq{0}, Seq{1}}] = 0;
    REQUIRE(R.cOf(a));
    CHECK(*R.cOf(a) == Seq{0});
    CHECK(validateRanked(R).ok());
}

TEST_CASE("deriveRanked on the basic full binary tree") {
    BasicColoringTree T = basicB(4);
    RankedTree R = deriveRanked(T);
    BasicApproximation a;
    a.level = 1;
    a.v = {Seq{0}, Seq{1}};
    a.h[{Seq{0}, Seq{1}}] = 0;
    REQUIRE(R.rOf(a));
    CHECK(*R.rOf(a) == OrdinalCNF::nat(2));
    CHECK(validateRanked(R).ok());
    CHECK(checkRankBound(R).ok());
}

TEST_CASE("deriveRanked on the empty tree") {
    BasicColoringTree T;
    T.height = 2;
    T.levels.resize(2);
    RankedTree R = deriveRanked(T);
    CHECK(R.r.empty());
    CHECK(R.c.empty());
    CHECK(validateRanked(R).ok());
}

TEST_CASE("constant zero rank fails validation on a splitting tree") {
    BasicColoringTree T = basicB(3);
    RankedTree R;
    R.base = T;
    R.gamma = OrdinalCNF::nat(1);
    for (uint32_t n = 1; n < 3; ++n)
        for (const BasicApproximation& a : basicApproximations(T, n)) {
            R.r[basicApproxKey(a)] = OrdinalCNF{};
            R.c[basicApproxKey(a)] = a.v.front();
        }
    ValidationReport report = validateRanked(R);
    CHECK(!report.ok());  // (U1): critical elements split but r cannot drop
    CHECK(!checkRankBound(R).ok());
}

TEST_CASE("derived ranked trees validate and bound the rank on random trees") {
    std::mt19937 rng(2026);
    int tested = 0;
    for (int trial = 0; trial < 25; ++trial) {
        BasicColoringTree T = basicFromClosed(randomPairSets(rng, 4, 3, 6, 3), 4);
        if (!validateBasic(T).ok()) continue;
        RankedTree R = deriveRanked(T);
        CHECK(validateRanked(R).ok());
        CHECK(checkRankBound(R).ok());
        ++tested;
    }
    CHECK(tested > 0);
}

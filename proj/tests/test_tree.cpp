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

#include "doctest.h"
#include "fixtures.hpp"

using namespace coltree;
using namespace coltree::fixtures;

namespace {

ColoringTree dropNodes(const ColoringTree& T, uint32_t level,
                       const std::vector<Seq>& mustContain) {
    ColoringTree out = T;
    auto& L = out.levels[level];
    L.erase(std::remove_if(L.begin(), L.end(),
                           [&](const TreeNode& node) {
                               for (const Seq& s : mustContain) {
                                   bool found = false;
                                   for (const Seq& m : node.v)
                                       if (seqIsPrefix(s, m)) found = true;
                                   if (!found) return false;
                               }
                               return true;
                           }),
            L.end());
    out.canonicalize();
    return out;
}

Approximation pairApprox(const ColoringTree& T, uint32_t level, const Seq& x, const Seq& y,
                         const Seq& t) {
    Approximation a;
    a.level = level;
    a.v = {x, y};
    seqSetCanon(a.v);
    a.h[a.v] = t;
    REQUIRE(T.hasNode(level, a.v, t));
    return a;
}

}  // namespace

TEST_CASE("validate: full binary constant tree is a valid truncation") {
    CHECK(validateTree(makeB(4)).ok());
    CHECK(validateTree(makeL(3)).ok());
}

TEST_CASE("validate: deleting one top node keeps other extensions alive") {
    ColoringTree T = makeB(4);
    auto& top = T.levels[3];
    REQUIRE(!top.empty());
    top.erase(top.begin());
    T.canonicalize();
    CHECK(validateTree(T).ok());
}

TEST_CASE("validate: removing all extensions of a node is reported") {
    ColoringTree T = makeB(4);
    // Kill every level-3 node extending the level-2 node ({00,01}, 00).
    ColoringTree broken = dropNodes(T, 3, {Seq{0, 0}, Seq{0, 1}});
    ValidationReport report = validateTree(broken);
    CHECK(!report.ok());
    bool mentioned = false;
    for (const auto& v : report.violations)
        if (v.find("0-0,0-1") != std::string::npos && v.find("level 2") != std::string::npos)
            mentioned = true;
    CHECK(mentioned);
}

TEST_CASE("approximations of B(2) at level 1") {
    ColoringTree T = makeB(2);
    ApproxOptions opt;
    opt.sizeCap = 2;
    auto app = approximations(T, 1, opt);
    REQUIRE(app.size() == 1);
    CHECK(app[0].v == std::vector<Seq>{Seq{0}, Seq{1}});
    CHECK(app[0].h.begin()->second == Seq{0});
}

TEST_CASE("approximations of the two-branch tree") {
    ColoringTree T = makeL(3);
    auto app = approximations(T, 1);
    CHECK(app.size() == 1);
}

TEST_CASE("approximations rejects a cap below the arity") {
    ColoringTree T = makeB(2);
    ApproxOptions opt;
    opt.sizeCap = 1;
    CHECK_THROWS_AS(approximations(T, 1, opt), std::invalid_argument);
}

TEST_CASE("approximation order") {
    ColoringTree T = makeB(3);
    Approximation a = pairApprox(T, 1, Seq{0}, Seq{1}, Seq{0});

    Approximation b;
    b.level = 2;
    b.v = binaryStrings(2);
    for (size_t i = 0; i < b.v.size(); ++i)
        for (size_t j = i + 1; j < b.v.size(); ++j) {
            std::vector<Seq> u = {b.v[i], b.v[j]};
            seqSetCanon(u);
            b.h[u] = Seq{0, 0};
        }
    CHECK(approxBelow(a, b));
    CHECK(!approxBelow(a, a));
    CHECK(!approxBelow(b, a));

    // Break witness compatibility: h-value not a prefix extension.
    ColoringTree T2 = makeB(3);
    T2.addNode({Seq{0, 0}, Seq{1, 1}}, Seq{1, 0});
    T2.canonicalize();
    Approximation bad = b;
    bad.h[{Seq{0, 0}, Seq{1, 1}}] = Seq{1, 0};
    CHECK(!approxBelow(a, bad));
}

TEST_CASE("rank of the full binary tree") {
    ColoringTree T = makeB(4);
    RankReport report = rankAll(T);
    CHECK(report.treeRank == 3);
    for (const auto& [a, value] : report.assignment) {
        if (a.v.size() == 2) CHECK(value == 3 - a.level);
        if (a.level == 3) CHECK(value == 0);
    }
    Approximation a1 = pairApprox(T, 1, Seq{0}, Seq{1}, Seq{0});
    CHECK(report.value(a1) == 2);
}

TEST_CASE("rank of the two-branch tree is zero everywhere") {
    ColoringTree T = makeL(3);
    RankReport report = rankAll(T);
    CHECK(report.treeRank == 1);
    for (const auto& [a, value] : report.assignment) CHECK(value == 0);
}

TEST_CASE("rank oracle matches the fixpoint on fixtures") {
    for (const ColoringTree& T : {makeB(4), makeL(3)}) {
        RankReport report = rankAll(T);
        for (const auto& [a, value] : report.assignment) CHECK(rankOracle(T, a) == value);
    }
}

TEST_CASE("rank oracle pinned values") {
    ColoringTree B4 = makeB(4);
    CHECK(rankOracle(B4, pairApprox(B4, 1, Seq{0}, Seq{1}, Seq{0})) == 2);
    CHECK(rankOracle(B4, pairApprox(B4, 3, Seq{0, 0, 0}, Seq{1, 1, 1}, Seq{0, 0, 0})) == 0);
    ColoringTree L3 = makeL(3);
    CHECK(rankOracle(L3, pairApprox(L3, 1, Seq{0}, Seq{1}, Seq{0})) == 0);
}

TEST_CASE("rank oracle matches the fixpoint on random trees") {
    std::mt19937 rng(20260810);
    for (int trial = 0; trial < 10; ++trial) {
        ColoringTree T = randomTree(rng, 4, 3, 4);
        if (!validateTree(T).ok()) continue;
        RankReport report = rankAll(T);
        for (const auto& [a, value] : report.assignment) CHECK(rankOracle(T, a) == value);
    }
}

TEST_CASE("splitting chain through the full binary tree") {
    ColoringTree T = makeB(5);
    Approximation a = pairApprox(T, 1, Seq{0}, Seq{1}, Seq{0});
    auto result = extractSplittingChain(T, a, 3);
    REQUIRE(std::holds_alternative<std::vector<Approximation>>(result));
    const auto& chain = std::get<std::vector<Approximation>>(result);
    REQUIRE(chain.size() == 4);
    for (size_t i = 0; i < chain.size(); ++i) CHECK(chain[i].v.size() == 2u << i);
    CHECK(chain.back().v.size() == 16);
    for (size_t i = 0; i + 1 < chain.size(); ++i) {
        CHECK(approxBelow(chain[i], chain[i + 1]));
        for (const Seq& p : chain[i].v) {
            int count = 0;
            for (const Seq& s : chain[i + 1].v)
                if (seqIsPrefix(p, s)) ++count;
            CHECK(count >= 2);
        }
    }
}

TEST_CASE("splitting chain fails on the two-branch tree") {
    ColoringTree T = makeL(4);
    Approximation a = pairApprox(T, 1, Seq{0}, Seq{1}, Seq{0});
    auto result = extractSplittingChain(T, a, 1);
    REQUIRE(std::holds_alternative<ChainFailure>(result));
    CHECK(std::get<ChainFailure>(result).frontier.size() == 1);
}

TEST_CASE("splitting chain of depth zero is the singleton chain") {
    ColoringTree T = makeB(3);
    Approximation a = pairApprox(T, 1, Seq{0}, Seq{1}, Seq{0});
    auto result = extractSplittingChain(T, a, 0);
    REQUIRE(std::holds_alternative<std::vector<Approximation>>(result));
    CHECK(std::get<std::vector<Approximation>>(result) == std::vector<Approximation>{a});
}

TEST_CASE("chain success certifies a rank lower bound") {
    // extract_splitting_chain success at depth d implies value(a) >= d.
    ColoringTree T = makeB(4);
    RankReport report = rankAll(T);
    Approximation a = pairApprox(T, 1, Seq{0}, Seq{1}, Seq{0});
    auto result = extractSplittingChain(T, a, 2);
    REQUIRE(std::holds_alternative<std::vector<Approximation>>(result));
    CHECK(*report.value(a) >= 2);
}

TEST_CASE("approximation determined by a family") {
    ColoringTree T = makeB(4);
    std::vector<Seq> points = {Seq{0, 0, 0}, Seq{1, 1, 1}};
    std::map<std::vector<Seq>, Seq> witnesses;
    witnesses[points] = Seq{0, 0, 0};

    Approximation a = approxFromFamily(T, points, witnesses, 2);
    CHECK(a.level == 2);
    CHECK(a.v == std::vector<Seq>{Seq{0, 0}, Seq{1, 1}});
    CHECK(a.h.begin()->second == Seq{0, 0});

    CHECK_THROWS_AS(approxFromFamily(T, points, witnesses, 0), PreconditionError);
}

TEST_CASE("truncation monotonicity") {
    // Rank values only grow when the truncation height grows.
    std::mt19937 rng(7);
    for (int trial = 0; trial < 8; ++trial) {
        ColoringTree tall = randomTree(rng, 5, 2, 3);
        if (!validateTree(tall).ok()) continue;
        ColoringTree cut = tall;
        cut.height = 4;
        cut.levels.resize(4);
        cut.canonicalize();
        if (!validateTree(cut).ok()) continue;
        RankReport low = rankAll(cut), high = rankAll(tall);
        for (const auto& [a, value] : low.assignment) {
            auto tallValue = high.value(a);
            REQUIRE(tallValue.has_value());
            CHECK(value <= *tallValue);
        }
    }
}

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

#include "coltree/ordinal.hpp"

#include <algorithm>
#include <set>

#include "doctest.h"

using namespace coltree;

TEST_CASE("ordinal parse denotations") {
    CHECK(ordParse("0") == OrdinalCNF{});
    CHECK(ordParse("5") == OrdinalCNF::nat(5));

    OrdinalCNF w2p3;  // w*2+3
    w2p3.terms = {{1, 2}, {0, 3}};
    CHECK(ordParse("w*2+3") == w2p3);

    OrdinalCNF big;  // w^2+w+1
    big.terms = {{2, 1}, {1, 1}, {0, 1}};
    CHECK(ordParse("w^2*1+w*1+1") == big);
    CHECK(ordParse("w^2+w+1") == big);  // coefficient-1 shorthand
}

TEST_CASE("ordinal parse rejects non-canonical input") {
    CHECK_THROWS_AS(ordParse("1+w"), OrdinalParseError);       // increasing exponents
    CHECK_THROWS_AS(ordParse("w*1+w*1"), OrdinalParseError);   // repeated exponent
    CHECK_THROWS_AS(ordParse("w*0"), OrdinalParseError);       // zero coefficient
    CHECK_THROWS_AS(ordParse("w^0*2"), OrdinalParseError);     // exponent 0 spelled with w
    CHECK_THROWS_AS(ordParse(""), OrdinalParseError);
    CHECK_THROWS_AS(ordParse("w+"), OrdinalParseError);
    CHECK_THROWS_AS(ordParse("x"), OrdinalParseError);
}

TEST_CASE("print then parse is the identity") {
    std::vector<std::string> inputs = {"0", "7", "w*1", "w*3+2", "w^2*1+w*4+9", "w^5*2"};
    for (const auto& text : inputs) {
        OrdinalCNF x = ordParse(text);
        CHECK(ordParse(ordPrint(x)) == x);
    }
}

TEST_CASE("comparison is the ordinal order") {
    CHECK(ordCmp(ordParse("0"), ordParse("0")) == Ord::Equal);
    CHECK(ordCmp(ordParse("5"), ordParse("w*1")) == Ord::Less);
    CHECK(ordCmp(ordParse("w*2"), ordParse("w*1+7")) == Ord::Greater);
    CHECK(ordCmp(ordParse("w^2*1"), ordParse("w*9+9")) == Ord::Greater);
    CHECK(ordCmp(ordParse("w*1+1"), ordParse("w*1+2")) == Ord::Less);
}

TEST_CASE("comparison is a total order on a sample") {
    std::vector<OrdinalCNF> xs = {ordParse("0"), ordParse("1"),    ordParse("2"),
                                  ordParse("w*1"), ordParse("w*1+1"), ordParse("w*2"),
                                  ordParse("w^2*1")};
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = 0; j < xs.size(); ++j) {
            Ord c = ordCmp(xs[i], xs[j]);
            if (i == j) CHECK(c == Ord::Equal);
            if (i < j) CHECK(c == Ord::Less);
            if (i > j) CHECK(c == Ord::Greater);
        }
}

TEST_CASE("gamma filtration examples") {
    auto names = [](const std::vector<OrdinalCNF>& xs) {
        std::vector<std::string> out;
        for (const auto& x : xs) out.push_back(ordPrint(x));
        return out;
    };

    CHECK(names(gammaFiltration(ordParse("3"), 5)) ==
          std::vector<std::string>{"0", "1", "2"});
    CHECK(names(gammaFiltration(ordParse("w*1"), 2)) ==
          std::vector<std::string>{"0", "1", "2"});
    CHECK(names(gammaFiltration(ordParse("w*2"), 1)) ==
          std::vector<std::string>{"0", "1", "w*1", "w*1+1"});
}

TEST_CASE("gamma filtration is monotone and bounded") {
    OrdinalCNF gamma = ordParse("w*2+1");
    std::vector<OrdinalCNF> prev;
    for (uint32_t n = 0; n <= 5; ++n) {
        std::vector<OrdinalCNF> cur = gammaFiltration(gamma, n);
        for (const auto& x : cur) CHECK(ordLess(x, gamma));
        // prev is a subset of cur
        for (const auto& x : prev)
            CHECK(std::find(cur.begin(), cur.end(), x) != cur.end());
        prev = std::move(cur);
    }
}

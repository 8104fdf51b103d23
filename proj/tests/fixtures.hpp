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

#include <random>

#include "coltree/tree.hpp"

namespace coltree::fixtures {

inline std::vector<Seq> binaryStrings(uint32_t n) {
    std::vector<Seq> out;
    for (uint32_t bits = 0; bits < (1u << n); ++bits) {
        Seq s(n);
        for (uint32_t i = 0; i < n; ++i) s[i] = (bits >> (n - 1 - i)) & 1;
        out.push_back(std::move(s));
    }
    return out;
}

/// Full binary constant tree: all ({x,y}, 0^n) for distinct x,y in 2^n, n < H.
inline ColoringTree makeB(uint32_t H) {
    ColoringTree T;
    T.arity = 2;
    T.height = H;
    T.minLevel = 1;
    T.levels.resize(H);
    for (uint32_t n = 1; n < H; ++n) {
        auto strings = binaryStrings(n);
        for (size_t i = 0; i < strings.size(); ++i)
            for (size_t j = i + 1; j < strings.size(); ++j)
                T.addNode({strings[i], strings[j]}, Seq(n, 0));
    }
    T.canonicalize();
    return T;
}

/// Two non-splitting branches: nodes ({0^n, 1^n}, 0^n) for 1 <= n < H.
inline ColoringTree makeL(uint32_t H) {
    ColoringTree T;
    T.arity = 2;
    T.height = H;
    T.minLevel = 1;
    T.levels.resize(H);
    for (uint32_t n = 1; n < H; ++n) T.addNode({Seq(n, 0), Seq(n, 1)}, Seq(n, 0));
    T.canonicalize();
    return T;
}

/// Random pair-coloring tree built by restricting random top-level tuples
/// downward (which guarantees the extension condition). Sequences use the
/// alphabet {0..branching-1}.
inline ColoringTree randomTree(std::mt19937& rng, uint32_t H, uint32_t branching,
                               uint32_t tuples) {
    ColoringTree T;
    T.arity = 2;
    T.height = H;
    T.levels.resize(H);
    std::uniform_int_distribution<uint32_t> digit(0, branching - 1);
    auto randomSeq = [&](uint32_t len) {
        Seq s(len);
        for (auto& x : s) x = digit(rng);
        return s;
    };
    const uint32_t top = H - 1;
    uint32_t made = 0;
    for (uint32_t k = 0; k < tuples * 4 && made < tuples; ++k) {
        Seq x = randomSeq(top), y = randomSeq(top), t = randomSeq(top);
        if (x == y) continue;
        ++made;
        for (uint32_t n = 1; n <= top; ++n) {
            Seq xr = seqRestrict(x, n), yr = seqRestrict(y, n);
            if (xr == yr) continue;  // collapsed restriction, not a pair yet
            T.addNode({xr, yr}, seqRestrict(t, n));
        }
    }
    T.minLevel = 1;
    T.canonicalize();
    return T;
}

}  // namespace coltree::fixtures

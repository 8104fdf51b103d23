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
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace coltree {

/// Ordinal below omega^omega in Cantor normal form.
///
/// Terms are (exponent, coefficient) pairs with exponents strictly
/// decreasing and coefficients >= 1; the empty list denotes 0.
struct OrdinalCNF {
    std::vector<std::pair<uint32_t, uint32_t>> terms;

    OrdinalCNF() = default;

    static OrdinalCNF nat(uint32_t n);
    static OrdinalCNF omega(uint32_t coefficient = 1);

    bool isZero() const { return terms.empty(); }
    bool isFinite() const { return terms.empty() || terms.front().first == 0; }

    /// Value as a natural; requires isFinite().
    uint32_t asNat() const;

    bool operator==(const OrdinalCNF& o) const { return terms == o.terms; }
    bool operator!=(const OrdinalCNF& o) const { return terms != o.terms; }
};

enum class Ord { Less, Equal, Greater };

/// Total order consistent with ordinal order (lexicographic on the
/// (exponent, coefficient) term lists).
Ord ordCmp(const OrdinalCNF& a, const OrdinalCNF& b);

inline bool ordLess(const OrdinalCNF& a, const OrdinalCNF& b) {
    return ordCmp(a, b) == Ord::Less;
}
inline bool ordLeq(const OrdinalCNF& a, const OrdinalCNF& b) {
    return ordCmp(a, b) != Ord::Greater;
}

struct OrdinalParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses an ordinal literal: term ("+" term)*, term = w^E*C | w*C | C.
/// `w` and `w^E` are accepted as shorthand for coefficient 1. Rejects
/// non-canonical input (non-decreasing exponents, zero coefficients).
OrdinalCNF ordParse(std::string_view text);

/// Canonical literal; ordParse(ordPrint(x)) == x.
std::string ordPrint(const OrdinalCNF& x);

/// The finite filtration Gamma_n of [0, gamma): all ordinals below gamma
/// whose exponents and coefficients are all <= n. Monotone in n and
/// exhausts [0, gamma). Requires gamma > 0.
std::vector<OrdinalCNF> gammaFiltration(const OrdinalCNF& gamma, uint32_t n);

}  // namespace coltree

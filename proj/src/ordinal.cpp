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
#include <charconv>

namespace coltree {

OrdinalCNF OrdinalCNF::nat(uint32_t n) {
    OrdinalCNF x;
    if (n > 0) x.terms.emplace_back(0, n);
    return x;
}

OrdinalCNF OrdinalCNF::omega(uint32_t coefficient) {
    OrdinalCNF x;
    if (coefficient > 0) x.terms.emplace_back(1, coefficient);
    return x;
}

uint32_t OrdinalCNF::asNat() const {
    if (terms.empty()) return 0;
    if (terms.front().first != 0) throw std::logic_error("asNat on infinite ordinal");
    return terms.front().second;
}

Ord ordCmp(const OrdinalCNF& a, const OrdinalCNF& b) {
    const size_t n = std::min(a.terms.size(), b.terms.size());
    for (size_t i = 0; i < n; ++i) {
        if (a.terms[i].first != b.terms[i].first)
            return a.terms[i].first < b.terms[i].first ? Ord::Less : Ord::Greater;
        if (a.terms[i].second != b.terms[i].second)
            return a.terms[i].second < b.terms[i].second ? Ord::Less : Ord::Greater;
    }
    if (a.terms.size() != b.terms.size())
        return a.terms.size() < b.terms.size() ? Ord::Less : Ord::Greater;
    return Ord::Equal;
}

namespace {

uint32_t parseNat(std::string_view s, std::string_view term) {
    uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw OrdinalParseError("bad natural in ordinal term '" + std::string(term) + "'");
    return value;
}

// term = w^E*C | w^E | w*C | w | C
std::pair<uint32_t, uint32_t> parseTerm(std::string_view term) {
    if (term.empty()) throw OrdinalParseError("empty ordinal term");
    if (term[0] != 'w') return {0, parseNat(term, term)};
    std::string_view rest = term.substr(1);
    uint32_t exponent = 1;
    if (!rest.empty() && rest[0] == '^') {
        rest.remove_prefix(1);
        size_t star = rest.find('*');
        exponent = parseNat(rest.substr(0, star), term);
        if (exponent == 0)
            throw OrdinalParseError("exponent 0 must be written as a plain natural in '" +
                                    std::string(term) + "'");
        rest = star == std::string_view::npos ? std::string_view{} : rest.substr(star);
    }
    uint32_t coefficient = 1;
    if (!rest.empty()) {
        if (rest[0] != '*')
            throw OrdinalParseError("malformed ordinal term '" + std::string(term) + "'");
        coefficient = parseNat(rest.substr(1), term);
    }
    return {exponent, coefficient};
}

}  // namespace

OrdinalCNF ordParse(std::string_view text) {
    OrdinalCNF x;
    if (text.empty()) throw OrdinalParseError("empty ordinal literal");
    size_t pos = 0;
    bool first = true;
    while (pos <= text.size()) {
        size_t plus = text.find('+', pos);
        std::string_view term = text.substr(pos, plus == std::string_view::npos ? plus : plus - pos);
        auto [e, c] = parseTerm(term);
        if (first && e == 0 && c == 0 && plus == std::string_view::npos && pos == 0 &&
            text == "0") {
            return x;  // the literal "0"
        }
        if (c == 0) throw OrdinalParseError("zero coefficient in term '" + std::string(term) + "'");
        if (!x.terms.empty() && x.terms.back().first <= e)
            throw OrdinalParseError("non-decreasing exponent at term '" + std::string(term) + "'");
        x.terms.emplace_back(e, c);
        first = false;
        if (plus == std::string_view::npos) break;
        pos = plus + 1;
        if (pos == text.size()) throw OrdinalParseError("trailing '+' in ordinal literal");
    }
    return x;
}

std::string ordPrint(const OrdinalCNF& x) {
    if (x.terms.empty()) return "0";
    std::string out;
    for (size_t i = 0; i < x.terms.size(); ++i) {
        if (i) out += '+';
        auto [e, c] = x.terms[i];
        if (e == 0) {
            out += std::to_string(c);
        } else if (e == 1) {
            out += "w*" + std::to_string(c);
        } else {
            out += "w^" + std::to_string(e) + "*" + std::to_string(c);
        }
    }
    return out;
}

namespace {

void filtrate(const OrdinalCNF& gamma, uint32_t n, OrdinalCNF& prefix, uint32_t maxExp,
              std::vector<OrdinalCNF>& out) {
    // prefix < gamma here; extensions append terms with exponent < maxExp.
    out.push_back(prefix);
    for (uint32_t e = std::min(maxExp, n + 1); e-- > 0;) {
        for (uint32_t c = 1; c <= n; ++c) {
            prefix.terms.emplace_back(e, c);
            if (ordLess(prefix, gamma)) filtrate(gamma, n, prefix, e, out);
            prefix.terms.pop_back();
        }
    }
}

}  // namespace

std::vector<OrdinalCNF> gammaFiltration(const OrdinalCNF& gamma, uint32_t n) {
    if (gamma.isZero()) throw std::invalid_argument("gammaFiltration requires gamma > 0");
    std::vector<OrdinalCNF> out;
    OrdinalCNF prefix;
    if (n == 0) return {prefix};  // only 0 has all coefficients <= 0... coefficients >= 1, so just 0
    filtrate(gamma, n, prefix, n + 1, out);
    std::sort(out.begin(), out.end(),
              [](const OrdinalCNF& a, const OrdinalCNF& b) { return ordLess(a, b); });
    return out;
}

}  // namespace coltree

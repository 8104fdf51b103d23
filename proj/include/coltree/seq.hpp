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
#include <string>
#include <string_view>
#include <vector>

namespace coltree {

/// A finite sequence of naturals (an element of omega^n).
using Seq = std::vector<uint32_t>;

/// Canonical encoding: dash-separated naturals, the empty sequence is "e".
std::string seqEncode(const Seq& s);
Seq seqDecode(std::string_view text);

inline bool seqIsPrefix(const Seq& a, const Seq& b) {
    if (a.size() > b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

inline Seq seqRestrict(const Seq& s, size_t m) { return Seq(s.begin(), s.begin() + m); }

inline Seq seqChild(Seq s, uint32_t c) {
    s.push_back(c);
    return s;
}

/// Canonical encoding of a set of sequences: members sorted, joined by ','.
std::string seqSetEncode(const std::vector<Seq>& sorted);

/// Sorts and deduplicates into canonical set order (lexicographic).
void seqSetCanon(std::vector<Seq>& v);

/// Restrictions of every member to length m, deduplicated.
std::vector<Seq> seqSetRestrict(const std::vector<Seq>& v, size_t m);

}  // namespace coltree

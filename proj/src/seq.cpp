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

#include "coltree/seq.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace coltree {

std::string seqEncode(const Seq& s) {
    if (s.empty()) return "e";
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(s[i]);
    }
    return out;
}

Seq seqDecode(std::string_view text) {
    if (text == "e") return {};
    Seq s;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t dash = text.find('-', pos);
        std::string_view part =
            text.substr(pos, dash == std::string_view::npos ? dash : dash - pos);
        uint32_t value = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc() || ptr != part.data() + part.size() || part.empty())
            throw std::runtime_error("bad sequence literal '" + std::string(text) + "'");
        s.push_back(value);
        if (dash == std::string_view::npos) break;
        pos = dash + 1;
    }
    return s;
}

std::string seqSetEncode(const std::vector<Seq>& sorted) {
    std::string out;
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (i) out += ',';
        out += seqEncode(sorted[i]);
    }
    return out;
}

void seqSetCanon(std::vector<Seq>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<Seq> seqSetRestrict(const std::vector<Seq>& v, size_t m) {
    std::vector<Seq> out;
    out.reserve(v.size());
    for (const Seq& s : v) out.push_back(seqRestrict(s, m));
    seqSetCanon(out);
    return out;
}

}  // namespace coltree

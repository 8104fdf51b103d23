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

#include "coltree/io.hpp"

#include <charconv>
#include <sstream>

namespace coltree {

namespace {

std::vector<std::string_view> splitLines(std::string_view text) {
    std::vector<std::string_view> lines;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
            line.remove_suffix(1);
        while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
        if (!line.empty()) lines.push_back(line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return lines;
}

std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        size_t end = pos;
        while (end < line.size() && line[end] != ' ') ++end;
        if (end > pos) out.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

uint32_t parseNat(std::string_view s, const char* what) {
    uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(std::string("bad natural in ") + what + ": '" + std::string(s) +
                         "'");
    return value;
}

std::string_view expectPrefix(std::string_view s, std::string_view prefix,
                              const char* what) {
    if (s.substr(0, prefix.size()) != prefix)
        throw ParseError(std::string("expected ") + std::string(prefix) + " in " + what);
    return s.substr(prefix.size());
}

std::vector<Seq> parseSeqList(std::string_view s) {
    std::vector<Seq> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t comma = s.find(',', pos);
        out.push_back(seqDecode(
            s.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::pair<Seq, Seq> orient(Seq x, Seq y) {
    if (y < x) std::swap(x, y);
    return {std::move(x), std::move(y)};
}

}  // namespace

// ---------------------------------------------------------------- trees --

std::string writeTree(const ColoringTree& T) {
    std::string out = "tree N=" + std::to_string(T.arity) + " H=" + std::to_string(T.height) +
                      " min=" + std::to_string(T.minLevel) + "\n";
    for (uint32_t n = 0; n < T.levels.size() && n < T.height; ++n)
        for (const TreeNode& node : T.levels[n]) {
            out += "gnode " + std::to_string(n) + " t=" + seqEncode(node.t) + " v=";
            out += seqSetEncode(node.v);
            out += '\n';
        }
    return out;
}

ColoringTree parseTree(std::string_view text) {
    auto lines = splitLines(text);
    if (lines.empty()) throw ParseError("empty tree file");
    auto header = tokens(lines[0]);
    if (header.size() != 4 || header[0] != "tree")
        throw ParseError("bad tree header: '" + std::string(lines[0]) + "'");
    ColoringTree T;
    T.arity = parseNat(expectPrefix(header[1], "N=", "tree header"), "N");
    T.height = parseNat(expectPrefix(header[2], "H=", "tree header"), "H");
    T.minLevel = parseNat(expectPrefix(header[3], "min=", "tree header"), "min");
    T.levels.resize(T.height);
    for (size_t i = 1; i < lines.size(); ++i) {
        auto parts = tokens(lines[i]);
        if (parts.size() != 4 || parts[0] != "gnode")
            throw ParseError("bad gnode line: '" + std::string(lines[i]) + "'");
        uint32_t level = parseNat(parts[1], "gnode level");
        Seq t = seqDecode(expectPrefix(parts[2], "t=", "gnode"));
        std::vector<Seq> v = parseSeqList(expectPrefix(parts[3], "v=", "gnode"));
        if (t.size() != level)
            throw ParseError("witness length differs from level: '" + std::string(lines[i]) +
                             "'");
        T.addNode(std::move(v), std::move(t));
    }
    T.canonicalize();
    return T;
}

std::string writeRankReport(const RankReport& report) {
    std::string out;
    for (const auto& [a, value] : report.assignment)
        out += "rk " + approxKey(a) + " " + std::to_string(value) + "\n";
    out += "rktree " + std::to_string(report.treeRank) + "\n";
    return out;
}

std::string writeBasicTree(const BasicColoringTree& T) {
    std::string out =
        "btree H=" + std::to_string(T.height) + " min=" + std::to_string(T.minLevel) + "\n";
    for (uint32_t n = 0; n < T.levels.size() && n < T.height; ++n)
        for (const BasicNode& node : T.levels[n])
            out += "bnode " + std::to_string(n) + " x=" + seqEncode(node.x) +
                   " y=" + seqEncode(node.y) + " k=" + std::to_string(node.k) + "\n";
    return out;
}

BasicColoringTree parseBasicTree(std::string_view text) {
    auto lines = splitLines(text);
    if (lines.empty()) throw ParseError("empty basic tree file");
    size_t first = 0;
    if (!lines.empty() && tokens(lines[0])[0] == "universal") first = 1;  // annex header
    auto header = tokens(lines[first]);
    if (header.size() != 3 || header[0] != "btree")
        throw ParseError("bad btree header: '" + std::string(lines[first]) + "'");
    BasicColoringTree T;
    T.height = parseNat(expectPrefix(header[1], "H=", "btree header"), "H");
    T.minLevel = parseNat(expectPrefix(header[2], "min=", "btree header"), "min");
    T.levels.resize(T.height);
    for (size_t i = first + 1; i < lines.size(); ++i) {
        auto parts = tokens(lines[i]);
        if (parts[0] == "rmap") continue;  // ranked annex handled separately
        if (parts.size() != 5 || parts[0] != "bnode")
            throw ParseError("bad bnode line: '" + std::string(lines[i]) + "'");
        uint32_t level = parseNat(parts[1], "bnode level");
        Seq x = seqDecode(expectPrefix(parts[2], "x=", "bnode"));
        Seq y = seqDecode(expectPrefix(parts[3], "y=", "bnode"));
        uint32_t k = parseNat(expectPrefix(parts[4], "k=", "bnode"), "k");
        if (x.size() != level || y.size() != level)
            throw ParseError("coordinate length differs from level: '" +
                             std::string(lines[i]) + "'");
        T.addNode(std::move(x), std::move(y), k);
    }
    T.canonicalize();
    return T;
}

std::string basicRankReportText(const BasicRankReport& report) {
    std::string out;
    for (const auto& [a, value] : report.assignment)
        out += "rk " + basicApproxKey(a) + " " + std::to_string(value) + "\n";
    out += "rktree " + std::to_string(report.treeRank) + "\n";
    return out;
}

std::string writeApproxKey(const BasicApproximation& a) { return basicApproxKey(a); }

BasicApproximation parseBasicApproxKey(std::string_view key) {
    if (key.size() < 2 || key.front() != '[' || key.back() != ']')
        throw ParseError("bad approximation key: '" + std::string(key) + "'");
    key = key.substr(1, key.size() - 2);
    size_t bar = key.find('|');
    if (bar == std::string_view::npos)
        throw ParseError("approximation key misses '|': '" + std::string(key) + "'");
    BasicApproximation a;
    a.v = parseSeqList(key.substr(0, bar));
    if (a.v.empty()) throw ParseError("empty approximation support");
    a.level = static_cast<uint32_t>(a.v.front().size());
    std::string_view h = key.substr(bar + 1);
    // entries are x;y:k joined by ';'
    std::vector<std::string_view> pieces;
    size_t pos = 0;
    while (pos <= h.size() && !h.empty()) {
        size_t semi = h.find(';', pos);
        pieces.push_back(h.substr(pos, semi == std::string_view::npos ? semi : semi - pos));
        if (semi == std::string_view::npos) break;
        pos = semi + 1;
    }
    for (size_t i = 0; i + 1 < pieces.size(); i += 2) {
        std::string_view xs = pieces[i];
        std::string_view rest = pieces[i + 1];
        size_t colon = rest.find(':');
        if (colon == std::string_view::npos)
            throw ParseError("bad h entry in key: '" + std::string(key) + "'");
        Seq x = seqDecode(xs);
        Seq y = seqDecode(rest.substr(0, colon));
        uint32_t k = parseNat(rest.substr(colon + 1), "pair color");
        a.h[orient(std::move(x), std::move(y))] = k;
    }
    return a;
}

std::string writeRankedTree(const RankedTree& R, bool universalHeader) {
    std::string out;
    if (universalHeader) out += "universal gamma=" + ordPrint(R.gamma) + "\n";
    out += writeBasicTree(R.base);
    // r and c tables share keys; emit sorted by key.
    for (const auto& [key, r] : R.r) {
        out += "rmap " + key + " r=" + ordPrint(r);
        auto it = R.c.find(key);
        if (it != R.c.end()) out += " c=" + seqEncode(it->second);
        out += '\n';
    }
    return out;
}

RankedTree parseRankedTree(std::string_view text) {
    RankedTree R;
    R.base = parseBasicTree(text);
    auto lines = splitLines(text);
    for (const auto& line : lines) {
        auto parts = tokens(line);
        if (parts[0] == "universal") {
            if (parts.size() != 2)
                throw ParseError("bad universal header: '" + std::string(line) + "'");
            R.gamma = ordParse(expectPrefix(parts[1], "gamma=", "universal header"));
        } else if (parts[0] == "rmap") {
            if (parts.size() < 3)
                throw ParseError("bad rmap line: '" + std::string(line) + "'");
            const std::string key(parts[1]);
            R.r[key] = ordParse(expectPrefix(parts[2], "r=", "rmap"));
            if (parts.size() > 3)
                R.c[key] = seqDecode(expectPrefix(parts[3], "c=", "rmap"));
        }
    }
    if (R.gamma.isZero() && !R.r.empty()) {
        // gamma defaults to the least ordinal above every r value.
        for (const auto& [key, r] : R.r) {
            OrdinalCNF succ = r;
            if (succ.terms.empty() || succ.terms.back().first != 0)
                succ.terms.emplace_back(0, 1);
            else
                succ.terms.back().second += 1;
            if (ordLess(R.gamma, succ)) R.gamma = succ;
        }
    }
    return R;
}

// ---------------------------------------------------------------- models --

std::string writeModel(const FiniteModel& M) {
    std::string out = "model m=" + std::to_string(M.universeSize) + "\n";
    for (const auto& rel : M.relations) {
        out += "rel " + rel.name + " " + std::to_string(rel.arity) + " ";
        bool firstTuple = true;
        for (const auto& tuple : rel.tuples) {
            if (!firstTuple) out += ';';
            firstTuple = false;
            for (size_t i = 0; i < tuple.size(); ++i) {
                if (i) out += ',';
                out += std::to_string(tuple[i]);
            }
        }
        out += '\n';
    }
    return out;
}

FiniteModel parseModel(std::string_view text) {
    auto lines = splitLines(text);
    if (lines.empty()) throw ParseError("empty model file");
    auto header = tokens(lines[0]);
    if (header.size() != 2 || header[0] != "model")
        throw ParseError("bad model header: '" + std::string(lines[0]) + "'");
    FiniteModel M;
    M.universeSize = parseNat(expectPrefix(header[1], "m=", "model header"), "m");
    for (size_t i = 1; i < lines.size(); ++i) {
        auto parts = tokens(lines[i]);
        if (parts.size() < 3 || parts[0] != "rel")
            throw ParseError("bad rel line: '" + std::string(lines[i]) + "'");
        FiniteModel::Relation rel;
        rel.name = std::string(parts[1]);
        rel.arity = parseNat(parts[2], "relation arity");
        if (parts.size() == 4) {
            std::string_view body = parts[3];
            size_t pos = 0;
            while (pos <= body.size()) {
                size_t semi = body.find(';', pos);
                std::string_view t =
                    body.substr(pos, semi == std::string_view::npos ? semi : semi - pos);
                if (!t.empty()) {
                    std::vector<Elem> tuple;
                    size_t tp = 0;
                    while (tp <= t.size()) {
                        size_t comma = t.find(',', tp);
                        tuple.push_back(parseNat(
                            t.substr(tp, comma == std::string_view::npos ? comma
                                                                         : comma - tp),
                            "tuple element"));
                        if (comma == std::string_view::npos) break;
                        tp = comma + 1;
                    }
                    rel.tuples.insert(std::move(tuple));
                }
                if (semi == std::string_view::npos) break;
                pos = semi + 1;
            }
        }
        M.relations.push_back(std::move(rel));
    }
    ValidationReport check = M.check();
    if (!check.ok()) throw ParseError("model file invalid: " + check.violations.front());
    return M;
}

std::string writeOracle(const RankedModelOracle& O) {
    std::string out = "oracle m=" + std::to_string(O.universeSize) + "\n";
    for (const auto& [w, r] : O.rank) {
        out += "mrank ";
        for (size_t i = 0; i < w.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(w[i]);
        }
        out += " r=" + ordPrint(r);
        out += " c=" + std::to_string(O.critElem.at(w));
        out += " phi=" + O.critType.at(w).encode();
        out += '\n';
    }
    return out;
}

RankedModelOracle parseOracle(std::string_view text) {
    auto lines = splitLines(text);
    if (lines.empty()) throw ParseError("empty oracle file");
    auto header = tokens(lines[0]);
    if (header.size() != 2 || header[0] != "oracle")
        throw ParseError("bad oracle header: '" + std::string(lines[0]) + "'");
    RankedModelOracle O;
    O.universeSize = parseNat(expectPrefix(header[1], "m=", "oracle header"), "m");
    for (size_t i = 1; i < lines.size(); ++i) {
        auto parts = tokens(lines[i]);
        if (parts.size() != 5 || parts[0] != "mrank")
            throw ParseError("bad mrank line: '" + std::string(lines[i]) + "'");
        ElemSet w;
        {
            std::string_view body = parts[1];
            size_t pos = 0;
            while (pos <= body.size()) {
                size_t comma = body.find(',', pos);
                w.push_back(parseNat(
                    body.substr(pos, comma == std::string_view::npos ? comma : comma - pos),
                    "oracle element"));
                if (comma == std::string_view::npos) break;
                pos = comma + 1;
            }
        }
        std::sort(w.begin(), w.end());
        O.rank[w] = ordParse(expectPrefix(parts[2], "r=", "mrank"));
        O.critElem[w] = parseNat(expectPrefix(parts[3], "c=", "mrank"), "critical element");
        O.critType[w] = AtomicType::decode(expectPrefix(parts[4], "phi=", "mrank"),
                                           static_cast<uint32_t>(w.size()) - 1);
    }
    return O;
}

// --------------------------------------------------------------- forcing --

std::string writeCondition(const ForcingCondition& p) {
    std::string out = "cond n=" + std::to_string(p.n) + "\n";
    for (Elem e : p.w) out += "eta " + std::to_string(e) + " " + seqEncode(p.eta.at(e)) + "\n";
    for (const auto& [pair, color] : p.g)
        out += "g " + std::to_string(pair.first) + "," + std::to_string(pair.second) + " " +
               std::to_string(color) + "\n";
    return out;
}

ForcingCondition parseCondition(std::string_view text) {
    auto lines = splitLines(text);
    if (lines.empty()) throw ParseError("empty condition file");
    auto header = tokens(lines[0]);
    if (header.size() != 2 || header[0] != "cond")
        throw ParseError("bad cond header: '" + std::string(lines[0]) + "'");
    ForcingCondition p;
    p.n = parseNat(expectPrefix(header[1], "n=", "cond header"), "n");
    for (size_t i = 1; i < lines.size(); ++i) {
        auto parts = tokens(lines[i]);
        if (parts[0] == "eta" && parts.size() == 3) {
            Elem e = parseNat(parts[1], "eta element");
            p.eta[e] = seqDecode(parts[2]);
            p.w.push_back(e);
        } else if (parts[0] == "g" && parts.size() == 3) {
            size_t comma = parts[1].find(',');
            if (comma == std::string_view::npos)
                throw ParseError("bad g line: '" + std::string(lines[i]) + "'");
            Elem a = parseNat(parts[1].substr(0, comma), "g element");
            Elem b = parseNat(parts[1].substr(comma + 1), "g element");
            if (b < a) std::swap(a, b);
            p.g[{a, b}] = parseNat(parts[2], "g color");
        } else {
            throw ParseError("bad condition line: '" + std::string(lines[i]) + "'");
        }
    }
    std::sort(p.w.begin(), p.w.end());
    p.w.erase(std::unique(p.w.begin(), p.w.end()), p.w.end());
    return p;
}

std::string writeFamily(const HomogeneousFamily& family) {
    std::string out;
    for (const auto& [e, s] : family.eta)
        out += "eta " + std::to_string(e) + " " + seqEncode(s) + "\n";
    for (const auto& [pair, color] : family.colors)
        out += "g " + std::to_string(pair.first) + "," + std::to_string(pair.second) + " " +
               std::to_string(color) + "\n";
    for (const auto& [pair, n0] : family.certBase)
        out += "cert " + std::to_string(pair.first) + "," + std::to_string(pair.second) +
               " n0=" + std::to_string(n0) + "\n";
    return out;
}

// -------------------------------------------------------------- geometry --

std::string writeColoring(const std::vector<std::set<std::vector<Seq>>>& coloring) {
    std::string out;
    for (size_t m = 0; m < coloring.size(); ++m)
        for (const auto& subset : coloring[m]) {
            out += "cm " + std::to_string(m) + " ";
            for (size_t i = 0; i < subset.size(); ++i) {
                if (i) out += ',';
                out += seqEncode(subset[i]);
            }
            out += '\n';
        }
    return out;
}

std::vector<std::set<std::vector<Seq>>> parseColoring(std::string_view text) {
    std::vector<std::set<std::vector<Seq>>> coloring;
    for (const auto& line : splitLines(text)) {
        auto parts = tokens(line);
        if (parts.size() != 3 || parts[0] != "cm")
            throw ParseError("bad cm line: '" + std::string(line) + "'");
        uint32_t m = parseNat(parts[1], "cm index");
        std::vector<Seq> subset = parseSeqList(parts[2]);
        seqSetCanon(subset);
        if (coloring.size() <= m) coloring.resize(m + 1);
        coloring[m].insert(std::move(subset));
    }
    return coloring;
}

namespace {

std::string ratText(const Rational& r) {
    std::ostringstream os;
    os << r.get_num();
    if (r.get_den() != 1) os << '/' << r.get_den();
    return os.str();
}

}  // namespace

std::string writeScene(const Scene& scene) {
    std::string out = "scene N=" + std::to_string(scene.N) + " H=" + std::to_string(scene.H) +
                      " mmax=" + std::to_string(scene.mMax) + "\n";
    for (const auto& [s, p] : scene.points) {
        out += "pt " + seqEncode(s) + " ";
        for (size_t c = 0; c < p.size(); ++c) {
            if (c) out += ',';
            out += ratText(p[c]);
        }
        out += '\n';
    }
    for (uint32_t m = 0; m < scene.removed.size(); ++m) {
        for (const auto& tuple : scene.removed[m]) {
            out += "rm " + std::to_string(m) + " ";
            for (size_t i = 0; i < tuple.size(); ++i) {
                if (i) out += ';';
                for (size_t c = 0; c < tuple[i].size(); ++c) {
                    if (c) out += ',';
                    out += ratText(tuple[i][c]);
                }
            }
            out += '\n';
        }
    }
    return out;
}

}  // namespace coltree

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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "coltree/io.hpp"

using namespace coltree;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Writes atomically: temp file in the same directory, then rename.
void writeFileAtomic(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, target);
}

int reportExit(const ValidationReport& report) {
    if (report.ok()) {
        std::cout << "ok\n";
        return kExitOk;
    }
    for (const auto& v : report.violations) std::cout << "violation: " << v << "\n";
    return kExitViolations;
}

std::string firstWord(const std::string& text) {
    std::istringstream is(text);
    std::string word;
    while (std::getline(is, word)) {
        size_t hash = word.find('#');
        if (hash != std::string::npos) word = word.substr(0, hash);
        std::istringstream ls(word);
        std::string tok;
        if (ls >> tok) return tok;
    }
    return "";
}

struct Budgets {
    uint64_t approx = 1'000'000;
    uint64_t nodes = 1'000'000;
    uint32_t sizeCap = 6;

    ApproxOptions options() const { return ApproxOptions{sizeCap, approx}; }
};

RankedTree loadUniversal(const std::string& path, const std::string& gamma, uint32_t height) {
    if (!path.empty()) return parseRankedTree(readFile(path));
    if (gamma.empty()) throw ParseError("need --universal or --gamma/--height");
    UniversalTree U = buildUniversal(ordParse(gamma), height);
    return std::move(U.tree);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for coloring trees, ranks, universal trees, the "
                 "homogeneous-set poset, and exact convexity realizations"};
    app.require_subcommand(1);

    std::string input, out = "-", universalPath, oraclePath, gamma, approxKeyText;
    std::string mode = "ranked";
    uint32_t height = 4, depth = 3, theta = 2, mmax = 4, nParam = 2;
    uint64_t seed = 1;
    Budgets budgets;

    app.add_option("--budget-approx", budgets.approx, "approximation enumeration budget");
    app.add_option("--budget-nodes", budgets.nodes, "search/node budget");
    app.add_option("--cap-v", budgets.sizeCap, "approximation support size cap");

    auto* validate = app.add_subcommand("validate", "validate a serialized artifact");
    validate->add_option("--input", input)->required();
    validate->add_option("--universal", universalPath);
    validate->add_option("--oracle", oraclePath);
    validate->add_option("--theta", theta);

    auto* rank = app.add_subcommand("rank", "rank report for a (basic) coloring tree");
    rank->add_option("--input", input)->required();
    rank->add_option("--out", out);

    auto* chain = app.add_subcommand("chain", "splitting-chain extraction");
    chain->add_option("--input", input)->required();
    chain->add_option("--depth", depth);
    chain->add_option("--approx-key", approxKeyText, "start approximation (default least)");
    chain->add_option("--out", out);

    auto* buildU = app.add_subcommand("build-universal", "universal ranked tree");
    buildU->add_option("--gamma", gamma)->required();
    buildU->add_option("--height", height)->required();
    buildU->add_option("--out", out);

    auto* embed = app.add_subcommand("embed", "embed a ranked tree or coloring");
    embed->add_option("--input", input)->required();
    embed->add_option("--universal", universalPath)->required();
    embed->add_option("--mode", mode)->check(CLI::IsMember({"ranked", "coloring"}));
    embed->add_option("--out", out);

    auto* modelRank = app.add_subcommand("model-rank", "theta-rank tables and oracle dump");
    modelRank->add_option("--input", input)->required();
    modelRank->add_option("--theta", theta);
    modelRank->add_option("--out", out);

    auto* force = app.add_subcommand("force", "generic homogeneous family plus verification");
    force->add_option("--input", input, "model or oracle file")->required();
    force->add_option("--theta", theta);
    force->add_option("--universal", universalPath);
    force->add_option("--gamma", gamma);
    force->add_option("--height", height);
    force->add_option("--depth", depth);
    force->add_option("--out", out);

    auto* realizeCmd = app.add_subcommand("realize", "exact scene for an F-sigma coloring");
    realizeCmd->add_option("--input", input)->required();
    realizeCmd->add_option("--n", nParam);
    realizeCmd->add_option("--height", height);
    realizeCmd->add_option("--mmax", mmax);
    realizeCmd->add_option("--out", out);

    auto* sweep = app.add_subcommand("defect-sweep", "full defect/coloring equivalence sweep");
    sweep->add_option("--input", input)->required();
    sweep->add_option("--n", nParam);
    sweep->add_option("--height", height);
    sweep->add_option("--mmax", mmax);

    auto* gen = app.add_subcommand("gen", "random test fixtures (trees, colorings)");
    gen->add_option("--seed", seed);
    gen->add_option("--mode", mode)->check(CLI::IsMember({"tree", "btree", "coloring"}));
    gen->add_option("--height", height);
    gen->add_option("--out", out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            std::string text = readFile(input);
            std::string kind = firstWord(text);
            if (kind == "tree") return reportExit(validateTree(parseTree(text)));
            if (kind == "btree") return reportExit(validateBasic(parseBasicTree(text)));
            if (kind == "universal" || text.find("\nrmap ") != std::string::npos)
                return reportExit(validateRanked(parseRankedTree(text), budgets.options()));
            if (kind == "model") return reportExit(parseModel(text).check());
            if (kind == "oracle") {
                RankedModelOracle O = parseOracle(text);
                const FiniteModel* M = nullptr;
                FiniteModel model;
                if (!oraclePath.empty()) {
                    model = parseModel(readFile(oraclePath));
                    M = &model;
                }
                return reportExit(validateOracle(O, M, theta));
            }
            if (kind == "cond") {
                if (universalPath.empty() || oraclePath.empty())
                    throw ParseError("condition validation needs --universal and --oracle");
                ForcingCondition p = parseCondition(text);
                RankedTree U = parseRankedTree(readFile(universalPath));
                RankedModelOracle O = parseOracle(readFile(oraclePath));
                return reportExit(validateCondition(p, O, U));
            }
            throw ParseError("unrecognized artifact kind: '" + kind + "'");
        }

        if (*rank) {
            std::string text = readFile(input);
            if (firstWord(text) == "tree") {
                RankReport report = rankAll(parseTree(text), budgets.options());
                writeFileAtomic(out, writeRankReport(report));
            } else {
                BasicRankReport report = rankAllBasic(parseBasicTree(text), budgets.options());
                writeFileAtomic(out, basicRankReportText(report));
            }
            return kExitOk;
        }

        if (*chain) {
            ColoringTree T = parseTree(readFile(input));
            Approximation start;
            bool found = false;
            if (approxKeyText.empty()) {
                auto apps = approximations(T, T.minLevel, budgets.options());
                if (apps.empty()) throw ParseError("tree has no approximations");
                start = apps.front();
                found = true;
            } else {
                // match against the canonical keys of the enumerated sets
                for (uint32_t n = T.minLevel; n < T.height && !found; ++n)
                    for (const Approximation& a : approximations(T, n, budgets.options()))
                        if (approxKey(a) == approxKeyText) {
                            start = a;
                            found = true;
                            break;
                        }
                if (!found) throw ParseError("no approximation with the given key");
            }
            auto result = extractSplittingChain(T, start, depth, budgets.nodes);
            std::string output;
            if (std::holds_alternative<std::vector<Approximation>>(result)) {
                for (const auto& a : std::get<std::vector<Approximation>>(result))
                    output += "link " + approxKey(a) + "\n";
                writeFileAtomic(out, output);
                return kExitOk;
            }
            const auto& failure = std::get<ChainFailure>(result);
            output += "failure deepest=" + std::to_string(failure.deepestLevel) + "\n";
            for (const auto& a : failure.frontier) output += "frontier " + approxKey(a) + "\n";
            writeFileAtomic(out, output);
            return kExitViolations;
        }

        if (*buildU) {
            UniversalTree U = buildUniversal(ordParse(gamma), height);
            writeFileAtomic(out, writeRankedTree(U.tree, true));
            return kExitOk;
        }

        if (*embed) {
            RankedTree U = parseRankedTree(readFile(universalPath));
            std::string text = readFile(input);
            std::string output;
            if (mode == "ranked") {
                RankedTree S = parseRankedTree(text);
                Embedding e = embedRanked(S, U, budgets.options());
                for (const auto& [src, dst] : e.f)
                    output += "f " + seqEncode(src) + " " + seqEncode(dst) + "\n";
                for (const auto& [k, v] : e.fStar)
                    output += "fstar " + std::to_string(k) + " " + std::to_string(v) + "\n";
            } else {
                BasicColoringTree S = parseBasicTree(text);
                std::map<Seq, Seq> phi = embedColoring(S, U, {}, budgets.options());
                for (const auto& [src, dst] : phi)
                    output += "phi " + seqEncode(src) + " " + seqEncode(dst) + "\n";
            }
            writeFileAtomic(out, output);
            return kExitOk;
        }

        if (*modelRank) {
            FiniteModel M = parseModel(readFile(input));
            RankedModelOracle O = buildOracle(M, theta);
            std::string output = writeOracle(O);
            output += "# model rank " + ordPrint(O.modelRank()) + "\n";
            writeFileAtomic(out, output);
            return kExitOk;
        }

        if (*force) {
            std::string text = readFile(input);
            RankedModelOracle O;
            if (firstWord(text) == "model")
                O = buildOracle(parseModel(text), theta);
            else
                O = parseOracle(text);
            RankedTree U = loadUniversal(universalPath, gamma, height);
            HomogeneousFamily family = genericHomogeneous(O, U, depth, budgets.options());
            ValidationReport familyReport = verifyFamily(family, U, depth);
            Prop42Report domination = verifyProp42(U, family, O, depth, 4, budgets.options());
            std::string output = writeFamily(family);
            for (const auto& e : domination.entries) {
                output += "prop42 ";
                for (size_t i = 0; i < e.w.size(); ++i) {
                    if (i) output += ',';
                    output += std::to_string(e.w[i]);
                }
                output += " level=" + std::to_string(e.level) +
                          " oracle=" + ordPrint(e.oracleRank) +
                          " computed=" + std::to_string(e.computedRank) +
                          (e.fail ? " FAIL" : " ok") + "\n";
            }
            writeFileAtomic(out, output);
            if (!familyReport.ok()) return reportExit(familyReport);
            return domination.ok() ? kExitOk : kExitViolations;
        }

        if (*realizeCmd) {
            auto coloring = parseColoring(readFile(input));
            Scene scene = realize(coloring, nParam, height, mmax);
            writeFileAtomic(out, writeScene(scene));
            return kExitOk;
        }

        if (*sweep) {
            auto coloring = parseColoring(readFile(input));
            Scene scene = realize(coloring, nParam, height, mmax);
            return reportExit(defectSweep(scene));
        }

        if (*gen) {
            std::mt19937 rng(static_cast<uint32_t>(seed));
            std::string output;
            if (mode == "coloring") {
                std::uniform_int_distribution<uint32_t> bit(0, 1);
                std::vector<std::set<std::vector<Seq>>> coloring(3);
                for (int i = 0; i < 10; ++i) {
                    Seq a(height), b(height);
                    for (auto& x : a) x = bit(rng);
                    for (auto& x : b) x = bit(rng);
                    if (a == b) continue;
                    std::vector<Seq> subset = {a, b};
                    seqSetCanon(subset);
                    coloring[i % 3].insert(subset);
                }
                output = writeColoring(coloring);
            } else {
                std::uniform_int_distribution<uint32_t> digit(0, 2);
                BasicColoringTree T;
                T.height = height;
                T.minLevel = 1;
                T.levels.resize(height);
                for (int i = 0; i < 6; ++i) {
                    Seq x(height - 1), y(height - 1);
                    for (auto& v : x) v = digit(rng);
                    for (auto& v : y) v = digit(rng);
                    if (x == y) continue;
                    for (uint32_t n = 1; n < height; ++n) {
                        Seq xr = seqRestrict(x, n), yr = seqRestrict(y, n);
                        if (xr == yr) continue;
                        T.addNode(xr, yr, static_cast<uint32_t>(i % 2));
                    }
                }
                T.canonicalize();
                output = mode == "btree" ? writeBasicTree(T) : writeTree(basicToGeneral(T));
            }
            writeFileAtomic(out, output);
            return kExitOk;
        }
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const PreconditionError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const OrdinalParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const BudgetError& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return kExitBudget;
    } catch (const BoundsError& e) {
        std::cerr << "bounds exceeded: " << e.what() << "\n";
        return kExitBudget;
    }
    return kExitOk;
}

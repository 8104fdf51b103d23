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

#include <string>
#include <string_view>

#include "coltree/basic.hpp"
#include "coltree/forcing.hpp"
#include "coltree/geometry.hpp"
#include "coltree/model.hpp"
#include "coltree/tree.hpp"

namespace coltree {

/// Parse failure with a line diagnostic.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Line-oriented UTF-8 formats with '#' comments. Every writer's output
// re-parses to an equal value.

std::string writeTree(const ColoringTree& T);
ColoringTree parseTree(std::string_view text);

std::string writeRankReport(const RankReport& report);

std::string writeBasicTree(const BasicColoringTree& T);
BasicColoringTree parseBasicTree(std::string_view text);

std::string basicRankReportText(const BasicRankReport& report);

/// Ranked annex lines (rmap ...), preceded by `universal gamma=...` when
/// requested; parse fills r/c/gamma next to an already parsed base.
std::string writeRankedTree(const RankedTree& R, bool universalHeader = false);
RankedTree parseRankedTree(std::string_view text);

std::string writeApproxKey(const BasicApproximation& a);
BasicApproximation parseBasicApproxKey(std::string_view key);

std::string writeModel(const FiniteModel& M);
FiniteModel parseModel(std::string_view text);

std::string writeOracle(const RankedModelOracle& O);
RankedModelOracle parseOracle(std::string_view text);

std::string writeCondition(const ForcingCondition& p);
ForcingCondition parseCondition(std::string_view text);

std::string writeFamily(const HomogeneousFamily& family);

std::string writeColoring(const std::vector<std::set<std::vector<Seq>>>& coloring);
std::vector<std::set<std::vector<Seq>>> parseColoring(std::string_view text);

std::string writeScene(const Scene& scene);

}  // namespace coltree

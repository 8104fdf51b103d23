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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coltree/ordinal.hpp"
#include "coltree/report.hpp"

namespace coltree {

using Elem = uint32_t;
using ElemSet = std::vector<Elem>;  // sorted, distinct

/// A finite relational model over universe {0..universeSize-1}.
struct FiniteModel {
    struct Relation {
        std::string name;
        uint32_t arity = 1;
        std::set<std::vector<Elem>> tuples;
    };

    uint32_t universeSize = 0;
    std::vector<Relation> relations;

    ValidationReport check() const;
};

/// The complete atomic type of a subject over an ordered parameter list:
/// the truth value of every atomic formula mentioning the subject variable.
/// Equality atoms (y = b_i) are uniformly false because the subject is
/// outside the parameter list, so only relational atoms are stored.
struct AtomicType {
    struct Atom {
        std::string relation;
        // argument pattern: SUBJECT for y, otherwise a parameter index
        static constexpr uint32_t SUBJECT = UINT32_MAX;
        std::vector<uint32_t> args;
        bool positive = true;

        bool operator<(const Atom& o) const {
            if (relation != o.relation) return relation < o.relation;
            if (args != o.args) return args < o.args;
            return positive < o.positive;
        }
        bool operator==(const Atom& o) const {
            return relation == o.relation && args == o.args && positive == o.positive;
        }
    };

    uint32_t parameterCount = 0;
    std::vector<Atom> atoms;  // sorted, complete over patterns involving y

    bool operator==(const AtomicType& o) const {
        return parameterCount == o.parameterCount && atoms == o.atoms;
    }

    std::string encode() const;
    static AtomicType decode(std::string_view text, uint32_t parameterCount);
};

/// Complete atomic type of `a` over the ordered parameters `params`
/// (a must not occur in params).
AtomicType atomicType(const FiniteModel& M, Elem a, const std::vector<Elem>& params);

/// Elements satisfying every decided atom of the type over the parameters
/// (and distinct from every parameter).
std::vector<Elem> realizers(const FiniteModel& M, const AtomicType& type,
                            const std::vector<Elem>& params);

/// theta-independence: every member's complete type over the rest has at
/// least theta realizers.
bool independentTheta(const FiniteModel& M, uint32_t theta, const ElemSet& w);

/// Memoized theta-rank of an independent set (finite on finite models).
uint32_t rankTheta(const FiniteModel& M, uint32_t theta, const ElemSet& w);

/// Model rank: 0 when no nonempty theta-independent set exists, otherwise
/// sup of rankTheta(w) + 1 over nonempty independent w.
uint32_t rankThetaModel(const FiniteModel& M, uint32_t theta);

/// Least member whose witness clause fails at rank(w) + 1, with its type.
std::pair<Elem, AtomicType> critical(const FiniteModel& M, uint32_t theta, const ElemSet& w);

/// Rank and critical data tables consumed by the forcing poset.
struct RankedModelOracle {
    uint32_t universeSize = 0;
    std::map<ElemSet, OrdinalCNF> rank;
    std::map<ElemSet, Elem> critElem;
    std::map<ElemSet, AtomicType> critType;

    bool inDomain(const ElemSet& w) const { return rank.count(w) > 0; }
    OrdinalCNF modelRank() const;
};

/// Builds the oracle from the theta-rank machinery over every nonempty
/// theta-independent subset.
RankedModelOracle buildOracle(const FiniteModel& M, uint32_t theta);

/// Checks the critical-drop invariant (A2) and critical-data
/// well-formedness; with a model, additionally checks agreement with
/// rankTheta/critical. The model is required for realizer evaluation, so
/// A2 is checked only when M is supplied.
ValidationReport validateOracle(const RankedModelOracle& O, const FiniteModel* M,
                                uint32_t theta);

}  // namespace coltree

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
#include <vector>

namespace coltree {

/// Report-style validator output: one line per violation, empty means valid.
struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    void add(std::string v) { violations.push_back(std::move(v)); }
    std::string str() const {
        std::string out;
        for (const auto& v : violations) {
            out += v;
            out += '\n';
        }
        return out;
    }
};

/// Thrown when a combinatorial enumeration would exceed its budget.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when an input violates an operation's precondition.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a universality bound is exceeded (model subset too large,
/// ranks outside the filtration at the needed level, tree too short).
struct BoundsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Budget {
    uint64_t limit = 1'000'000;
    uint64_t used = 0;

    void charge(uint64_t amount, const char* what) {
        used += amount;
        if (used > limit) throw BudgetError(std::string("budget exceeded in ") + what);
    }
};

}  // namespace coltree

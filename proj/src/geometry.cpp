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

#include "coltree/geometry.hpp"

#include <algorithm>
#include <functional>

namespace coltree {

RationalPoint pointOf(const Seq& s, uint32_t N) {
    Rational t = 0;
    Rational power(1, 3);
    for (uint32_t digit : s) {
        if (digit > 1) throw PreconditionError("binary string expected");
        if (digit) t += power;
        power /= 3;
    }
    RationalPoint p(2 * N - 1);
    Rational acc = 1;
    for (auto& coord : p) {
        acc *= t;
        coord = acc;
    }
    return p;
}

namespace {

/// Row-reduces the augmented matrix in place; returns the pivot columns.
std::vector<size_t> rowReduce(std::vector<std::vector<Rational>>& m, size_t cols) {
    std::vector<size_t> pivots;
    size_t row = 0;
    for (size_t col = 0; col < cols && row < m.size(); ++col) {
        size_t pivot = row;
        while (pivot < m.size() && m[pivot][col] == 0) ++pivot;
        if (pivot == m.size()) continue;
        std::swap(m[row], m[pivot]);
        Rational inv = m[row][col];
        for (auto& x : m[row]) x /= inv;
        for (size_t r = 0; r < m.size(); ++r) {
            if (r == row || m[r][col] == 0) continue;
            Rational factor = m[r][col];
            for (size_t c = 0; c < m[r].size(); ++c) m[r][c] -= factor * m[row][c];
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace

std::optional<std::vector<Rational>> barycentric(const RationalPoint& b,
                                                 const std::vector<RationalPoint>& T) {
    if (T.empty()) throw PreconditionError("empty simplex");
    const size_t dim = b.size();
    for (const auto& p : T)
        if (p.size() != dim) throw PreconditionError("dimension mismatch");
    if (!affinelyIndependent(T)) throw PreconditionError("affinely dependent simplex");
    // Rows: the affine constraint and one row per coordinate.
    std::vector<std::vector<Rational>> m(dim + 1, std::vector<Rational>(T.size() + 1));
    for (size_t j = 0; j < T.size(); ++j) m[0][j] = 1;
    m[0][T.size()] = 1;
    for (size_t i = 0; i < dim; ++i) {
        for (size_t j = 0; j < T.size(); ++j) m[i + 1][j] = T[j][i];
        m[i + 1][T.size()] = b[i];
    }
    std::vector<size_t> pivots = rowReduce(m, T.size());
    // Inconsistent rows mean b is off the affine hull.
    for (const auto& row : m) {
        bool zero = true;
        for (size_t c = 0; c < T.size(); ++c)
            if (row[c] != 0) zero = false;
        if (zero && row[T.size()] != 0) return std::nullopt;
    }
    std::vector<Rational> lambda(T.size(), 0);
    for (size_t r = 0; r < pivots.size(); ++r) lambda[pivots[r]] = m[r][T.size()];
    return lambda;
}

bool convMembership(const RationalPoint& b, const std::vector<RationalPoint>& T) {
    auto lambda = barycentric(b, T);
    if (!lambda) return false;
    for (const auto& x : *lambda)
        if (x < 0) return false;
    return true;
}

bool relintMembership(const RationalPoint& b, const std::vector<RationalPoint>& T) {
    auto lambda = barycentric(b, T);
    if (!lambda) return false;
    for (const auto& x : *lambda)
        if (x <= 0) return false;
    return true;
}

bool affinelyIndependent(const std::vector<RationalPoint>& pts) {
    if (pts.size() <= 1) return true;
    const size_t dim = pts[0].size();
    std::vector<std::vector<Rational>> m;
    for (size_t i = 1; i < pts.size(); ++i) {
        std::vector<Rational> row(dim);
        for (size_t c = 0; c < dim; ++c) row[c] = pts[i][c] - pts[0][c];
        m.push_back(std::move(row));
    }
    return rowReduce(m, dim).size() == pts.size() - 1;
}

ValidationReport verifyGeneralPosition(const Scene& scene, uint64_t guard) {
    ValidationReport report;
    std::vector<const RationalPoint*> pts;
    std::vector<const Seq*> names;
    for (const auto& [s, p] : scene.points) {
        pts.push_back(&p);
        names.push_back(&s);
    }
    const uint32_t k = 2 * scene.N;
    // Subset count C(|pts|, 2N) against the guard.
    uint64_t count = 1;
    bool overflow = false;
    for (uint32_t i = 0; i < k && !overflow; ++i) {
        count = count * (pts.size() - i) / (i + 1);
        if (count > guard) overflow = true;
    }
    if (pts.size() < k) return report;  // nothing to check
    if (!overflow && count <= guard) {
        std::vector<size_t> idx(k);
        std::function<void(size_t, size_t)> rec = [&](size_t pos, size_t from) {
            if (pos == k) {
                std::vector<RationalPoint> subset;
                for (size_t i : idx) subset.push_back(*pts[i]);
                if (!affinelyIndependent(subset)) {
                    std::string msg = "affinely dependent 2N-subset:";
                    for (size_t i : idx) msg += " " + seqEncode(*names[i]);
                    report.add(msg);
                }
                return;
            }
            for (size_t i = from; i < pts.size(); ++i) {
                idx[pos] = i;
                rec(pos + 1, i + 1);
            }
        };
        rec(0, 0);
        return report;
    }
    // Analytic Vandermonde certificate: every point on the moment curve and
    // parameters pairwise distinct.
    std::set<Rational> params;
    for (size_t i = 0; i < pts.size(); ++i) {
        const RationalPoint& p = *pts[i];
        const Rational& t = p[0];
        Rational acc = t;
        for (size_t c = 1; c < p.size(); ++c) {
            acc *= t;
            if (p[c] != acc) {
                report.add("point " + seqEncode(*names[i]) + " off the moment curve");
                break;
            }
        }
        if (!params.insert(t).second)
            report.add("duplicate moment-curve parameter at " + seqEncode(*names[i]));
    }
    return report;
}

std::vector<RationalPoint> removedTuple(const std::vector<RationalPoint>& simplex,
                                        uint32_t m) {
    const size_t n = simplex.size();
    const size_t dim = simplex[0].size();
    RationalPoint centroid(dim, 0);
    for (const auto& p : simplex)
        for (size_t c = 0; c < dim; ++c) centroid[c] += p[c];
    for (auto& x : centroid) x /= static_cast<long>(n);
    Rational mu(1, m + 1);
    std::vector<RationalPoint> out;
    for (const auto& p : simplex) {
        RationalPoint q(dim);
        for (size_t c = 0; c < dim; ++c) q[c] = (1 - mu) * p[c] + mu * centroid[c];
        out.push_back(std::move(q));
    }
    return out;
}

namespace {

/// Exact two-phase simplex for max c.x s.t. Ax = b, x >= 0 (Bland's rule).
/// Returns nullopt when infeasible, otherwise the optimum.
std::optional<Rational> simplexMax(std::vector<std::vector<Rational>> A,
                                   std::vector<Rational> b, std::vector<Rational> c) {
    const size_t rows = A.size();
    const size_t vars = c.size();
    for (size_t r = 0; r < rows; ++r)
        if (b[r] < 0) {
            for (auto& x : A[r]) x = -x;
            b[r] = -b[r];
        }
    // Tableau with artificial variables appended.
    const size_t total = vars + rows;
    std::vector<std::vector<Rational>> T(rows, std::vector<Rational>(total + 1, 0));
    std::vector<size_t> basis(rows);
    for (size_t r = 0; r < rows; ++r) {
        for (size_t v = 0; v < vars; ++v) T[r][v] = A[r][v];
        T[r][vars + r] = 1;
        T[r][total] = b[r];
        basis[r] = vars + r;
    }
    auto pivot = [&](size_t pr, size_t pc) {
        Rational inv = T[pr][pc];
        for (auto& x : T[pr]) x /= inv;
        for (size_t r = 0; r < rows; ++r) {
            if (r == pr || T[r][pc] == 0) continue;
            Rational factor = T[r][pc];
            for (size_t cidx = 0; cidx <= total; ++cidx) T[r][cidx] -= factor * T[pr][cidx];
        }
        basis[pr] = pc;
    };
    auto run = [&](const std::vector<Rational>& objective, size_t limit) {
        while (true) {
            // Reduced costs for the current basis.
            std::vector<Rational> reduced(limit, 0);
            for (size_t v = 0; v < limit; ++v) {
                Rational z = 0;
                for (size_t r = 0; r < rows; ++r) z += objective[basis[r]] * T[r][v];
                reduced[v] = objective[v] - z;
            }
            size_t entering = limit;
            for (size_t v = 0; v < limit; ++v)
                if (reduced[v] > 0) {
                    entering = v;
                    break;  // Bland
                }
            if (entering == limit) break;
            size_t leaving = rows;
            Rational best;
            for (size_t r = 0; r < rows; ++r) {
                if (T[r][entering] <= 0) continue;
                Rational ratio = T[r][total] / T[r][entering];
                if (leaving == rows || ratio < best ||
                    (ratio == best && basis[r] < basis[leaving])) {
                    best = ratio;
                    leaving = r;
                }
            }
            if (leaving == rows) return false;  // unbounded
            pivot(leaving, entering);
        }
        return true;
    };
    // Phase 1: drive the artificials out.
    std::vector<Rational> phase1(total, 0);
    for (size_t r = 0; r < rows; ++r) phase1[vars + r] = -1;
    run(phase1, total);
    Rational artificialSum = 0;
    for (size_t r = 0; r < rows; ++r)
        if (basis[r] >= vars) artificialSum += T[r][total];
    if (artificialSum != 0) return std::nullopt;  // infeasible
    // Pivot out any degenerate artificial still in the basis.
    for (size_t r = 0; r < rows; ++r) {
        if (basis[r] < vars) continue;
        size_t col = vars;
        for (size_t v = 0; v < vars; ++v)
            if (T[r][v] != 0) {
                col = v;
                break;
            }
        if (col < vars) pivot(r, col);
    }
    // Phase 2.
    std::vector<Rational> phase2(total, 0);
    for (size_t v = 0; v < vars; ++v) phase2[v] = c[v];
    if (!run(phase2, vars)) return std::nullopt;  // unbounded (not expected here)
    Rational value = 0;
    for (size_t r = 0; r < rows; ++r)
        if (basis[r] < vars) value += c[basis[r]] * T[r][total];
    return value;
}

}  // namespace

bool relintDisjoint(const std::vector<RationalPoint>& x0,
                    const std::vector<RationalPoint>& x1) {
    if (x0.empty() || x1.empty()) throw PreconditionError("empty simplex");
    if (!affinelyIndependent(x0) || !affinelyIndependent(x1))
        throw PreconditionError("affinely dependent simplex");
    const size_t dim = x0[0].size();
    const size_t n0 = x0.size(), n1 = x1.size();
    // Variables: u_0..u_{n0-1}, v_0..v_{n1-1}, tau, all >= 0;
    // lambda_i = tau + u_i, mu_j = tau + v_j.
    const size_t vars = n0 + n1 + 1;
    std::vector<std::vector<Rational>> A;
    std::vector<Rational> b;
    for (size_t cdim = 0; cdim < dim; ++cdim) {
        std::vector<Rational> row(vars, 0);
        Rational tauCoeff = 0;
        for (size_t i = 0; i < n0; ++i) {
            row[i] = x0[i][cdim];
            tauCoeff += x0[i][cdim];
        }
        for (size_t j = 0; j < n1; ++j) {
            row[n0 + j] = -x1[j][cdim];
            tauCoeff -= x1[j][cdim];
        }
        row[n0 + n1] = tauCoeff;
        A.push_back(std::move(row));
        b.emplace_back(0);
    }
    {
        std::vector<Rational> row(vars, 0);
        for (size_t i = 0; i < n0; ++i) row[i] = 1;
        row[n0 + n1] = static_cast<long>(n0);
        A.push_back(std::move(row));
        b.emplace_back(1);
    }
    {
        std::vector<Rational> row(vars, 0);
        for (size_t j = 0; j < n1; ++j) row[n0 + j] = 1;
        row[n0 + n1] = static_cast<long>(n1);
        A.push_back(std::move(row));
        b.emplace_back(1);
    }
    std::vector<Rational> c(vars, 0);
    c[n0 + n1] = 1;  // maximize tau
    auto optimum = simplexMax(std::move(A), std::move(b), std::move(c));
    if (!optimum) return true;  // even the closed hulls are disjoint
    return *optimum <= 0;
}

bool checkDefect(const Scene& scene, const std::vector<Seq>& strings) {
    std::vector<RationalPoint> simplex;
    for (const Seq& s : strings) simplex.push_back(scene.points.at(s));
    for (const auto& tuples : scene.removed)
        for (const auto& tuple : tuples)
            for (const auto& p : tuple)
                if (convMembership(p, simplex)) return true;
    return false;
}

Scene realize(const std::vector<std::set<std::vector<Seq>>>& coloring, uint32_t N,
              uint32_t H, uint32_t mMax, bool certify) {
    if (coloring.size() > mMax)
        throw PreconditionError("coloring has more levels than mMax");
    Scene scene;
    scene.N = N;
    scene.H = H;
    scene.mMax = mMax;
    scene.coloring.assign(mMax, {});
    scene.removed.assign(mMax, {});
    for (uint32_t bits = 0; bits < (1u << H); ++bits) {
        Seq s(H);
        for (uint32_t i = 0; i < H; ++i) s[i] = (bits >> (H - 1 - i)) & 1;
        scene.points[s] = pointOf(s, N);
    }
    for (uint32_t m = 0; m < coloring.size(); ++m) {
        for (const auto& subset : coloring[m]) {
            if (subset.size() != N)
                throw PreconditionError("coloring subset size differs from N");
            std::vector<Seq> sorted = subset;
            seqSetCanon(sorted);
            if (sorted.size() != N) throw PreconditionError("repeated string in a subset");
            for (const Seq& s : sorted)
                if (!scene.points.count(s))
                    throw PreconditionError("coloring string outside the scene");
            scene.coloring[m].insert(sorted);
            std::vector<RationalPoint> simplex;
            for (const Seq& s : sorted) simplex.push_back(scene.points.at(s));
            auto tuple = removedTuple(simplex, m);
            for (const auto& p : tuple)
                if (!relintMembership(p, simplex))
                    throw std::logic_error("removed point escaped the interior");
            scene.removed[m].push_back(std::move(tuple));
        }
    }
    if (certify) {
        ValidationReport position = verifyGeneralPosition(scene);
        if (!position.ok())
            throw std::logic_error("general position failed: " + position.violations.front());
        // Condition (2) on all pairs of distinct subsets used by the coloring.
        std::set<std::vector<Seq>> used;
        for (const auto& level : scene.coloring)
            for (const auto& subset : level) used.insert(subset);
        std::vector<std::vector<Seq>> all(used.begin(), used.end());
        for (size_t i = 0; i < all.size(); ++i)
            for (size_t j = i + 1; j < all.size(); ++j) {
                std::vector<RationalPoint> a, b;
                for (const Seq& s : all[i]) a.push_back(scene.points.at(s));
                for (const Seq& s : all[j]) b.push_back(scene.points.at(s));
                if (!relintDisjoint(a, b))
                    throw std::logic_error("interior disjointness failed");
            }
    }
    return scene;
}

ValidationReport defectSweep(const Scene& scene) {
    ValidationReport report;
    std::set<std::vector<Seq>> colored;
    for (const auto& level : scene.coloring)
        for (const auto& subset : level) colored.insert(subset);
    std::vector<Seq> strings;
    for (const auto& [s, p] : scene.points) strings.push_back(s);
    std::vector<size_t> idx(scene.N);
    std::function<void(size_t, size_t)> rec = [&](size_t pos, size_t from) {
        if (pos == scene.N) {
            std::vector<Seq> subset;
            for (size_t i : idx) subset.push_back(strings[i]);
            seqSetCanon(subset);
            const bool expected = colored.count(subset) > 0;
            const bool defect = checkDefect(scene, subset);
            if (expected != defect) {
                std::string msg = defect ? "spurious defect at" : "missing defect at";
                for (const Seq& s : subset) msg += " " + seqEncode(s);
                report.add(msg);
            }
            return;
        }
        for (size_t i = from; i < strings.size(); ++i) {
            idx[pos] = i;
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 0);
    return report;
}

}  // namespace coltree

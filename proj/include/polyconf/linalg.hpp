#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "base.hpp"

namespace polyconf {

using Rational = boost::multiprecision::cpp_rational;

/* Sparse row: sorted (column, value) pairs, no zeros. */
using SparseRow = std::vector<std::pair<int, Rational>>;

inline SparseRow row_axpy(const SparseRow& a, const Rational& c, const SparseRow& b) {
    // a + c*b
    SparseRow out;
    out.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.push_back({b[j].first, c * b[j].second});
            ++j;
        } else {
            Rational v = a[i].second + c * b[j].second;
            if (v != 0) out.push_back({a[i].first, v});
            ++i;
            ++j;
        }
    }
    return out;
}

/* Row echelon form by exact rational elimination.  Pivot columns are chosen
 * in the order given by col_rank (lower rank preferred); rows are processed
 * shortest-first to limit fill-in.  Output rows are fully reduced against
 * each other (RREF up to scaling).  pivot_of_col[c] = row index or -1. */
struct Echelon {
    std::vector<SparseRow> rows;      // echelon rows, pivot normalized to 1
    std::vector<int> pivot_col;       // per echelon row
    std::map<int, int> pivot_of_col;  // column -> echelon row
    int rank() const { return (int)rows.size(); }

    /* Reduce v against the echelon rows (in place). */
    void reduce(SparseRow& v) const {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& [c, x] : v) {
                auto it = pivot_of_col.find(c);
                if (it != pivot_of_col.end()) {
                    v = row_axpy(v, -x, rows[it->second]);
                    changed = true;
                    break;
                }
            }
        }
    }
};

inline Echelon echelonize(std::vector<SparseRow> rows,
                          const std::vector<int>* col_order = nullptr) {
    Echelon ech;
    std::sort(rows.begin(), rows.end(),
              [](const SparseRow& a, const SparseRow& b) { return a.size() < b.size(); });
    for (SparseRow& r : rows) {
        ech.reduce(r);
        if (r.empty()) continue;
        // pick pivot: smallest col_order rank among nonzeros
        int best = -1;
        long long best_key = 0;
        for (auto& [c, x] : r) {
            long long key = col_order ? (long long)(*col_order)[c] : (long long)c;
            if (best < 0 || key < best_key) {
                best = c;
                best_key = key;
            }
        }
        Rational pv;
        for (auto& [c, x] : r)
            if (c == best) pv = x;
        for (auto& [c, x] : r) x /= pv;
        // back-substitute into existing rows
        for (size_t k = 0; k < ech.rows.size(); ++k) {
            Rational coef = 0;
            for (auto& [c, x] : ech.rows[k])
                if (c == best) coef = x;
            if (coef != 0) ech.rows[k] = row_axpy(ech.rows[k], -coef, r);
        }
        ech.pivot_col.push_back(best);
        ech.pivot_of_col[best] = (int)ech.rows.size();
        ech.rows.push_back(std::move(r));
    }
    return ech;
}

inline int rank_rational(std::vector<SparseRow> rows) {
    return echelonize(std::move(rows)).rank();
}

/* Rank over GF(2); rows given as sorted column index lists. */
inline int rank_gf2(std::vector<std::vector<int>> rows) {
    std::map<int, std::vector<int>> pivots;  // pivot col -> row
    int rank = 0;
    for (auto& r : rows) {
        std::vector<int> cur = std::move(r);
        for (;;) {
            if (cur.empty()) break;
            int p = cur.front();
            auto it = pivots.find(p);
            if (it == pivots.end()) {
                pivots[p] = cur;
                ++rank;
                break;
            }
            // symmetric difference
            std::vector<int> nxt;
            std::set_symmetric_difference(cur.begin(), cur.end(), it->second.begin(),
                                          it->second.end(), std::back_inserter(nxt));
            cur = std::move(nxt);
        }
    }
    return rank;
}

}  // namespace polyconf

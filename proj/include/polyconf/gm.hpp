#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "base.hpp"
#include "ideal.hpp"
#include "linalg.hpp"

namespace polyconf {

/* ---- intersection lattice of the diagonal arrangement ---- */

/* Partition of {0..n-1}; block ids normalized by first occurrence, so the
 * vector itself is a canonical key. */
using SetPartition = std::vector<int>;

inline SetPartition normalize_partition(SetPartition p) {
    std::map<int, int> relabel;
    for (int& b : p) {
        auto [it, fresh] = relabel.insert({b, (int)relabel.size()});
        b = it->second;
    }
    return p;
}

inline int partition_blocks(const SetPartition& p) {
    return p.empty() ? 0 : 1 + *std::max_element(p.begin(), p.end());
}

inline SetPartition partition_join(const SetPartition& a, const SetPartition& b) {
    int n = (int)a.size();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](int x, int y) { parent[find(x)] = find(y); };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (a[i] == a[j] || b[i] == b[j]) unite(i, j);
    SetPartition out(n);
    for (int i = 0; i < n; ++i) out[i] = find(i);
    return normalize_partition(out);
}

inline bool partition_leq(const SetPartition& a, const SetPartition& b) {
    // a refines b
    int n = (int)a.size();
    std::map<int, int> img;
    for (int i = 0; i < n; ++i) {
        auto [it, fresh] = img.insert({a[i], b[i]});
        if (!fresh && it->second != b[i]) return false;
    }
    return true;
}

/* One subspace {all points of `block` equal}; block's color counts are a
 * minimal forbidden tuple of the ideal. */
struct DiagonalGenerator {
    std::vector<int> block;  // point indices into all_points(nvec)
};

inline std::vector<DiagonalGenerator> arrangement_generators(const IdealSpec& spec,
                                                             const ColorVector& nvec) {
    require_query_fits(spec, nvec);
    std::vector<Point> pts = all_points(nvec);
    std::vector<DiagonalGenerator> gens;
    for (auto& [t, w] : critical_set(spec)) {
        if (!tuple_leq(t, nvec.counts)) continue;
        // choose t_j points of each color j
        std::vector<std::vector<std::vector<int>>> per_color(spec.m);
        for (int c = 0; c < spec.m; ++c) {
            std::vector<int> idx;
            for (int i = 0; i < (int)pts.size(); ++i)
                if (pts[i].color == c + 1) idx.push_back(i);
            // all t[c]-subsets of idx
            std::vector<int> sel(t[c]);
            std::function<void(int, int)> rec = [&](int start, int k) {
                if (k == t[c]) {
                    per_color[c].push_back(sel);
                    return;
                }
                for (int i = start; i < (int)idx.size(); ++i) {
                    sel[k] = idx[i];
                    rec(i + 1, k + 1);
                }
            };
            rec(0, 0);
        }
        std::vector<int> cur;
        std::function<void(int)> mix = [&](int c) {
            if (c == spec.m) {
                gens.push_back({cur});
                return;
            }
            for (auto& part : per_color[c]) {
                cur.insert(cur.end(), part.begin(), part.end());
                mix(c + 1);
                cur.resize(cur.size() - part.size());
            }
        };
        mix(0);
    }
    return gens;
}

struct PartitionLattice {
    int n_points = 0;
    std::vector<SetPartition> elements;  // elements[0] = bottom (all singletons)
    std::vector<int> n_blocks;
};

inline PartitionLattice lattice_closure(int n_points, const std::vector<DiagonalGenerator>& gens,
                                        const Budget& budget = {}) {
    PartitionLattice lat;
    lat.n_points = n_points;
    std::set<SetPartition> seen;
    SetPartition bottom(n_points);
    std::iota(bottom.begin(), bottom.end(), 0);
    seen.insert(bottom);
    std::vector<SetPartition> work;
    for (const auto& g : gens) {
        SetPartition p = bottom;
        for (int i : g.block) p[i] = g.block[0];
        p = normalize_partition(p);
        if (seen.insert(p).second) work.push_back(p);
    }
    std::vector<SetPartition> all(work);
    while (!work.empty()) {
        std::vector<SetPartition> next;
        for (const auto& a : work) {
            for (const auto& b : all) {
                SetPartition j = partition_join(a, b);
                if (seen.insert(j).second) {
                    next.push_back(j);
                    if (seen.size() > budget.max_lattice_elements)
                        fail("BudgetExceeded",
                             "lattice closure passed " + std::to_string(seen.size()) + " elements");
                }
            }
        }
        all.insert(all.end(), next.begin(), next.end());
        work = std::move(next);
    }
    lat.elements.assign(seen.begin(), seen.end());
    // bottom first, then by decreasing block count (increasing codim), then lex
    std::sort(lat.elements.begin(), lat.elements.end(),
              [](const SetPartition& a, const SetPartition& b) {
                  int ba = partition_blocks(a), bb = partition_blocks(b);
                  if (ba != bb) return ba > bb;
                  return a < b;
              });
    for (const auto& e : lat.elements) lat.n_blocks.push_back(partition_blocks(e));
    return lat;
}

/* ---- order complex homology of open intervals ---- */

/* Reduced Betti numbers over Q (or over Z2) of the order complex of the
 * open interval (bottom, x); key -1 = reduced degree -1 (empty complex). */
inline std::map<int, int> interval_betti(const PartitionLattice& lat, const SetPartition& x,
                                         const Budget& budget = {}, bool mod2 = false) {
    std::vector<const SetPartition*> mid;
    for (const auto& e : lat.elements) {
        if (partition_blocks(e) == lat.n_points) continue;  // bottom
        if (e == x) continue;
        if (partition_leq(e, x)) mid.push_back(&e);
    }
    int n = (int)mid.size();
    std::map<int, int> out;
    if (n == 0) {
        out[-1] = 1;
        return out;
    }
    // strict order among mid elements (indices sorted by block count => i<j possible only i before j)
    std::vector<std::vector<int>> succ(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && partition_blocks(*mid[i]) > partition_blocks(*mid[j]) &&
                partition_leq(*mid[i], *mid[j]))
                succ[i].push_back(j);
    // enumerate all chains grouped by length
    std::vector<std::map<std::vector<int>, int>> simplices;  // [k] : k-simplices
    std::size_t total = 0;
    std::vector<int> chain;
    std::function<void(int)> dfs = [&](int last) {
        int k = (int)chain.size() - 1;
        if ((int)simplices.size() <= k) simplices.emplace_back();
        simplices[k].insert({chain, (int)simplices[k].size()});
        if (++total > budget.max_interval_simplices)
            fail("BudgetExceeded", "interval order complex too large");
        for (int nxt : succ[last]) {
            chain.push_back(nxt);
            dfs(nxt);
            chain.pop_back();
        }
    };
    for (int i = 0; i < n; ++i) {
        chain = {i};
        dfs(i);
    }
    int dim = (int)simplices.size() - 1;
    // reduced boundary ranks; rk[k] = rank of d_k : C_k -> C_{k-1}, C_{-1} = Q
    std::vector<int> rk(dim + 2, 0);
    for (int k = 0; k <= dim; ++k) {
        std::vector<SparseRow> rows;
        std::vector<std::vector<int>> rows2;
        rows.reserve(simplices[k].size());
        for (const auto& [s, id] : simplices[k]) {
            SparseRow r;
            std::vector<int> r2;
            if (k == 0) {
                r.push_back({0, Rational(1)});
                r2.push_back(0);
            } else {
                std::vector<int> face;
                for (int drop = 0; drop <= k; ++drop) {
                    face.clear();
                    for (int i = 0; i <= k; ++i)
                        if (i != drop) face.push_back(s[i]);
                    int col = simplices[k - 1].at(face);
                    r.push_back({col, Rational(drop % 2 == 0 ? 1 : -1)});
                    r2.push_back(col);
                }
                std::sort(r.begin(), r.end());
                std::sort(r2.begin(), r2.end());
            }
            rows.push_back(std::move(r));
            rows2.push_back(std::move(r2));
        }
        rk[k] = mod2 ? rank_gf2(std::move(rows2)) : rank_rational(std::move(rows));
    }
    auto count = [&](int k) -> long long {
        if (k == -1) return 1;
        if (k < -1 || k > dim) return 0;
        return (long long)simplices[k].size();
    };
    for (int k = -1; k <= dim; ++k) {
        long long b = count(k) - rk[k + 1] - (k >= 0 ? rk[k] : 0);
        if (b != 0) out[k] = (int)b;
    }
    return out;
}

/* Mobius function mu(bottom, x) on the closure family, by direct recursion. */
inline std::vector<long long> mobius_from_bottom(const PartitionLattice& lat) {
    int N = (int)lat.elements.size();
    std::vector<long long> mu(N, 0);
    // elements sorted with bottom first and nondecreasing codim
    for (int i = 0; i < N; ++i) {
        if (i == 0) {
            mu[0] = 1;
            continue;
        }
        long long s = 0;
        for (int j = 0; j < i; ++j)
            if (partition_leq(lat.elements[j], lat.elements[i])) s += mu[j];
        mu[i] = -s;
    }
    return mu;
}

/* Philip Hall: reduced Euler characteristic of each open interval equals
 * mu(bottom, x).  Returns the first offending element, if any. */
inline std::optional<SetPartition> hall_check(const PartitionLattice& lat,
                                              const Budget& budget = {}) {
    std::vector<long long> mu = mobius_from_bottom(lat);
    for (size_t i = 1; i < lat.elements.size(); ++i) {
        auto bet = interval_betti(lat, lat.elements[i], budget);
        // reduced chi; the (-1)-degree term carries sign (-1)^{-1} = -1
        long long chi = 0;
        for (auto& [k, b] : bet) chi += (((k % 2) + 2) % 2 == 0 ? b : -b);
        if (chi != mu[i]) return lat.elements[i];
    }
    return std::nullopt;
}

/* ---- the Goresky-MacPherson rank formula ---- */

struct BettiTable {
    std::map<int, long long> ranks;
    std::string method;
    long long rank(int degree) const {
        auto it = ranks.find(degree);
        return it == ranks.end() ? 0 : it->second;
    }
    long long total() const {
        long long s = 0;
        for (auto& [d, r] : ranks) s += r;
        return s;
    }
    bool operator==(const BettiTable& o) const { return ranks == o.ranks; }
};

inline BettiTable gm_betti(const IdealSpec& spec, const ColorVector& nvec, int d,
                           const Budget& budget = {}, bool mod2 = false,
                           unsigned n_threads = 0) {
    require_query_fits(spec, nvec);
    BettiTable table;
    table.method = "gm";
    // a forbidden single point empties the space
    for (auto& [t, w] : critical_set(spec))
        if (w == 1 && tuple_leq(t, nvec.counts)) return table;
    std::vector<DiagonalGenerator> gens = arrangement_generators(spec, nvec);
    int N = nvec.total();
    if (N == 0 || gens.empty()) {
        table.ranks[0] = 1;
        return table;
    }
    PartitionLattice lat = lattice_closure(N, gens, budget);
    int M = (int)lat.elements.size();
    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::map<int, int>> per_elem(M);
    std::vector<std::future<void>> futs;
    std::atomic<int> cursor{1};  // skip bottom
    for (unsigned t = 0; t < n_threads; ++t)
        futs.push_back(std::async(std::launch::async, [&]() {
            for (;;) {
                int i = cursor.fetch_add(1);
                if (i >= M) return;
                per_elem[i] = interval_betti(lat, lat.elements[i], budget, mod2);
            }
        }));
    for (auto& f : futs) f.get();
    table.ranks[0] = 1;
    for (int i = 1; i < M; ++i) {
        int codim = d * (N - lat.n_blocks[i]);
        for (auto& [k, b] : per_elem[i]) {
            int deg = codim - 2 - k;
            if (deg >= 0 && b != 0) table.ranks[deg] += b;
        }
    }
    for (auto it = table.ranks.begin(); it != table.ranks.end();)
        it = it->second == 0 ? table.ranks.erase(it) : std::next(it);
    return table;
}

}  // namespace polyconf

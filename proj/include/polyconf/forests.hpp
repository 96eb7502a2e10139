#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "base.hpp"
#include "generators.hpp"
#include "ideal.hpp"

namespace polyconf {

/* ---- admissible forests ---- */

enum class VKind { rect, circle, diamond, star };

/* An oriented decorated forest representing a cochain.  Vertex ids are the
 * positions in `vertices`; `order` lists every rectangle and every edge
 * exactly once (the coorientation concatenation order); edges are directed
 * from -> to.  `coeff` is the integer coefficient riding along. */
struct Forest {
    struct Vertex {
        VKind kind = VKind::circle;
        std::vector<Point> elements;
    };
    struct Edge {
        int from = 0, to = 0;
    };
    struct Item {
        bool is_edge = false;
        int a = 0, b = 0;  // rect: vertex id in a; edge: the endpoint pair {a,b}
    };
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::vector<Item> order;
    long long coeff = 1;

    int find_vertex_of(const Point& p) const {
        for (int v = 0; v < (int)vertices.size(); ++v)
            for (const Point& q : vertices[v].elements)
                if (q == p) return v;
        return -1;
    }
    std::optional<Edge> edge_between(int u, int v) const {
        for (const Edge& e : edges)
            if ((e.from == u && e.to == v) || (e.from == v && e.to == u)) return e;
        return std::nullopt;
    }
    std::vector<int> neighbors(int v) const {
        std::vector<int> out;
        for (const Edge& e : edges) {
            if (e.from == v) out.push_back(e.to);
            if (e.to == v) out.push_back(e.from);
        }
        return out;
    }
    Point min_point_of(int v) const {
        return *std::min_element(vertices[v].elements.begin(), vertices[v].elements.end());
    }
    bool has_diamond_attached(int v) const {
        for (int u : neighbors(v))
            if (vertices[u].kind == VKind::diamond) return true;
        return false;
    }
};

/* Codimension of the associated chain. */
inline int forest_degree(const Forest& f, int d) {
    int deg = (int)f.edges.size() * (d - 1);
    for (int v = 0; v < (int)f.vertices.size(); ++v)
        if (f.vertices[v].kind == VKind::rect) {
            deg += ((int)f.vertices[v].elements.size() - 1) * d;
            if (f.has_diamond_attached(v)) deg += 1;
        }
    return deg;
}

/* Koszul grade of an orientation item (its covector count). */
inline int item_grade(const Forest& f, const Forest::Item& it, int d) {
    if (it.is_edge) return d - 1;
    return ((int)f.vertices[it.a].elements.size() - 1) * d +
           (f.has_diamond_attached(it.a) ? 1 : 0);
}

inline bool forest_acyclic(const Forest& f) {
    std::vector<int> parent(f.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : f.edges) {
        int a = find(e.from), b = find(e.to);
        if (a == b) return false;
        parent[a] = b;
    }
    return true;
}

/* Connected component id per vertex. */
inline std::vector<int> forest_components(const Forest& f) {
    std::vector<int> parent(f.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : f.edges) parent[find(e.from)] = find(e.to);
    std::vector<int> comp(f.vertices.size());
    for (size_t v = 0; v < f.vertices.size(); ++v) comp[v] = find((int)v);
    return comp;
}

/* ---- canonical form ---- */

/* Canonical form: rectangle elements sorted, edges directed rectangle->leaf
 * and min-rect->max-rect (d>1 only; d=1 keeps directions), vertices
 * relabeled by minimal contained point, orientation order = rectangles then
 * edges.  The Koszul/element/flip signs multiply into coeff. */
inline Forest canonicalize(const Forest& input, int d) {
    Forest f = input;
    long long sign = 1;
    // 1. sort rectangle elements (rule 1(b))
    for (auto& v : f.vertices) {
        if (v.kind != VKind::rect) continue;
        int inversions = 0;
        for (size_t i = 0; i < v.elements.size(); ++i)
            for (size_t j = i + 1; j < v.elements.size(); ++j)
                if (v.elements[j] < v.elements[i]) ++inversions;
        if (inversions % 2 == 1 && d % 2 == 1) sign = -sign;
        std::sort(v.elements.begin(), v.elements.end());
    }
    // 2. edge directions (rule 1(c)); a flip costs (-1)^d
    if (d >= 2) {
        for (auto& e : f.edges) {
            const auto& kf = f.vertices[e.from].kind;
            const auto& kt = f.vertices[e.to].kind;
            bool flip = false;
            if (kf != VKind::rect && kt == VKind::rect)
                flip = true;  // want rect -> leaf
            else if (kf == VKind::rect && kt == VKind::rect)
                flip = f.min_point_of(e.to) < f.min_point_of(e.from);
            if (flip) {
                std::swap(e.from, e.to);
                if (d % 2 == 1) sign = -sign;
            }
        }
    }
    // 3. relabel vertices by minimal contained point
    std::vector<int> perm(f.vertices.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(),
              [&](int a, int b) { return f.min_point_of(a) < f.min_point_of(b); });
    std::vector<int> newid(f.vertices.size());
    for (size_t i = 0; i < perm.size(); ++i) newid[perm[i]] = (int)i;
    Forest g;
    g.coeff = f.coeff;
    g.vertices.resize(f.vertices.size());
    for (size_t v = 0; v < f.vertices.size(); ++v) g.vertices[newid[v]] = f.vertices[v];
    for (const auto& e : f.edges) g.edges.push_back({newid[e.from], newid[e.to]});
    std::sort(g.edges.begin(), g.edges.end(), [](const Forest::Edge& a, const Forest::Edge& b) {
        return std::pair(std::min(a.from, a.to), std::max(a.from, a.to)) <
               std::pair(std::min(b.from, b.to), std::max(b.from, b.to));
    });
    for (const auto& it : f.order) {
        Forest::Item jt = it;
        jt.a = newid[it.a];
        if (it.is_edge) {
            jt.b = newid[it.b];
            if (jt.b < jt.a) std::swap(jt.a, jt.b);
        }
        g.order.push_back(jt);
    }
    // 4. sort the orientation order: rects by id, then edges by endpoint pair
    auto key = [](const Forest::Item& it) {
        return std::tuple(it.is_edge ? 1 : 0, it.a, it.b);
    };
    // bubble sort accumulating Koszul signs
    for (size_t i = 0; i + 1 < g.order.size(); ++i)
        for (size_t j = 0; j + 1 < g.order.size() - i; ++j)
            if (key(g.order[j + 1]) < key(g.order[j])) {
                int ga = item_grade(g, g.order[j], d), gb = item_grade(g, g.order[j + 1], d);
                if ((ga * gb) % 2 == 1) sign = -sign;
                std::swap(g.order[j], g.order[j + 1]);
            }
    g.coeff *= sign;
    return g;
}

/* Key identifying a canonical forest (coefficient excluded). */
inline std::string forest_key(const Forest& f) {
    std::ostringstream os;
    for (const auto& v : f.vertices) {
        switch (v.kind) {
            case VKind::rect: os << 'R'; break;
            case VKind::circle: os << 'C'; break;
            case VKind::diamond: os << 'D'; break;
            case VKind::star: os << 'S'; break;
        }
        for (const Point& p : v.elements) os << p.color << '.' << p.index << ',';
        os << '|';
    }
    os << '/';
    for (const auto& e : f.edges) os << e.from << '>' << e.to << ';';
    os << '/';
    for (const auto& it : f.order) {
        if (it.is_edge)
            os << 'e' << it.a << '-' << it.b << ';';
        else
            os << 'r' << it.a << ';';
    }
    return os.str();
}

inline std::string to_string(const Forest& f) {
    std::ostringstream os;
    os << f.coeff << "*" << forest_key(f);
    return os.str();
}

/* Integer combination of canonical admissible forests of one degree. */
struct Cochain {
    std::map<std::string, std::pair<Forest, long long>> terms;

    void add(const Forest& canon) {
        if (canon.coeff == 0) return;
        std::string key = forest_key(canon);
        auto it = terms.find(key);
        if (it == terms.end()) {
            terms.insert({key, {canon, canon.coeff}});
            return;
        }
        it->second.second += canon.coeff;
        if (it->second.second == 0) terms.erase(it);
    }
    void add_scaled(const Cochain& other, long long c) {
        for (auto& [k, fv] : other.terms) {
            Forest f = fv.first;
            f.coeff = fv.second * c;
            add(f);
        }
    }
    bool empty() const { return terms.empty(); }
    bool operator==(const Cochain& o) const {
        if (terms.size() != o.terms.size()) return false;
        for (auto& [k, fv] : terms) {
            auto it = o.terms.find(k);
            if (it == o.terms.end() || it->second.second != fv.second) return false;
        }
        return true;
    }
};

/* ---- admissibility ---- */

struct ForestContext {
    IdealSpec spec;
    ColorVector nvec;
    Regime regime = Regime::decreasing;
    int d = 2;
};

namespace detail {

inline Tuple content_counts(const IdealSpec& spec, const std::vector<Point>& pts) {
    Tuple t(spec.m, 0);
    for (const Point& p : pts) t[p.color - 1]++;
    return t;
}

/* decreasing regime: contents + e_k critical for some k >= every attached
 * circle color, with no contents above color k. */
inline bool rect_pattern_decreasing(const IdealSpec& spec, const Tuple& contents,
                                    int max_circle_color, int max_content_color) {
    for (int k = std::max(max_circle_color, max_content_color); k <= spec.m; ++k) {
        bool zeros_ok = true;
        for (int j = k; j < spec.m; ++j)
            if (contents[j] > 0 && j + 1 > k) zeros_ok = false;
        if (!zeros_ok) continue;
        Tuple probe = contents;
        probe[k - 1]++;
        if (!spec.in_box(probe)) continue;
        if (is_critical(spec, probe)) return true;
    }
    return false;
}

}  // namespace detail

/* Admissibility per regime.  The relaxed bicolored case with (1,1) in D'_I
 * is the paper's open case and is refused. */
inline Diagnosis validate_forest(const Forest& f, const ForestContext& ctx) {
    const IdealSpec& spec = ctx.spec;
    require_query_fits(spec, ctx.nvec);
    if (ctx.regime == Regime::bicolored && spec.relax_small && in_dprime(spec, {1, 1}))
        fail("UnsupportedCase_11_Dprime",
             "relaxed bicolored forests with (1,1) in D'_I have no known model");

    // every point exactly once
    std::vector<Point> pts;
    for (const auto& v : f.vertices) {
        if (v.elements.empty()) return {false, "empty vertex", std::nullopt};
        if (v.kind != VKind::rect && v.elements.size() != 1)
            return {false, "leaf vertex with several elements", std::nullopt};
        if (v.kind == VKind::star) return {false, "star vertices are transient only", std::nullopt};
        if (v.kind == VKind::diamond && ctx.regime != Regime::bicolored)
            return {false, "diamonds exist only in the bicolored model", std::nullopt};
        pts.insert(pts.end(), v.elements.begin(), v.elements.end());
    }
    std::sort(pts.begin(), pts.end());
    if (pts != all_points(ctx.nvec))
        return {false, "vertices do not partition the point set", std::nullopt};

    if (!forest_acyclic(f)) return {false, "forest has a cycle", std::nullopt};
    for (const auto& e : f.edges) {
        if (e.from < 0 || e.to < 0 || e.from >= (int)f.vertices.size() ||
            e.to >= (int)f.vertices.size() || e.from == e.to)
            return {false, "edge endpoints out of range", std::nullopt};
    }
    // orientation order covers rects and edges exactly once
    {
        std::multiset<std::tuple<int, int, int>> want, got;
        for (int v = 0; v < (int)f.vertices.size(); ++v)
            if (f.vertices[v].kind == VKind::rect) want.insert({0, v, 0});
        for (const auto& e : f.edges)
            want.insert({1, std::min(e.from, e.to), std::max(e.from, e.to)});
        for (const auto& it : f.order) {
            if (it.is_edge)
                got.insert({1, std::min(it.a, it.b), std::max(it.a, it.b)});
            else
                got.insert({0, it.a, 0});
        }
        if (want != got)
            return {false, "orientation order must list every rectangle and edge once",
                    std::nullopt};
    }

    for (int v = 0; v < (int)f.vertices.size(); ++v) {
        const auto& vert = f.vertices[v];
        auto nbrs = f.neighbors(v);
        if (vert.kind == VKind::circle) {
            if (nbrs.size() > 1) return {false, "circle attached more than once", std::nullopt};
            if (nbrs.size() == 1 && f.vertices[nbrs[0]].kind != VKind::rect)
                return {false, "circle attached to a non-rectangle", std::nullopt};
        }
        if (vert.kind == VKind::diamond) {
            if (nbrs.size() != 1 || f.vertices[nbrs[0]].kind != VKind::rect)
                return {false, "diamond must attach to exactly one rectangle", std::nullopt};
        }
        if (vert.kind != VKind::rect) continue;

        int circles = 0, diamonds = 0;
        int max_circle_color = 0;
        int circ_x = 0, circ_y = 0, dia_x = 0, dia_y = 0;
        for (int u : nbrs) {
            if (f.vertices[u].kind == VKind::circle) {
                ++circles;
                Point p = f.vertices[u].elements[0];
                max_circle_color = std::max(max_circle_color, p.color);
                (p.color == 1 ? circ_x : circ_y)++;
            }
            if (f.vertices[u].kind == VKind::diamond) {
                ++diamonds;
                Point p = f.vertices[u].elements[0];
                (p.color == 1 ? dia_x : dia_y)++;
            }
        }
        if (!spec.relax_small && circles == 0)
            return {false, "rectangle without an attached circle", std::nullopt};

        Tuple contents = detail::content_counts(spec, vert.elements);
        if (ctx.regime == Regime::decreasing) {
            int max_content_color = 0;
            for (const Point& p : vert.elements)
                max_content_color = std::max(max_content_color, p.color);
            if (!detail::rect_pattern_decreasing(spec, contents, max_circle_color,
                                                 max_content_color))
                return {false, "rectangle contents match no critical tuple", std::nullopt};
        } else {
            int n = contents[0], m = contents[1];
            bool ok = false;
            if (diamonds == 0 && in_cprime(spec, contents)) ok = true;  // case 1
            if (!ok && diamonds > 0 && in_dprime(spec, {n + 1, m + 1})) {  // case 2
                bool split_a = circ_y == circles && dia_x == diamonds;
                bool split_b = circ_x == circles && dia_y == diamonds;
                if (split_a || split_b) ok = true;
            }
            if (!ok && diamonds == 0 && m == 0 && in_dprime(spec, {n + 1, 0}) &&
                circ_y == 0)  // case 3
                ok = true;
            if (!ok && diamonds == 0 && n == 0 && in_dprime(spec, {0, m + 1}) &&
                circ_x == 0)  // case 4
                ok = true;
            if (!ok) return {false, "rectangle fits no admissible bicolored case", std::nullopt};
        }
    }
    return {};
}

}  // namespace polyconf

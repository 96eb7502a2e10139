#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "base.hpp"
#include "gm.hpp"
#include "ideal.hpp"

namespace polyconf {

/* ---- generator expressions ---- */

/* Abstract syntax of a homology generator.  Curly children are usually
 * points; a trailing curly child makes the product-of-spheres class, and the
 * relation chains also place brackets inside curlies. */
struct GenExpr;
using GenPtr = std::shared_ptr<const GenExpr>;

struct GenExpr {
    enum class Kind { point, curly, bracket, product };
    Kind kind = Kind::point;
    Point pt{};
    std::vector<GenPtr> kids;
};

inline GenPtr mk_point(Point p) {
    auto e = std::make_shared<GenExpr>();
    e->kind = GenExpr::Kind::point;
    e->pt = p;
    return e;
}
inline GenPtr mk_curly(std::vector<GenPtr> kids) {
    auto e = std::make_shared<GenExpr>();
    e->kind = GenExpr::Kind::curly;
    e->kids = std::move(kids);
    return e;
}
inline GenPtr mk_bracket(GenPtr a, GenPtr b) {
    auto e = std::make_shared<GenExpr>();
    e->kind = GenExpr::Kind::bracket;
    e->kids = {std::move(a), std::move(b)};
    return e;
}
inline GenPtr mk_product(std::vector<GenPtr> kids) {
    auto e = std::make_shared<GenExpr>();
    e->kind = GenExpr::Kind::product;
    e->kids = std::move(kids);
    return e;
}

inline void print_expr(const GenExpr& e, std::ostream& os) {
    switch (e.kind) {
        case GenExpr::Kind::point:
            os << to_string(e.pt);
            break;
        case GenExpr::Kind::curly: {
            os << '{';
            for (size_t i = 0; i < e.kids.size(); ++i) {
                if (i) os << ',';
                print_expr(*e.kids[i], os);
            }
            os << '}';
            break;
        }
        case GenExpr::Kind::bracket: {
            os << '[';
            print_expr(*e.kids[0], os);
            os << ',';
            print_expr(*e.kids[1], os);
            os << ']';
            break;
        }
        case GenExpr::Kind::product: {
            if (e.kids.empty()) {
                os << '1';
                break;
            }
            for (size_t i = 0; i < e.kids.size(); ++i) {
                if (i) os << '*';
                print_expr(*e.kids[i], os);
            }
            break;
        }
    }
}

inline std::string to_string(const GenExpr& e) {
    std::ostringstream os;
    print_expr(e, os);
    return os.str();
}
inline std::string to_string(const GenPtr& e) { return to_string(*e); }

inline void collect_points(const GenExpr& e, std::vector<Point>& out) {
    if (e.kind == GenExpr::Kind::point)
        out.push_back(e.pt);
    else
        for (const auto& k : e.kids) collect_points(*k, out);
}
inline std::vector<Point> expr_points(const GenExpr& e) {
    std::vector<Point> pts;
    collect_points(e, pts);
    return pts;
}
inline int expr_weight(const GenExpr& e) {
    if (e.kind == GenExpr::Kind::point) return 1;
    int w = 0;
    for (const auto& k : e.kids) w += expr_weight(*k);
    return w;
}

/* Homological degree.  A compound child of a curly behaves like a point slot
 * whose sphere baseline (w-1)d is replaced by the child's own degree. */
inline int degree(const GenExpr& e, int d) {
    if (d < 1) fail("WrongArity", "dimension must be >= 1");
    switch (e.kind) {
        case GenExpr::Kind::point:
            return 0;
        case GenExpr::Kind::curly: {
            int w = expr_weight(e);
            int deg = (w - 1) * d - 1;
            for (const auto& k : e.kids)
                if (k->kind != GenExpr::Kind::point)
                    deg += degree(*k, d) - (expr_weight(*k) - 1) * d;
            return deg;
        }
        case GenExpr::Kind::bracket: {
            if (d == 1) fail("BracketInDimOne", "Lie brackets are trivial for d=1");
            return degree(*e.kids[0], d) + degree(*e.kids[1], d) + d - 1;
        }
        case GenExpr::Kind::product: {
            int s = 0;
            for (const auto& k : e.kids) s += degree(*k, d);
            return s;
        }
    }
    return 0;
}
inline int degree(const GenPtr& e, int d) { return degree(*e, d); }

/* ---- text grammar ---- */

namespace detail {

struct ExprParser {
    const std::string& s;
    size_t pos = 0;
    explicit ExprParser(const std::string& str) : s(str) {}

    void skip() {
        while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail("ParseError", std::string("expected '") + c + "' at offset " +
                                            std::to_string(pos) + " in \"" + s + "\"");
    }
    int integer() {
        skip();
        size_t start = pos;
        while (pos < s.size() && std::isdigit((unsigned char)s[pos])) ++pos;
        if (start == pos) fail("ParseError", "expected integer at offset " + std::to_string(pos));
        return std::stoi(s.substr(start, pos - start));
    }

    GenPtr term() {
        skip();
        if (pos >= s.size()) fail("ParseError", "unexpected end of expression");
        char c = s[pos];
        if (c == 'x') {
            ++pos;
            expect('[');
            int color = integer();
            expect(',');
            int index = integer();
            expect(']');
            return mk_point({color, index});
        }
        if (c == '{') {
            ++pos;
            std::vector<GenPtr> kids;
            kids.push_back(product());
            while (eat(',')) kids.push_back(product());
            expect('}');
            return mk_curly(std::move(kids));
        }
        if (c == '[') {
            ++pos;
            GenPtr a = product();
            expect(',');
            GenPtr b = product();
            expect(']');
            return mk_bracket(a, b);
        }
        if (c == '1') {
            ++pos;
            return mk_product({});
        }
        fail("ParseError", std::string("unexpected character '") + c + "' at offset " +
                               std::to_string(pos));
    }

    GenPtr product() {
        std::vector<GenPtr> kids{term()};
        while (eat('*')) kids.push_back(term());
        if (kids.size() == 1) return kids[0];
        // flatten nested products
        std::vector<GenPtr> flat;
        for (auto& k : kids) {
            if (k->kind == GenExpr::Kind::product)
                flat.insert(flat.end(), k->kids.begin(), k->kids.end());
            else
                flat.push_back(k);
        }
        return mk_product(std::move(flat));
    }
};

}  // namespace detail

inline GenPtr parse_expr(const std::string& s) {
    detail::ExprParser p(s);
    GenPtr e = p.product();
    p.skip();
    if (p.pos != s.size()) fail("ParseError", "trailing input at offset " + std::to_string(p.pos));
    return e;
}

/* ---- regimes ---- */

enum class Regime { decreasing, bicolored };

inline Regime choose_regime(const IdealSpec& spec) {
    if (is_decreasing(spec)) return Regime::decreasing;
    if (spec.m == 2) {
        if (is_rectangular(spec))
            fail("RectangularIdeal",
                 "rectangular bicolored ideals decompose into products of no-k-equal spaces");
        return Regime::bicolored;
    }
    fail("NotDecreasingNotBicolored",
         "no basis theorem covers non-decreasing ideals with m >= 3");
}

/* ---- block normal form ---- */

/* One B-block: a critical curly or a D_I product-of-spheres class plus the
 * appended singletons, all in canonical writing. */
struct Block {
    bool nested = false;
    std::vector<Point> curly;            // type 1 contents (sorted)
    std::vector<Point> outer, inner;     // type 2 contents (sorted)
    bool swapped = false;                // inner holds color 1
    std::vector<Point> appended;         // sorted by (color, index)

    std::vector<Point> all_points() const {
        std::vector<Point> pts = nested ? outer : curly;
        if (nested) pts.insert(pts.end(), inner.begin(), inner.end());
        pts.insert(pts.end(), appended.begin(), appended.end());
        return pts;
    }
    /* color counts of the class core (curly or nested contents) */
    Tuple core_counts(int m) const {
        Tuple t(m, 0);
        for (const Point& p : nested ? outer : curly) t[p.color - 1]++;
        if (nested)
            for (const Point& p : inner) t[p.color - 1]++;
        return t;
    }
};

inline GenPtr block_to_expr(const Block& b) {
    GenPtr core;
    if (!b.nested) {
        std::vector<GenPtr> kids;
        for (const Point& p : b.curly) kids.push_back(mk_point(p));
        core = mk_curly(std::move(kids));
    } else {
        std::vector<GenPtr> inner_kids;
        for (const Point& p : b.inner) inner_kids.push_back(mk_point(p));
        std::vector<GenPtr> kids;
        for (const Point& p : b.outer) kids.push_back(mk_point(p));
        kids.push_back(mk_curly(std::move(inner_kids)));
        core = mk_curly(std::move(kids));
    }
    for (const Point& p : b.appended) core = mk_bracket(core, mk_point(p));
    return core;
}

namespace detail {

inline bool sorted_strict(const std::vector<Point>& v) {
    return std::is_sorted(v.begin(), v.end()) &&
           std::adjacent_find(v.begin(), v.end()) == v.end();
}

/* Recognize a block spine: left-nested brackets over a curly core with
 * appended point leaves. */
inline std::optional<Block> expr_to_block(const GenExpr& e, std::string* why) {
    const GenExpr* cur = &e;
    std::vector<Point> appended;
    while (cur->kind == GenExpr::Kind::bracket) {
        if (cur->kids[1]->kind != GenExpr::Kind::point) {
            if (why) *why = "block spine has a non-point appended leaf";
            return std::nullopt;
        }
        appended.push_back(cur->kids[1]->pt);
        cur = cur->kids[0].get();
    }
    if (cur->kind != GenExpr::Kind::curly) {
        if (why) *why = "block core is not a curly bracket";
        return std::nullopt;
    }
    std::reverse(appended.begin(), appended.end());
    Block b;
    b.appended = std::move(appended);
    const GenExpr& core = *cur;
    size_t ncurly = 0;
    for (const auto& k : core.kids)
        if (k->kind == GenExpr::Kind::curly) ++ncurly;
    if (ncurly == 0) {
        for (const auto& k : core.kids) {
            if (k->kind != GenExpr::Kind::point) {
                if (why) *why = "curly holds a non-point child";
                return std::nullopt;
            }
            b.curly.push_back(k->pt);
        }
        return b;
    }
    if (ncurly == 1 && core.kids.back()->kind == GenExpr::Kind::curly) {
        b.nested = true;
        for (size_t i = 0; i + 1 < core.kids.size(); ++i) {
            if (core.kids[i]->kind != GenExpr::Kind::point) {
                if (why) *why = "nested class outer part holds a non-point child";
                return std::nullopt;
            }
            b.outer.push_back(core.kids[i]->pt);
        }
        for (const auto& k : core.kids.back()->kids) {
            if (k->kind != GenExpr::Kind::point) {
                if (why) *why = "nested class inner part holds a non-point child";
                return std::nullopt;
            }
            b.inner.push_back(k->pt);
        }
        if (b.outer.empty() || b.inner.empty()) {
            if (why) *why = "nested class needs points on both levels";
            return std::nullopt;
        }
        int oc = b.outer.front().color, ic = b.inner.front().color;
        for (const Point& p : b.outer)
            if (p.color != oc) {
                if (why) *why = "nested class outer part mixes colors";
                return std::nullopt;
            }
        for (const Point& p : b.inner)
            if (p.color != ic) {
                if (why) *why = "nested class inner part mixes colors";
                return std::nullopt;
            }
        if (oc == ic || oc > 2 || ic > 2) {
            if (why) *why = "nested class must split the two colors";
            return std::nullopt;
        }
        b.swapped = (oc == 2);
        return b;
    }
    if (why) *why = "curly mixes points and several compound children";
    return std::nullopt;
}

inline int max_index_of_color(const std::vector<Point>& pts, int color) {
    int best = 0;  // indices are 1-based; 0 = none
    for (const Point& p : pts)
        if (p.color == color) best = std::max(best, p.index);
    return best;
}

}  // namespace detail

/* ---- basis-form validation ---- */

struct GenDiagnosis {
    bool ok = true;
    std::string reason;
};

namespace detail {

/* Side conditions comparing the class core against appended/following points.
 * If cmp_pts is the appended list (d>1) or the following A-run (d=1), the
 * color-c condition reads: the greatest color-c core index exceeds every
 * color-c index among cmp_pts; it holds vacuously when cmp_pts has no color-c
 * points and fails when the core has none but cmp_pts does. */
inline bool core_dominates(const std::vector<Point>& core, const std::vector<Point>& cmp_pts,
                           int color) {
    int app = max_index_of_color(cmp_pts, color);
    if (app == 0) return true;
    int own = max_index_of_color(core, color);
    return own > app;
}

inline GenDiagnosis check_block(const IdealSpec& spec, Regime regime, const Block& b,
                                const std::vector<Point>& following) {
    if (!b.nested) {
        if (!sorted_strict(b.curly)) return {false, "curly contents not in canonical order"};
        if (!sorted_strict(b.appended)) return {false, "appended singletons not in canonical order"};
        Tuple counts = b.core_counts(spec.m);
        if (!is_critical(spec, counts))
            return {false, "curly color counts are not a critical tuple"};
        int k = 0;
        for (int c = spec.m; c >= 1; --c)
            if (counts[c - 1] > 0) {
                k = c;
                break;
            }
        if (regime == Regime::decreasing) {
            for (const Point& p : following)
                if (p.color > k) return {false, "appended color exceeds the block's top color"};
            if (!core_dominates(b.curly, following, k))
                return {false, "top-color maximum must stay inside the curly"};
        } else {
            int n = counts[0], m = counts[1];
            bool cx = in_ideal_vac(spec, {n + 1, m - 2});
            bool cy = in_ideal_vac(spec, {n - 1, m + 1});
            bool okx = core_dominates(b.curly, following, 1);
            bool oky = core_dominates(b.curly, following, 2);
            if (cx && !okx) return {false, "greatest x index must stay inside the curly"};
            if (cy && !oky) return {false, "greatest y index must stay inside the curly"};
            if (!cx && !cy && !okx && !oky)
                return {false, "one of the greatest x/y indices must stay inside the curly"};
        }
        return {};
    }
    // nested product-of-spheres block
    if (spec.m != 2 || regime != Regime::bicolored)
        return {false, "nested classes exist only in the bicolored regime"};
    if (!sorted_strict(b.outer) || !sorted_strict(b.inner) || !sorted_strict(b.appended))
        return {false, "nested block not in canonical order"};
    Tuple counts = b.core_counts(2);
    int n = counts[0], m = counts[1];
    if (!spec.in_box({n, m}) || n < 1 || m < 1)
        return {false, "nested class counts out of range"};
    Tuple dpair{n - 1, m - 1};
    bool in_d = false;
    for (auto& [t, w] : d_set(spec))
        if (t == dpair) in_d = true;
    if (!in_d) return {false, "nested class counts minus one are not in D_I"};
    bool axis_x = in_ideal(spec, {n, 0});
    bool axis_y = in_ideal(spec, {0, m});
    if (!axis_x && !axis_y) return {false, "nested class vanishes: both axis tuples forbidden"};
    bool want_swapped = !axis_x;
    if (b.swapped != want_swapped)
        return {false, b.swapped ? "nesting must put color 2 inside color 1 here"
                                 : "nesting orientation is forced the other way here"};
    std::vector<Point> core = b.outer;
    core.insert(core.end(), b.inner.begin(), b.inner.end());
    if (!core_dominates(core, following, 1))
        return {false, "greatest x index must stay inside the nested class"};
    if (!core_dominates(core, following, 2))
        return {false, "greatest y index must stay inside the nested class"};
    return {};
}

inline Point min_point(const std::vector<Point>& pts) {
    return *std::min_element(pts.begin(), pts.end());
}

}  // namespace detail

/* Check the basis normal form of the applicable theorem.  nvec, when given,
 * additionally requires the expression to use every point exactly once. */
inline GenDiagnosis validate_generator(const GenExpr& e, const IdealSpec& spec, int d,
                                       std::optional<ColorVector> nvec = std::nullopt,
                                       std::optional<Regime> regime_opt = std::nullopt) {
    Regime regime = regime_opt ? *regime_opt : choose_regime(spec);
    std::vector<Point> pts = expr_points(e);
    {
        std::vector<Point> sorted = pts;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            return {false, "a point appears more than once"};
        for (const Point& p : sorted) {
            if (p.color < 1 || p.color > spec.m) return {false, "point color out of range"};
            if (nvec && p.index > nvec->counts[p.color - 1])
                return {false, "point index exceeds the color count"};
        }
        if (nvec && (int)sorted.size() != nvec->total())
            return {false, "expression does not use every point exactly once"};
    }
    std::vector<GenPtr> factors;
    if (e.kind == GenExpr::Kind::product)
        factors = e.kids;
    else
        factors = {std::make_shared<GenExpr>(e)};

    if (d == 1) {
        // alternating word: runs of singletons separated by curly blocks
        std::vector<Point> run;
        const Block* prev_block = nullptr;
        Block prev_storage;
        auto flush = [&](bool final_run) -> GenDiagnosis {
            if (!detail::sorted_strict(run)) return {false, "singleton run not in canonical order"};
            if (prev_block) {
                auto diag = detail::check_block(spec, regime, *prev_block, run);
                if (!diag.ok) return diag;
            }
            (void)final_run;
            return {};
        };
        for (const GenPtr& f : factors) {
            if (f->kind == GenExpr::Kind::point) {
                run.push_back(f->pt);
                continue;
            }
            if (f->kind == GenExpr::Kind::bracket)
                return {false, "Lie brackets are trivial for d=1"};
            if (f->kind != GenExpr::Kind::curly) return {false, "factor is not a point or curly"};
            std::string why;
            auto blk = detail::expr_to_block(*f, &why);
            if (!blk) return {false, why};
            auto diag = flush(false);
            if (!diag.ok) return diag;
            run.clear();
            prev_storage = *blk;
            prev_block = &prev_storage;
        }
        return flush(true);
    }

    // d > 1: product of singletons and left-nested bracket factors
    for (const GenPtr& f : factors) {
        if (f->kind == GenExpr::Kind::point) continue;
        if (f->kind == GenExpr::Kind::product) return {false, "nested products are not canonical"};
        // unfold the left spine into blocks: every curly leaf starts a block
        std::vector<Block> blocks;
        std::function<bool(const GenExpr&, std::string&)> unfold = [&](const GenExpr& g,
                                                                       std::string& why) -> bool {
            std::string local;
            auto blk = detail::expr_to_block(g, &local);
            if (blk) {
                blocks.push_back(*blk);
                return true;
            }
            if (g.kind == GenExpr::Kind::bracket) {
                if (!unfold(*g.kids[0], why)) return false;
                auto right = detail::expr_to_block(*g.kids[1], &local);
                if (!right) {
                    why = "bracket factor is not left-nested over blocks: " + local;
                    return false;
                }
                blocks.push_back(*right);
                return true;
            }
            why = local.empty() ? "factor is not a block spine" : local;
            return false;
        };
        std::string why;
        if (!unfold(*f, why)) return {false, why};
        for (const Block& b : blocks) {
            auto diag = detail::check_block(spec, regime, b, b.appended);
            if (!diag.ok) return diag;
        }
        // the block containing the smallest point must come first
        std::vector<Point> fpts = expr_points(*f);
        Point mn = detail::min_point(fpts);
        std::vector<Point> b1 = blocks.front().all_points();
        if (std::find(b1.begin(), b1.end(), mn) == b1.end())
            return {false, "the factor's smallest point must lie in the first block"};
    }
    return {};
}

/* ---- basis enumeration ---- */

namespace detail {

template <typename F>
void subsets_of_size(const std::vector<Point>& pool, int k, F&& emit) {
    std::vector<Point> cur;
    std::function<void(size_t)> rec = [&](size_t start) {
        if ((int)cur.size() == k) {
            emit(cur);
            return;
        }
        for (size_t i = start; i + (k - cur.size()) <= pool.size(); ++i) {
            cur.push_back(pool[i]);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
}

/* All valid B-block structures on exactly the point set `pts` (sorted). */
inline std::vector<Block> block_structures(const IdealSpec& spec, Regime regime,
                                           const std::vector<Point>& pts, bool d_is_one) {
    std::vector<Block> out;
    Tuple counts(spec.m, 0);
    for (const Point& p : pts) counts[p.color - 1]++;
    std::vector<std::vector<Point>> by_color(spec.m);
    for (const Point& p : pts) by_color[p.color - 1].push_back(p);

    // type 1: curly with critical counts
    for (auto& [crit, w] : critical_set(spec)) {
        if (!tuple_leq(crit, counts)) continue;
        // choose crit[c] points per color
        std::vector<std::vector<std::vector<Point>>> choices(spec.m);
        for (int c = 0; c < spec.m; ++c)
            subsets_of_size(by_color[c], crit[c],
                            [&](const std::vector<Point>& s) { choices[c].push_back(s); });
        std::vector<Point> curly;
        std::function<void(int)> mix = [&](int c) {
            if (c == spec.m) {
                Block b;
                b.curly = curly;
                std::sort(b.curly.begin(), b.curly.end());
                for (const Point& p : pts)
                    if (std::find(b.curly.begin(), b.curly.end(), p) == b.curly.end())
                        b.appended.push_back(p);
                // d>1 checks appended against the block itself; the d=1 word
                // check couples the block with the following run instead.
                if (!d_is_one) {
                    if (!check_block(spec, regime, b, b.appended).ok) return;
                } else {
                    if (!b.appended.empty()) return;  // d=1 blocks are bare curlies
                    if (!check_block(spec, regime, b, {}).ok) return;
                }
                out.push_back(b);
                return;
            }
            size_t base = curly.size();
            for (auto& sel : choices[c]) {
                curly.insert(curly.end(), sel.begin(), sel.end());
                mix(c + 1);
                curly.resize(base);
            }
        };
        mix(0);
    }

    // type 2: nested classes (bicolored only)
    if (regime == Regime::bicolored && spec.m == 2) {
        for (auto& [dt, w] : d_set(spec)) {
            int n = dt[0] + 1, m = dt[1] + 1;
            if (n > counts[0] || m > counts[1]) continue;
            bool axis_x = in_ideal(spec, {n, 0});
            bool axis_y = in_ideal(spec, {0, m});
            if (!axis_x && !axis_y) continue;
            subsets_of_size(by_color[0], n, [&](const std::vector<Point>& xs) {
                subsets_of_size(by_color[1], m, [&](const std::vector<Point>& ys) {
                    Block b;
                    b.nested = true;
                    b.swapped = !axis_x;
                    b.outer = b.swapped ? ys : xs;
                    b.inner = b.swapped ? xs : ys;
                    for (const Point& p : pts) {
                        bool core = std::find(xs.begin(), xs.end(), p) != xs.end() ||
                                    std::find(ys.begin(), ys.end(), p) != ys.end();
                        if (!core) b.appended.push_back(p);
                    }
                    if (!d_is_one) {
                        if (!check_block(spec, regime, b, b.appended).ok) return;
                    } else {
                        if (!b.appended.empty()) return;
                        if (!check_block(spec, regime, b, {}).ok) return;
                    }
                    out.push_back(b);
                });
            });
        }
    }
    return out;
}

/* Partitions of `pts` into >=1 unordered blocks with per-block structures,
 * combined into left-nested bracket factors (d>1). */
inline std::vector<GenPtr> bracket_factors(const IdealSpec& spec, Regime regime,
                                           const std::vector<Point>& pts) {
    std::vector<GenPtr> out;
    // enumerate set partitions: block containing pts[0] is part 0, etc.
    std::vector<std::vector<std::vector<Point>>> partitions;
    std::vector<std::vector<Point>> cur;
    std::function<void(std::vector<Point>)> rec = [&](std::vector<Point> rem) {
        if (rem.empty()) {
            partitions.push_back(cur);
            return;
        }
        Point head = rem.front();
        std::vector<Point> rest(rem.begin() + 1, rem.end());
        // choose the block of head among rest
        int r = (int)rest.size();
        for (int mask = 0; mask < (1 << r); ++mask) {
            std::vector<Point> blk{head}, rem2;
            for (int i = 0; i < r; ++i)
                (mask >> i & 1 ? blk : rem2).push_back(rest[i]);
            if (blk.size() < 2) continue;  // blocks need at least one critical curly
            cur.push_back(blk);
            rec(rem2);
            cur.pop_back();
        }
    };
    rec(pts);
    for (auto& part : partitions) {
        // structures per block
        std::vector<std::vector<Block>> opts;
        bool dead = false;
        for (auto& blk : part) {
            opts.push_back(block_structures(spec, regime, blk, false));
            if (opts.back().empty()) dead = true;
        }
        if (dead) continue;
        size_t l = part.size();
        // part[0] holds the global minimum: it is B_1; permute the others
        std::vector<int> order(l - 1);
        std::iota(order.begin(), order.end(), 1);
        std::vector<int> sel(l, 0);
        std::function<void(size_t)> pick = [&](size_t i) {
            if (i == l) {
                std::vector<int> perm = order;
                do {
                    GenPtr f = block_to_expr(opts[0][sel[0]]);
                    for (int bi : perm) f = mk_bracket(f, block_to_expr(opts[bi][sel[bi]]));
                    out.push_back(f);
                } while (std::next_permutation(perm.begin(), perm.end()));
                return;
            }
            for (size_t j = 0; j < opts[i].size(); ++j) {
                sel[i] = (int)j;
                pick(i + 1);
            }
        };
        pick(0);
    }
    return out;
}

}  // namespace detail

struct EnumerateOptions {
    std::optional<int> degree;
    bool force_decreasing_shapes = false;  // heuristic count for m>=3, verify-only
};

inline std::vector<GenPtr> enumerate_basis(const IdealSpec& spec, int d, const ColorVector& nvec,
                                           EnumerateOptions opt = {}) {
    require_query_fits(spec, nvec);
    Regime regime = opt.force_decreasing_shapes ? Regime::decreasing : choose_regime(spec);
    for (auto& [t, w] : critical_set(spec))
        if (w == 1 && tuple_leq(t, nvec.counts)) return {};  // empty space

    std::vector<Point> pts = all_points(nvec);
    std::vector<GenPtr> out;

    if (d >= 2) {
        std::vector<GenPtr> factors_so_far;
        std::function<void(std::vector<Point>)> rec = [&](std::vector<Point> rem) {
            if (rem.empty()) {
                out.push_back(mk_product(factors_so_far));
                return;
            }
            Point head = rem.front();
            std::vector<Point> rest(rem.begin() + 1, rem.end());
            // singleton factor
            factors_so_far.push_back(mk_point(head));
            rec(rest);
            factors_so_far.pop_back();
            // bracket factor on a subset containing head
            int r = (int)rest.size();
            for (int mask = 1; mask < (1 << r); ++mask) {
                std::vector<Point> sub{head}, rem2;
                for (int i = 0; i < r; ++i)
                    (mask >> i & 1 ? sub : rem2).push_back(rest[i]);
                for (GenPtr f : detail::bracket_factors(spec, regime, sub)) {
                    factors_so_far.push_back(f);
                    rec(rem2);
                    factors_so_far.pop_back();
                }
            }
        };
        rec(pts);
    } else {
        // d = 1: alternating words A_0 B_1 A_1 ... B_l A_l
        std::vector<GenPtr> word;
        std::function<void(std::vector<Point>, std::optional<Block>)> rec =
            [&](std::vector<Point> rem, std::optional<Block> last) {
                int r = (int)rem.size();
                for (int mask = 0; mask < (1 << r); ++mask) {
                    std::vector<Point> a_run, rest;
                    for (int i = 0; i < r; ++i)
                        (mask >> i & 1 ? a_run : rest).push_back(rem[i]);
                    if (last && !detail::check_block(spec, regime, *last, a_run).ok) continue;
                    size_t base = word.size();
                    for (const Point& p : a_run) word.push_back(mk_point(p));
                    if (rest.empty()) {
                        out.push_back(mk_product(word));
                        word.resize(base);
                        continue;
                    }
                    // choose the next B-block within rest
                    int rr = (int)rest.size();
                    for (int m2 = 1; m2 < (1 << rr); ++m2) {
                        std::vector<Point> bset, rem2;
                        for (int i = 0; i < rr; ++i)
                            (m2 >> i & 1 ? bset : rem2).push_back(rest[i]);
                        if (bset.size() < 2) continue;
                        for (const Block& b : detail::block_structures(spec, regime, bset, true)) {
                            word.push_back(block_to_expr(b));
                            rec(rem2, b);
                            word.pop_back();
                        }
                    }
                    word.resize(base);
                }
            };
        rec(pts, std::nullopt);
    }

    if (opt.degree) {
        std::vector<GenPtr> filtered;
        for (auto& e : out)
            if (degree(*e, d) == *opt.degree) filtered.push_back(e);
        out = std::move(filtered);
    }
    std::sort(out.begin(), out.end(),
              [](const GenPtr& a, const GenPtr& b) { return to_string(*a) < to_string(*b); });
    return out;
}

/* ---- Betti numbers ---- */

inline BettiTable betti_basis(const IdealSpec& spec, int d, const ColorVector& nvec,
                              bool force_decreasing_shapes = false) {
    BettiTable t;
    t.method = force_decreasing_shapes ? "basis-heuristic" : "basis";
    require_query_fits(spec, nvec);
    if (!force_decreasing_shapes && spec.m == 2 && !is_decreasing(spec) && is_rectangular(spec)) {
        // a rectangular bicolored space is a product of two no-k-equal
        // spaces; take the Kunneth product of the one-color counts
        t.method = "basis-product";
        BettiTable parts[2];
        for (int c = 0; c < 2; ++c) {
            int cap = -1;
            for (int a = 0; a <= spec.box[c]; ++a) {
                Tuple probe{0, 0};
                probe[c] = a;
                if (spec.contains(probe)) cap = a;
            }
            IdealSpec line{1, {spec.box[c]}, {}, true, spec.open_column};
            for (int a = 0; a <= cap; ++a) line.members.insert({a});
            parts[c] = betti_basis(line, d, {{nvec.counts[c]}});
        }
        for (auto& [i, ri] : parts[0].ranks)
            for (auto& [j, rj] : parts[1].ranks) t.ranks[i + j] += ri * rj;
        return t;
    }
    EnumerateOptions opt;
    opt.force_decreasing_shapes = force_decreasing_shapes;
    for (const GenPtr& e : enumerate_basis(spec, d, nvec, opt)) t.ranks[degree(*e, d)] += 1;
    return t;
}

struct BettiComparison {
    BettiTable basis, gm;
    bool agree = false;
    std::vector<std::tuple<int, long long, long long>> mismatches;  // degree, basis, gm
};

inline BettiComparison betti_both(const IdealSpec& spec, int d, const ColorVector& nvec,
                                  const Budget& budget = {},
                                  bool force_decreasing_shapes = false) {
    BettiComparison cmp;
    cmp.basis = betti_basis(spec, d, nvec, force_decreasing_shapes);
    cmp.gm = gm_betti(spec, nvec, d, budget);
    std::set<int> degs;
    for (auto& [k, v] : cmp.basis.ranks) degs.insert(k);
    for (auto& [k, v] : cmp.gm.ranks) degs.insert(k);
    cmp.agree = true;
    for (int k : degs) {
        long long b = cmp.basis.rank(k), g = cmp.gm.rank(k);
        if (b != g) {
            cmp.agree = false;
            cmp.mismatches.push_back({k, b, g});
        }
    }
    return cmp;
}

/* ---- relation instances (Z2 formal sums) ---- */

/* Z2 linear combination of generator expressions, keyed by canonical text. */
struct GenSum {
    std::map<std::string, GenPtr> terms;

    void toggle(const GenPtr& e) {
        std::string key = to_string(*e);
        auto it = terms.find(key);
        if (it == terms.end())
            terms.insert({key, e});
        else
            terms.erase(it);
    }
    bool empty() const { return terms.empty(); }
};

namespace detail {

/* d=1 substitutes: [A,B] becomes A*B + B*A.  Expands an expression with
 * top-level brackets into the list of product words (Z2 multiplicity). */
inline void expand_d1(const GenPtr& e, std::vector<GenPtr>& out) {
    switch (e->kind) {
        case GenExpr::Kind::point:
            out.push_back(e);
            return;
        case GenExpr::Kind::curly: {
            // distribute the expansion of compound children inside the curly
            std::vector<std::vector<GenPtr>> parts;
            for (auto& k : e->kids) {
                parts.emplace_back();
                expand_d1(k, parts.back());
            }
            std::vector<GenPtr> cur;
            std::function<void(size_t)> mix = [&](size_t i) {
                if (i == parts.size()) {
                    out.push_back(mk_curly(cur));
                    return;
                }
                for (auto& c : parts[i]) {
                    cur.push_back(c);
                    mix(i + 1);
                    cur.pop_back();
                }
            };
            mix(0);
            return;
        }
        case GenExpr::Kind::bracket: {
            std::vector<GenPtr> lhs, rhs;
            expand_d1(e->kids[0], lhs);
            expand_d1(e->kids[1], rhs);
            for (auto& a : lhs)
                for (auto& b : rhs) {
                    auto flatten = [](const GenPtr& x, std::vector<GenPtr>& into) {
                        if (x->kind == GenExpr::Kind::product)
                            into.insert(into.end(), x->kids.begin(), x->kids.end());
                        else
                            into.push_back(x);
                    };
                    std::vector<GenPtr> ab, ba;
                    flatten(a, ab);
                    flatten(b, ab);
                    flatten(b, ba);
                    flatten(a, ba);
                    out.push_back(mk_product(ab));
                    out.push_back(mk_product(ba));
                }
            return;
        }
        case GenExpr::Kind::product: {
            std::vector<std::vector<GenPtr>> parts;
            for (auto& k : e->kids) {
                parts.emplace_back();
                expand_d1(k, parts.back());
            }
            std::vector<GenPtr> cur;
            std::function<void(size_t)> mix = [&](size_t i) {
                if (i == parts.size()) {
                    std::vector<GenPtr> flat;
                    for (auto& c : cur) {
                        if (c->kind == GenExpr::Kind::product)
                            flat.insert(flat.end(), c->kids.begin(), c->kids.end());
                        else
                            flat.push_back(c);
                    }
                    out.push_back(mk_product(flat));
                    return;
                }
                for (auto& c : parts[i]) {
                    cur.push_back(c);
                    mix(i + 1);
                    cur.pop_back();
                }
            };
            mix(0);
            return;
        }
    }
}

inline void add_relation_term(GenSum& sum, const GenPtr& e, int d) {
    if (d > 1) {
        sum.toggle(e);
        return;
    }
    std::vector<GenPtr> words;
    expand_d1(e, words);
    for (auto& w : words) sum.toggle(w);
}

inline std::vector<Point> seg(int color, int count, int skip = 0) {
    std::vector<Point> pts;
    for (int i = 1; i <= count; ++i)
        if (i != skip) pts.push_back({color, i});
    return pts;
}
inline GenPtr curly_of(const std::vector<Point>& pts) {
    std::vector<GenPtr> kids;
    for (const Point& p : pts) kids.push_back(mk_point(p));
    return mk_curly(std::move(kids));
}
inline GenPtr nested_of(const std::vector<Point>& outer, const std::vector<Point>& inner) {
    std::vector<GenPtr> kids;
    for (const Point& p : outer) kids.push_back(mk_point(p));
    kids.push_back(curly_of(inner));
    return mk_curly(std::move(kids));
}

}  // namespace detail

/* Canonical instances of the homology relation families on initial-segment
 * points, one GenSum (== 0 over Z2) per instance. */
inline std::vector<GenSum> hom_relation_instances(const IdealSpec& spec, int d,
                                                  const ColorVector& nvec) {
    require_query_fits(spec, nvec);
    Regime regime = choose_regime(spec);
    std::vector<GenSum> out;
    using detail::add_relation_term;
    using detail::curly_of;
    using detail::nested_of;
    using detail::seg;

    if (regime == Regime::decreasing) {
        // sum over j in J of [{all points of lvec minus x^j_i}, x^j_i]
        detail::for_each_tuple(nvec.counts, [&](const Tuple& lvec) {
            int k = 0;
            for (int c = spec.m; c >= 1; --c)
                if (lvec[c - 1] > 0) {
                    k = c;
                    break;
                }
            if (k == 0) return;
            Tuple base = lvec;
            --base[k - 1];
            if (!is_critical(spec, base)) return;
            std::vector<int> J;
            for (int j = 1; j <= spec.m; ++j) {
                if (lvec[j - 1] == 0) continue;
                Tuple down = lvec;
                --down[j - 1];
                if (is_critical(spec, down)) J.push_back(j);
            }
            if (J.empty()) return;
            GenSum sum;
            for (int j : J) {
                for (int i = 1; i <= lvec[j - 1]; ++i) {
                    std::vector<Point> pts;
                    for (int c = 1; c <= spec.m; ++c) {
                        auto part = seg(c, lvec[c - 1], c == j ? i : 0);
                        pts.insert(pts.end(), part.begin(), part.end());
                    }
                    add_relation_term(sum, mk_bracket(curly_of(pts), mk_point({j, i})), d);
                }
            }
            if (!sum.empty()) out.push_back(sum);
        });
        return out;
    }

    // bicolored families (m = 2); n, m bounded by nvec
    int N1 = nvec.counts[0], N2 = nvec.counts[1];
    auto crit = [&](int a, int b) {
        return a >= 0 && b >= 0 && spec.in_box({a, b}) && is_critical(spec, Tuple{a, b});
    };
    auto inI = [&](int a, int b) { return in_ideal(spec, {a, b}); };
    auto inD = [&](int a, int b) {
        if (a < 0 || b < 0) return false;
        for (auto& [t, w] : d_set(spec))
            if (t == Tuple{a, b}) return true;
        return false;
    };

    for (int n = 0; n <= N1; ++n)
        for (int m = 0; m <= N2; ++m) {
            // (1) mixed trade when both one-down neighbors are critical
            if (n >= 1 && m >= 1 && crit(n - 1, m) && crit(n, m - 1)) {
                GenSum sum;
                for (int i = 1; i <= n; ++i) {
                    std::vector<Point> pts = seg(1, n, i);
                    auto ys = seg(2, m);
                    pts.insert(pts.end(), ys.begin(), ys.end());
                    add_relation_term(sum, mk_bracket(curly_of(pts), mk_point({1, i})), d);
                }
                for (int j = 1; j <= m; ++j) {
                    std::vector<Point> pts = seg(1, n);
                    auto ys = seg(2, m, j);
                    pts.insert(pts.end(), ys.begin(), ys.end());
                    add_relation_term(sum, mk_bracket(curly_of(pts), mk_point({2, j})), d);
                }
                if (!sum.empty()) out.push_back(sum);
            }
            // (2a) x-trade
            if (n >= 1 && crit(n - 1, m) && in_ideal_vac(spec, {n, m - 1})) {
                GenSum sum;
                for (int i = 1; i <= n; ++i) {
                    std::vector<Point> pts = seg(1, n, i);
                    auto ys = seg(2, m);
                    pts.insert(pts.end(), ys.begin(), ys.end());
                    add_relation_term(sum, mk_bracket(curly_of(pts), mk_point({1, i})), d);
                }
                if (!sum.empty()) out.push_back(sum);
            }
            // (2b) y-trade
            if (m >= 1 && crit(n, m - 1) && in_ideal_vac(spec, {n - 1, m})) {
                GenSum sum;
                for (int j = 1; j <= m; ++j) {
                    std::vector<Point> pts = seg(1, n);
                    auto ys = seg(2, m, j);
                    pts.insert(pts.end(), ys.begin(), ys.end());
                    add_relation_term(sum, mk_bracket(curly_of(pts), mk_point({2, j})), d);
                }
                if (!sum.empty()) out.push_back(sum);
            }
            // (3a)/(3b): critical square with a forbidden diagonal step
            if (m >= 1 && crit(n, m) && n + 1 <= N1 && !inI(n + 1, m - 2)) {
                {
                    GenSum sum;
                    for (int i = 1; i <= n + 1; ++i) {
                        std::vector<Point> pts = seg(1, n + 1, i);
                        auto ys = seg(2, m);
                        pts.insert(pts.end(), ys.begin(), ys.end());
                        add_relation_term(sum, mk_bracket(curly_of(pts), mk_point({1, i})), d);
                    }
                    add_relation_term(sum, nested_of(seg(2, m), seg(1, n + 1)), d);
                    if (!sum.empty()) out.push_back(sum);
                }
                if (m + 1 <= N2) {
                    GenSum sum;
                    for (int j = 1; j <= m + 1; ++j)
                        add_relation_term(
                            sum, mk_bracket(nested_of(seg(2, m + 1, j), seg(1, n + 1)),
                                            mk_point({2, j})),
                            d);
                    add_relation_term(
                        sum, mk_bracket(curly_of(seg(2, m + 1)), curly_of(seg(1, n + 1))), d);
                    if (!sum.empty()) out.push_back(sum);
                }
            }
            // mirrored (3a')/(3b')
            if (n >= 1 && crit(n, m) && m + 1 <= N2 && !inI(n - 2, m + 1)) {
                {
                    GenSum sum;
                    for (int j = 1; j <= m + 1; ++j) {
                        std::vector<Point> pts = seg(1, n);
                        auto ys = seg(2, m + 1, j);
                        pts.insert(pts.end(), ys.begin(), ys.end());
                        add_relation_term(sum, mk_bracket(curly_of(pts), mk_point({2, j})), d);
                    }
                    add_relation_term(sum, nested_of(seg(1, n), seg(2, m + 1)), d);
                    if (!sum.empty()) out.push_back(sum);
                }
                if (n + 1 <= N1) {
                    GenSum sum;
                    for (int i = 1; i <= n + 1; ++i)
                        add_relation_term(
                            sum, mk_bracket(nested_of(seg(1, n + 1, i), seg(2, m + 1)),
                                            mk_point({1, i})),
                            d);
                    add_relation_term(
                        sum, mk_bracket(curly_of(seg(1, n + 1)), curly_of(seg(2, m + 1))), d);
                    if (!sum.empty()) out.push_back(sum);
                }
            }
            // (4),(5),(6): product-of-spheres families
            if (n >= 1 && m >= 1 && inD(n - 1, m - 1)) {
                if (inI(n, 0)) {
                    if (n + 1 <= N1) {  // (4)
                        GenSum sum;
                        for (int i = 1; i <= n + 1; ++i)
                            add_relation_term(
                                sum, mk_bracket(nested_of(seg(1, n + 1, i), seg(2, m)),
                                                mk_point({1, i})),
                                d);
                        add_relation_term(
                            sum, mk_bracket(curly_of(seg(1, n + 1)), curly_of(seg(2, m))), d);
                        if (!sum.empty()) out.push_back(sum);
                    }
                    if (m + 1 <= N2) {  // (5)
                        GenSum sum;
                        add_relation_term(
                            sum, mk_bracket(nested_of(seg(1, n), seg(2, m)), mk_point({2, m + 1})),
                            d);
                        std::vector<Point> pts = seg(1, n);
                        pts.push_back({2, m + 1});
                        add_relation_term(sum,
                                          mk_bracket(curly_of(pts), curly_of(seg(2, m))), d);
                        std::vector<GenPtr> kids;
                        for (const Point& p : seg(1, n)) kids.push_back(mk_point(p));
                        kids.push_back(mk_bracket(curly_of(seg(2, m)), mk_point({2, m + 1})));
                        add_relation_term(sum, mk_curly(std::move(kids)), d);
                        if (!sum.empty()) out.push_back(sum);
                    }
                    if (m + 1 <= N2) {  // (6)
                        GenSum sum;
                        for (int j = 1; j <= m + 1; ++j) {
                            std::vector<GenPtr> kids;
                            for (const Point& p : seg(1, n)) kids.push_back(mk_point(p));
                            kids.push_back(
                                mk_bracket(curly_of(seg(2, m + 1, j)), mk_point({2, j})));
                            add_relation_term(sum, mk_curly(std::move(kids)), d);
                        }
                        if (!sum.empty()) out.push_back(sum);
                    }
                } else if (inI(0, m)) {
                    // swapped-nesting mirrors of (4),(5),(6)
                    if (m + 1 <= N2) {
                        GenSum sum;
                        for (int j = 1; j <= m + 1; ++j)
                            add_relation_term(
                                sum, mk_bracket(nested_of(seg(2, m + 1, j), seg(1, n)),
                                                mk_point({2, j})),
                                d);
                        add_relation_term(
                            sum, mk_bracket(curly_of(seg(2, m + 1)), curly_of(seg(1, n))), d);
                        if (!sum.empty()) out.push_back(sum);
                    }
                    if (n + 1 <= N1) {
                        GenSum sum;
                        add_relation_term(
                            sum, mk_bracket(nested_of(seg(2, m), seg(1, n)), mk_point({1, n + 1})),
                            d);
                        std::vector<Point> pts = seg(2, m);
                        pts.push_back({1, n + 1});
                        std::sort(pts.begin(), pts.end());
                        add_relation_term(sum,
                                          mk_bracket(curly_of(pts), curly_of(seg(1, n))), d);
                        std::vector<GenPtr> kids;
                        for (const Point& p : seg(2, m)) kids.push_back(mk_point(p));
                        kids.push_back(mk_bracket(curly_of(seg(1, n)), mk_point({1, n + 1})));
                        add_relation_term(sum, mk_curly(std::move(kids)), d);
                        if (!sum.empty()) out.push_back(sum);
                    }
                    if (n + 1 <= N1) {
                        GenSum sum;
                        for (int i = 1; i <= n + 1; ++i) {
                            std::vector<GenPtr> kids;
                            for (const Point& p : seg(2, m)) kids.push_back(mk_point(p));
                            kids.push_back(
                                mk_bracket(curly_of(seg(1, n + 1, i)), mk_point({1, i})));
                            add_relation_term(sum, mk_curly(std::move(kids)), d);
                        }
                        if (!sum.empty()) out.push_back(sum);
                    }
                }
            }
        }
    return out;
}

}  // namespace polyconf

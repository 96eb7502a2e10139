#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

#include "base.hpp"

namespace polyconf {

using Rational = boost::multiprecision::cpp_rational;

/* A finite, boxed, downward-closed subset of N^m.  All queries are restricted
 * to tuples <= box componentwise; callers that pass a ColorVector must keep
 * box >= nvec + (2,...,2) so neighbor conditions stay inside the box. */
struct IdealSpec {
    int m = 1;
    Tuple box;
    std::set<Tuple> members;
    bool relax_small = false;  // lift the standing "sum<=2 tuples are in I" assumption
    bool open_column = false;  // full box columns denote infinity rather than truncation

    bool in_box(const Tuple& t) const {
        if ((int)t.size() != m) return false;
        for (int i = 0; i < m; ++i)
            if (t[i] < 0 || t[i] > box[i]) return false;
        return true;
    }
    bool contains(const Tuple& t) const { return members.count(t) != 0; }
};

namespace detail {

template <typename F>
void for_each_tuple(const Tuple& box, F&& f) {
    Tuple t(box.size(), 0);
    for (;;) {
        f(t);
        int i = 0;
        while (i < (int)box.size()) {
            if (++t[i] <= box[i]) break;
            t[i++] = 0;
        }
        if (i == (int)box.size()) return;
    }
}

}  // namespace detail

struct Diagnosis {
    bool ok = true;
    std::string reason;
    std::optional<Tuple> witness;
};

/* Downward closure, origin membership, and (unless relax_small) the standing
 * assumption that every tuple of weight <= 2 belongs to I. */
inline Diagnosis validate(const IdealSpec& spec) {
    if (spec.m <= 0 || (int)spec.box.size() != spec.m)
        return {false, "box arity does not match m", std::nullopt};
    Tuple origin(spec.m, 0);
    if (!spec.contains(origin)) return {false, "origin not in members", origin};
    for (const Tuple& t : spec.members) {
        if (!spec.in_box(t)) return {false, "member outside box", t};
        for (int i = 0; i < spec.m; ++i) {
            if (t[i] == 0) continue;
            Tuple s = t;
            --s[i];
            if (!spec.contains(s)) return {false, "downward closure violated", s};
        }
    }
    if (!spec.relax_small) {
        Diagnosis diag;
        detail::for_each_tuple(spec.box, [&](const Tuple& t) {
            if (diag.ok && tuple_sum(t) <= 2 && !spec.contains(t))
                diag = {false, "weight<=2 tuple missing (relax_small not set)", t};
        });
        if (!diag.ok) return diag;
    }
    return {};
}

inline bool membership(const IdealSpec& spec, const Tuple& t) {
    if ((int)t.size() != spec.m) fail("WrongArity", "tuple arity != m");
    if (!spec.in_box(t)) fail("OutOfBox", "membership query beyond box");
    return spec.contains(t);
}

/* Membership that treats anything with a negative coordinate as absent.
 * Used by the neighbor conditions of the basis theorems. */
inline bool in_ideal(const IdealSpec& spec, const Tuple& t) {
    for (int v : t)
        if (v < 0) return false;
    if (!spec.in_box(t)) fail("OutOfBox", "neighbor query beyond box");
    return spec.contains(t);
}

/* Vacuous variant: a negative coordinate means the guarded coincidence
 * pattern cannot occur at all, so the tuple counts as allowed.  This is the
 * convention under which the bicolored conditions specialize to the
 * one-color theorems when a color is absent. */
inline bool in_ideal_vac(const IdealSpec& spec, const Tuple& t) {
    for (int v : t)
        if (v < 0) return true;
    if (!spec.in_box(t)) fail("OutOfBox", "neighbor query beyond box");
    return spec.contains(t);
}

/* Finite presentation by the minimal tuples NOT in I. */
inline IdealSpec from_forbidden(int m, const Tuple& box, const std::vector<Tuple>& min_forbidden) {
    for (const Tuple& f : min_forbidden) {
        if ((int)f.size() != m) fail("WrongArity", "forbidden tuple arity != m");
        for (const Tuple& g : min_forbidden)
            if (&f != &g && tuple_leq(f, g)) fail("NotAntichain", "comparable forbidden tuples");
    }
    IdealSpec spec{m, box, {}, false, false};
    detail::for_each_tuple(box, [&](const Tuple& t) {
        for (const Tuple& f : min_forbidden)
            if (tuple_leq(f, t)) return;
        spec.members.insert(t);
    });
    return spec;
}

/* Weighted ideal: t in I iff sum_j t_j*w_j < M, weights sorted nonincreasing. */
inline IdealSpec from_weighted(const std::vector<Rational>& weights, const Rational& M,
                               const Tuple& box) {
    int m = (int)weights.size();
    for (int j = 1; j < m; ++j)
        if (weights[j - 1] < weights[j]) fail("WeightsNotSorted", "weights must be nonincreasing");
    for (const Rational& w : weights)
        if (w <= 0) fail("WeightsNotSorted", "weights must be positive");
    IdealSpec spec{m, box, {}, false, false};
    detail::for_each_tuple(box, [&](const Tuple& t) {
        Rational s = 0;
        for (int j = 0; j < m; ++j) s += Rational(t[j]) * weights[j];
        if (s < M) spec.members.insert(t);
    });
    return spec;
}

/* Exhaustive check of the decreasing condition over the box: whenever
 * t = (n_1,...,n_i,0,...,0) is forbidden, n_i > 0, and t - e_i is allowed,
 * every other nonzero coordinate can be decremented back into I. */
inline bool is_decreasing(const IdealSpec& spec) {
    bool ok = true;
    detail::for_each_tuple(spec.box, [&](const Tuple& t) {
        if (!ok || spec.contains(t)) return;
        int i = -1;
        for (int k = spec.m - 1; k >= 0; --k)
            if (t[k] > 0) {
                i = k;
                break;
            }
        if (i < 0) return;
        Tuple ti = t;
        --ti[i];
        if (!spec.contains(ti)) return;
        for (int j = 0; j < i; ++j) {
            if (t[j] == 0) continue;
            Tuple tj = t;
            --tj[j];
            if (!spec.contains(tj)) ok = false;
        }
    });
    return ok;
}

/* m=2 only: members equal a coordinate rectangle intersected with the box. */
inline bool is_rectangular(const IdealSpec& spec) {
    if (spec.m != 2) fail("WrongArity", "is_rectangular requires m=2");
    int m1 = -1, m2 = -1;
    for (int a = 0; a <= spec.box[0]; ++a)
        if (spec.contains({a, 0})) m1 = a;
    for (int b = 0; b <= spec.box[1]; ++b)
        if (spec.contains({0, b})) m2 = b;
    bool same = true;
    detail::for_each_tuple(spec.box, [&](const Tuple& t) {
        bool rect = t[0] <= m1 && t[1] <= m2;
        if (rect != spec.contains(t)) same = false;
    });
    return same;
}

/* Critical tuples = minimal forbidden tuples within the box, with weights. */
inline std::vector<std::pair<Tuple, int>> critical_set(const IdealSpec& spec) {
    std::vector<std::pair<Tuple, int>> out;
    detail::for_each_tuple(spec.box, [&](const Tuple& t) {
        if (spec.contains(t) || tuple_sum(t) == 0) return;
        for (int j = 0; j < spec.m; ++j) {
            if (t[j] == 0) continue;
            Tuple s = t;
            --s[j];
            if (!spec.contains(s)) return;
        }
        out.push_back({t, tuple_sum(t)});
    });
    std::sort(out.begin(), out.end());
    return out;
}

inline bool is_critical(const IdealSpec& spec, const Tuple& t) {
    if (spec.contains(t) || tuple_sum(t) == 0) return false;
    for (int v : t)
        if (v < 0) return false;
    if (!spec.in_box(t)) fail("OutOfBox", "criticality query beyond box");
    for (int j = 0; j < spec.m; ++j) {
        if (t[j] == 0) continue;
        Tuple s = t;
        --s[j];
        if (!spec.contains(s)) return false;
    }
    return true;
}

/* D_I = {t in I : t+e1, t+e2 outside I and not critical}.  Tuples whose
 * one-up neighbors leave the box are skipped; the box >= query+2 contract
 * keeps every relevant tuple interior. */
inline std::vector<std::pair<Tuple, int>> d_set(const IdealSpec& spec) {
    if (spec.m != 2) fail("WrongArity", "d_set requires m=2");
    std::vector<std::pair<Tuple, int>> out;
    for (const Tuple& t : spec.members) {
        Tuple up1{t[0] + 1, t[1]}, up2{t[0], t[1] + 1};
        if (!spec.in_box(up1) || !spec.in_box(up2)) continue;
        if (spec.contains(up1) || is_critical(spec, up1)) continue;
        if (spec.contains(up2) || is_critical(spec, up2)) continue;
        out.push_back({t, tuple_sum(t)});
    }
    std::sort(out.begin(), out.end());
    return out;
}

/* C'_I = {t in I : t+e1, t+e2 not in I};
 * D'_I = {t critical : the diagonal neighbors of t that lie in N^2 are in I}. */
inline std::pair<std::vector<Tuple>, std::vector<Tuple>> cprime_dprime(const IdealSpec& spec) {
    if (spec.m != 2) fail("WrongArity", "cprime_dprime requires m=2");
    std::vector<Tuple> cp, dp;
    for (const Tuple& t : spec.members) {
        Tuple up1{t[0] + 1, t[1]}, up2{t[0], t[1] + 1};
        if (!spec.in_box(up1) || !spec.in_box(up2)) continue;
        if (!spec.contains(up1) && !spec.contains(up2)) cp.push_back(t);
    }
    for (auto& [t, w] : critical_set(spec)) {
        bool ok = true;
        if (t[0] >= 1) {
            Tuple d1{t[0] - 1, t[1] + 1};
            if (!spec.in_box(d1) || !spec.contains(d1)) ok = false;
        }
        if (ok && t[1] >= 1) {
            Tuple d2{t[0] + 1, t[1] - 1};
            if (!spec.in_box(d2) || !spec.contains(d2)) ok = false;
        }
        if (ok) dp.push_back(t);
    }
    std::sort(cp.begin(), cp.end());
    std::sort(dp.begin(), dp.end());
    return {cp, dp};
}

inline bool in_dprime(const IdealSpec& spec, const Tuple& t) {
    if (!is_critical(spec, t)) return false;
    if (t[0] >= 1) {
        Tuple d1{t[0] - 1, t[1] + 1};
        if (!spec.in_box(d1) || !spec.contains(d1)) return false;
    }
    if (t[1] >= 1) {
        Tuple d2{t[0] + 1, t[1] - 1};
        if (!spec.in_box(d2) || !spec.contains(d2)) return false;
    }
    return true;
}

inline bool in_cprime(const IdealSpec& spec, const Tuple& t) {
    if (t[0] < 0 || t[1] < 0 || !spec.contains(t)) return false;
    Tuple up1{t[0] + 1, t[1]}, up2{t[0], t[1] + 1};
    if (!spec.in_box(up1) || !spec.in_box(up2)) fail("OutOfBox", "cprime query beyond box");
    return !spec.contains(up1) && !spec.contains(up2);
}

/* f_I(n) = sup{ m : (n,m) in I }, with -inf encoded as kind::neg_inf.  A full
 * column reports +inf only under the open_column flag; otherwise the boxed
 * value is returned with boxed=true. */
struct ExtendedInt {
    enum class Kind { neg_inf, finite, pos_inf } kind = Kind::finite;
    int value = 0;
    bool boxed = false;
};

inline ExtendedInt f_value(const IdealSpec& spec, int n) {
    if (spec.m != 2) fail("WrongArity", "f_value requires m=2");
    if (n < 0 || n > spec.box[0]) fail("OutOfBox", "f_value column beyond box");
    int best = -1;
    for (int b = 0; b <= spec.box[1]; ++b)
        if (spec.contains({n, b})) best = b;
    if (best < 0) return {ExtendedInt::Kind::neg_inf, 0, false};
    if (best == spec.box[1]) {
        if (spec.open_column) return {ExtendedInt::Kind::pos_inf, 0, false};
        return {ExtendedInt::Kind::finite, best, true};
    }
    return {ExtendedInt::Kind::finite, best, false};
}

inline int m_value(const IdealSpec& spec, int a) {
    ExtendedInt fa = f_value(spec, a);
    for (int k = 0; k <= a; ++k) {
        ExtendedInt fk = f_value(spec, k);
        if (fk.kind == fa.kind && (fk.kind != ExtendedInt::Kind::finite || fk.value == fa.value))
            return k;
    }
    return a;
}

struct FeatureReport {
    std::vector<std::pair<Tuple, int>> critical;
    std::vector<std::pair<Tuple, int>> dset;     // m=2
    std::vector<Tuple> cprime, dprime;           // m=2
    std::map<int, ExtendedInt> f_table;          // m=2
    bool decreasing = false;
    bool rectangular = false;  // m=2
};

inline FeatureReport features(const IdealSpec& spec) {
    FeatureReport r;
    r.critical = critical_set(spec);
    r.decreasing = is_decreasing(spec);
    if (spec.m == 2) {
        r.dset = d_set(spec);
        std::tie(r.cprime, r.dprime) = cprime_dprime(spec);
        for (int n = 0; n <= spec.box[0]; ++n) r.f_table[n] = f_value(spec, n);
        r.rectangular = is_rectangular(spec);
    }
    return r;
}

/* Guard used by every (spec, nvec) entry point. */
inline void require_query_fits(const IdealSpec& spec, const ColorVector& nvec) {
    if (nvec.colors() != spec.m) fail("WrongArity", "color vector arity != m");
    for (int j = 0; j < spec.m; ++j) {
        if (nvec.counts[j] < 0) fail("OutOfBox", "negative point count");
        if (nvec.counts[j] + 2 > spec.box[j])
            fail("BoxTooSmall", "box must exceed the query by 2 in each coordinate");
    }
}

}  // namespace polyconf

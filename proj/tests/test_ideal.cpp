#include <functional>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "polyconf/ideal.hpp"

using namespace polyconf;

namespace {

IdealSpec full_box(int m, Tuple box) {
    IdealSpec s{m, box, {}, false, false};
    detail::for_each_tuple(box, [&](const Tuple& t) { s.members.insert(t); });
    return s;
}

/* I = {0..2}^2 inside the given box. */
IdealSpec box_ideal_22(Tuple box = {4, 4}) {
    IdealSpec s{2, box, {}, false, false};
    detail::for_each_tuple(box, [&](const Tuple& t) {
        if (t[0] <= 2 && t[1] <= 2) s.members.insert(t);
    });
    return s;
}

/* I' = {0..2}^2 + the two axis tuples (3,0),(0,3). */
IdealSpec box_ideal_22_axes(Tuple box = {5, 5}) {
    IdealSpec s = box_ideal_22(box);
    s.members.insert({3, 0});
    s.members.insert({0, 3});
    return s;
}

IdealSpec no_k_equal(int k, int box1) {
    IdealSpec s{1, {box1}, {}, false, false};
    for (int a = 0; a < k && a <= box1; ++a) s.members.insert({a});
    s.relax_small = k <= 2;
    return s;
}

}  // namespace

TEST_CASE("validate: closure and standing assumption") {
    CHECK(validate(full_box(2, {3, 3})).ok);

    IdealSpec bad{2, {2, 2}, {{0, 0}, {1, 1}}, true, false};
    auto diag = validate(bad);
    CHECK_FALSE(diag.ok);
    REQUIRE(diag.witness.has_value());
    CHECK((*diag.witness == Tuple{0, 1} || *diag.witness == Tuple{1, 0}));

    // weight<=2 tuple missing without relax_small
    IdealSpec conf = no_k_equal(2, 5);
    conf.relax_small = false;
    CHECK_FALSE(validate(conf).ok);
    conf.relax_small = true;
    CHECK(validate(conf).ok);

    // weighted ideals validate (paper example 2)
    auto w = from_weighted({Rational(1), Rational(1)}, Rational(3), {4, 4});
    CHECK(validate(w).ok);
}

TEST_CASE("membership and box contract") {
    IdealSpec s = box_ideal_22({4, 4});
    CHECK(membership(s, {0, 0}));
    CHECK_FALSE(membership(s, {3, 0}));
    CHECK_THROWS_AS(membership(s, {5, 0}), Error);

    IdealSpec sp = box_ideal_22_axes({4, 4});
    CHECK(membership(sp, {3, 0}));
    CHECK_FALSE(membership(sp, {3, 1}));
}

TEST_CASE("from_forbidden") {
    auto nok3 = from_forbidden(1, {6}, {{3}});
    CHECK(nok3.members == std::set<Tuple>{{0}, {1}, {2}});

    CHECK_THROWS_AS(from_forbidden(2, {4, 4}, {{3, 1}, {1, 3}, {3, 0}}), Error);

    // staircase a+b<=3 via its minimal forbidden antichain
    auto st = from_forbidden(2, {4, 4}, {{4, 0}, {3, 1}, {2, 2}, {1, 3}, {0, 4}});
    IdealSpec expect{2, {4, 4}, {}, false, false};
    detail::for_each_tuple(Tuple{4, 4}, [&](const Tuple& t) {
        if (t[0] + t[1] <= 3) expect.members.insert(t);
    });
    CHECK(st.members == expect.members);
}

TEST_CASE("from_weighted") {
    CHECK_THROWS_AS(from_weighted({Rational(1), Rational(2)}, Rational(4), {3, 3}), Error);

    auto w = from_weighted({Rational(2), Rational(1)}, Rational(4), {3, 4});
    CHECK(w.contains({1, 1}));       // 3 < 4
    CHECK_FALSE(w.contains({2, 0})); // 4 not < 4

    auto all = from_weighted({Rational(1)}, Rational(1000), {5});
    CHECK((int)all.members.size() == 6);

    // all weights one, M=k gives the no-k-equal ideal
    auto k3 = from_weighted({Rational(1)}, Rational(3), {6});
    CHECK(k3.members == no_k_equal(3, 6).members);
}

TEST_CASE("is_decreasing") {
    CHECK(is_decreasing(no_k_equal(3, 6)));  // any m=1 ideal
    CHECK(is_decreasing(from_weighted({Rational(2), Rational(1)}, Rational(4), {4, 5})));
    CHECK_FALSE(is_decreasing(box_ideal_22({4, 4})));
    CHECK_FALSE(is_decreasing(box_ideal_22_axes({5, 5})));
    // staircase sum<=2 is decreasing
    CHECK(is_decreasing(from_weighted({Rational(1), Rational(1)}, Rational(3), {4, 4})));
}

TEST_CASE("is_rectangular") {
    CHECK(is_rectangular(box_ideal_22({4, 4})));
    CHECK_FALSE(is_rectangular(box_ideal_22_axes({5, 5})));
    CHECK_FALSE(is_rectangular(from_weighted({Rational(1), Rational(1)}, Rational(4), {4, 4})));
    CHECK_THROWS_AS(is_rectangular(no_k_equal(3, 6)), Error);
}

TEST_CASE("critical_set") {
    auto c1 = critical_set(no_k_equal(3, 6));
    REQUIRE(c1.size() == 1);
    CHECK(c1[0].first == Tuple{3});
    CHECK(c1[0].second == 3);

    auto c2 = critical_set(box_ideal_22({4, 4}));
    std::vector<std::pair<Tuple, int>> expect2{{{0, 3}, 3}, {{3, 0}, 3}};
    CHECK(c2 == expect2);

    auto c3 = critical_set(box_ideal_22_axes({5, 5}));
    std::vector<std::pair<Tuple, int>> expect3{{{0, 4}, 4}, {{1, 3}, 4}, {{3, 1}, 4}, {{4, 0}, 4}};
    CHECK(c3 == expect3);
}

TEST_CASE("d_set") {
    auto dp = d_set(box_ideal_22_axes({5, 5}));
    REQUIRE(dp.size() == 1);
    CHECK(dp[0].first == Tuple{2, 2});
    CHECK(dp[0].second == 4);

    auto dr = d_set(box_ideal_22({4, 4}));
    REQUIRE(dr.size() == 1);
    CHECK(dr[0].first == Tuple{2, 2});

    CHECK_THROWS_AS(d_set(no_k_equal(3, 6)), Error);
}

TEST_CASE("cprime_dprime") {
    auto [cp, dp] = cprime_dprime(box_ideal_22_axes({5, 5}));
    CHECK(std::count(cp.begin(), cp.end(), Tuple{2, 2}) == 1);
    CHECK(std::count(cp.begin(), cp.end(), Tuple{3, 0}) == 1);
    CHECK(std::count(cp.begin(), cp.end(), Tuple{0, 3}) == 1);
    // D'_{I'}: (3,1) needs (2,2),(4,0) in I' -> (4,0) missing; (1,3) same;
    // (4,0) needs (3,1) in I' -> no; so only none qualify
    CHECK(dp.empty());

    // rectangle {0..2}^2: both criticals keep their diagonal neighbors in I
    auto [cpr, dpr] = cprime_dprime(box_ideal_22({4, 4}));
    CHECK(dpr == std::vector<Tuple>{{0, 3}, {3, 0}});

    // staircase: criticals (a,b) a+b=4 have diagonal neighbors of sum 4... not in I
    auto [cps, dps] = cprime_dprime(from_weighted({Rational(1), Rational(1)}, Rational(4), {5, 5}));
    CHECK(dps.empty());
    CHECK(std::count(cps.begin(), cps.end(), Tuple{1, 2}) == 1);
}

TEST_CASE("f_value and m_value") {
    IdealSpec s = box_ideal_22({3, 3});
    CHECK(f_value(s, 0).value == 2);
    CHECK(f_value(s, 1).value == 2);
    CHECK(f_value(s, 2).value == 2);
    CHECK(f_value(s, 3).kind == ExtendedInt::Kind::neg_inf);
    CHECK(m_value(s, 2) == 0);

    // boxed marker: full column without open_column
    IdealSpec fb = full_box(2, {3, 3});
    CHECK(f_value(fb, 0).boxed);
    fb.open_column = true;
    CHECK(f_value(fb, 0).kind == ExtendedInt::Kind::pos_inf);

    CHECK_THROWS_AS(f_value(no_k_equal(3, 6), 0), Error);
}

TEST_CASE("feature invariants hold on a small family") {
    std::vector<IdealSpec> family = {
        box_ideal_22({4, 4}),
        box_ideal_22_axes({5, 5}),
        from_weighted({Rational(1), Rational(1)}, Rational(3), {4, 4}),
        from_weighted({Rational(2), Rational(1)}, Rational(5), {4, 5}),
        from_forbidden(2, {5, 5}, {{4, 0}, {3, 1}, {1, 3}, {0, 4}}),
    };
    for (const IdealSpec& s : family) {
        CAPTURE(s.box);
        CHECK(validate(s).ok);
        auto crit = critical_set(s);
        for (auto& [t, w] : crit) {
            CHECK_FALSE(s.contains(t));
            CHECK(w == tuple_sum(t));
            for (int j = 0; j < s.m; ++j) {
                if (t[j] == 0) continue;
                Tuple dn = t;
                --dn[j];
                CHECK(s.contains(dn));
            }
        }
        if (s.m == 2) {
            auto [cp, dp] = cprime_dprime(s);
            for (auto& t : cp) CHECK(s.contains(t));
            for (auto& t : dp) CHECK(is_critical(s, t));
            for (auto& [t, w] : d_set(s)) CHECK(s.contains(t));
            // f componentwise nonincreasing
            int prev = 1 << 20;
            for (int n = 0; n <= s.box[0]; ++n) {
                auto f = f_value(s, n);
                int v = f.kind == ExtendedInt::Kind::neg_inf ? -(1 << 20) : f.value;
                CHECK(v <= prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("weighted ideals validate for random sorted weights") {
    std::mt19937_64 rng(20240901);
    for (int trial = 0; trial < 40; ++trial) {
        int m = 1 + (int)(rng() % 3);
        std::vector<Rational> w(m);
        for (int j = 0; j < m; ++j) w[j] = Rational(1 + (int)(rng() % 6), 1 + (int)(rng() % 3));
        std::sort(w.begin(), w.end(), std::greater<>());
        Rational M(3 + (int)(rng() % 9), 1);
        Tuple box(m, 3 + (int)(rng() % 3));
        IdealSpec s = from_weighted(w, M, box);
        s.relax_small = true;  // random weights may forbid small tuples
        CHECK(validate(s).ok);
        CHECK(is_decreasing(s));
    }
}

#include <catch2/catch_amalgamated.hpp>

#include "polyconf/generators.hpp"

using namespace polyconf;

namespace {

IdealSpec no_k_equal(int k, int box1) {
    IdealSpec s{1, {box1}, {}, false, false};
    for (int a = 0; a < k && a <= box1; ++a) s.members.insert({a});
    s.relax_small = k <= 2;
    return s;
}

IdealSpec box_ideal_22(Tuple box) {
    IdealSpec s{2, box, {}, false, false};
    detail::for_each_tuple(box, [&](const Tuple& t) {
        if (t[0] <= 2 && t[1] <= 2) s.members.insert(t);
    });
    return s;
}

IdealSpec box_ideal_22_axes(Tuple box = {5, 5}) {
    IdealSpec s = box_ideal_22(box);
    s.members.insert({3, 0});
    s.members.insert({0, 3});
    return s;
}

/* closure of a set of top tuples */
IdealSpec closure_of(int m, Tuple box, std::vector<Tuple> tops, bool relax = false) {
    IdealSpec s{m, box, {}, relax, false};
    detail::for_each_tuple(box, [&](const Tuple& t) {
        for (auto& top : tops)
            if (tuple_leq(t, top)) {
                s.members.insert(t);
                return;
            }
    });
    return s;
}

}  // namespace

TEST_CASE("degree bookkeeping") {
    auto c3 = parse_expr("{x[1,1],x[1,2],x[1,3]}");
    CHECK(degree(*c3, 2) == 3);
    CHECK(degree(*c3, 1) == 1);

    auto nested = parse_expr("{x[1,1],x[1,2],x[1,3],{x[2,1],x[2,2],x[2,3]}}");
    CHECK(degree(*nested, 1) == 3);
    CHECK(degree(*nested, 2) == 8);

    auto prod = parse_expr("x[1,1]*x[1,2]*x[2,1]");
    CHECK(degree(*prod, 3) == 0);

    auto br = parse_expr("[{x[1,1],x[1,2]},x[1,3]]");
    CHECK(degree(*br, 2) == 2);
    CHECK_THROWS_AS(degree(*br, 1), Error);
}

TEST_CASE("grammar round trip") {
    for (std::string s :
         {"x[1,1]", "{x[1,1],x[2,3]}", "[{x[1,1],x[1,2]},x[1,3]]",
          "{x[1,1],{x[2,1],x[2,2]}}", "x[1,1]*{x[1,2],x[1,3]}*x[2,1]", "1"}) {
        auto e = parse_expr(s);
        CHECK(to_string(*e) == s);
    }
    CHECK_THROWS_AS(parse_expr("{x[1,1]"), Error);
    CHECK_THROWS_AS(parse_expr("x[1]"), Error);
    CHECK_THROWS_AS(parse_expr("x[1,1]]"), Error);
    // whitespace tolerated
    CHECK(to_string(*parse_expr(" [ {x[1,1], x[1,2]} , x[1,3] ] ")) ==
          "[{x[1,1],x[1,2]},x[1,3]]");
}

TEST_CASE("validate_generator clauses") {
    auto nok3 = no_k_equal(3, 6);

    // appended index above the curly maximum violates the top-color clause
    auto bad = parse_expr("[{x[1,1],x[1,2],x[1,3]},x[1,4]]");
    CHECK_FALSE(validate_generator(*bad, nok3, 2).ok);

    auto good = parse_expr("[{x[1,1],x[1,2],x[1,4]},x[1,3]]");
    CHECK(validate_generator(*good, nok3, 2, ColorVector{{4}}).ok);

    auto prod = parse_expr("x[1,1]*x[1,2]*x[1,3]");
    CHECK(validate_generator(*prod, nok3, 2, ColorVector{{3}}).ok);

    // duplicates and completeness
    CHECK_FALSE(validate_generator(*parse_expr("x[1,1]*x[1,1]"), nok3, 2).ok);
    CHECK_FALSE(validate_generator(*prod, nok3, 2, ColorVector{{4}}).ok);

    // the factor's smallest point must sit in the first block
    CHECK(validate_generator(*parse_expr("[{x[1,1],x[1,2],x[1,3]},{x[1,4],x[1,5],x[1,6]}]"),
                             nok3, 2)
              .ok);
    CHECK_FALSE(validate_generator(*parse_expr("[{x[1,4],x[1,5],x[1,6]},{x[1,1],x[1,2],x[1,3]}]"),
                                   nok3, 2)
                    .ok);

    // d=1 word conditions: run after a curly must stay below its top index
    CHECK(validate_generator(*parse_expr("x[1,4]*{x[1,1],x[1,2],x[1,3]}"), nok3, 1).ok);
    CHECK_FALSE(validate_generator(*parse_expr("{x[1,1],x[1,2],x[1,3]}*x[1,4]"), nok3, 1).ok);
    CHECK(validate_generator(*parse_expr("{x[1,1],x[1,2],x[1,4]}*x[1,3]"), nok3, 1).ok);
    // unsorted run
    CHECK_FALSE(validate_generator(*parse_expr("x[1,2]*x[1,1]*{x[1,3],x[1,4],x[1,5]}"),
                                   nok3, 1)
                    .ok);
}

TEST_CASE("enumerate: two points of one color") {
    auto conf = no_k_equal(2, 4);
    auto basis = enumerate_basis(conf, 2, {{2}});
    REQUIRE(basis.size() == 2);
    CHECK(to_string(*basis[0]) == "x[1,1]*x[1,2]");
    CHECK(to_string(*basis[1]) == "{x[1,1],x[1,2]}");
}

TEST_CASE("enumerate: nested class of the section-6 fixture") {
    auto ip = box_ideal_22_axes({5, 5});
    EnumerateOptions opt;
    opt.degree = 3;
    auto basis = enumerate_basis(ip, 1, {{3, 3}}, opt);
    REQUIRE(basis.size() == 1);
    CHECK(to_string(*basis[0]) ==
          "{x[1,1],x[1,2],x[1,3],{x[2,1],x[2,2],x[2,3]}}");

    // the plain (rectangular) box ideal refuses enumeration but counts
    // through the product decomposition, with nothing in degree 3
    auto plain = box_ideal_22({5, 5});
    CHECK_THROWS_AS(enumerate_basis(plain, 1, {{3, 3}}, opt), Error);
    CHECK(betti_basis(plain, 1, {{3, 3}}).rank(3) == 0);
}

TEST_CASE("betti: configuration spaces") {
    auto conf = no_k_equal(2, 6);
    auto t = betti_basis(conf, 3, {{2}});
    CHECK(t.ranks == std::map<int, long long>{{0, 1}, {2, 1}});

    long long fact = 1;
    for (int n = 1; n <= 4; ++n) {
        fact *= n;
        for (int d = 1; d <= 2; ++d) {
            auto b = betti_basis(conf, d, {{n}});
            CHECK(b.total() == fact);
            if (d == 1) CHECK(b.rank(0) == fact);
        }
    }
}

TEST_CASE("betti: basis equals oracle on sphere cases") {
    auto nok3 = no_k_equal(3, 6);
    for (int d = 1; d <= 2; ++d) {
        auto cmp = betti_both(nok3, d, {{3}});
        CHECK(cmp.agree);
        CHECK(cmp.basis.rank((3 - 1) * d - 1) == 1);
    }
    auto nok4 = no_k_equal(4, 6);
    for (int d = 1; d <= 2; ++d) {
        auto cmp = betti_both(nok4, d, {{4}});
        CHECK(cmp.agree);
        CHECK(cmp.basis.rank((4 - 1) * d - 1) == 1);
    }
}

TEST_CASE("betti: section-6 fixture ranks") {
    auto ip = box_ideal_22_axes({5, 5});
    auto plain = box_ideal_22({5, 5});
    auto t1 = betti_basis(ip, 1, {{3, 3}});
    auto t0 = betti_basis(plain, 1, {{3, 3}});
    CHECK(t1.rank(3) == 1);
    CHECK(t0.rank(3) == 0);
}

TEST_CASE("rank sweep: basis matches the GM oracle") {
    std::vector<std::pair<std::string, IdealSpec>> fixtures;
    fixtures.push_back({"nok3", no_k_equal(3, 7)});
    fixtures.push_back({"nok4", no_k_equal(4, 7)});
    fixtures.push_back({"sum<=2 staircase", closure_of(2, {6, 6}, {{2, 0}, {1, 1}, {0, 2}})});
    fixtures.push_back({"weighted 2,1 M5", from_weighted({Rational(2), Rational(1)},
                                                         Rational(5), {6, 6})});
    fixtures.push_back({"box+axes", box_ideal_22_axes({6, 6})});
    fixtures.push_back(
        {"staircase (2,1),(0,3)", closure_of(2, {6, 6}, {{2, 1}, {0, 3}})});
    fixtures.push_back(
        {"bicolored sum<=2 plus tall axis", closure_of(2, {7, 6}, {{2, 0}, {1, 1}, {0, 2}, {5, 0}})});

    for (auto& [name, spec] : fixtures) {
        for (int d = 1; d <= 2; ++d) {
            int maxtotal = 5;
            if (spec.m == 1) {
                for (int n = 0; n <= maxtotal; ++n) {
                    if (n + 2 > spec.box[0]) continue;
                    auto cmp = betti_both(spec, d, {{n}});
                    CAPTURE(name, d, n);
                    CHECK(cmp.agree);
                }
            } else {
                for (int a = 0; a <= maxtotal; ++a)
                    for (int b = 0; a + b <= maxtotal; ++b) {
                        if (a + 2 > spec.box[0] || b + 2 > spec.box[1]) continue;
                        auto cmp = betti_both(spec, d, {{a, b}});
                        CAPTURE(name, d, a, b);
                        CHECK(cmp.agree);
                    }
            }
        }
    }
}

TEST_CASE("relations: decreasing family") {
    auto nok3 = no_k_equal(3, 7);
    auto rels = hom_relation_instances(nok3, 2, {{4}});
    REQUIRE(rels.size() == 1);
    CHECK(rels[0].terms.size() == 4);  // one term per omitted point of {1,2,3,4}
    int deg = degree(*rels[0].terms.begin()->second, 2);
    for (auto& [key, e] : rels[0].terms) CHECK(degree(*e, 2) == deg);

    // degenerate J: two points, nothing critical below (3)
    CHECK(hom_relation_instances(nok3, 2, {{2}}).empty());
}

TEST_CASE("relations: bicolored families are degree-homogeneous and structural") {
    auto ip = box_ideal_22_axes({6, 6});
    for (int d : {1, 2}) {
        auto rels = hom_relation_instances(ip, d, {{4, 4}});
        CHECK_FALSE(rels.empty());
        for (auto& sum : rels) {
            REQUIRE_FALSE(sum.empty());
            int deg = degree(*sum.terms.begin()->second, d);
            for (auto& [key, e] : sum.terms) {
                CHECK(degree(*e, d) == deg);
                auto pts = expr_points(*e);
                std::sort(pts.begin(), pts.end());
                CHECK(std::adjacent_find(pts.begin(), pts.end()) == pts.end());
            }
        }
    }
}

TEST_CASE("relations: curly-over-bracket identity shows up") {
    auto ip = box_ideal_22_axes({6, 6});
    auto rels = hom_relation_instances(ip, 2, {{3, 4}});
    bool found = false;
    for (auto& sum : rels)
        for (auto& [key, e] : sum.terms)
            if (key == "{x[1,1],x[1,2],x[1,3],[{x[2,1],x[2,2],x[2,3]},x[2,4]]}") found = true;
    CHECK(found);
}

TEST_CASE("regime errors") {
    auto rect = box_ideal_22({4, 4});
    CHECK_THROWS_AS(enumerate_basis(rect, 2, {{2, 2}}), Error);

    IdealSpec m3{3, {5, 5, 5}, {}, false, false};
    detail::for_each_tuple(Tuple{5, 5, 5}, [&](const Tuple& t) {
        if (t[0] <= 2 && t[1] <= 2 && t[2] <= 2) m3.members.insert(t);
    });
    m3.members.insert({3, 0, 0});
    m3.members.insert({0, 3, 0});
    m3.members.insert({0, 0, 3});
    CHECK_THROWS_AS(enumerate_basis(m3, 1, {{3, 3, 3}}), Error);
    // the heuristic path still counts curly-bracket classes
    auto t = betti_basis(m3, 1, {{3, 3, 3}}, true);
    CHECK(t.rank(5) == 0);
}

TEST_CASE("duplicate freeness of enumeration") {
    std::vector<IdealSpec> fixtures = {no_k_equal(3, 7), box_ideal_22_axes({6, 6})};
    for (const auto& spec : fixtures) {
        ColorVector nvec = spec.m == 1 ? ColorVector{{5}} : ColorVector{{2, 3}};
        for (int d = 1; d <= 2; ++d) {
            auto basis = enumerate_basis(spec, d, nvec);
            std::set<std::string> keys;
            for (auto& e : basis) {
                CHECK(validate_generator(*e, spec, d, nvec).ok);
                CHECK(keys.insert(to_string(*e)).second);
            }
        }
    }
}

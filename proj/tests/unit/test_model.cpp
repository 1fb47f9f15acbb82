#include "doctest.h"

#include "selfimp/model.hpp"

#include <algorithm>

using namespace selfimp;
using namespace selfimp::model;

namespace {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_SUITE("model") {
    TEST_CASE("identity curve, one index") {
        auto m = build_sort_model({{0}}, {ParamDist::uniform(0, 1)}, {Curve::affine(1, 0, 0, 1)}, 0);
        Rng rng(1);
        for (int t = 0; t < 100; ++t) {
            auto inst = m.sample(rng);
            CHECK(inst.x[0] >= 0.0);
            CHECK(inst.x[0] <= 1.0);
        }
        CHECK(m.curves[0](0.25) == doctest::Approx(0.25));
    }

    TEST_CASE("curves u and -u cross once and are accepted") {
        auto m = build_sort_model({{0, 1}}, {ParamDist::uniform(-1, 1)},
                                  {Curve::affine(1, 0, -1, 1), Curve::affine(-1, 0, -1, 1)}, 0);
        CHECK(count_crossings(m.curves[0], m.curves[1], -1, 1) == 1);
    }

    TEST_CASE("monotone cubics have no extrema") {
        Curve up({0, 0.3, 0.7, 1}, {0, 1, 1.5, 4});
        Curve down({0, 0.5, 1}, {2, 1, -3});
        auto m = build_sort_model({{0, 1}, {2, 3}}, {ParamDist::uniform(0, 1), ParamDist::uniform(0, 1)},
                                  {up, down, up, down}, 0);
        for (auto& c : m.curves) CHECK(c.extrema() == 0);
        // Monotone between knots as well.
        double prev = up(0);
        for (int s = 1; s <= 1000; ++s) {
            double v = up(s / 1000.0);
            CHECK(v > prev);
            prev = v;
        }
    }

    TEST_CASE("too many extrema rejected") {
        Curve wavy({0, 0.5, 1}, {0, 1, 0.2});
        CHECK(wavy.extrema() == 1);
        CHECK_THROWS_AS(build_sort_model({{0}}, {ParamDist::uniform(0, 1)}, {wavy}, 0), ModelViolation);
        CHECK_NOTHROW(build_sort_model({{0}}, {ParamDist::uniform(0, 1)}, {wavy}, 1));
    }

    TEST_CASE("point-mass parameter only with explicit permission") {
        CHECK_THROWS_AS(build_sort_model({{0}}, {ParamDist::point(3)}, {Curve::affine(1, 0, 0, 1)}, 0), ModelViolation);
        BuildOptions opt;
        opt.allow_degenerate = true;
        auto m = build_sort_model({{0}}, {ParamDist::point(3)}, {Curve::affine(1, 0, 0, 1)}, 0, opt);
        Rng rng(2);
        CHECK(m.sample(rng).x[0] == doctest::Approx(3.0));
    }

    TEST_CASE("forced offset within a group") {
        auto m = build_sort_model({{0, 1}}, {ParamDist::uniform(0, 1)},
                                  {Curve::affine(1, 0, 0, 1), Curve::affine(1, 1, 0, 1)}, 0);
        Rng rng(3);
        for (int t = 0; t < 50; ++t) {
            auto inst = m.sample(rng);
            CHECK(inst.x[1] == doctest::Approx(inst.x[0] + 1));
        }
    }

    TEST_CASE("partition must cover every index once") {
        CHECK_THROWS_AS(build_sort_model({{0}, {0}}, {ParamDist::uniform(0, 1), ParamDist::uniform(0, 1)},
                                         {Curve::affine(1, 0, 0, 1)}, 0),
                        ModelViolation);
        CHECK_THROWS_AS(build_sort_model({}, {}, {}, 0), ModelViolation);
    }

    TEST_CASE("constant DT point") {
        Poly2 cx{1, {2, 0, 0}}, cy{1, {5, 0, 0}};
        auto m = build_dt_model({{0}}, {PlaneDist::product(ParamDist::uniform(0, 1), ParamDist::uniform(0, 1))}, {cx},
                                {cy}, 1);
        Rng rng(4);
        for (int t = 0; t < 10; ++t) CHECK(m.sample(rng).p[0] == Point{2, 5});
        CHECK(m.const_set() == std::vector<std::uint32_t>{0});
    }

    TEST_CASE("exponent order is lexicographic on the tuple") {
        auto e = Poly2::exponents(2);
        std::vector<std::pair<int, int>> want{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {2, 0}};
        CHECK(e == want);
    }

    TEST_CASE("two seeds give matching marginals") {
        Rng g(9);
        SortSpec spec;
        spec.family = "mixed";
        spec.n = 6;
        auto m = generate_sort_model(spec, g);
        Rng r1(100), r2(200);
        for (std::size_t i = 0; i < m.n; ++i) {
            std::vector<double> a, b;
            Rng s1(100 + i), s2(900 + i);
            for (int t = 0; t < 10000; ++t) {
                a.push_back(m.sample(s1).x[i]);
                b.push_back(m.sample(s2).x[i]);
            }
            CHECK(ks_statistic(a, b) < 0.05);
        }
    }

    TEST_CASE("generation is reproducible and draws are numbered") {
        SortSpec spec;
        spec.n = 20;
        Rng g1(5), g2(5);
        auto m1 = generate_sort_model(spec, g1);
        auto m2 = generate_sort_model(spec, g2);
        CHECK(m1.groups == m2.groups);
        SortModelSource s1(m1, 77), s2(m2, 77);
        for (int t = 0; t < 5; ++t) {
            auto a = s1.take("t"), b = s2.take("t");
            CHECK(a.x == b.x);
            CHECK(a.draw == static_cast<std::uint64_t>(t));
        }
    }

    TEST_CASE("starved source names its stage") {
        auto m = build_sort_model({{0}}, {ParamDist::uniform(0, 1)}, {Curve::affine(1, 0, 0, 1)}, 0);
        SortModelSource src(m, 1, 2);
        src.take("a");
        src.take("b");
        try {
            src.take("vlist");
            FAIL("expected starvation");
        } catch (const SampleStarvation& e) {
            CHECK(e.stage == "vlist");
        }
    }

    TEST_CASE("generated families validate") {
        for (const char* fam : {"uniform_iid", "affine", "monotone", "wavy", "fan", "mixed"}) {
            SortSpec spec;
            spec.family = fam;
            spec.n = 40;
            spec.c0 = 2;
            spec.num_groups = 2;
            Rng g(13);
            auto m = generate_sort_model(spec, g);
            CHECK(m.n == 40);
            std::size_t covered = 0;
            for (auto& grp : m.groups) covered += grp.size();
            CHECK(covered == 40);
        }
        for (const char* fam : {"uniform", "poly", "mixed", "clustered"}) {
            DtSpec spec;
            spec.family = fam;
            spec.n = 30;
            Rng g(17);
            auto m = generate_dt_model(spec, g);
            CHECK(m.n == 30);
        }
    }
}

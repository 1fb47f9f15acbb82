#include "doctest.h"

#include "selfimp/vlist.hpp"

#include <algorithm>

using namespace selfimp;
using namespace selfimp::vlist;

namespace {

model::SortInstance inst(std::vector<double> x) { return {std::move(x), 0}; }

}  // namespace

TEST_SUITE("vlist") {
    TEST_CASE("two instances, two pivots") {
        auto v = build_vlist({inst({1, 3}), inst({2, 4})});
        CHECK(v.pivots == std::vector<double>{2, 4});
        CHECK(v.lambda == 2);
    }

    TEST_CASE("single value") {
        auto v = build_vlist({inst({7})});
        CHECK(v.pivots == std::vector<double>{7});
    }

    TEST_CASE("interval lookup is half-open") {
        VList v;
        v.pivots = {2, 4};
        CHECK(v.interval_of(3) == 1);
        CHECK(v.interval_of(4) == 2);
        CHECK(v.interval_of(2) == 1);
        CHECK(v.interval_of(-1e9) == 0);
        CHECK(v.interval_of(1e9) == 2);
    }

    TEST_CASE("pivots are sorted and interval lookup matches a linear scan") {
        model::SortSpec spec;
        spec.n = 30;
        Rng g(4);
        auto m = model::generate_sort_model(spec, g);
        model::SortModelSource src(m, 9);
        auto v = build_vlist(src.take(lambda_desk(30), "vlist"));
        CHECK(v.n() == 30);
        CHECK(std::is_sorted(v.pivots.begin(), v.pivots.end()));
        Rng r(2);
        std::uniform_real_distribution<double> u(v.pivots.front() - 1, v.pivots.back() + 1);
        for (int t = 0; t < 1000; ++t) {
            double x = u(r);
            std::uint32_t k = 0;
            while (k < v.n() && v.pivots[k] <= x) ++k;
            REQUIRE(v.interval_of(x) == k);
        }
    }

    TEST_CASE("occupancy stays bounded on fresh instances") {
        model::SortSpec spec;
        spec.n = 40;
        Rng g(6);
        auto m = model::generate_sort_model(spec, g);
        model::SortModelSource src(m, 11);
        auto v = build_vlist(src.take(lambda_desk(40), "vlist"));
        auto occ = occupancy(v, src.take(500, "fresh"));
        CHECK(occ.mean.size() == 41);
        CHECK_FALSE(occ.violation);
        double total = 0;
        for (double q : occ.mean) total += q;
        CHECK(total == doctest::Approx(40.0));
    }

    TEST_CASE("collapsed pivots are a model violation") {
        std::vector<model::SortInstance> s(4, inst({5, 5}));
        CHECK_THROWS_AS(build_vlist(s), ModelViolation);
    }

    TEST_CASE("lambda knobs") {
        CHECK(lambda_desk(2) >= 64);
        CHECK(lambda_desk(1000) >= 6908);
        CHECK(lambda_theory(100) == doctest::Approx(std::ceil(1e4 * std::log(100.0))));
    }
}

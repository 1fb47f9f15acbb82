#include "doctest.h"

#include "selfimp/encodings.hpp"

#include <algorithm>
#include <numeric>

using namespace selfimp;
using namespace selfimp::encodings;

namespace {

// Direct definition: predecessor among earlier values, 1-based, or 0.
Code pi_brute(const std::vector<double>& z) {
    Code c(z.size(), 0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        double best = -INFINITY;
        for (std::size_t j = 0; j < i; ++j)
            if (z[j] < z[i] && z[j] > best) {
                best = z[j];
                c[i] = static_cast<std::uint32_t>(j + 1);
            }
    }
    return c;
}

}  // namespace

TEST_SUITE("encodings") {
    TEST_CASE("b code") {
        vlist::VList v;
        v.pivots = {2, 4};
        std::vector<double> z{1.5, 3.7};
        CHECK(b_encode(z, v) == Code{0, 1});
    }

    TEST_CASE("pi code examples") {
        std::vector<double> a{10, 20, 30}, b{30, 20, 10}, c{20, 10, 30};
        CHECK(pi_encode(a) == Code{0, 1, 2});
        CHECK(pi_encode(b) == Code{0, 0, 0});
        CHECK(pi_encode(c) == Code{0, 0, 1});
    }

    TEST_CASE("sort from pi example") {
        std::vector<double> z{20, 10, 30};
        Code c{0, 0, 1};
        CHECK(sort_from_pi(c) == std::vector<std::uint32_t>{1, 0, 2});
        CHECK(sort_from_pi(c, z) == std::vector<std::uint32_t>{1, 0, 2});
    }

    TEST_CASE("ties and forward pointers are rejected") {
        std::vector<double> z{1, 2, 1};
        CHECK_THROWS_AS(pi_encode(z), DuplicateValue);
        Code bad{0, 2};
        CHECK_THROWS_AS(sort_from_pi(bad), InconsistentCode);
        Code self{1};
        CHECK_THROWS_AS(sort_from_pi(self), InconsistentCode);
        std::vector<double> w{1, 2};
        Code wrong{0, 0};
        CHECK_THROWS_AS(sort_from_pi(wrong, w), InconsistentCode);
    }

    TEST_CASE("round trip on random permutations") {
        Rng rng(12);
        for (int t = 0; t < 300; ++t) {
            std::size_t n = 1 + rng() % 40;
            std::vector<double> z(n);
            std::iota(z.begin(), z.end(), 0.0);
            std::shuffle(z.begin(), z.end(), rng);
            auto c = pi_encode(z);
            REQUIRE(c == pi_brute(z));
            auto order = sort_from_pi(c, z);
            std::vector<std::uint32_t> want(n);
            std::iota(want.begin(), want.end(), 0u);
            std::sort(want.begin(), want.end(), [&](auto a, auto b) { return z[a] < z[b]; });
            REQUIRE(order == want);
        }
    }
}

#include "doctest.h"

#include "selfimp/predicates.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <random>

using namespace selfimp;
using geom::incircle;
using geom::incircle_perturbed;
using geom::orient;
using Q = boost::multiprecision::cpp_rational;

namespace {

int sgn(const Q& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

int orient_q(Point a, Point b, Point c) {
    Q ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
    return sgn((ax - cx) * (by - cy) - (ay - cy) * (bx - cx));
}

int incircle_q(Point a, Point b, Point c, Point d) {
    Q adx = Q(a.x) - Q(d.x), ady = Q(a.y) - Q(d.y);
    Q bdx = Q(b.x) - Q(d.x), bdy = Q(b.y) - Q(d.y);
    Q cdx = Q(c.x) - Q(d.x), cdy = Q(c.y) - Q(d.y);
    Q al = adx * adx + ady * ady, bl = bdx * bdx + bdy * bdy, cl = cdx * cdx + cdy * cdy;
    return sgn(al * (bdx * cdy - cdx * bdy) + bl * (cdx * ady - adx * cdy) + cl * (adx * bdy - bdx * ady));
}

// Points a few ulps off a line or circle, where naive evaluation is unreliable.
Point jitter(Point p, std::mt19937_64& rng, int ulps) {
    std::uniform_int_distribution<int> k(-ulps, ulps);
    double x = p.x, y = p.y;
    for (int s = k(rng); s != 0; s += (s > 0 ? -1 : 1)) x = std::nextafter(x, s > 0 ? INFINITY : -INFINITY);
    for (int s = k(rng); s != 0; s += (s > 0 ? -1 : 1)) y = std::nextafter(y, s > 0 ? INFINITY : -INFINITY);
    return {x, y};
}

}  // namespace

TEST_SUITE("predicates") {
    TEST_CASE("orient signs on small cases") {
        CHECK(orient({0, 0}, {1, 0}, {0, 1}) > 0);
        CHECK(orient({0, 0}, {1, 1}, {2, 2}) == 0);
        CHECK(orient({0, 0}, {0, 1}, {1, 0}) < 0);
    }

    TEST_CASE("incircle signs on small cases") {
        CHECK(incircle({0, 0}, {1, 0}, {0, 1}, {1, 1}) == 0);
        CHECK(incircle({0, 0}, {1, 0}, {0, 1}, {0.5, 0.5}) > 0);
        CHECK(incircle({0, 0}, {1, 0}, {0, 1}, {2, 2}) < 0);
    }

    TEST_CASE("near-degenerate orient matches rational evaluation") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1, 1);
        int disagreements = 0;
        for (int t = 0; t < 20000; ++t) {
            Point a{u(rng), u(rng)}, b{u(rng), u(rng)};
            double s = u(rng);
            Point c{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
            c = jitter(c, rng, 3);
            if (orient(a, b, c) != orient_q(a, b, c)) ++disagreements;
        }
        CHECK(disagreements == 0);
    }

    TEST_CASE("near-cocircular incircle matches rational evaluation") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> ang(0, 6.283185307179586);
        int disagreements = 0;
        for (int t = 0; t < 20000; ++t) {
            double r = 1 + 1000 * std::uniform_real_distribution<double>(0, 1)(rng);
            Point ctr{std::uniform_real_distribution<double>(-50, 50)(rng), 3.0};
            Point p[4];
            for (auto& q : p) {
                double th = ang(rng);
                q = jitter({ctr.x + r * std::cos(th), ctr.y + r * std::sin(th)}, rng, 2);
            }
            if (orient_q(p[0], p[1], p[2]) <= 0) std::swap(p[0], p[1]);
            if (incircle(p[0], p[1], p[2], p[3]) != incircle_q(p[0], p[1], p[2], p[3])) ++disagreements;
        }
        CHECK(disagreements == 0);
    }

    TEST_CASE("compare_distance matches rational evaluation on near ties") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int t = 0; t < 5000; ++t) {
            Point p{u(rng), u(rng)}, a{u(rng), u(rng)};
            // Reflect a across a random line through p, then jitter.
            Point b = jitter({2 * p.x - a.x, 2 * p.y - a.y}, rng, 2);
            Q da = (Q(a.x) - Q(p.x)) * (Q(a.x) - Q(p.x)) + (Q(a.y) - Q(p.y)) * (Q(a.y) - Q(p.y));
            Q db = (Q(b.x) - Q(p.x)) * (Q(b.x) - Q(p.x)) + (Q(b.y) - Q(p.y)) * (Q(b.y) - Q(p.y));
            REQUIRE(geom::compare_distance(p, a, b) == sgn(da - db));
        }
    }

    TEST_CASE("perturbed incircle picks exactly one diagonal of a cocircular quad") {
        Point sq[4] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        for (int rot = 0; rot < 4; ++rot) {
            Point a = sq[rot], b = sq[(rot + 1) % 4], c = sq[(rot + 2) % 4], d = sq[(rot + 3) % 4];
            bool diag_ac = incircle_perturbed(a, b, c, d) < 0 && incircle_perturbed(a, c, d, b) < 0;
            bool diag_bd = incircle_perturbed(a, b, d, c) < 0 && incircle_perturbed(b, c, d, a) < 0;
            CHECK(diag_ac != diag_bd);
        }
        CHECK(incircle_perturbed({0, 0}, {1, 0}, {0, 1}, {0.5, 0.5}) > 0);
    }

    TEST_CASE("perturbed incircle is invariant under rotation of the triangle") {
        Point a{0, 0}, b{2, 0}, c{2, 2}, d{0, 2};
        int s = incircle_perturbed(a, b, c, d);
        CHECK(s != 0);
        CHECK(incircle_perturbed(b, c, a, d) == s);
        CHECK(incircle_perturbed(c, a, b, d) == s);
    }
}

#include "doctest.h"

#include "selfimp/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace selfimp;
using namespace selfimp::geom;

namespace {

std::vector<Point> random_points(std::size_t n, Rng& rng, double lo = 0, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Point> p(n);
    for (auto& q : p) q = {u(rng), u(rng)};
    return p;
}

bool edge_connected(const Mesh& m, const std::vector<std::int32_t>& set) {
    if (set.empty()) return true;
    std::set<std::int32_t> in(set.begin(), set.end()), seen{set[0]};
    std::vector<std::int32_t> st{set[0]};
    while (!st.empty()) {
        auto t = st.back();
        st.pop_back();
        for (auto o : m.adj[static_cast<std::size_t>(t)])
            if (o >= 0 && in.count(o) && seen.insert(o).second) st.push_back(o);
    }
    return seen.size() == in.size();
}

}  // namespace

TEST_SUITE("geom") {
    TEST_CASE("three points, one triangle") {
        std::vector<Point> p{{0, 0}, {1, 0}, {0, 1}};
        auto m = delaunay(p);
        CHECK(m.size() == 1);
        CHECK(mesh_consistent(m));
    }

    TEST_CASE("interior point splits the triangle") {
        std::vector<Point> p{{0, 0}, {4, 0}, {0, 4}, {1, 1}};
        auto m = delaunay(p);
        REQUIRE(m.size() == 3);
        for (auto& t : m.tris) CHECK(std::count(t.begin(), t.end(), 3u) == 1);
        CHECK(empty_circumdisk_violations(m) == 0);
    }

    TEST_CASE("random sets pass the empty-circumdisk audit") {
        Rng rng(1);
        for (std::size_t n : {4, 10, 64, 200, 512}) {
            auto p = random_points(n, rng);
            auto m = delaunay(p);
            CHECK(mesh_consistent(m));
            CHECK(empty_circumdisk_violations(m) == 0);
            // Euler: T = 2n - h - 2
            std::size_t hull = 0;
            for (auto& a : m.adj)
                for (auto o : a) hull += o < 0;
            CHECK(m.size() == 2 * n - hull - 2);
        }
    }

    TEST_CASE("cocircular grid: result does not depend on insertion order") {
        std::vector<Point> p;
        for (int x = 0; x < 7; ++x)
            for (int y = 0; y < 7; ++y) p.push_back({double(x), double(y)});
        auto ref = delaunay(p);
        CHECK(empty_circumdisk_violations(ref) == 0);
        CHECK(mesh_consistent(ref));
        CHECK(ref.size() == 2 * 36);
        Rng rng(3);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<std::uint32_t> order(p.size());
            std::iota(order.begin(), order.end(), 0u);
            std::shuffle(order.begin(), order.end(), rng);
            Triangulation t;
            for (auto i : order) t.insert(p[i], i);
            CHECK(triangle_set(t.mesh()) == triangle_set(ref));
        }
    }

    TEST_CASE("collinear points stay pending until a triangle exists") {
        Triangulation t;
        for (int i = 0; i < 5; ++i) t.insert({double(i), double(2 * i)}, static_cast<std::uint32_t>(i));
        CHECK(t.mesh().size() == 0);
        t.insert({0, 1}, 5);
        auto m = t.mesh();
        CHECK(m.size() == 4);
        CHECK(mesh_consistent(m));
        CHECK(empty_circumdisk_violations(m) == 0);
    }

    TEST_CASE("points on a hull edge") {
        std::vector<Point> p{{0, 0}, {4, 0}, {0, 4}, {2, 0}, {1, 0}, {3, 0}};
        auto m = delaunay(p);
        CHECK(m.size() == 4);
        CHECK(mesh_consistent(m));
    }

    TEST_CASE("duplicates are rejected") {
        std::vector<Point> p{{0, 0}, {1, 0}, {0, 1}, {1, 0}};
        CHECK_THROWS_AS(delaunay(p), DuplicateValue);
        std::vector<Point> q{{0, 0}, {0, 0}};
        CHECK_THROWS_AS(delaunay(q), DuplicateValue);
        Triangulation t;
        t.insert({0, 0}, 0);
        t.insert({1, 0}, 1);
        t.insert({0, 1}, 2);
        CHECK_THROWS_AS(t.insert({1, 0}, 3), DuplicateValue);
        CHECK(t.vertex_count() == 3);
    }

    TEST_CASE("copied triangulation keeps growing independently") {
        Rng rng(8);
        auto p = random_points(40, rng);
        Triangulation a;
        for (std::uint32_t i = 0; i < 20; ++i) a.insert(p[i], i);
        Triangulation b = a;
        for (std::uint32_t i = 20; i < 40; ++i) b.insert(p[i], i);
        std::vector<Point> first(p.begin(), p.begin() + 20);
        CHECK(triangle_set(a.mesh()) == triangle_set(delaunay(first)));
        CHECK(triangle_set(b.mesh()) == triangle_set(delaunay(p)));
    }

    TEST_CASE("locate matches the exhaustive scan") {
        Rng rng(2);
        auto p = random_points(100, rng);
        p.push_back({-1, -1});
        p.push_back({2, -1});
        p.push_back({0.5, 3});
        auto m = delaunay(p);
        Point cen{(m.corner(0, 0).x + m.corner(0, 1).x + m.corner(0, 2).x) / 3,
                  (m.corner(0, 0).y + m.corner(0, 1).y + m.corner(0, 2).y) / 3};
        CHECK(locate(m, cen) == 0);
        LocateContext ctx;
        std::uniform_real_distribution<double> u(0, 1);
        for (int s = 0; s < 1000; ++s) {
            Point q{u(rng), u(rng)};
            REQUIRE(locate(m, q, &ctx) == locate_scan(m, q));
        }
        // Vertices and edge midpoints resolve to the lowest containing id.
        for (std::uint32_t v = 0; v < 100; ++v) CHECK(locate(m, m.pts[v], &ctx) == locate_scan(m, m.pts[v]));
        CHECK_THROWS_AS(locate(m, {10, 10}), OutsideMesh);
    }

    TEST_CASE("circumdisk BFS equals the scan and is connected") {
        Rng rng(4);
        for (int trial = 0; trial < 20; ++trial) {
            auto p = random_points(60, rng);
            auto m = delaunay(p);
            std::uniform_real_distribution<double> u(0.1, 0.9);
            for (int s = 0; s < 50; ++s) {
                Point q{u(rng), u(rng)};
                std::int32_t t;
                try {
                    t = locate(m, q);
                } catch (const OutsideMesh&) {
                    continue;
                }
                auto d = circumdisk_bfs(m, q, t);
                REQUIRE(d == circumdisk_scan(m, q));
                CHECK(std::binary_search(d.begin(), d.end(), t));
                CHECK(edge_connected(m, d));
            }
        }
    }

    TEST_CASE("point near a vertex, away from other circumdisks") {
        std::vector<Point> p{{0, 0}, {10, 0}, {0, 10}, {10, 10}, {5, 4}};
        auto m = delaunay(p);
        Point q{5, 4.001};
        auto t = locate(m, q);
        auto d = circumdisk_bfs(m, q, t);
        CHECK(d == circumdisk_scan(m, q));
        CHECK(std::binary_search(d.begin(), d.end(), t));
    }

    TEST_CASE("canonical set: net audit, huge triangle, sizes") {
        Rng rng(5);
        auto pool = random_points(4000, rng);
        NetConfig cfg;
        auto cv = build_canonical_v(pool, 16, cfg, rng);
        CHECK(cv.net.size() <= net_size(16, cfg.c_net));
        CHECK(cv.v.size() == cv.net.size() + 3);
        CHECK(cv.audit_misses == 0);
        CHECK(mesh_consistent(cv.del));
        CHECK(empty_circumdisk_violations(cv.del) == 0);
        for (auto& q : pool) CHECK(inside_triangle(cv.huge, q));
        Rng r2(6);
        auto audit = audit_net(pool, cv.net, 16, 2000, r2);
        CHECK(audit.misses == 0);
        // Every pool point locates inside the mesh.
        LocateContext ctx;
        for (std::size_t i = 0; i < 200; ++i) CHECK(locate(cv.del, pool[i], &ctx) >= 0);

        auto one = build_canonical_v(pool, 1, cfg, rng);
        CHECK(one.net.size() <= 8);
    }

    TEST_CASE("canonical set over a single clustered region") {
        Rng rng(7);
        std::vector<Point> pool = random_points(1000, rng, 0.5, 0.5001);
        auto cv = build_canonical_v(pool, 8, NetConfig{}, rng);
        CHECK(cv.audit_misses == 0);
    }

    TEST_CASE("voronoi: two points split by the bisector") {
        std::vector<Point> p{{0, 0}, {2, 0}};
        auto vd = voronoi_from_delaunay(delaunay(p));
        CHECK(voronoi_contains(vd, 0, {0.9, 1.5}));
        CHECK_FALSE(voronoi_contains(vd, 0, {1.1, 1.5}));
        CHECK(voronoi_contains(vd, 1, {1.1, -1.5}));
        for (auto& c : vd.cells[0]) CHECK(c.x <= 1.0 + 1e-12);
    }

    TEST_CASE("voronoi: equilateral cells meet at the circumcenter") {
        std::vector<Point> p{{0, 0}, {2, 0}, {1, std::sqrt(3.0)}};
        auto vd = voronoi_from_delaunay(delaunay(p));
        Point cc = circumcenter(p[0], p[1], p[2]);
        for (std::uint32_t s = 0; s < 3; ++s) {
            bool has = false;
            for (auto& c : vd.cells[s]) has |= std::hypot(c.x - cc.x, c.y - cc.y) < 1e-9;
            CHECK(has);
        }
    }

    TEST_CASE("voronoi: nearest-site audit") {
        Rng rng(9);
        for (std::size_t n : {1, 2, 5, 64}) {
            auto p = random_points(n, rng);
            auto vd = voronoi_from_delaunay(delaunay(p));
            std::uniform_real_distribution<double> ux(vd.xlo, vd.xhi), uy(vd.ylo, vd.yhi);
            for (int s = 0; s < 1000; ++s) {
                Point q{ux(rng), uy(rng)};
                std::uint32_t best = 0;
                for (std::uint32_t i = 1; i < n; ++i)
                    if (compare_distance(q, p[i], p[best]) < 0) best = i;
                REQUIRE(voronoi_contains(vd, best, q));
            }
        }
    }
}

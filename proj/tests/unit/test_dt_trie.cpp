#include "doctest.h"

#include "selfimp/dt_trie.hpp"

#include <cmath>
#include <numeric>

using namespace selfimp;
using namespace selfimp::trie;

namespace {

std::vector<Point> uniform(std::size_t n, Rng& rng, double lo = 0, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Point> p(n);
    for (auto& q : p) q = {u(rng), u(rng)};
    return p;
}

// Point i jitters around its own center.
struct Jitter {
    std::vector<Point> centers;
    double radius;
    std::vector<Point> sample(Rng& rng) const {
        std::uniform_real_distribution<double> u(-radius, radius);
        std::vector<Point> p;
        for (auto& c : centers) p.push_back({c.x + u(rng), c.y + u(rng)});
        return p;
    }
};

geom::Mesh canonical_mesh(std::uint64_t seed) {
    Rng rng(seed);
    auto pool = uniform(3000, rng);
    return geom::build_canonical_v(pool, 8, geom::NetConfig{}, rng).del;
}

}  // namespace

TEST_SUITE("dt_trie") {
    TEST_CASE("triangle encoding equals the exhaustive scan") {
        auto mesh = canonical_mesh(1);
        Rng rng(2);
        auto p = uniform(200, rng);
        auto code = triangle_encode(mesh, p);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(code[i] == static_cast<std::uint32_t>(geom::locate_scan(mesh, p[i])));
    }

    TEST_CASE("triangle trie: empty, frozen, deterministic") {
        auto mesh = canonical_mesh(1);
        TriangleTrie t(3);
        CHECK_THROWS_AS(t.freeze(mesh), InvalidArgument);
        std::vector<Point> p{{0.2, 0.2}, {0.5, 0.7}, {0.9, 0.1}};
        t.train(p, mesh);
        t.train(p, mesh);
        t.freeze(mesh);
        CHECK_THROWS_AS(t.train(p, mesh), FrozenTrie);
        CHECK(t.labels().leaf_count() == 1);
        auto r = t.query(p, mesh);
        CHECK(r.hit);
        CHECK(r.code == triangle_encode(mesh, p));
    }

    TEST_CASE("triangle trie: queries equal the oracle, hit or miss") {
        auto mesh = canonical_mesh(3);
        Rng rng(4);
        Jitter model{uniform(6, rng, 0.1, 0.9), 0.01};
        TriangleTrie t(6);
        for (int s = 0; s < 2000; ++s) t.train(model.sample(rng), mesh);
        t.freeze(mesh);
        int hits = 0;
        geom::LocateContext ctx;
        for (int s = 0; s < 2000; ++s) {
            auto p = model.sample(rng);
            auto r = t.query(p, mesh, &ctx);
            REQUIRE(r.code == triangle_encode(mesh, p));
            hits += r.hit;
        }
        CHECK(hits > 1900);
        for (int s = 0; s < 500; ++s) {
            auto p = uniform(6, rng);
            REQUIRE(t.query(p, mesh).code == triangle_encode(mesh, p));
        }
        // Far from every trained triangle: a forced miss.
        auto p = model.sample(rng);
        p[0] = {1e3, 1e3};
        auto r = t.query(p, mesh);
        CHECK_FALSE(r.hit);
        CHECK(r.matched == 0);
        CHECK(r.code == triangle_encode(mesh, p));
    }

    TEST_CASE("triangle trie: wide fan-out uses slab search, boundary points defer") {
        auto mesh = canonical_mesh(5);
        Rng rng(6);
        TriangleTrie t(2);
        for (int s = 0; s < 5000; ++s) t.train(uniform(2, rng), mesh);
        t.freeze(mesh);
        CHECK(t.labels().nodes()[0].kids.size() > 50);
        for (int s = 0; s < 3000; ++s) {
            auto p = uniform(2, rng);
            REQUIRE(t.query(p, mesh).code == triangle_encode(mesh, p));
        }
        // Vertices and edge midpoints of the mesh.
        for (std::size_t k = 0; k < std::min<std::size_t>(mesh.size(), 300); ++k) {
            auto a = mesh.corner(k, 0), b = mesh.corner(k, 1);
            for (Point q : {a, Point{(a.x + b.x) / 2, (a.y + b.y) / 2}}) {
                if (q.x < 0 || q.x > 1 || q.y < 0 || q.y > 1) continue;
                std::vector<Point> p{q, {0.5, 0.5}};
                REQUIRE(t.query(p, mesh).code == triangle_encode(mesh, p));
            }
        }
    }

    TEST_CASE("split-order code: layout and tree reconstruction") {
        std::vector<Point> p{{0, 0}, {2, 0.5}, {3, -0.5}};
        auto c = split_order_encode(p);
        REQUIRE(c.size() == 8);
        CHECK(std::vector<std::uint32_t>(c.begin(), c.begin() + 3) == std::vector<std::uint32_t>{0, 1, 2});
        CHECK(std::vector<std::uint32_t>(c.begin() + 3, c.begin() + 6) == std::vector<std::uint32_t>{0, 1, 0});
        CHECK(std::vector<std::uint32_t>(c.begin() + 6, c.end()) == std::vector<std::uint32_t>{1, 1});
        Rng rng(7);
        for (int s = 0; s < 50; ++s) {
            auto q = uniform(1 + rng() % 40, rng);
            auto all = std::make_shared<const std::vector<Point>>(q);
            std::vector<std::uint32_t> ids(q.size());
            std::iota(ids.begin(), ids.end(), 0u);
            auto code = split_order_encode(q);
            CHECK(splittree::same_tree(split_tree_from_code(all, ids, code), splittree::build_halving(all, ids)));
        }
        CHECK(split_order_encode(std::vector<Point>{{1, 1}}) == encodings::Code{0, 0});
    }

    TEST_CASE("split-order trie: queries equal the oracle") {
        Rng rng(8);
        for (std::uint32_t m : {1u, 2u, 5u, 12u}) {
            Jitter model{uniform(m, rng), 0.05};
            SplitOrderTrie t(m);
            CHECK_THROWS_AS(t.freeze(), InvalidArgument);
            for (int s = 0; s < 3000; ++s) t.train(model.sample(rng));
            t.freeze();
            int hits = 0;
            for (int s = 0; s < 1000; ++s) {
                auto p = model.sample(rng);
                auto r = t.query(p);
                REQUIRE(r.code == split_order_encode(p));
                hits += r.hit;
            }
            // Hits need repeated outcomes; twelve jittered points rarely repeat their orders.
            if (m <= 5) CHECK(hits > 900);
            for (int s = 0; s < 300; ++s) {
                auto p = uniform(m, rng);
                REQUIRE(t.query(p).code == split_order_encode(p));
            }
        }
    }

    TEST_CASE("split-order trie: deterministic model hits, split stage can miss alone") {
        std::vector<Point> p{{0, 0}, {1, 3}, {2, 1}, {3, 2}};
        SplitOrderTrie t(4);
        t.train(p);
        t.freeze();
        auto r = t.query(p);
        CHECK(r.hit);
        CHECK(r.code == split_order_encode(p));
        // Same x and y orders, but stretching x flips the first split axis.
        std::vector<Point> q{{0, 0}, {0.1, 3}, {0.2, 1}, {0.3, 2}};
        auto r2 = t.query(q);
        CHECK_FALSE(r2.hit);
        CHECK(r2.matched >= 8);
        CHECK(r2.code == split_order_encode(q));
    }
}

#include "doctest.h"

#include "selfimp/splittree.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace selfimp;
using namespace selfimp::splittree;

namespace {

std::vector<Point> random_points(std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Point> p(n);
    for (auto& q : p) q = {u(rng), u(rng)};
    return p;
}

// Exponentially shrinking cluster: deep, unbalanced trees.
std::vector<Point> spiral_points(std::size_t n) {
    std::vector<Point> p;
    double s = 1;
    for (std::size_t i = 0; i < n; ++i, s *= 0.7) p.push_back({s * ((i % 4) < 2 ? 1 : -1), s * ((i % 2) ? 1 : -1)});
    return p;
}

std::vector<std::uint32_t> random_subset(const SplitTree& t, double keep, Rng& rng) {
    std::bernoulli_distribution coin(keep);
    std::vector<std::uint32_t> q;
    for (auto id : t.perm)
        if (coin(rng)) q.push_back(id);
    return q;
}

}  // namespace

TEST_SUITE("splittree") {
    TEST_CASE("three collinear points") {
        auto t = build_halving({{0, 0}, {2, 0}, {3, 0}});
        REQUIRE(t.nodes.size() == 5);
        CHECK(t.nodes[0].axis == 0);
        CHECK(t.nodes[0].cut == 1.5);
        CHECK(t.nodes[1].leaf());
        CHECK(t.leaf_point(1) == 0);
        CHECK(t.nodes[2].cut == 2.5);
        CHECK(t.perm == std::vector<std::uint32_t>{0, 1, 2});
        CHECK(split_labels(t) == std::vector<std::uint32_t>{1, 1});
        CHECK(fair_split_violations(t) == 0);
    }

    TEST_CASE("preorder layout and containment") {
        Rng rng(1);
        auto t = build_halving(random_points(300, rng));
        CHECK(t.nodes.size() == 599);
        for (std::size_t u = 0; u < t.nodes.size(); ++u) {
            const auto& n = t.nodes[u];
            if (n.leaf()) continue;
            CHECK(n.left == static_cast<std::int32_t>(u) + 1);
            CHECK(n.right == static_cast<std::int32_t>(u + 2 * t.nodes[u + 1].size()));
            CHECK(n.rhat.contains(n.r));
            CHECK(t.nodes[static_cast<std::size_t>(n.left)].r.xhi <= (n.axis == 0 ? n.cut : n.r.xhi));
        }
    }

    TEST_CASE("duplicates throw") {
        CHECK_THROWS_AS(build_halving({{1, 1}, {1, 1}}), DuplicateValue);
        CHECK_THROWS_AS(build_halving({{0, 0}, {1, 1}, {1, 1}}), DuplicateValue);
    }

    TEST_CASE("labels round trip and reject bad decisions") {
        Rng rng(2);
        auto pts = std::make_shared<const std::vector<Point>>(random_points(64, rng));
        std::vector<std::uint32_t> ids(64);
        std::iota(ids.begin(), ids.end(), 0u);
        auto t = build_halving(pts, ids);
        auto lab = split_labels(t);
        CHECK(same_tree(tree_from_labels(pts, ids, lab), t));
        lab[3] ^= 1;
        CHECK_THROWS_AS(tree_from_labels(pts, ids, lab), InvalidArgument);
    }

    TEST_CASE("outer rectangles stay fair through derivation") {
        Rng rng(3);
        for (int trial = 0; trial < 200; ++trial) {
            std::size_t n = 2 + rng() % 255;
            auto pts = trial % 5 == 0 ? spiral_points(std::min<std::size_t>(n, 60)) : random_points(n, rng);
            auto t = build_halving(pts);
            REQUIRE(fair_split_violations(t) == 0);
            auto q = random_subset(t, 0.1 + 0.8 * double(trial % 9) / 8, rng);
            auto d = derive_subset(t, q);
            REQUIRE(fair_split_violations(d) == 0);
            CHECK(d.size() == q.size());
        }
    }

    TEST_CASE("derivation keeps cuts and contracts single-child chains") {
        auto t = build_halving({{0, 0}, {2, 0}, {3, 0}});
        std::vector<std::uint32_t> q{1, 2};
        auto d = derive_subset(t, q);
        REQUIRE(d.nodes.size() == 3);
        CHECK(d.nodes[0].cut == 2.5);
        CHECK(d.nodes[0].rhat == t.nodes[0].rhat);
        CHECK(d.nodes[1].rhat == t.nodes[3].rhat);
        CHECK(d.nodes[0].r == Rect{2, 0, 3, 0});
    }

    TEST_CASE("batched derivation equals one-at-a-time") {
        Rng rng(4);
        for (int trial = 0; trial < 50; ++trial) {
            auto t = build_halving(trial % 4 == 0 ? spiral_points(50) : random_points(1 + rng() % 256, rng));
            std::vector<std::vector<std::uint32_t>> subs;
            for (int s = 0; s < 8; ++s) subs.push_back(random_subset(t, 0.05 + 0.12 * s, rng));
            BatchStats st;
            auto got = derive_subsets_batched(t, subs, &st);
            std::size_t total = 0;
            for (std::size_t s = 0; s < subs.size(); ++s) {
                REQUIRE(same_tree(got[s], derive_subset(t, subs[s])));
                total += subs[s].size();
            }
            // Linear up to the inverse Ackermann factor.
            CHECK(st.uf_ops <= 8 * (t.nodes.size() + total));
        }
        auto t = build_halving({{0, 0}, {2, 0}, {3, 0}});
        CHECK_THROWS_AS(derive_subsets_batched(t, {{2, 0}}), InvalidArgument);
    }

    TEST_CASE("nearest neighbours equal brute force") {
        Rng rng(5);
        auto t = build_halving({{0, 0}, {1, 0}, {5, 0}});
        CHECK(nn_graph(t) == std::vector<std::uint32_t>{1, 0, 1});
        for (int trial = 0; trial < 60; ++trial) {
            std::size_t m = 2 + rng() % 511;
            std::vector<Point> p;
            if (trial % 3 == 0) {
                // Integer grid: many equal distances exercise the tie rule.
                std::uniform_int_distribution<int> g(0, 20);
                std::set<std::pair<int, int>> seen;
                while (p.size() < std::min<std::size_t>(m, 300)) {
                    int x = g(rng), y = g(rng);
                    if (seen.insert({x, y}).second) p.push_back({double(x), double(y)});
                }
            } else if (trial % 3 == 1) {
                p = spiral_points(std::min<std::size_t>(m, 80));
            } else {
                p = random_points(m, rng);
            }
            auto tt = build_halving(p);
            REQUIRE(nn_graph(tt) == nn_brute(p, tt.perm));
        }
    }

    TEST_CASE("triangulation from the split tree equals direct Delaunay") {
        Rng rng(6);
        for (int trial = 0; trial < 30; ++trial) {
            auto p = trial % 5 == 0 ? spiral_points(60) : random_points(8 + rng() % 400, rng);
            auto t = build_halving(p);
            ChainStats cs;
            DtConfig cfg;
            cfg.seed = static_cast<std::uint64_t>(trial);
            auto tri = dt_from_split_tree(t, {}, cfg, &cs);
            REQUIRE(geom::triangle_set(tri.mesh()) == geom::triangle_set(geom::delaunay(p)));
            for (std::size_t i = 1; i < cs.sizes.size(); ++i) CHECK(cs.sizes[i] <= (cs.sizes[i - 1] + 1) / 2);
            CHECK(cs.sizes.back() <= cfg.base);
        }
    }

    TEST_CASE("vertex labels follow the label map") {
        std::vector<Point> p{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
        auto t = build_halving(p);
        std::vector<std::uint32_t> lab{10, 11, 12, 13};
        auto tri = dt_from_split_tree(t, lab);
        for (std::uint32_t v = 0; v < tri.vertex_count(); ++v) CHECK(tri.label(v) >= 10);
    }
}

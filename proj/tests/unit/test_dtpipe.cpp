#include "doctest.h"

#include "selfimp/dtpipe.hpp"

#include <algorithm>
#include <set>

using namespace selfimp;
using namespace selfimp::dtpipe;

namespace {

std::vector<std::array<std::uint32_t, 3>> tri_set(const geom::Mesh& m) { return geom::triangle_set(m); }

Config small_config() {
    Config cfg;
    cfg.trie_cap = 300;
    cfg.net.audit_disks = 200;
    return cfg;
}

struct Trained {
    model::DtModel m;
    DtState st;
};

Trained trained(const model::DtSpec& spec, std::uint64_t seed, const Config& cfg = small_config(),
                const model::BuildOptions& opt = {}) {
    Rng rng(seed);
    Trained t{model::generate_dt_model(spec, rng, opt), {}};
    model::DtModelSource src(t.m, seed * 7 + 1);
    t.st = train_dt(src, spec.n, cfg);
    return t;
}

}  // namespace

TEST_SUITE("dtpipe") {
    TEST_CASE("cell rings walk each vertex counterclockwise") {
        Rng rng(1);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<Point> pts(40);
        for (auto& p : pts) p = {u(rng), u(rng)};
        auto del = geom::delaunay(pts);
        auto rings = cell_rings(del);
        std::size_t incident = 0;
        for (std::uint32_t v = 0; v < pts.size(); ++v) {
            // Independent incidence count by scanning.
            std::size_t cnt = 0;
            for (const auto& t : del.tris) cnt += std::count(t.begin(), t.end(), v);
            CHECK(rings[v].tris.size() == cnt);
            incident += cnt;
            // Consecutive ring triangles share an edge through v.
            for (std::size_t k = 0; k + 1 < rings[v].tris.size(); ++k) {
                const auto& a = del.tris[static_cast<std::size_t>(rings[v].tris[k])];
                const auto& b = del.tris[static_cast<std::size_t>(rings[v].tris[k + 1])];
                int shared = 0;
                for (auto x : a) shared += std::count(b.begin(), b.end(), x);
                CHECK(shared == 2);
            }
        }
        CHECK(incident == 3 * del.size());
    }

    TEST_CASE("geode triangles per cell") {
        Ring closed{{4, 7, 9, 2, 5}, false};
        auto g = geode_triangles(0, closed, 9);
        REQUIRE(g.size() == 3);
        // elements 4 7 9 2 5; pairs without the apex: (4,7) (2,5) (5,4)
        CHECK(g[0].a == 4);
        CHECK(g[0].b == 7);
        CHECK(g[1].a == 2);
        CHECK(g[2].b == 4);
        Ring open{{3, 6, 8}, true};
        auto h = geode_triangles(1, open, 3);
        // elements 3 6 8 out in; pairs without the apex: (6,8) (8,out) (out,in)
        REQUIRE(h.size() == 3);
        CHECK(h[1].b == kRayOut);
        CHECK(h[2].a == kRayOut);
        CHECK(h[2].b == kRayIn);
        std::vector<std::uint32_t> occ{5, 5, 5, 2, 2, 2, 1, 1, 1, 1};
        CHECK(cell_apex(closed, occ) == 7);
        CHECK(cell_apex(open, occ) == 6);
    }

    TEST_CASE("n=4 one group matches the oracle") {
        model::DtSpec spec;
        spec.family = "poly";
        spec.n = 4;
        spec.max_group = 4;
        spec.d0 = 1;
        auto t = trained(spec, 3);
        Rng rng(99);
        for (int i = 0; i < 20; ++i) {
            auto inst = t.m.sample(rng);
            auto out = operate_dt(t.st, inst.p);
            CHECK(tri_set(out.mesh) == tri_set(geom::delaunay(inst.p)));
        }
    }

    TEST_CASE("mixed models: output, stitched diagram and bookkeeping") {
        for (std::uint64_t seed : {11, 12, 13}) {
            model::DtSpec spec;
            spec.family = "mixed";
            spec.n = 48;
            spec.d0 = 2;
            spec.const_fraction = 0.15;
            auto t = trained(spec, seed);
            CHECK(!t.st.partition.g0.empty());
            Options opt;
            opt.keep_stitched = true;
            opt.keep_occupancy = true;
            opt.exec = seed % 2 ? Exec::Parallel : Exec::Serial;
            Rng rng(seed + 1000);
            for (int i = 0; i < 15; ++i) {
                auto inst = t.m.sample(rng);
                auto out = operate_dt(t.st, inst.p, opt);
                CHECK(tri_set(out.mesh) == tri_set(geom::delaunay(inst.p)));
                CHECK(out.stitched == reference_stitched(t.st, inst.p));
                CHECK(out.cost.scattered == out.cost.sum_delta);
                std::uint64_t occ = 0;
                for (auto v : out.occupancy) occ += v;
                CHECK(occ == out.cost.sum_delta);
            }
        }
    }

    TEST_CASE("scatter conservation against scanned conflict lists") {
        model::DtSpec spec;
        spec.family = "uniform";
        spec.n = 32;
        auto t = trained(spec, 21);
        Rng rng(5);
        for (int i = 0; i < 10; ++i) {
            auto inst = t.m.sample(rng);
            Options opt;
            opt.keep_occupancy = true;
            auto out = operate_dt(t.st, inst.p, opt);
            std::vector<std::uint32_t> occ(t.st.canonical.del.size(), 0);
            std::uint64_t total = 0;
            for (const auto& p : inst.p)
                for (auto s : geom::circumdisk_scan(t.st.canonical.del, p)) ++occ[static_cast<std::size_t>(s)], ++total;
            CHECK(out.occupancy == occ);
            CHECK(out.cost.sum_delta == total);
            CHECK(out.cost.scattered == total);
        }
    }

    TEST_CASE("apex audit") {
        model::DtSpec spec;
        spec.family = "uniform";
        spec.n = 24;
        auto t = trained(spec, 22);
        Rng rng(6);
        auto inst = t.m.sample(rng);
        Options opt;
        opt.keep_occupancy = true;
        auto out = operate_dt(t.st, inst.p, opt);
        const auto& del = t.st.canonical.del;
        for (std::uint32_t v = 0; v < del.pts.size(); ++v) {
            std::vector<std::int32_t> inc;
            for (std::size_t s = 0; s < del.size(); ++s)
                if (std::count(del.tris[s].begin(), del.tris[s].end(), v)) inc.push_back(static_cast<std::int32_t>(s));
            auto best = *std::min_element(inc.begin(), inc.end(), [&](std::int32_t a, std::int32_t b) {
                auto oa = out.occupancy[static_cast<std::size_t>(a)], ob = out.occupancy[static_cast<std::size_t>(b)];
                return oa != ob ? oa < ob : a < b;
            });
            CHECK(cell_apex(t.st.rings[v], out.occupancy) == best);
        }
    }

    TEST_CASE("fragment audit") {
        model::DtSpec spec;
        spec.family = "mixed";
        spec.n = 16;
        auto t = trained(spec, 23);
        Rng rng(7);
        for (int i = 0; i < 3; ++i) {
            auto inst = t.m.sample(rng);
            auto a = audit_fragments(t.st, inst.p, 32, static_cast<std::uint64_t>(i));
            CHECK(a.checked > 32);
            CHECK(a.ok());
        }
    }

    TEST_CASE("all-constant model short-circuits") {
        model::BuildOptions bo;
        bo.allow_degenerate = true;
        model::DtSpec spec;
        spec.family = "mixed";
        spec.n = 6;
        spec.const_fraction = 1.0;
        auto t = trained(spec, 24, small_config(), bo);
        CHECK(t.st.tries.empty());
        Rng rng(1);
        auto inst = t.m.sample(rng);
        CHECK(tri_set(t.st.del_g0) == tri_set(geom::delaunay(inst.p)));
        auto out = operate_dt(t.st, inst.p);
        CHECK(tri_set(out.mesh) == tri_set(geom::delaunay(inst.p)));
        CHECK(out.cost.novel() == 0);
    }

    TEST_CASE("one-group polynomial model, n=16: fallback below 1%") {
        model::DtSpec spec;
        spec.family = "poly";
        spec.n = 16;
        spec.max_group = 16;
        spec.d0 = 1;
        Rng rng(5);
        model::DtModel m;
        do m = model::generate_dt_model(spec, rng);
        while (m.groups.size() != 1);
        model::DtModelSource src(m, 22);
        auto cfg = small_config();
        cfg.trie_cap = 1000000;  // measured: 2% B fallback at 2e5, 0.1% at 1e6
        auto st = train_dt(src, spec.n, cfg);
        REQUIRE(st.partition.groups.size() == 1);
        CHECK(st.tries[0].b.labels().leaf_count() > 1);
        CHECK(st.tries[0].pi.labels().leaf_count() > 1);
        Rng q(9);
        std::vector<model::DtInstance> batch;
        for (int i = 0; i < 1000; ++i) batch.push_back(m.sample(q));
        auto rep = bench_dt(st, batch);
        CHECK(rep.all_correct);
        CHECK(rep.b_fallback_rate < 0.01);
        CHECK(rep.pi_fallback_rate < 0.01);
    }

    TEST_CASE("deterministic group: zero entropy, linear cost") {
        // Single group whose points never move (parameter pinned), but not constant polynomials.
        model::BuildOptions bo;
        bo.allow_degenerate = true;
        Rng rng(26);
        model::DtSpec spec;
        spec.family = "poly";
        spec.n = 12;
        spec.max_group = 12;
        auto m = model::generate_dt_model(spec, rng, bo);
        for (auto& p : m.params) p = model::PlaneDist::product(model::ParamDist::point(0.3), model::ParamDist::point(0.6));
        m = model::build_dt_model(m.groups, m.params, m.hx, m.hy, m.d0, bo);
        model::DtModelSource src(m, 4);
        auto st = train_dt(src, spec.n, small_config());
        std::vector<model::DtInstance> batch;
        for (int i = 0; i < 20; ++i) batch.push_back(m.sample(rng));
        auto rep = bench_dt(st, batch);
        CHECK(rep.all_correct);
        CHECK(rep.entropy_sum == doctest::Approx(0.0));
        for (const auto& tr : st.tries) CHECK(tr.b.labels().leaf_count() == 1);
    }

    TEST_CASE("errors") {
        model::DtSpec spec;
        spec.family = "uniform";
        spec.n = 8;
        auto t = trained(spec, 27);
        Rng rng(9);
        auto inst = t.m.sample(rng);
        auto bad = inst.p;
        bad[1] = bad[0];
        CHECK_THROWS_AS(operate_dt(t.st, bad), DuplicateValue);
        bad = inst.p;
        bad[2] = {1e12, 1e12};
        CHECK_THROWS_AS(operate_dt(t.st, bad), geom::OutsideMesh);
        bad.pop_back();
        CHECK_THROWS_AS(operate_dt(t.st, bad), InvalidArgument);
        std::vector<model::DtInstance> few(3, model::DtInstance{{{0, 0}}, 0});
        model::VectorSource<model::DtInstance> src(few);
        try {
            train_dt(src, 1, small_config());
            FAIL("expected starvation");
        } catch (const SampleStarvation& e) {
            CHECK(e.stage == "partition");
        }
    }
}

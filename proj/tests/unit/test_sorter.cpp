#include "doctest.h"

#include "selfimp/sorter.hpp"

using namespace selfimp;
using namespace selfimp::sorter;

TEST_SUITE("sorter") {
    TEST_CASE("single group, three values") {
        auto m = model::build_sort_model({{0, 1, 2}}, {model::ParamDist::uniform(0, 1)},
                                         {model::Curve::affine(1, 20, 0, 1), model::Curve::affine(1, 10, 0, 1),
                                          model::Curve::affine(1, 30, 0, 1)},
                                         0);
        model::SortModelSource src(m, 3);
        Config cfg;
        cfg.c0 = 0;
        auto st = train_sort(src, 3, cfg);
        CHECK(st.groups.size() == 1);
        std::vector<double> x{20, 10, 30};
        auto out = operate_sort(st, x);
        CHECK(out.order == std::vector<std::uint32_t>{1, 0, 2});
    }

    TEST_CASE("sorted output on generated models, serial equals parallel") {
        for (const char* fam : {"uniform_iid", "affine", "monotone", "mixed", "fan"}) {
            model::SortSpec spec;
            spec.family = fam;
            spec.n = 20;
            Rng g(31);
            auto m = model::generate_sort_model(spec, g);
            model::SortModelSource src(m, 7);
            Config cfg;
            cfg.trie_cap = 2000;
            TrainReport rep;
            auto st = train_sort(src, m.n, cfg, &rep, Exec::Serial);
            auto batch = src.take(200, "operate");
            auto a = operate_sort_batch(st, batch, Exec::Serial);
            auto b = operate_sort_batch(st, batch, Exec::Parallel);
            for (std::size_t i = 0; i < batch.size(); ++i) {
                REQUIRE(a[i].order == reference_order(batch[i].x));
                REQUIRE(a[i].order == b[i].order);
                REQUIRE(a[i].cost.total() == b[i].cost.total());
                CHECK(a[i].max_runs_per_cell <= 1);
            }
            CHECK(rep.group_samples.size() == st.groups.size());
        }
    }

    TEST_CASE("bench report on a low-entropy model") {
        model::SortSpec spec;
        spec.family = "affine";
        spec.n = 16;
        Rng g(2);
        auto m = model::generate_sort_model(spec, g);
        model::SortModelSource src(m, 1);
        auto st = train_sort(src, m.n, Config{});
        auto rep = bench_sort(st, src.take(300, "bench"));
        CHECK(rep.all_correct);
        CHECK(rep.instances == 300);
        CHECK(rep.ratio > 0);
        CHECK(rep.pi_fallback_rate < 0.05);
    }

    TEST_CASE("instance length mismatch") {
        auto m = model::build_sort_model({{0}}, {model::ParamDist::uniform(0, 1)}, {model::Curve::affine(1, 0, 0, 1)}, 0);
        model::SortModelSource src(m, 3);
        auto st = train_sort(src, 1, Config{});
        std::vector<double> x{1, 2};
        CHECK_THROWS_AS(operate_sort(st, x), InvalidArgument);
    }

    TEST_CASE("short stream reports the stage") {
        auto m = model::build_sort_model({{0}}, {model::ParamDist::uniform(0, 1)}, {model::Curve::affine(1, 0, 0, 1)}, 0);
        model::SortModelSource src(m, 3, 420);
        try {
            train_sort(src, 1, Config{});
            FAIL("expected starvation");
        } catch (const SampleStarvation& e) {
            CHECK(e.stage == "vlist");
        }
    }
}

// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.
#include "selfimp/dtpipe.hpp"
#include "selfimp/seqstat.hpp"
#include "selfimp/sorter.hpp"

#include <benchmark/benchmark.h>

using namespace selfimp;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

struct SortFixture {
    model::SortModel m;
    sorter::SorterState st;
    std::vector<model::SortInstance> batch;
    std::vector<model::SortInstance> samples;

    SortFixture() {
        model::SortSpec spec;
        spec.family = "mixed";
        spec.n = 128;
        Rng g(1);
        m = model::generate_sort_model(spec, g);
        model::SortModelSource src(m, 2);
        sorter::Config cfg;
        cfg.trie_cap = 5000;
        st = sorter::train_sort(src, m.n, cfg, nullptr, Exec::Parallel);
        batch = src.take(512, "bench");
        samples = src.take(seqstat::ell_desk(m.c0), "bench");
    }
};

const SortFixture& sort_fixture() {
    static SortFixture f;
    return f;
}

struct DtFixture {
    dtpipe::DtState st;
    std::vector<model::DtInstance> batch;

    DtFixture() {
        model::DtSpec spec;
        spec.family = "mixed";
        spec.n = 64;
        Rng g(3);
        auto m = model::generate_dt_model(spec, g);
        model::DtModelSource src(m, 4);
        dtpipe::Config cfg;
        cfg.trie_cap = 500;
        st = dtpipe::train_dt(src, spec.n, cfg);
        batch = src.take(32, "bench");
    }
};

const DtFixture& dt_fixture() {
    static DtFixture f;
    return f;
}

void BM_sort_batch(benchmark::State& s) {
    const auto& f = sort_fixture();
    for (auto _ : s) benchmark::DoNotOptimize(sorter::operate_sort_batch(f.st, f.batch, exec_of(s)));
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * f.batch.size()));
}

void BM_sort_partition(benchmark::State& s) {
    const auto& f = sort_fixture();
    for (auto _ : s) benchmark::DoNotOptimize(seqstat::learn_sort_partition(f.samples, f.m.c0, exec_of(s)));
}

void BM_dt_operate_groups(benchmark::State& s) {
    const auto& f = dt_fixture();
    dtpipe::Options opt;
    opt.exec = exec_of(s);
    for (auto _ : s)
        for (const auto& inst : f.batch) benchmark::DoNotOptimize(dtpipe::operate_dt(f.st, inst.p, opt));
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * f.batch.size()));
}

void BM_dt_bench_batch(benchmark::State& s) {
    const auto& f = dt_fixture();
    for (auto _ : s) benchmark::DoNotOptimize(dtpipe::bench_dt(f.st, f.batch, exec_of(s), false));
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * f.batch.size()));
}

}  // namespace

BENCHMARK(BM_sort_batch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sort_partition)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dt_operate_groups)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dt_bench_batch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include "selfimp/sorter.hpp"

#include "selfimp/encodings.hpp"
#include "selfimp/seqstat.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace selfimp::sorter {

SorterState train_sort(model::SortSource& src, std::size_t n, const Config& cfg, TrainReport* report, Exec exec) {
    if (n == 0) throw InvalidArgument("train_sort: n must be positive");
    TrainReport rep;
    SorterState st;
    st.n = n;
    st.c0 = cfg.c0;

    rep.ell = cfg.ell ? cfg.ell : seqstat::ell_desk(cfg.c0);
    auto part_samples = src.take(rep.ell, "partition");
    auto pr = seqstat::learn_sort_partition(part_samples, cfg.c0, exec);
    st.groups = pr.groups;
    rep.positive_pairs = static_cast<std::size_t>(
        std::count_if(pr.pairs.begin(), pr.pairs.end(), [](const seqstat::PairStat& p) { return p.same; }));

    rep.lambda = cfg.lambda ? cfg.lambda : vlist::lambda_desk(n);
    st.v = vlist::build_vlist(src.take(rep.lambda, "vlist"));

    std::size_t max_n = 0;
    for (auto& g : st.groups) {
        std::size_t need = std::max(trie::samples_needed(trie::TrieKind::Interval, n, g.size(), cfg.t0_const),
                                    trie::samples_needed(trie::TrieKind::Order, n, g.size(), cfg.t0_const));
        rep.group_samples_uncapped.push_back(need);
        rep.group_samples.push_back(std::max<std::size_t>(1, std::min(need, cfg.trie_cap)));
        max_n = std::max(max_n, rep.group_samples.back());
    }
    rep.trie_samples = max_n;
    st.tries.resize(st.groups.size());
    for (std::size_t k = 0; k < st.groups.size(); ++k) {
        auto m = static_cast<std::uint32_t>(st.groups[k].size());
        st.tries[k].b = trie::IntervalTrie(m);
        st.tries[k].pi = trie::OrderTrie(m);
        st.tries[k].samples = rep.group_samples[k];
    }
    std::vector<double> z;
    for (std::size_t s = 0; s < max_n; ++s) {
        auto inst = src.take("tries");
        for (std::size_t k = 0; k < st.groups.size(); ++k) {
            if (s >= st.tries[k].samples) continue;
            z.clear();
            for (auto i : st.groups[k]) z.push_back(inst.x[i]);
            st.tries[k].b.train(z, st.v);
            st.tries[k].pi.train(z);
        }
    }
    for (auto& t : st.tries) {
        t.b.freeze();
        t.pi.freeze();
    }
    if (report) *report = rep;
    return st;
}

namespace {

struct Run {
    std::uint32_t interval;
    std::uint32_t begin, end;  // into the sorted buffer
    std::uint32_t group;
};

}  // namespace

SortOutput operate_sort(const SorterState& st, std::span<const double> x) {
    if (x.size() != st.n) throw InvalidArgument("operate_sort: instance length mismatch");
    SortOutput out;
    std::vector<std::uint32_t> sorted;  // global indices, group by group
    sorted.reserve(st.n);
    std::vector<Run> runs;
    std::vector<double> z;
    for (std::size_t k = 0; k < st.groups.size(); ++k) {
        const auto& g = st.groups[k];
        z.clear();
        for (auto i : g) z.push_back(x[i]);
        auto pq = st.tries[k].pi.query(z);
        auto bq = st.tries[k].b.query(z, st.v);
        out.cost.pi_visits += pq.visits;
        out.cost.b_visits += bq.visits;
        out.cost.pi_fallbacks += pq.hit ? 0 : 1;
        out.cost.b_fallbacks += bq.hit ? 0 : 1;
        ++out.cost.groups;
        auto order = encodings::sort_from_pi(pq.code);
        auto base = static_cast<std::uint32_t>(sorted.size());
        for (std::size_t j = 0; j < order.size(); ++j) {
            std::uint32_t r = bq.code[order[j]];
            sorted.push_back(g[order[j]]);
            auto pos = static_cast<std::uint32_t>(base + j);
            if (j == 0 || runs.back().interval != r) runs.push_back({r, pos, pos + 1, static_cast<std::uint32_t>(k)});
            else runs.back().end = pos + 1;
        }
    }
    // Bucket runs by interval (bookkeeping, not counted).
    std::vector<std::uint32_t> start(st.n + 2, 0);
    for (auto& r : runs) ++start[r.interval + 1];
    for (std::size_t r = 1; r < start.size(); ++r) start[r] += start[r - 1];
    std::vector<Run> bucketed(runs.size());
    {
        auto fill = start;
        for (auto& r : runs) bucketed[fill[r.interval]++] = r;
    }
    out.order.reserve(st.n);
    std::uint64_t cmp = 0;
    struct Head {
        std::uint32_t pos, end;
    };
    std::vector<Head> heap;
    auto greater = [&](const Head& a, const Head& b) {
        ++cmp;
        return x[sorted[a.pos]] > x[sorted[b.pos]];
    };
    for (std::size_t r = 0; r + 1 < start.size(); ++r) {
        std::uint32_t lo = start[r], hi = start[r + 1];
        if (lo == hi) continue;
        // At most one run per (group, interval) cell.
        std::size_t streak = 1;
        out.max_runs_per_cell = std::max<std::size_t>(out.max_runs_per_cell, 1);
        for (std::uint32_t a = lo + 1; a < hi; ++a) {
            streak = bucketed[a].group == bucketed[a - 1].group ? streak + 1 : 1;
            out.max_runs_per_cell = std::max(out.max_runs_per_cell, streak);
        }
        if (hi - lo == 1) {
            for (std::uint32_t p = bucketed[lo].begin; p < bucketed[lo].end; ++p) out.order.push_back(sorted[p]);
            continue;
        }
        heap.clear();
        for (std::uint32_t a = lo; a < hi; ++a) heap.push_back({bucketed[a].begin, bucketed[a].end});
        std::make_heap(heap.begin(), heap.end(), greater);
        while (!heap.empty()) {
            std::pop_heap(heap.begin(), heap.end(), greater);
            Head& h = heap.back();
            out.order.push_back(sorted[h.pos]);
            if (++h.pos < h.end) std::push_heap(heap.begin(), heap.end(), greater);
            else heap.pop_back();
        }
    }
    out.cost.merge_cmp = cmp;
    return out;
}

std::vector<SortOutput> operate_sort_batch(const SorterState& st, const std::vector<model::SortInstance>& batch, Exec exec) {
    std::vector<SortOutput> out(batch.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::size_t i = 0; i < batch.size(); ++i) out[i] = operate_sort(st, batch[i].x);
    } else {
        for (std::size_t i = 0; i < batch.size(); ++i) out[i] = operate_sort(st, batch[i].x);
    }
    return out;
}

std::vector<std::uint32_t> reference_order(std::span<const double> x) {
    std::vector<std::uint32_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });
    return idx;
}

BenchReport bench_sort(const SorterState& st, const std::vector<model::SortInstance>& batch, Exec exec) {
    BenchReport rep;
    rep.instances = batch.size();
    if (batch.empty()) return rep;
    auto outs = operate_sort_batch(st, batch, exec);
    std::map<std::vector<std::uint32_t>, std::uint64_t> table;
    double groups = 0, bfb = 0, pfb = 0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const auto& o = outs[i];
        rep.mean_comparisons += static_cast<double>(o.cost.total());
        rep.mean_b += static_cast<double>(o.cost.b_visits);
        rep.mean_pi += static_cast<double>(o.cost.pi_visits);
        rep.mean_merge += static_cast<double>(o.cost.merge_cmp);
        groups += o.cost.groups;
        bfb += o.cost.b_fallbacks;
        pfb += o.cost.pi_fallbacks;
        ++table[o.order];
        if (o.order != reference_order(batch[i].x)) rep.all_correct = false;
    }
    double m = static_cast<double>(outs.size());
    rep.mean_comparisons /= m;
    rep.mean_b /= m;
    rep.mean_pi /= m;
    rep.mean_merge /= m;
    rep.b_fallback_rate = groups > 0 ? bfb / groups : 0;
    rep.pi_fallback_rate = groups > 0 ? pfb / groups : 0;
    std::vector<std::uint64_t> counts;
    counts.reserve(table.size());
    for (auto& [k, c] : table) counts.push_back(c);
    rep.entropy = plugin_entropy(counts);
    rep.ratio = rep.mean_comparisons / (static_cast<double>(st.n) + rep.entropy);
    return rep;
}

}  // namespace selfimp::sorter

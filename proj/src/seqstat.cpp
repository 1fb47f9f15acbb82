#include "selfimp/seqstat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace selfimp::seqstat {

std::size_t lis(std::span<const double> seq) {
    std::vector<double> tails;
    tails.reserve(64);
    for (double v : seq) {
        auto it = std::lower_bound(tails.begin(), tails.end(), v);
        if (it == tails.end()) tails.push_back(v);
        else *it = v;
    }
    return tails.size();
}

std::size_t lms(std::span<const double> seq) {
    std::vector<double> rev(seq.rbegin(), seq.rend());
    return std::max(lis(seq), lis(rev));
}

namespace {

std::vector<std::size_t> order_by(std::span<const double> a) {
    std::vector<std::size_t> idx(a.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t p, std::size_t q) { return a[p] < a[q]; });
    for (std::size_t k = 1; k < idx.size(); ++k)
        if (a[idx[k]] == a[idx[k - 1]]) throw DuplicateValue("same_group_test: tied values in a_vals");
    return idx;
}

double threshold_for(std::size_t ell, int c0) { return static_cast<double>(ell) / (2.0 * c0 + 1.0); }

}  // namespace

bool same_group_test(std::span<const double> a_vals, std::span<const double> b_vals, int c0) {
    if (a_vals.size() != b_vals.size()) throw InvalidArgument("same_group_test: sample lengths differ");
    if (a_vals.empty()) throw InvalidArgument("same_group_test: empty sample");
    auto idx = order_by(a_vals);
    std::vector<double> b(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) b[k] = b_vals[idx[k]];
    return static_cast<double>(lms(b)) >= threshold_for(a_vals.size(), c0);
}

PartitionResult learn_sort_partition(const std::vector<model::SortInstance>& samples, int c0, Exec exec) {
    if (samples.empty()) throw InvalidArgument("learn_sort_partition: no samples");
    const std::size_t n = samples[0].x.size();
    const std::size_t ell = samples.size();
    // Column-major copy so each index's values are contiguous.
    std::vector<std::vector<double>> col(n, std::vector<double>(ell));
    for (std::size_t s = 0; s < ell; ++s) {
        if (samples[s].x.size() != n) throw InvalidArgument("learn_sort_partition: ragged samples");
        for (std::size_t i = 0; i < n; ++i) col[i][s] = samples[s].x[i];
    }
    std::vector<std::vector<std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = order_by(col[i]);

    PartitionResult res;
    res.threshold = threshold_for(ell, c0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    res.pairs.resize(pairs.size());

    auto run = [&](std::size_t p, std::vector<double>& buf) {
        auto [i, j] = pairs[p];
        for (std::size_t k = 0; k < ell; ++k) buf[k] = col[j][order[i][k]];
        std::size_t l = lms(buf);
        res.pairs[p] = {i, j, l, static_cast<double>(l) >= res.threshold};
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel
        {
            std::vector<double> buf(ell);
#pragma omp for schedule(dynamic, 64)
            for (std::size_t p = 0; p < pairs.size(); ++p) run(p, buf);
        }
    } else {
        std::vector<double> buf(ell);
        for (std::size_t p = 0; p < pairs.size(); ++p) run(p, buf);
    }

    UnionFind uf(n);
    for (auto& ps : res.pairs)
        if (ps.same) uf.unite(ps.i, ps.j);
    for (auto& g : uf.groups()) {
        std::vector<std::uint32_t> grp(g.begin(), g.end());
        res.groups.push_back(std::move(grp));
    }
    res.groups = model::canonical(std::move(res.groups));
    return res;
}

double ell_theory(std::size_t n, int c0) {
    double nn = static_cast<double>(n);
    double a = 1e6;
    double b = std::pow(90.0 * std::log(4.0 * nn * nn * nn), 2.0);
    double c = std::pow(6.0 * c0 + 3.0, 2.0);
    return std::max({a, b, c});
}

std::size_t ell_desk(int c0) {
    std::size_t c = static_cast<std::size_t>((6 * c0 + 3) * (6 * c0 + 3));
    return std::max<std::size_t>(400, c);
}

}  // namespace selfimp::seqstat

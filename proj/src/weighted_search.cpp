#include "selfimp/weighted_search.hpp"

#include <algorithm>
#include <cmath>

namespace selfimp::trie {

namespace {

// prefix[k] = weight of keys [0, k)
std::vector<double> prefix_sums(std::span<const double> w) {
    std::vector<double> p(w.size() + 1, 0.0);
    for (std::size_t k = 0; k < w.size(); ++k) p[k + 1] = p[k] + w[k];
    return p;
}

// First key in [lo, hi] whose cumulative weight from lo reaches half the range weight.
std::size_t weighted_median(const std::vector<double>& p, std::size_t lo, std::size_t hi) {
    double half = p[lo] + (p[hi + 1] - p[lo]) / 2;
    auto it = std::lower_bound(p.begin() + static_cast<long>(lo) + 1, p.begin() + static_cast<long>(hi) + 2, half);
    std::size_t k = static_cast<std::size_t>(it - p.begin()) - 1;
    return std::min(std::max(k, lo), hi);
}

std::int32_t build_keys(const std::vector<double>& p, std::size_t lo, std::size_t hi, KeyTree& t) {
    if (lo > hi || hi == static_cast<std::size_t>(-1)) return -1;
    std::size_t k = (p[hi + 1] - p[lo] > 0) ? weighted_median(p, lo, hi) : lo + (hi - lo) / 2;
    t.left[k] = k > lo ? build_keys(p, lo, k - 1, t) : -1;
    t.right[k] = build_keys(p, k + 1, hi, t);
    return static_cast<std::int32_t>(k);
}

std::int32_t build_slots(const std::vector<double>& p, std::size_t lo, std::size_t hi, std::vector<SlotNode>& pool) {
    double total = p[hi + 1] - p[lo];
    if (!(total > 0)) return kAbort;
    if (lo == hi) return slot_handle(static_cast<std::int32_t>(lo));
    // Split right before or right after the weighted-median slot, whichever balances better.
    std::size_t k = weighted_median(p, lo, hi);
    std::size_t best = 0;
    double best_gap = INFINITY;
    for (std::size_t s : {k, k + 1}) {
        if (s <= lo || s > hi) continue;
        double gap = std::fabs((p[s] - p[lo]) - (p[hi + 1] - p[s]));
        if (gap < best_gap) {
            best_gap = gap;
            best = s;
        }
    }
    std::size_t idx = pool.size();
    pool.push_back({static_cast<std::int32_t>(best), kAbort, kAbort});
    std::int32_t l = build_slots(p, lo, best - 1, pool);
    std::int32_t r = build_slots(p, best, hi, pool);
    pool[idx].left = l;
    pool[idx].right = r;
    return static_cast<std::int32_t>(idx);
}

}  // namespace

KeyTree build_key_tree(std::span<const double> weights) {
    KeyTree t;
    t.left.assign(weights.size(), -1);
    t.right.assign(weights.size(), -1);
    if (weights.empty()) return t;
    auto p = prefix_sums(weights);
    t.root = build_keys(p, 0, weights.size() - 1, t);
    return t;
}

std::int32_t build_slot_tree(std::span<const double> weights, std::vector<SlotNode>& pool) {
    if (weights.empty()) return kAbort;
    auto p = prefix_sums(weights);
    return build_slots(p, 0, weights.size() - 1, pool);
}

}  // namespace selfimp::trie

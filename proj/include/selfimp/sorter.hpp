#pragma once

#include "selfimp/model.hpp"
#include "selfimp/trie.hpp"
#include "selfimp/vlist.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace selfimp::sorter {

struct Config {
    int c0 = 1;
    std::size_t ell = 0;       // pair-test samples; 0 means the desk default
    std::size_t lambda = 0;    // V-list samples; 0 means the desk default
    std::size_t trie_cap = 20000;  // cap on trie training samples per group
    double t0_const = 4.0;
};

struct GroupTries {
    trie::IntervalTrie b;
    trie::OrderTrie pi;
    std::size_t samples = 0;
};

struct SorterState {
    std::size_t n = 0;
    int c0 = 0;
    model::Partition groups;
    vlist::VList v;
    std::vector<GroupTries> tries;
};

struct TrainReport {
    std::size_t ell = 0, lambda = 0, trie_samples = 0;
    std::size_t positive_pairs = 0;
    std::vector<std::size_t> group_samples;  // per group, capped N
    std::vector<std::size_t> group_samples_uncapped;
};

SorterState train_sort(model::SortSource& src, std::size_t n, const Config& cfg, TrainReport* report = nullptr,
                       Exec exec = Exec::Parallel);

struct Cost {
    std::uint64_t b_visits = 0, pi_visits = 0, merge_cmp = 0;
    std::uint32_t b_fallbacks = 0, pi_fallbacks = 0;
    std::uint32_t groups = 0;
    std::uint64_t total() const { return b_visits + pi_visits + merge_cmp; }
};

struct SortOutput {
    std::vector<std::uint32_t> order;  // indices of x in ascending value order
    Cost cost;
    std::size_t max_runs_per_cell = 0;  // runs sharing one (group, interval) pair
};

SortOutput operate_sort(const SorterState& st, std::span<const double> x);

std::vector<SortOutput> operate_sort_batch(const SorterState& st, const std::vector<model::SortInstance>& batch,
                                           Exec exec = Exec::Parallel);

struct BenchReport {
    std::size_t instances = 0;
    double mean_comparisons = 0, mean_b = 0, mean_pi = 0, mean_merge = 0;
    double entropy = 0;  // plug-in entropy of the output permutations, bits
    double ratio = 0;    // mean_comparisons / (n + entropy)
    double b_fallback_rate = 0, pi_fallback_rate = 0;  // per group query
    bool all_correct = true;
};

BenchReport bench_sort(const SorterState& st, const std::vector<model::SortInstance>& batch, Exec exec = Exec::Parallel);

// Reference answer: indices sorted by value.
std::vector<std::uint32_t> reference_order(std::span<const double> x);

}  // namespace selfimp::sorter

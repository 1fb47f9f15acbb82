#pragma once

#include "selfimp/common.hpp"
#include "selfimp/model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace selfimp::seqstat {

// Length of the longest strictly increasing subsequence (patience sorting).
std::size_t lis(std::span<const double> seq);

// Length of the longest monotone (increasing or decreasing) subsequence.
std::size_t lms(std::span<const double> seq);

// Same-group verdict for two indices from paired samples: sort the samples by
// a_vals and compare the longest monotone run of b_vals with ell / (2 c0 + 1).
// Throws DuplicateValue when a_vals has ties.
bool same_group_test(std::span<const double> a_vals, std::span<const double> b_vals, int c0);

struct PairStat {
    std::uint32_t i = 0, j = 0;
    std::size_t lms = 0;
    bool same = false;
};

struct PartitionResult {
    model::Partition groups;
    std::vector<PairStat> pairs;  // every tested pair, in (i, j) lexicographic order
    double threshold = 0.0;
};

// Runs the pair test on all index pairs of the samples and merges positive pairs.
PartitionResult learn_sort_partition(const std::vector<model::SortInstance>& samples, int c0,
                                     Exec exec = Exec::Parallel);

using ::selfimp::plugin_entropy;

// Theoretical and desk values of the sample count used by the pair test.
double ell_theory(std::size_t n, int c0);
std::size_t ell_desk(int c0);

}  // namespace selfimp::seqstat

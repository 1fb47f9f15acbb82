#pragma once

#include "selfimp/model.hpp"

#include <cstdint>
#include <vector>

namespace selfimp::vlist {

// n pivots splitting the line into intervals [v_r, v_{r+1}), r = 0..n, with
// v_0 = -inf and v_{n+1} = +inf.
struct VList {
    std::vector<double> pivots;
    std::size_t lambda = 0;
    std::size_t duplicates = 0;  // tied pooled values seen while building

    std::size_t n() const { return pivots.size(); }
    // Number of pivots <= v; equality routes to the right interval.
    std::uint32_t interval_of(double v) const;
};

// Pools the samples (lambda = samples.size()), sorts, and takes every lambda-th value.
VList build_vlist(const std::vector<model::SortInstance>& samples);

struct Occupancy {
    std::vector<double> mean;  // per interval, averaged over instances
    double max_mean = 0.0;
    std::size_t argmax = 0;
    double threshold = 20.0;
    bool violation = false;
};

Occupancy occupancy(const VList& v, const std::vector<model::SortInstance>& fresh, double threshold = 20.0);

double lambda_theory(std::size_t n);
std::size_t lambda_desk(std::size_t n);

}  // namespace selfimp::vlist

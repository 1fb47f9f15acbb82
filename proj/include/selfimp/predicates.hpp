#pragma once

#include "selfimp/common.hpp"

#include <cstdint>

namespace selfimp::geom {

// Exact signs for double inputs: a float filter, then expansion arithmetic.

// > 0 if a, b, c are in counterclockwise order, < 0 if clockwise, 0 if collinear.
int orient(const Point& a, const Point& b, const Point& c);

// > 0 if d is strictly inside the circle through a, b, c (a, b, c counterclockwise).
int incircle(const Point& a, const Point& b, const Point& c, const Point& d);

// incircle with cocircular ties broken by a symbolic perturbation of the lifted
// coordinate. Lexicographically smaller points are lifted further, so the result
// is never 0 unless a, b, c are collinear and the four points are collinear.
int incircle_perturbed(const Point& a, const Point& b, const Point& c, const Point& d);

// sign(|p - a|^2 - |p - b|^2)
int compare_distance(const Point& p, const Point& a, const Point& b);

struct PredicateStats {
    std::uint64_t orient = 0;
    std::uint64_t incircle = 0;
    std::uint64_t exact = 0;
    std::uint64_t perturbed_ties = 0;
};

// Per-thread counters, used for cost accounting.
PredicateStats& predicate_stats();

}  // namespace selfimp::geom

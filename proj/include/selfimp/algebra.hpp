#pragma once

#include "selfimp/common.hpp"
#include "selfimp/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace selfimp::algebra {

// All exponent vectors of total degree <= d over m variables, in lexicographic order.
struct MonomialBasis {
    int m = 0, d = 0;
    std::vector<std::vector<int>> exps;
    std::size_t size() const { return exps.size(); }
};

MonomialBasis monomial_basis(int m, int d);
std::size_t kappa(int m, int d);  // C(m + d, m)

std::vector<double> extend(std::span<const double> vals, const MonomialBasis& basis);

using Matrix = std::vector<std::vector<double>>;  // rows

struct RankConfig {
    double tol = 1e-8;   // pivots below tol (after equilibration) count as zero
    bool exact = false;  // rational elimination instead
};

std::size_t numeric_rank(Matrix a, double tol);
std::size_t exact_rank(const Matrix& a);

enum class Dependence { Dependent, Independent };

// Throws InvalidArgument unless given exactly k vectors of length k, and on
// non-finite entries.
Dependence dependence_test(const Matrix& vectors, const RankConfig& cfg = {});

// Coordinates are rescaled per variable to [-1, 1] before extension.
bool test_constant(double a, double b);
bool test_coupled(std::span<const double> x1, std::span<const double> x2, int d, const RankConfig& cfg = {});
bool test_triple(std::span<const double> x1, std::span<const double> x2, std::span<const double> x3, int d,
                 const RankConfig& cfg = {});

int d_test_desk(int d0);  // max(2 d0^2, 4)

struct ApproxPartition {
    std::vector<std::uint32_t> g0;  // constant points
    model::Partition groups;        // the rest
    std::vector<std::string> log;   // merge provenance
    std::size_t coupled_tests = 0, triple_tests = 0;
};

struct PartitionConfig {
    int d_test = 4;
    RankConfig rank;
};

// Pool size the learner draws: kappa(3, d_test) instances.
std::size_t partition_samples(int d_test);

ApproxPartition learn_approx_partition(const std::vector<model::DtInstance>& pool, std::size_t n,
                                       const PartitionConfig& cfg = {});
ApproxPartition learn_approx_partition(model::DtSource& src, std::size_t n, const PartitionConfig& cfg = {});

// Every returned group inside one true group, no true group split into three or
// more, and g0 equal to the true constant set.
bool partition_valid(const ApproxPartition& p, const model::Partition& truth, const std::vector<std::uint32_t>& consts);

}  // namespace selfimp::algebra

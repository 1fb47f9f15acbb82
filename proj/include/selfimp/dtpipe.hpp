#pragma once

#include "selfimp/algebra.hpp"
#include "selfimp/dt_trie.hpp"
#include "selfimp/geom.hpp"
#include "selfimp/model.hpp"
#include "selfimp/splittree.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace selfimp::dtpipe {

struct Config {
    algebra::PartitionConfig partition;
    geom::NetConfig net;
    std::size_t lambda = 0;        // canonical-set samples; 0 means the desk default
    std::size_t trie_cap = 2000;   // cap on trie training samples per group
    double t0_const = 4.0;
    std::uint64_t seed = 1;        // net sampling
};

struct GroupTries {
    trie::TriangleTrie b;
    trie::SplitOrderTrie pi;
    std::size_t samples = 0;
};

// Voronoi cell of a canonical vertex as the ring of its incident triangles,
// counterclockwise. For a hull vertex the ring starts right after a hull edge
// and the cell continues along two rays (out of the last, into the first).
struct Ring {
    std::vector<std::int32_t> tris;
    bool unbounded = false;
};

std::vector<Ring> cell_rings(const geom::Mesh& del);

struct DtState {
    std::size_t n = 0;
    algebra::ApproxPartition partition;
    std::vector<Point> g0_points;  // aligned with partition.g0
    geom::Triangulation g0_tri;    // labels are instance indices
    geom::Mesh del_g0;
    geom::CanonicalV canonical;
    std::vector<Ring> rings;  // derived from canonical.del
    std::vector<GroupTries> tries;
};

struct TrainReport {
    std::size_t partition_samples = 0, lambda = 0, pool_points = 0, trie_samples = 0;
    std::vector<std::size_t> group_samples, group_samples_uncapped;
};

DtState train_dt(model::DtSource& src, std::size_t n, const Config& cfg, TrainReport* report = nullptr);

// Rebuilds the derived parts (g0 triangulation, rings) after the stored parts
// were filled in, e.g. by deserialization.
void finish_state(DtState& st);

// Steps are numbered 1..8; index 0 is unused. Costs are predicate calls plus
// trie node visits (step 1), scatter appends (step 3) and union-find operations
// (step 4).
struct Cost {
    std::array<std::uint64_t, 9> step{};
    std::uint64_t b_visits = 0, pi_visits = 0;
    std::uint32_t b_fallbacks = 0, pi_fallbacks = 0, groups = 0;
    std::uint64_t sum_delta = 0;          // sum of |Delta_i| over non-constant points
    std::uint64_t scattered = 0;          // sum of |Q_{j,t}|
    std::uint64_t geode_sets = 0;         // geode triangles with a non-trivial point set
    std::uint64_t geode_points = 0;       // total size of those sets
    std::uint64_t exact_fallbacks = 0;    // membership tests settled in rational arithmetic
    std::uint64_t novel() const;          // steps 1..6
    std::uint64_t substituted() const;    // steps 7..8
};

struct Options {
    Exec exec = Exec::Serial;  // per-group steps 1..5
    splittree::DtConfig dt;
    bool keep_stitched = false;
    bool keep_occupancy = false;
    bool keep_codes = false;
};

struct Output {
    geom::Mesh mesh;  // Del(I), labels are instance indices
    Cost cost;
    // Del(V + non-constant points): instance indices, canonical vertex k as n + k.
    std::vector<std::array<std::uint32_t, 3>> stitched;
    std::vector<std::uint32_t> occupancy;  // |P_t| per canonical triangle
    std::vector<encodings::Code> b_codes;  // per group
};

Output operate_dt(const DtState& st, std::span<const Point> inst, const Options& opt = {});

// Canonical labels of Del(V + non-constant points) computed directly, for checking
// the stitched result.
std::vector<std::array<std::uint32_t, 3>> reference_stitched(const DtState& st, std::span<const Point> inst);

// Geode triangles: apex plus two consecutive ring elements not containing it.
constexpr std::int32_t kRayOut = -2, kRayIn = -3;

struct GeodeTri {
    std::uint32_t site;
    std::int32_t apex, a, b;  // canonical triangles, or kRayOut / kRayIn
};

// Apex of a cell: the ring triangle with fewest points, lowest id on ties.
std::int32_t cell_apex(const Ring& ring, std::span<const std::uint32_t> occupancy);
std::vector<GeodeTri> geode_triangles(std::uint32_t site, const Ring& ring, std::int32_t apex);

// Exact audit of the local-equality property on the bounded geode triangles:
// per site of the geode set, its cell in the set's diagram and in the full
// diagram agree inside the triangle, and the set's cells cover it. Geode
// triangles without instance points are sampled (trivial_sample of them).
struct FragmentAudit {
    std::size_t checked = 0, failed = 0, unbounded_skipped = 0;
    bool ok() const { return failed == 0; }
};

FragmentAudit audit_fragments(const DtState& st, std::span<const Point> inst, std::size_t trivial_sample = 64,
                              std::uint64_t seed = 1);

struct BenchReport {
    std::size_t instances = 0;
    std::array<double, 9> mean_step{};
    double mean_novel = 0, mean_substituted = 0;
    double mean_delta_per_point = 0;  // sum |Delta_i| / |G'+|
    double occupancy_max_mean = 0;    // max over canonical triangles of mean |P_t|
    double occupancy_mean = 0;        // over triangles and instances
    double b_fallback_rate = 0, pi_fallback_rate = 0;
    double entropy_sum = 0;           // sum over groups of the plug-in entropy of B
    double ratio = 0;                 // mean_novel / (n + entropy_sum)
    double mean_exact_fallbacks = 0;
    bool all_correct = true;
};

BenchReport bench_dt(const DtState& st, const std::vector<model::DtInstance>& batch, Exec exec = Exec::Parallel,
                     bool check = true);

}  // namespace selfimp::dtpipe

#pragma once

#include "selfimp/common.hpp"
#include "selfimp/geom.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace selfimp::splittree {

struct Rect {
    double xlo = 0, ylo = 0, xhi = 0, yhi = 0;
    double lmin() const { return std::min(xhi - xlo, yhi - ylo); }
    double lmax() const { return std::max(xhi - xlo, yhi - ylo); }
    bool contains(const Rect& o) const { return xlo <= o.xlo && ylo <= o.ylo && o.xhi <= xhi && o.yhi <= yhi; }
    friend bool operator==(const Rect&, const Rect&) = default;
};

// Nodes are stored in preorder; an internal node u has left child u + 1 and its
// subtree occupies node ids [u, u + 2 * leaves(u) - 1).
struct Node {
    std::int32_t left = -1, right = -1, parent = -1;
    std::uint32_t begin = 0, end = 0;  // range in perm
    int axis = -1;                     // 0: cut by x = cut, 1: by y = cut, -1: leaf
    double cut = 0;
    Rect r, rhat;  // bounding rectangle, outer rectangle

    bool leaf() const { return axis < 0; }
    std::uint32_t size() const { return end - begin; }
};

struct SplitTree {
    std::shared_ptr<const std::vector<Point>> pts;
    std::vector<std::uint32_t> perm;  // point ids in leaf preorder
    std::vector<Node> nodes;

    std::size_t size() const { return perm.size(); }
    bool empty() const { return perm.empty(); }
    std::uint32_t leaf_point(std::int32_t u) const { return perm[nodes[static_cast<std::size_t>(u)].begin]; }
    const Point& point(std::uint32_t id) const { return (*pts)[id]; }
};

// Cut position for a bounding interval [lo, hi], lo < hi: the midpoint, moved to hi
// if rounding left it at lo. Points with coordinate < cut go left.
double halving_cut(double lo, double hi);
// Split axis for a bounding rectangle: 0 (vertical line, cut x) iff x-span >= y-span.
int halving_axis(const Rect& r);

SplitTree build_halving(std::shared_ptr<const std::vector<Point>> pts, std::vector<std::uint32_t> ids);
SplitTree build_halving(std::vector<Point> pts);

// Preorder split decisions: axis * m + (points sent left), one per internal node.
std::vector<std::uint32_t> split_labels(const SplitTree& t);

// Rebuilds the tree the decisions describe. Throws InvalidArgument on a decision
// the points cannot realize.
SplitTree tree_from_labels(std::shared_ptr<const std::vector<Point>> pts, std::vector<std::uint32_t> ids,
                           std::span<const std::uint32_t> labels);

// Nodes violating lmin(rhat(u)) >= lmax(r(parent(u))) / 3.
std::size_t fair_split_violations(const SplitTree& t);

bool same_tree(const SplitTree& a, const SplitTree& b);

SplitTree derive_subset(const SplitTree& t, std::span<const std::uint32_t> q);

struct BatchStats {
    std::uint64_t uf_ops = 0;
    std::uint64_t lca_queries = 0;
};

// Each subset must list its points in the leaf order of t.
std::vector<SplitTree> derive_subsets_batched(const SplitTree& t, const std::vector<std::vector<std::uint32_t>>& subsets,
                                              BatchStats* stats = nullptr);

// Nearest neighbour of every point of the tree (ties to the lower id), indexed by
// point id; kNoNeighbor for ids outside the tree or a single-point tree.
constexpr std::uint32_t kNoNeighbor = UINT32_MAX;
std::vector<std::uint32_t> nn_graph(const SplitTree& t, std::uint64_t* pairs = nullptr);
std::vector<std::uint32_t> nn_brute(const std::vector<Point>& pts, std::span<const std::uint32_t> ids);

struct DtConfig {
    bool direct = false;  // skip the sample chain, insert everything at once
    std::size_t base = 8;
    std::uint64_t seed = 1;
};

struct ChainStats {
    std::vector<std::size_t> sizes;
    std::size_t redraws = 0;
};

// Delaunay triangulation of the tree's points. Vertex labels are labels[id], or the
// point id when labels is empty.
geom::Triangulation dt_from_split_tree(const SplitTree& t, std::span<const std::uint32_t> labels = {},
                                       const DtConfig& cfg = {}, ChainStats* stats = nullptr);

}  // namespace selfimp::splittree

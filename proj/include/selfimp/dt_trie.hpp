#pragma once

#include "selfimp/geom.hpp"
#include "selfimp/splittree.hpp"
#include "selfimp/trie.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace selfimp::trie {

// Triangle of mesh containing each point (boundary ties to the lowest id).
encodings::Code triangle_encode(const geom::Mesh& mesh, std::span<const Point> pts, geom::LocateContext* ctx = nullptr);

// x-order code, y-order code, then the split decisions of the halving split tree.
// Length 3m - 1. Throws DuplicateValue on tied coordinates along an axis.
encodings::Code split_order_encode(std::span<const Point> pts);

// Triangle-labelled trie. Children of a node are searched heaviest tier first;
// small tiers by scanning, larger ones through a slab index, and anything that
// lands on a triangle boundary is settled by the mesh's point location.
class TriangleTrie {
public:
    TriangleTrie() = default;
    explicit TriangleTrie(std::uint32_t length) : trie_(length) {}

    void train(std::span<const Point> pts, const geom::Mesh& mesh);
    void insert(std::span<const std::uint32_t> code);
    void freeze(const geom::Mesh& mesh);
    QueryResult query(std::span<const Point> pts, const geom::Mesh& mesh, geom::LocateContext* ctx = nullptr) const;

    LabelTrie& labels() { return trie_; }
    const LabelTrie& labels() const { return trie_; }

    struct Tier {
        std::vector<std::int32_t> kids;  // kid indices; scanned when there is no slab index
        std::vector<double> xs;          // slab boundaries
        std::vector<std::uint32_t> slab_off;
        struct Entry {
            std::uint32_t a, b;  // upper edge, left to right
            std::int32_t kid;
        };
        std::vector<Entry> entries;  // per slab, bottom to top
    };

private:
    LabelTrie trie_;
    std::vector<std::uint32_t> tier_off_;  // per node, into tiers_
    std::vector<Tier> tiers_;
};

// Split-order trie: x-order levels, then y-order levels (both through order maps),
// then one level per internal split-tree node in preorder.
class SplitOrderTrie {
public:
    SplitOrderTrie() = default;
    explicit SplitOrderTrie(std::uint32_t points) : m_(points), trie_(points ? 3 * points - 1 : 0) {}

    void train(std::span<const Point> pts);
    void insert(std::span<const std::uint32_t> code);
    void freeze();
    QueryResult query(std::span<const Point> pts) const;

    std::uint32_t points() const { return m_; }
    LabelTrie& labels() { return trie_; }
    const LabelTrie& labels() const { return trie_; }

    struct SplitNode {
        std::uint32_t xmin = 0, xmax = 0, ymin = 0, ymax = 0;  // positions of the extreme points
        std::vector<std::uint32_t> by[2];                       // the node's positions in x / y order
        std::int32_t root[2] = {kAbort, kAbort};                // slot trees over kids, per axis
    };

private:
    std::uint32_t m_ = 0;
    LabelTrie trie_;
    std::vector<std::int32_t> root_;  // order-level slot trees
    std::vector<SlotNode> pool_;
    std::vector<std::int32_t> split_;  // trie node -> index into splits_
    std::vector<SplitNode> splits_;
};

// Split tree for the points from a split-order code (positions are indices into
// pts, relabelled through ids).
splittree::SplitTree split_tree_from_code(std::shared_ptr<const std::vector<Point>> all, std::vector<std::uint32_t> ids,
                                          std::span<const std::uint32_t> code);

}  // namespace selfimp::trie

#pragma once

#include "selfimp/common.hpp"
#include "selfimp/encodings.hpp"
#include "selfimp/vlist.hpp"
#include "selfimp/weighted_search.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace selfimp::trie {

struct FrozenTrie : Error {
    FrozenTrie() : Error("trie is frozen; training inserts are not allowed") {}
};

// Trie over fixed-length label strings with per-node visit counts.
class LabelTrie {
public:
    struct Node {
        std::uint32_t label = 0;
        std::int32_t parent = -1;
        std::uint32_t depth = 0;
        std::uint64_t count = 0;
        std::vector<std::int32_t> kids;  // sorted by label
    };

    explicit LabelTrie(std::uint32_t length = 0);

    void insert(std::span<const std::uint32_t> outcome);
    std::int32_t child(std::int32_t node, std::uint32_t label) const;
    std::int32_t find(std::span<const std::uint32_t> outcome) const;  // leaf or -1

    std::uint32_t length() const { return length_; }
    std::uint64_t total() const { return nodes_[0].count; }
    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t leaf_count() const;
    double weight(std::int32_t node) const;  // count / total

    // Rebuilds a trie from a preorder dump (used by deserialization).
    static LabelTrie from_nodes(std::uint32_t length, std::vector<Node> nodes);

    bool frozen() const { return frozen_; }
    void mark_frozen() { frozen_ = true; }

private:
    std::uint32_t length_;
    std::vector<Node> nodes_;
    bool frozen_ = false;
};

struct QueryResult {
    bool hit = false;
    encodings::Code code;
    std::uint64_t visits = 0;   // weighted-search node visits on the trie path
    std::uint32_t matched = 0;  // labels matched before a miss (== length on a hit)
};

// Labels are interval indices; children searched by a weight-bisection key tree.
class IntervalTrie {
public:
    IntervalTrie() = default;
    explicit IntervalTrie(std::uint32_t length) : trie_(length) {}

    void train(std::span<const double> z, const vlist::VList& v);
    void insert(std::span<const std::uint32_t> code);
    void freeze();
    QueryResult query(std::span<const double> z, const vlist::VList& v) const;

    LabelTrie& labels() { return trie_; }
    const LabelTrie& labels() const { return trie_; }

private:
    LabelTrie trie_;
    std::vector<std::int32_t> left_, right_;  // key trees, concatenated per node
    std::vector<std::int32_t> off_;           // start of each node's key tree
    std::vector<std::int32_t> root_;
};

// Labels are predecessor positions; children searched through the node's order map.
class OrderTrie {
public:
    OrderTrie() = default;
    explicit OrderTrie(std::uint32_t length) : trie_(length) {}

    void train(std::span<const double> z);
    void insert(std::span<const std::uint32_t> code);
    void freeze();
    QueryResult query(std::span<const double> z) const;

    LabelTrie& labels() { return trie_; }
    const LabelTrie& labels() const { return trie_; }
    std::size_t order_map_nodes() const { return order_nodes_; }

private:
    LabelTrie trie_;
    std::vector<std::int32_t> root_;  // slot-tree handle per trie node
    std::vector<SlotNode> pool_;      // leaf handles encode kid indices
    std::size_t order_nodes_ = 0;
};

namespace detail {

// Slot trees for the order-labelled levels [from, to) of t. Nodes at depth `from`
// start a fresh order map. When orders_at_to is given it receives, for every node
// at depth `to`, the sorted order of the level's positions (0-based).
// Returns the number of order-map nodes allocated.
std::size_t freeze_order_levels(const LabelTrie& t, std::uint32_t from, std::uint32_t to, std::vector<std::int32_t>& root,
                                std::vector<SlotNode>& pool,
                                std::vector<std::vector<std::uint32_t>>* orders_at_to = nullptr);

// Locates vals[i] among vals[0..i) through a node's slot tree; returns the kid
// index or -1. Throws DuplicateValue on a tie.
std::int32_t order_step(const std::vector<SlotNode>& pool, std::int32_t root, std::span<const double> vals, std::size_t i,
                        std::uint64_t& visits);

}  // namespace detail

// Training sample counts: N = ceil(t0 ln t0 ln n), t0 from the outcome-count bound.
enum class TrieKind { Interval, Order, Triangle, SplitOrder };
double t0_bound(TrieKind kind, std::size_t n, std::size_t m, double c = 4.0);
std::size_t samples_needed(TrieKind kind, std::size_t n, std::size_t m, double c = 4.0);

}  // namespace selfimp::trie

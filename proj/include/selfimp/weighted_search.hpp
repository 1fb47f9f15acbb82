#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace selfimp::trie {

// Node-oriented search tree over keys 0..K-1 built by weight bisection: the root of
// every range is the key holding its weighted median, so a key of weight w sits at
// depth at most log2(W / w) + 1.
struct KeyTree {
    std::vector<std::int32_t> left, right;
    std::int32_t root = -1;
};

KeyTree build_key_tree(std::span<const double> weights);

// cmp(k) < 0: target lies left of key k; > 0: right; 0: found.
template <class Cmp>
std::int32_t key_search(const std::int32_t* left, const std::int32_t* right, std::int32_t root, Cmp&& cmp,
                        std::uint64_t& visits) {
    std::int32_t k = root;
    while (k >= 0) {
        ++visits;
        int c = cmp(k);
        if (c == 0) return k;
        k = c < 0 ? left[k] : right[k];
    }
    return -1;
}

// Leaf-oriented search tree over slots 0..K-1 separated by boundaries 1..K-1.
// Child handles: >= 0 internal node, -1 abort (no weight below), <= -2 slot -(h+2).
struct SlotNode {
    std::int32_t boundary;
    std::int32_t left;
    std::int32_t right;
};

constexpr std::int32_t kAbort = -1;
inline std::int32_t slot_handle(std::int32_t slot) { return -slot - 2; }

// Appends nodes to pool; returns the root handle.
std::int32_t build_slot_tree(std::span<const double> weights, std::vector<SlotNode>& pool);

// right(b) is true when the target lies at or beyond boundary b.
// Returns the slot, or -1 when the search reached a weightless subtree.
template <class Right>
std::int32_t slot_search(const std::vector<SlotNode>& pool, std::int32_t root, Right&& right, std::uint64_t& visits) {
    std::int32_t h = root;
    while (h >= 0) {
        ++visits;
        const SlotNode& nd = pool[static_cast<std::size_t>(h)];
        h = right(nd.boundary) ? nd.right : nd.left;
    }
    return h == kAbort ? -1 : -h - 2;
}

}  // namespace selfimp::trie

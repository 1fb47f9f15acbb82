#include "selfimp/order_map.hpp"

#include "selfimp/common.hpp"

namespace selfimp::trie {

OrderMap::Version OrderMap::clone(Version v) {
    nodes_.push_back(nodes_[static_cast<std::size_t>(v)]);
    return static_cast<Version>(nodes_.size() - 1);
}

void OrderMap::pull(Version v) {
    auto& nd = nodes_[static_cast<std::size_t>(v)];
    nd.size = 1 + static_cast<std::uint32_t>(size(nd.left) + size(nd.right));
}

void OrderMap::split(Version v, std::size_t k, Version& a, Version& b) {
    if (v < 0) {
        a = b = kEmpty;
        return;
    }
    Version c = clone(v);
    std::size_t ls = size(nodes_[static_cast<std::size_t>(c)].left);
    if (k <= ls) {
        Version l, r;
        split(nodes_[static_cast<std::size_t>(c)].left, k, l, r);
        nodes_[static_cast<std::size_t>(c)].left = r;
        pull(c);
        a = l;
        b = c;
    } else {
        Version l, r;
        split(nodes_[static_cast<std::size_t>(c)].right, k - ls - 1, l, r);
        nodes_[static_cast<std::size_t>(c)].right = l;
        pull(c);
        a = c;
        b = r;
    }
}

OrderMap::Version OrderMap::insert_rec(Version v, std::size_t rank, Version fresh) {
    if (v < 0) return fresh;
    if (nodes_[static_cast<std::size_t>(fresh)].prio > nodes_[static_cast<std::size_t>(v)].prio) {
        Version l, r;
        split(v, rank, l, r);
        nodes_[static_cast<std::size_t>(fresh)].left = l;
        nodes_[static_cast<std::size_t>(fresh)].right = r;
        pull(fresh);
        return fresh;
    }
    Version c = clone(v);
    std::size_t ls = size(nodes_[static_cast<std::size_t>(c)].left);
    if (rank <= ls) {
        Version child = insert_rec(nodes_[static_cast<std::size_t>(c)].left, rank, fresh);
        nodes_[static_cast<std::size_t>(c)].left = child;
    } else {
        Version child = insert_rec(nodes_[static_cast<std::size_t>(c)].right, rank - ls - 1, fresh);
        nodes_[static_cast<std::size_t>(c)].right = child;
    }
    pull(c);
    return c;
}

OrderMap::Version OrderMap::insert(Version v, std::size_t rank, std::uint32_t value) {
    if (rank > size(v)) throw InvalidArgument("OrderMap::insert: rank out of range");
    nodes_.push_back({value, splitmix64(seed_ ^ ++counter_), 1, kEmpty, kEmpty});
    Version fresh = static_cast<Version>(nodes_.size() - 1);
    return insert_rec(v, rank, fresh);
}

std::uint32_t OrderMap::at(Version v, std::size_t rank) const {
    if (rank >= size(v)) throw InvalidArgument("OrderMap::at: rank out of range");
    while (true) {
        const auto& nd = nodes_[static_cast<std::size_t>(v)];
        std::size_t ls = size(nd.left);
        if (rank < ls) v = nd.left;
        else if (rank == ls) return nd.value;
        else {
            rank -= ls + 1;
            v = nd.right;
        }
    }
}

std::vector<std::uint32_t> OrderMap::flatten(Version v) const {
    std::vector<std::uint32_t> out;
    out.reserve(size(v));
    std::vector<Version> stack;
    Version cur = v;
    while (cur >= 0 || !stack.empty()) {
        while (cur >= 0) {
            stack.push_back(cur);
            cur = nodes_[static_cast<std::size_t>(cur)].left;
        }
        cur = stack.back();
        stack.pop_back();
        out.push_back(nodes_[static_cast<std::size_t>(cur)].value);
        cur = nodes_[static_cast<std::size_t>(cur)].right;
    }
    return out;
}

}  // namespace selfimp::trie

#include "selfimp/trie.hpp"

#include "selfimp/order_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace selfimp::trie {

LabelTrie::LabelTrie(std::uint32_t length) : length_(length) { nodes_.emplace_back(); }

std::int32_t LabelTrie::child(std::int32_t node, std::uint32_t label) const {
    const auto& kids = nodes_[static_cast<std::size_t>(node)].kids;
    auto it = std::lower_bound(kids.begin(), kids.end(), label, [&](std::int32_t k, std::uint32_t l) {
        return nodes_[static_cast<std::size_t>(k)].label < l;
    });
    if (it != kids.end() && nodes_[static_cast<std::size_t>(*it)].label == label) return *it;
    return -1;
}

void LabelTrie::insert(std::span<const std::uint32_t> outcome) {
    if (frozen_) throw FrozenTrie();
    if (outcome.size() != length_) throw InvalidArgument("LabelTrie::insert: outcome length mismatch");
    std::int32_t node = 0;
    ++nodes_[0].count;
    for (std::uint32_t label : outcome) {
        std::int32_t next = child(node, label);
        if (next < 0) {
            Node fresh;
            fresh.label = label;
            fresh.parent = node;
            fresh.depth = nodes_[static_cast<std::size_t>(node)].depth + 1;
            nodes_.push_back(std::move(fresh));
            next = static_cast<std::int32_t>(nodes_.size() - 1);
            auto& kids = nodes_[static_cast<std::size_t>(node)].kids;
            auto it = std::lower_bound(kids.begin(), kids.end(), label, [&](std::int32_t k, std::uint32_t l) {
                return nodes_[static_cast<std::size_t>(k)].label < l;
            });
            kids.insert(it, next);
        }
        ++nodes_[static_cast<std::size_t>(next)].count;
        node = next;
    }
}

std::int32_t LabelTrie::find(std::span<const std::uint32_t> outcome) const {
    std::int32_t node = 0;
    for (std::uint32_t label : outcome) {
        node = child(node, label);
        if (node < 0) return -1;
    }
    return node;
}

std::size_t LabelTrie::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.depth == length_ && n.count > 0; }));
}

double LabelTrie::weight(std::int32_t node) const {
    if (total() == 0) return 0.0;
    return static_cast<double>(nodes_[static_cast<std::size_t>(node)].count) / static_cast<double>(total());
}

LabelTrie LabelTrie::from_nodes(std::uint32_t length, std::vector<Node> nodes) {
    LabelTrie t(length);
    if (nodes.empty()) throw FormatError("trie dump has no root");
    t.nodes_ = std::move(nodes);
    return t;
}

void IntervalTrie::train(std::span<const double> z, const vlist::VList& v) { insert(encodings::b_encode(z, v)); }

void IntervalTrie::insert(std::span<const std::uint32_t> code) { trie_.insert(code); }

void IntervalTrie::freeze() {
    if (trie_.total() == 0) throw InvalidArgument("cannot freeze an empty trie");
    const auto& nodes = trie_.nodes();
    root_.assign(nodes.size(), -1);
    off_.assign(nodes.size(), 0);
    left_.clear();
    right_.clear();
    std::vector<double> w;
    for (std::size_t u = 0; u < nodes.size(); ++u) {
        const auto& kids = nodes[u].kids;
        off_[u] = static_cast<std::int32_t>(left_.size());
        if (kids.empty()) continue;
        w.resize(kids.size());
        for (std::size_t k = 0; k < kids.size(); ++k) w[k] = static_cast<double>(nodes[static_cast<std::size_t>(kids[k])].count);
        KeyTree kt = build_key_tree(w);
        root_[u] = kt.root;
        left_.insert(left_.end(), kt.left.begin(), kt.left.end());
        right_.insert(right_.end(), kt.right.begin(), kt.right.end());
    }
    trie_.mark_frozen();
}

QueryResult IntervalTrie::query(std::span<const double> z, const vlist::VList& v) const {
    if (!trie_.frozen()) throw InvalidArgument("IntervalTrie::query: trie not frozen");
    QueryResult res;
    const auto& nodes = trie_.nodes();
    const double inf = std::numeric_limits<double>::infinity();
    const std::uint32_t n = static_cast<std::uint32_t>(v.n());
    std::int32_t node = 0;
    res.code.reserve(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        const double x = z[i];
        std::int32_t k = -1;
        if (!nd.kids.empty()) {
            auto cmp = [&](std::int32_t key) {
                std::uint32_t r = nodes[static_cast<std::size_t>(nd.kids[static_cast<std::size_t>(key)])].label;
                double lo = r == 0 ? -inf : v.pivots[r - 1];
                double hi = r >= n ? inf : v.pivots[r];
                if (x < lo) return -1;
                if (x >= hi) return 1;
                return 0;
            };
            const std::size_t off = static_cast<std::size_t>(off_[static_cast<std::size_t>(node)]);
            k = key_search(left_.data() + off, right_.data() + off, root_[static_cast<std::size_t>(node)], cmp, res.visits);
        }
        if (k < 0) {
            res.matched = static_cast<std::uint32_t>(i);
            res.code = encodings::b_encode(z, v);
            return res;
        }
        node = nd.kids[static_cast<std::size_t>(k)];
        res.code.push_back(nodes[static_cast<std::size_t>(node)].label);
    }
    res.hit = true;
    res.matched = static_cast<std::uint32_t>(z.size());
    return res;
}

namespace detail {

std::size_t freeze_order_levels(const LabelTrie& t, std::uint32_t from, std::uint32_t to, std::vector<std::int32_t>& root,
                                std::vector<SlotNode>& pool, std::vector<std::vector<std::uint32_t>>* orders_at_to) {
    const auto& nodes = t.nodes();
    if (root.size() < nodes.size()) root.resize(nodes.size(), kAbort);
    if (orders_at_to && orders_at_to->size() < nodes.size()) orders_at_to->resize(nodes.size());
    OrderMap om;
    std::vector<std::pair<std::int32_t, OrderMap::Version>> stack;
    for (std::size_t u = 0; u < nodes.size(); ++u)
        if (nodes[u].depth == from) stack.emplace_back(static_cast<std::int32_t>(u), om.insert(OrderMap::kEmpty, 0, 0));
    std::vector<double> w;
    std::vector<std::uint32_t> inv;
    while (!stack.empty()) {
        auto [u, ver] = stack.back();
        stack.pop_back();
        const auto& nd = nodes[static_cast<std::size_t>(u)];
        auto flat = om.flatten(ver);
        if (nd.depth == to) {
            if (orders_at_to) {
                auto& out = (*orders_at_to)[static_cast<std::size_t>(u)];
                out.clear();
                for (std::size_t a = 1; a < flat.size(); ++a) out.push_back(flat[a] - 1);
            }
            continue;
        }
        const std::size_t slots = flat.size();
        inv.assign(slots, 0);
        for (std::size_t a = 0; a < slots; ++a) inv[flat[a]] = static_cast<std::uint32_t>(a);
        w.assign(slots, 0.0);
        std::vector<std::int32_t> slot_kid(slots, -1);
        for (std::size_t k = 0; k < nd.kids.size(); ++k) {
            const auto& kid = nodes[static_cast<std::size_t>(nd.kids[k])];
            if (kid.label >= slots) throw FormatError("order trie label points past the processed prefix");
            w[inv[kid.label]] = static_cast<double>(kid.count);
            slot_kid[inv[kid.label]] = static_cast<std::int32_t>(k);
        }
        std::size_t first = pool.size();
        std::int32_t r = build_slot_tree(w, pool);
        auto remap = [&](std::int32_t h) { return h <= -2 ? slot_handle(slot_kid[static_cast<std::size_t>(-h - 2)]) : h; };
        for (std::size_t q = first; q < pool.size(); ++q) {
            pool[q].boundary = static_cast<std::int32_t>(flat[static_cast<std::size_t>(pool[q].boundary)]);
            pool[q].left = remap(pool[q].left);
            pool[q].right = remap(pool[q].right);
        }
        root[static_cast<std::size_t>(u)] = remap(r);
        const std::uint32_t next_pos = static_cast<std::uint32_t>(slots);
        for (std::int32_t kidx : nd.kids) {
            const auto& kid = nodes[static_cast<std::size_t>(kidx)];
            stack.emplace_back(kidx, om.insert(ver, inv[kid.label] + 1, next_pos));
        }
    }
    return om.node_count();
}

std::int32_t order_step(const std::vector<SlotNode>& pool, std::int32_t root, std::span<const double> vals, std::size_t i,
                        std::uint64_t& visits) {
    const double x = vals[i];
    auto right = [&](std::int32_t pos) {
        double y = vals[static_cast<std::size_t>(pos - 1)];
        if (x == y) throw DuplicateValue("order search: tied values");
        return x > y;
    };
    return slot_search(pool, root, right, visits);
}

}  // namespace detail

void OrderTrie::train(std::span<const double> z) { insert(encodings::pi_encode(z)); }

void OrderTrie::insert(std::span<const std::uint32_t> code) { trie_.insert(code); }

void OrderTrie::freeze() {
    if (trie_.total() == 0) throw InvalidArgument("cannot freeze an empty trie");
    root_.assign(trie_.nodes().size(), kAbort);
    pool_.clear();
    order_nodes_ = detail::freeze_order_levels(trie_, 0, trie_.length(), root_, pool_);
    trie_.mark_frozen();
}

QueryResult OrderTrie::query(std::span<const double> z) const {
    if (!trie_.frozen()) throw InvalidArgument("OrderTrie::query: trie not frozen");
    QueryResult res;
    const auto& nodes = trie_.nodes();
    std::int32_t node = 0;
    res.code.reserve(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        std::int32_t k = detail::order_step(pool_, root_[static_cast<std::size_t>(node)], z, i, res.visits);
        if (k < 0) {
            res.matched = static_cast<std::uint32_t>(i);
            res.code = encodings::pi_encode(z);
            return res;
        }
        node = nodes[static_cast<std::size_t>(node)].kids[static_cast<std::size_t>(k)];
        res.code.push_back(nodes[static_cast<std::size_t>(node)].label);
    }
    res.hit = true;
    res.matched = static_cast<std::uint32_t>(z.size());
    return res;
}

double t0_bound(TrieKind kind, std::size_t n, std::size_t m, double c) {
    double nn = static_cast<double>(n), mm = static_cast<double>(m);
    switch (kind) {
        case TrieKind::Interval: return c * nn * mm;
        case TrieKind::Order: return c * mm * mm;
        case TrieKind::Triangle: return c * nn * nn * mm * mm;
        case TrieKind::SplitOrder: return c * std::pow(mm, 8.0);
    }
    return 0.0;
}

std::size_t samples_needed(TrieKind kind, std::size_t n, std::size_t m, double c) {
    double t0 = std::max(2.0, t0_bound(kind, n, m, c));
    double v = std::ceil(t0 * std::log(t0) * std::log(std::max<double>(static_cast<double>(n), 2.0)));
    if (v > 1e18) return static_cast<std::size_t>(1e18);
    return static_cast<std::size_t>(v);
}

}  // namespace selfimp::trie

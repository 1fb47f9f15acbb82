#include "selfimp/common.hpp"

#include <cmath>
#include <numeric>

namespace selfimp {

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t a) {
    std::size_t root = a;
    while (parent_[root] != root) {
        root = parent_[root];
        ++ops_;
    }
    while (parent_[a] != root) {
        std::size_t next = parent_[a];
        parent_[a] = root;
        a = next;
    }
    return root;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    ++ops_;
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
}

std::vector<std::vector<std::size_t>> UnionFind::groups() {
    std::vector<std::vector<std::size_t>> out;
    std::vector<long> slot(parent_.size(), -1);
    for (std::size_t i = 0; i < parent_.size(); ++i) {
        std::size_t r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<long>(out.size());
            out.emplace_back();
        }
        out[static_cast<std::size_t>(slot[r])].push_back(i);
    }
    return out;
}

double log2_safe(double x) { return x > 0 ? std::log2(x) : 0.0; }

double plugin_entropy(const std::vector<std::uint64_t>& counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw InvalidArgument("plugin_entropy: empty table");
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

std::string build_id() {
#ifdef SELFIMP_BUILD_ID
    return SELFIMP_BUILD_ID;
#else
    return "unknown";
#endif
}

}  // namespace selfimp

#pragma once

#include <cstdint>
#include <vector>

namespace selfimp::trie {

// Persistent sequence of positions (implicit treap with path copying). A version
// is a root handle; inserting returns a new version and leaves the old one intact.
class OrderMap {
public:
    using Version = std::int32_t;
    static constexpr Version kEmpty = -1;

    explicit OrderMap(std::uint64_t seed = 0x5eed) : seed_(seed) {}

    Version insert(Version v, std::size_t rank, std::uint32_t value);
    std::size_t size(Version v) const { return v < 0 ? 0 : nodes_[static_cast<std::size_t>(v)].size; }
    std::uint32_t at(Version v, std::size_t rank) const;
    std::vector<std::uint32_t> flatten(Version v) const;
    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        std::uint32_t value;
        std::uint64_t prio;
        std::uint32_t size;
        std::int32_t left, right;
    };
    std::vector<Node> nodes_;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;

    Version clone(Version v);
    void pull(Version v);
    void split(Version v, std::size_t k, Version& a, Version& b);
    Version insert_rec(Version v, std::size_t rank, Version fresh);
};

}  // namespace selfimp::trie

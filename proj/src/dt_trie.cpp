#include "selfimp/dt_trie.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <numeric>

namespace selfimp::trie {

using encodings::Code;

Code triangle_encode(const geom::Mesh& mesh, std::span<const Point> pts, geom::LocateContext* ctx) {
    geom::LocateContext local;
    if (!ctx) ctx = &local;
    Code out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = static_cast<std::uint32_t>(geom::locate(mesh, pts[i], ctx));
    return out;
}

Code split_order_encode(std::span<const Point> pts) {
    const std::size_t m = pts.size();
    if (m == 0) return {};
    std::vector<double> xs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) xs[i] = pts[i].x, ys[i] = pts[i].y;
    Code out = encodings::pi_encode(xs);
    auto yc = encodings::pi_encode(ys);
    out.insert(out.end(), yc.begin(), yc.end());
    auto t = splittree::build_halving(std::vector<Point>(pts.begin(), pts.end()));
    auto lab = splittree::split_labels(t);
    out.insert(out.end(), lab.begin(), lab.end());
    return out;
}

splittree::SplitTree split_tree_from_code(std::shared_ptr<const std::vector<Point>> all, std::vector<std::uint32_t> ids,
                                          std::span<const std::uint32_t> code) {
    const std::size_t m = ids.size();
    if (m == 0 || code.size() != 3 * m - 1) throw InvalidArgument("split-order code has the wrong length");
    return splittree::tree_from_labels(std::move(all), std::move(ids), code.subspan(2 * m));
}

// ---------------------------------------------------------------------------

namespace {

enum : std::int32_t { kMiss = -1, kDefer = -2 };

// kDefer on a boundary, 1 inside, 0 outside.
int contains(const geom::Mesh& mesh, std::uint32_t t, const Point& q, std::uint64_t& visits) {
    const auto& v = mesh.tris[t];
    int s[3];
    for (int k = 0; k < 3; ++k) {
        ++visits;
        s[k] = geom::orient(mesh.pts[v[static_cast<std::size_t>(k)]], mesh.pts[v[static_cast<std::size_t>((k + 1) % 3)]], q);
        if (s[k] < 0) return 0;
    }
    return (s[0] == 0 || s[1] == 0 || s[2] == 0) ? kDefer : 1;
}

TriangleTrie::Tier build_tier(const geom::Mesh& mesh, const LabelTrie& t, std::vector<std::int32_t> kids) {
    TriangleTrie::Tier tier;
    tier.kids = std::move(kids);
    if (tier.kids.size() <= 4) return tier;
    const auto& nodes = t.nodes();
    struct Span {
        double lo, hi;
        std::array<std::uint32_t, 3> v;  // sorted by x
        std::int32_t kid;
    };
    std::vector<Span> spans;
    for (auto k : tier.kids) {
        auto v = mesh.tris[nodes[static_cast<std::size_t>(k)].label];
        std::sort(v.begin(), v.end(), [&](std::uint32_t a, std::uint32_t b) { return mesh.pts[a].x < mesh.pts[b].x; });
        spans.push_back({mesh.pts[v[0]].x, mesh.pts[v[2]].x, v, k});
        for (auto w : v) tier.xs.push_back(mesh.pts[w].x);
    }
    std::sort(tier.xs.begin(), tier.xs.end());
    tier.xs.erase(std::unique(tier.xs.begin(), tier.xs.end()), tier.xs.end());
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.lo < b.lo; });
    std::vector<std::size_t> active;
    std::size_t next = 0;
    std::vector<std::pair<double, TriangleTrie::Tier::Entry>> slab;
    tier.slab_off.push_back(0);
    for (std::size_t s = 0; s + 1 < tier.xs.size(); ++s) {
        const double xl = tier.xs[s], xr = tier.xs[s + 1], mid = xl + (xr - xl) / 2;
        while (next < spans.size() && spans[next].lo <= xl) active.push_back(next++);
        std::erase_if(active, [&](std::size_t i) { return spans[i].hi <= xl; });
        slab.clear();
        for (auto i : active) {
            const auto& sp = spans[i];
            const Point &p0 = mesh.pts[sp.v[0]], &p1 = mesh.pts[sp.v[1]], &p2 = mesh.pts[sp.v[2]];
            std::uint32_t a = sp.v[0], b = sp.v[2];
            if (geom::orient(p0, p2, p1) > 0) {
                if (xr <= p1.x) b = sp.v[1];
                else a = sp.v[1];
            }
            const Point &pa = mesh.pts[a], &pb = mesh.pts[b];
            double y = pa.y + (pb.y - pa.y) * ((mid - pa.x) / (pb.x - pa.x));
            slab.push_back({y, {a, b, sp.kid}});
        }
        std::sort(slab.begin(), slab.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
        for (auto& e : slab) tier.entries.push_back(e.second);
        tier.slab_off.push_back(static_cast<std::uint32_t>(tier.entries.size()));
    }
    return tier;
}

std::int32_t search_tier(const TriangleTrie::Tier& tier, const geom::Mesh& mesh, const LabelTrie& t, const Point& q,
                         std::uint64_t& visits) {
    const auto& nodes = t.nodes();
    if (tier.xs.empty()) {
        for (auto k : tier.kids) {
            int c = contains(mesh, nodes[static_cast<std::size_t>(k)].label, q, visits);
            if (c == kDefer) return kDefer;
            if (c == 1) return k;
        }
        return kMiss;
    }
    ++visits;
    if (q.x <= tier.xs.front() || q.x >= tier.xs.back()) return q.x == tier.xs.front() || q.x == tier.xs.back() ? kDefer : kMiss;
    auto it = std::upper_bound(tier.xs.begin(), tier.xs.end(), q.x);
    visits += static_cast<std::uint64_t>(std::bit_width(tier.xs.size()));
    if (*(it - 1) == q.x) return kDefer;
    auto s = static_cast<std::size_t>(it - tier.xs.begin() - 1);
    std::uint32_t lo = tier.slab_off[s], hi = tier.slab_off[s + 1];
    // First entry whose upper edge lies strictly above q.
    while (lo < hi) {
        std::uint32_t md = lo + (hi - lo) / 2;
        const auto& e = tier.entries[md];
        ++visits;
        int o = geom::orient(mesh.pts[e.a], mesh.pts[e.b], q);
        if (o == 0) return kDefer;
        if (o > 0) lo = md + 1;
        else hi = md;
    }
    if (lo == tier.slab_off[s + 1]) return kMiss;
    std::int32_t k = tier.entries[lo].kid;
    int c = contains(mesh, nodes[static_cast<std::size_t>(k)].label, q, visits);
    if (c == kDefer) return kDefer;
    return c == 1 ? k : kMiss;
}

}  // namespace

void TriangleTrie::train(std::span<const Point> pts, const geom::Mesh& mesh) { insert(triangle_encode(mesh, pts)); }

void TriangleTrie::insert(std::span<const std::uint32_t> code) { trie_.insert(code); }

void TriangleTrie::freeze(const geom::Mesh& mesh) {
    if (trie_.total() == 0) throw InvalidArgument("cannot freeze an empty trie");
    const auto& nodes = trie_.nodes();
    tier_off_.assign(nodes.size() + 1, 0);
    tiers_.clear();
    for (std::size_t u = 0; u < nodes.size(); ++u) {
        tier_off_[u] = static_cast<std::uint32_t>(tiers_.size());
        auto kids = nodes[u].kids;
        if (kids.empty()) continue;
        for (auto k : kids)
            if (nodes[static_cast<std::size_t>(k)].label >= mesh.size()) throw FormatError("triangle label outside the mesh");
        std::stable_sort(kids.begin(), kids.end(), [&](std::int32_t a, std::int32_t b) {
            return nodes[static_cast<std::size_t>(a)].count > nodes[static_cast<std::size_t>(b)].count;
        });
        const double w = static_cast<double>(nodes[u].count);
        std::size_t pos = 0;
        for (double div : {4.0, 16.0, 256.0, 65536.0, 0.0}) {
            std::size_t end = pos;
            while (end < kids.size() && (div == 0 || static_cast<double>(nodes[static_cast<std::size_t>(kids[end])].count) * div > w)) ++end;
            if (end > pos) tiers_.push_back(build_tier(mesh, trie_, {kids.begin() + static_cast<std::ptrdiff_t>(pos), kids.begin() + static_cast<std::ptrdiff_t>(end)}));
            pos = end;
        }
    }
    tier_off_[nodes.size()] = static_cast<std::uint32_t>(tiers_.size());
    trie_.mark_frozen();
}

QueryResult TriangleTrie::query(std::span<const Point> pts, const geom::Mesh& mesh, geom::LocateContext* ctx) const {
    if (!trie_.frozen()) throw InvalidArgument("TriangleTrie::query: trie not frozen");
    if (pts.size() != trie_.length()) throw InvalidArgument("TriangleTrie::query: wrong number of points");
    QueryResult res;
    const auto& nodes = trie_.nodes();
    std::int32_t node = 0;
    res.code.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::int32_t next = kMiss;
        const auto u = static_cast<std::size_t>(node);
        for (std::uint32_t k = tier_off_[u]; k < tier_off_[u + 1]; ++k) {
            next = search_tier(tiers_[k], mesh, trie_, pts[i], res.visits);
            if (next != kMiss) break;
        }
        if (next == kDefer) {
            auto t = geom::locate(mesh, pts[i], ctx);
            next = trie_.child(node, static_cast<std::uint32_t>(t));
        }
        if (next < 0) {
            res.matched = static_cast<std::uint32_t>(i);
            res.code = triangle_encode(mesh, pts, ctx);
            return res;
        }
        node = next;
        res.code.push_back(nodes[static_cast<std::size_t>(node)].label);
    }
    res.hit = true;
    res.matched = static_cast<std::uint32_t>(pts.size());
    return res;
}

// ---------------------------------------------------------------------------

void SplitOrderTrie::train(std::span<const Point> pts) { insert(split_order_encode(pts)); }

void SplitOrderTrie::insert(std::span<const std::uint32_t> code) { trie_.insert(code); }

void SplitOrderTrie::freeze() {
    if (trie_.total() == 0) throw InvalidArgument("cannot freeze an empty trie");
    const auto& nodes = trie_.nodes();
    root_.assign(nodes.size(), kAbort);
    pool_.clear();
    split_.assign(nodes.size(), -1);
    splits_.clear();
    std::vector<std::vector<std::uint32_t>> xo, yo;
    detail::freeze_order_levels(trie_, 0, m_, root_, pool_, &xo);
    detail::freeze_order_levels(trie_, m_, 2 * m_, root_, pool_, &yo);
    if (m_ < 2) {
        trie_.mark_frozen();
        return;
    }
    struct Part {
        std::vector<std::uint32_t> by[2];
    };
    struct Item {
        std::int32_t node;
        std::vector<Part> stack;
    };
    std::vector<Item> work;
    for (std::size_t u = 0; u < nodes.size(); ++u) {
        if (nodes[u].depth != 2 * m_) continue;
        auto a = static_cast<std::int32_t>(u);
        while (nodes[static_cast<std::size_t>(a)].depth > m_) a = nodes[static_cast<std::size_t>(a)].parent;
        Part all;
        all.by[0] = xo[static_cast<std::size_t>(a)];
        all.by[1] = yo[u];
        work.push_back({static_cast<std::int32_t>(u), {std::move(all)}});
    }
    std::vector<char> left(m_);
    std::vector<double> w;
    std::vector<std::int32_t> slot_kid;
    while (!work.empty()) {
        Item it = std::move(work.back());
        work.pop_back();
        const auto& nd = nodes[static_cast<std::size_t>(it.node)];
        if (nd.kids.empty()) continue;
        while (!it.stack.empty() && it.stack.back().by[0].size() < 2) it.stack.pop_back();
        if (it.stack.empty()) throw FormatError("split-order trie deeper than its split tree");
        Part s = std::move(it.stack.back());
        it.stack.pop_back();
        SplitNode sn;
        sn.xmin = s.by[0].front(), sn.xmax = s.by[0].back();
        sn.ymin = s.by[1].front(), sn.ymax = s.by[1].back();
        const auto size = static_cast<std::uint32_t>(s.by[0].size());
        for (int axis = 0; axis < 2; ++axis) {
            w.clear();
            slot_kid.clear();
            std::vector<std::uint32_t> cuts;
            for (std::size_t k = 0; k < nd.kids.size(); ++k) {
                const auto& kid = nodes[static_cast<std::size_t>(nd.kids[k])];
                if (kid.label / m_ != static_cast<std::uint32_t>(axis)) continue;
                std::uint32_t c = kid.label % m_;
                if (c == 0 || c >= size) throw FormatError("split decision outside the node");
                w.push_back(static_cast<double>(kid.count));
                slot_kid.push_back(static_cast<std::int32_t>(k));
                cuts.push_back(c);
            }
            if (w.empty()) continue;
            std::size_t first = pool_.size();
            std::int32_t r = build_slot_tree(w, pool_);
            auto remap = [&](std::int32_t h) { return h <= -2 ? slot_handle(slot_kid[static_cast<std::size_t>(-h - 2)]) : h; };
            for (std::size_t q = first; q < pool_.size(); ++q) {
                pool_[q].boundary = static_cast<std::int32_t>(cuts[static_cast<std::size_t>(pool_[q].boundary)]);
                pool_[q].left = remap(pool_[q].left);
                pool_[q].right = remap(pool_[q].right);
            }
            sn.root[axis] = remap(r);
        }
        for (std::int32_t kidx : nd.kids) {
            const auto& kid = nodes[static_cast<std::size_t>(kidx)];
            const std::uint32_t axis = kid.label / m_, c = kid.label % m_;
            std::fill(left.begin(), left.end(), 0);
            for (std::uint32_t j = 0; j < c; ++j) left[s.by[axis][j]] = 1;
            Part l, r;
            for (int a = 0; a < 2; ++a)
                for (auto p : s.by[a]) (left[p] ? l : r).by[a].push_back(p);
            Item child{kidx, it.stack};
            child.stack.push_back(std::move(r));
            child.stack.push_back(std::move(l));
            work.push_back(std::move(child));
        }
        sn.by[0] = std::move(s.by[0]);
        sn.by[1] = std::move(s.by[1]);
        split_[static_cast<std::size_t>(it.node)] = static_cast<std::int32_t>(splits_.size());
        splits_.push_back(std::move(sn));
    }
    trie_.mark_frozen();
}

QueryResult SplitOrderTrie::query(std::span<const Point> pts) const {
    if (!trie_.frozen()) throw InvalidArgument("SplitOrderTrie::query: trie not frozen");
    if (pts.size() != m_) throw InvalidArgument("SplitOrderTrie::query: wrong number of points");
    QueryResult res;
    const auto& nodes = trie_.nodes();
    std::vector<double> v[2];
    for (int a = 0; a < 2; ++a) {
        v[a].resize(m_);
        for (std::size_t i = 0; i < m_; ++i) v[a][i] = a == 0 ? pts[i].x : pts[i].y;
    }
    auto miss = [&](std::size_t depth) {
        res.matched = static_cast<std::uint32_t>(depth);
        res.code = split_order_encode(pts);
        return res;
    };
    std::int32_t node = 0;
    res.code.reserve(trie_.length());
    for (std::size_t d = 0; d < 2 * m_; ++d) {
        std::int32_t k = detail::order_step(pool_, root_[static_cast<std::size_t>(node)], v[d / m_], d % m_, res.visits);
        if (k < 0) return miss(d);
        node = nodes[static_cast<std::size_t>(node)].kids[static_cast<std::size_t>(k)];
        res.code.push_back(nodes[static_cast<std::size_t>(node)].label);
    }
    for (std::size_t d = 2 * m_; d < trie_.length(); ++d) {
        const SplitNode& sn = splits_[static_cast<std::size_t>(split_[static_cast<std::size_t>(node)])];
        res.visits += 1;
        const int axis = (v[0][sn.xmax] - v[0][sn.xmin]) >= (v[1][sn.ymax] - v[1][sn.ymin]) ? 0 : 1;
        const auto& by = sn.by[axis];
        const auto& c = v[axis];
        const double cut = splittree::halving_cut(c[by.front()], c[by.back()]);
        if (sn.root[axis] == kAbort) return miss(d);
        auto right = [&](std::int32_t b) { return c[by[static_cast<std::size_t>(b - 1)]] < cut; };
        std::int32_t k = slot_search(pool_, sn.root[axis], right, res.visits);
        if (k < 0) return miss(d);
        std::int32_t next = nodes[static_cast<std::size_t>(node)].kids[static_cast<std::size_t>(k)];
        std::uint32_t cnt = nodes[static_cast<std::size_t>(next)].label % m_;
        res.visits += 2;
        if (!(c[by[cnt - 1]] < cut) || c[by[cnt]] < cut) return miss(d);
        node = next;
        res.code.push_back(nodes[static_cast<std::size_t>(node)].label);
    }
    res.hit = true;
    res.matched = trie_.length();
    return res;
}

}  // namespace selfimp::trie

#include "selfimp/splittree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace selfimp::splittree {

namespace {

Rect point_rect(const Point& p) { return {p.x, p.y, p.x, p.y}; }

Rect join(const Rect& a, const Rect& b) {
    return {std::min(a.xlo, b.xlo), std::min(a.ylo, b.ylo), std::max(a.xhi, b.xhi), std::max(a.yhi, b.yhi)};
}

double coord(const Point& p, int axis) { return axis == 0 ? p.x : p.y; }

struct Builder {
    const std::vector<Point>& P;
    SplitTree& t;
    std::vector<std::uint32_t> tmp;

    std::int32_t rec(std::uint32_t begin, std::uint32_t end, std::int32_t parent, const Rect& rhat) {
        auto u = static_cast<std::int32_t>(t.nodes.size());
        t.nodes.emplace_back();
        Rect r = point_rect(P[t.perm[begin]]);
        for (std::uint32_t i = begin + 1; i < end; ++i) r = join(r, point_rect(P[t.perm[i]]));
        {
            Node& n = t.nodes.back();
            n.parent = parent;
            n.begin = begin;
            n.end = end;
            n.r = r;
            n.rhat = rhat;
        }
        if (end - begin == 1) return u;
        int axis = halving_axis(r);
        double lo = axis == 0 ? r.xlo : r.ylo, hi = axis == 0 ? r.xhi : r.yhi;
        if (!(lo < hi)) throw DuplicateValue("split tree: duplicate points");
        double cut = halving_cut(lo, hi);
        tmp.clear();
        std::uint32_t mid = begin;
        for (std::uint32_t i = begin; i < end; ++i) {
            if (coord(P[t.perm[i]], axis) < cut) t.perm[mid++] = t.perm[i];
            else tmp.push_back(t.perm[i]);
        }
        std::copy(tmp.begin(), tmp.end(), t.perm.begin() + mid);
        Rect lr = rhat, rr = rhat;
        if (axis == 0) lr.xhi = rr.xlo = cut;
        else lr.yhi = rr.ylo = cut;
        t.nodes[static_cast<std::size_t>(u)].axis = axis;
        t.nodes[static_cast<std::size_t>(u)].cut = cut;
        std::int32_t l = rec(begin, mid, u, lr);
        std::int32_t rt = rec(mid, end, u, rr);
        t.nodes[static_cast<std::size_t>(u)].left = l;
        t.nodes[static_cast<std::size_t>(u)].right = rt;
        return u;
    }
};

}  // namespace

double halving_cut(double lo, double hi) {
    double c = std::midpoint(lo, hi);
    return c > lo ? c : hi;
}

int halving_axis(const Rect& r) { return (r.xhi - r.xlo) >= (r.yhi - r.ylo) ? 0 : 1; }

SplitTree build_halving(std::shared_ptr<const std::vector<Point>> pts, std::vector<std::uint32_t> ids) {
    if (ids.empty()) throw InvalidArgument("split tree needs at least one point");
    SplitTree t;
    t.pts = std::move(pts);
    t.perm = std::move(ids);
    t.nodes.reserve(2 * t.perm.size() - 1);
    const auto& P = *t.pts;
    Rect r = point_rect(P[t.perm[0]]);
    for (auto i : t.perm) r = join(r, point_rect(P[i]));
    double cx = std::midpoint(r.xlo, r.xhi), cy = std::midpoint(r.ylo, r.yhi), h = r.lmax() / 2;
    Rect sq{cx - h, cy - h, cx + h, cy + h};
    // Rounding can leave the square a hair inside the box; widen to cover it.
    sq = join(sq, r);
    Builder b{P, t, {}};
    b.rec(0, static_cast<std::uint32_t>(t.perm.size()), -1, sq);
    return t;
}

SplitTree build_halving(std::vector<Point> pts) {
    std::vector<std::uint32_t> ids(pts.size());
    std::iota(ids.begin(), ids.end(), 0u);
    return build_halving(std::make_shared<const std::vector<Point>>(std::move(pts)), std::move(ids));
}

std::vector<std::uint32_t> split_labels(const SplitTree& t) {
    std::vector<std::uint32_t> out;
    const auto m = static_cast<std::uint32_t>(t.size());
    for (const auto& n : t.nodes)
        if (!n.leaf()) out.push_back(static_cast<std::uint32_t>(n.axis) * m + t.nodes[static_cast<std::size_t>(n.left)].size());
    return out;
}

SplitTree tree_from_labels(std::shared_ptr<const std::vector<Point>> pts, std::vector<std::uint32_t> ids,
                           std::span<const std::uint32_t> labels) {
    auto t = build_halving(std::move(pts), std::move(ids));
    auto got = split_labels(t);
    if (!std::equal(got.begin(), got.end(), labels.begin(), labels.end()))
        throw InvalidArgument("split decisions do not match the points");
    return t;
}

std::size_t fair_split_violations(const SplitTree& t) {
    std::size_t bad = 0;
    for (const auto& n : t.nodes) {
        if (n.parent < 0) continue;
        if (3 * n.rhat.lmin() < t.nodes[static_cast<std::size_t>(n.parent)].r.lmax() * (1 - 1e-12)) ++bad;
        if (!n.rhat.contains(n.r)) ++bad;
    }
    return bad;
}

bool same_tree(const SplitTree& a, const SplitTree& b) {
    if (a.perm != b.perm || a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const Node &x = a.nodes[i], &y = b.nodes[i];
        if (x.left != y.left || x.right != y.right || x.parent != y.parent || x.begin != y.begin || x.end != y.end ||
            x.axis != y.axis || x.cut != y.cut || !(x.r == y.r) || !(x.rhat == y.rhat))
            return false;
    }
    return true;
}

SplitTree derive_subset(const SplitTree& t, std::span<const std::uint32_t> q) {
    SplitTree out;
    out.pts = t.pts;
    if (q.empty() || t.empty()) return out;
    std::vector<char> in(t.pts->size(), 0);
    for (auto i : q) {
        if (i >= in.size() || in[i]) throw InvalidArgument("subset has an unknown or repeated point");
        in[i] = 1;
    }
    const std::size_t np = t.nodes.size();
    std::vector<std::uint32_t> cnt(np, 0);
    for (std::size_t u = np; u-- > 0;) {
        const Node& n = t.nodes[u];
        cnt[u] = n.leaf() ? in[t.perm[n.begin]] : cnt[static_cast<std::size_t>(n.left)] + cnt[static_cast<std::size_t>(n.right)];
    }
    if (cnt[0] != q.size()) throw InvalidArgument("subset point not in the tree");
    out.perm.reserve(q.size());
    out.nodes.reserve(2 * q.size() - 1);
    auto emit = [&](auto&& self, std::int32_t u, std::int32_t parent) -> std::int32_t {
        const Rect rhat = t.nodes[static_cast<std::size_t>(u)].rhat;
        while (!t.nodes[static_cast<std::size_t>(u)].leaf()) {
            const Node& n = t.nodes[static_cast<std::size_t>(u)];
            if (cnt[static_cast<std::size_t>(n.left)] == 0) u = n.right;
            else if (cnt[static_cast<std::size_t>(n.right)] == 0) u = n.left;
            else break;
        }
        auto id = static_cast<std::int32_t>(out.nodes.size());
        out.nodes.emplace_back();
        const Node& src = t.nodes[static_cast<std::size_t>(u)];
        auto begin = static_cast<std::uint32_t>(out.perm.size());
        Rect r;
        if (src.leaf()) {
            out.perm.push_back(t.perm[src.begin]);
            r = point_rect((*t.pts)[t.perm[src.begin]]);
        } else {
            std::int32_t l = self(self, src.left, id);
            std::int32_t rt = self(self, src.right, id);
            out.nodes[static_cast<std::size_t>(id)].left = l;
            out.nodes[static_cast<std::size_t>(id)].right = rt;
            r = join(out.nodes[static_cast<std::size_t>(l)].r, out.nodes[static_cast<std::size_t>(rt)].r);
        }
        Node& n = out.nodes[static_cast<std::size_t>(id)];
        n.parent = parent;
        n.begin = begin;
        n.end = static_cast<std::uint32_t>(out.perm.size());
        n.axis = src.axis;
        n.cut = src.leaf() ? 0 : src.cut;
        n.r = r;
        n.rhat = rhat;
        return id;
    };
    emit(emit, 0, -1);
    return out;
}

std::vector<SplitTree> derive_subsets_batched(const SplitTree& t, const std::vector<std::vector<std::uint32_t>>& subsets,
                                              BatchStats* stats) {
    std::vector<SplitTree> out(subsets.size());
    const std::size_t np = t.nodes.size();
    std::vector<std::int32_t> leaf_of(t.pts->size(), -1);
    for (std::size_t u = 0; u < np; ++u)
        if (t.nodes[u].leaf()) leaf_of[t.perm[t.nodes[u].begin]] = static_cast<std::int32_t>(u);

    // Consecutive pairs of every subset become offline LCA queries.
    std::vector<std::uint32_t> qstart(subsets.size() + 1, 0);
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        const auto& q = subsets[s];
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (q[i] >= leaf_of.size() || leaf_of[q[i]] < 0) throw InvalidArgument("subset point not in the tree");
            if (i > 0 && leaf_of[q[i - 1]] >= leaf_of[q[i]]) throw InvalidArgument("subset not listed in leaf order");
        }
        qstart[s + 1] = qstart[s] + static_cast<std::uint32_t>(q.empty() ? 0 : q.size() - 1);
    }
    const std::uint32_t nq = qstart.back();
    std::vector<std::int32_t> lca(nq, -1);
    std::vector<std::uint32_t> head(np + 1, 0);
    std::vector<std::pair<std::int32_t, std::uint32_t>> qs(2 * nq);
    for (std::size_t s = 0; s < subsets.size(); ++s)
        for (std::size_t i = 1; i < subsets[s].size(); ++i) {
            ++head[static_cast<std::size_t>(leaf_of[subsets[s][i - 1]]) + 1];
            ++head[static_cast<std::size_t>(leaf_of[subsets[s][i]]) + 1];
        }
    for (std::size_t u = 0; u < np; ++u) head[u + 1] += head[u];
    {
        auto fill = head;
        for (std::size_t s = 0; s < subsets.size(); ++s)
            for (std::size_t i = 1; i < subsets[s].size(); ++i) {
                auto a = leaf_of[subsets[s][i - 1]], b = leaf_of[subsets[s][i]];
                std::uint32_t id = qstart[s] + static_cast<std::uint32_t>(i - 1);
                qs[fill[static_cast<std::size_t>(a)]++] = {b, id};
                qs[fill[static_cast<std::size_t>(b)]++] = {a, id};
            }
    }
    UnionFind uf(np);
    std::vector<std::int32_t> anc(np), depth(np, 0);
    std::vector<char> done(np, 0);
    // Iterative Tarjan: (node, next child index).
    std::vector<std::pair<std::int32_t, int>> st{{0, 0}};
    anc[0] = 0;
    while (!st.empty()) {
        auto& [u, k] = st.back();
        const Node& n = t.nodes[static_cast<std::size_t>(u)];
        if (!n.leaf() && k < 2) {
            std::int32_t c = k == 0 ? n.left : n.right;
            if (k == 1) {
                uf.unite(static_cast<std::size_t>(u), static_cast<std::size_t>(n.left));
                anc[uf.find(static_cast<std::size_t>(u))] = u;
            }
            ++k;
            depth[static_cast<std::size_t>(c)] = depth[static_cast<std::size_t>(u)] + 1;
            anc[static_cast<std::size_t>(c)] = c;
            st.emplace_back(c, 0);
            continue;
        }
        if (!n.leaf()) {
            uf.unite(static_cast<std::size_t>(u), static_cast<std::size_t>(n.right));
            anc[uf.find(static_cast<std::size_t>(u))] = u;
        }
        done[static_cast<std::size_t>(u)] = 1;
        for (std::uint32_t e = head[static_cast<std::size_t>(u)]; e < head[static_cast<std::size_t>(u) + 1]; ++e) {
            auto [w, id] = qs[e];
            if (done[static_cast<std::size_t>(w)]) lca[id] = anc[uf.find(static_cast<std::size_t>(w))];
        }
        st.pop_back();
    }
    if (stats) {
        stats->uf_ops += uf.operations();
        stats->lca_queries += nq;
    }

    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    std::vector<std::int32_t> stack;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        const auto& q = subsets[s];
        SplitTree& o = out[s];
        o.pts = t.pts;
        if (q.empty()) continue;
        edges.clear();
        stack.assign(1, leaf_of[q[0]]);
        for (std::size_t i = 1; i < q.size(); ++i) {
            std::int32_t v = leaf_of[q[i]], l = lca[qstart[s] + i - 1];
            auto d = [&](std::int32_t x) { return depth[static_cast<std::size_t>(x)]; };
            while (stack.size() >= 2 && d(stack[stack.size() - 2]) >= d(l)) {
                edges.emplace_back(stack[stack.size() - 2], stack.back());
                stack.pop_back();
            }
            if (stack.back() != l) {
                edges.emplace_back(l, stack.back());
                stack.back() = l;
            }
            stack.push_back(v);
        }
        while (stack.size() >= 2) {
            edges.emplace_back(stack[stack.size() - 2], stack.back());
            stack.pop_back();
        }
        std::sort(edges.begin(), edges.end());
        auto kids = [&](std::int32_t u) {
            auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(u, INT32_MIN));
            if (it == edges.end() || it->first != u || it + 1 == edges.end() || (it + 1)->first != u)
                throw Error("batched derivation: virtual node without two children");
            return std::make_pair(it->second, (it + 1)->second);
        };
        o.perm.reserve(q.size());
        o.nodes.reserve(2 * q.size() - 1);
        auto emit = [&](auto&& self, std::int32_t u, std::int32_t parent, const Rect& rhat) -> std::int32_t {
            auto id = static_cast<std::int32_t>(o.nodes.size());
            o.nodes.emplace_back();
            const Node& src = t.nodes[static_cast<std::size_t>(u)];
            auto begin = static_cast<std::uint32_t>(o.perm.size());
            Rect r;
            if (src.leaf()) {
                o.perm.push_back(t.perm[src.begin]);
                r = point_rect((*t.pts)[t.perm[src.begin]]);
            } else {
                auto [a, b] = kids(u);
                auto donor = [&](std::int32_t c) {
                    return c < src.right ? t.nodes[static_cast<std::size_t>(src.left)].rhat
                                         : t.nodes[static_cast<std::size_t>(src.right)].rhat;
                };
                std::int32_t l = self(self, a, id, donor(a));
                std::int32_t rt = self(self, b, id, donor(b));
                o.nodes[static_cast<std::size_t>(id)].left = l;
                o.nodes[static_cast<std::size_t>(id)].right = rt;
                r = join(o.nodes[static_cast<std::size_t>(l)].r, o.nodes[static_cast<std::size_t>(rt)].r);
            }
            Node& n = o.nodes[static_cast<std::size_t>(id)];
            n.parent = parent;
            n.begin = begin;
            n.end = static_cast<std::uint32_t>(o.perm.size());
            n.axis = src.axis;
            n.cut = src.leaf() ? 0 : src.cut;
            n.r = r;
            n.rhat = rhat;
            return id;
        };
        emit(emit, stack[0], -1, t.nodes[0].rhat);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

double rect_dist2(const Point& p, const Rect& r) {
    double dx = std::max({r.xlo - p.x, 0.0, p.x - r.xhi});
    double dy = std::max({r.ylo - p.y, 0.0, p.y - r.yhi});
    return dx * dx + dy * dy;
}

}  // namespace

std::vector<std::uint32_t> nn_graph(const SplitTree& t, std::uint64_t* pairs) {
    const auto& P = *t.pts;
    std::vector<std::uint32_t> best(P.size(), kNoNeighbor);
    if (t.size() < 2) return best;
    auto update = [&](std::uint32_t p, std::uint32_t q) {
        std::uint32_t b = best[p];
        if (b == kNoNeighbor) {
            best[p] = q;
            return;
        }
        int c = geom::compare_distance(P[p], P[q], P[b]);
        if (c < 0 || (c == 0 && q < b)) best[p] = q;
    };
    auto scan = [&](std::uint32_t p, const Node& other) {
        std::uint32_t b = best[p];
        if (b != kNoNeighbor) {
            double dx = P[b].x - P[p].x, dy = P[b].y - P[p].y;
            if (rect_dist2(P[p], other.r) > (dx * dx + dy * dy) * (1 + 1e-9)) return;
        }
        for (std::uint32_t i = other.begin; i < other.end; ++i) update(p, t.perm[i]);
    };
    auto separated = [&](const Node& a, const Node& b) {
        double ra = std::hypot(a.r.xhi - a.r.xlo, a.r.yhi - a.r.ylo) / 2;
        double rb = std::hypot(b.r.xhi - b.r.xlo, b.r.yhi - b.r.ylo) / 2;
        double r = std::max(ra, rb);
        if (r == 0) return true;
        double d = std::hypot(std::midpoint(a.r.xlo, a.r.xhi) - std::midpoint(b.r.xlo, b.r.xhi),
                              std::midpoint(a.r.ylo, a.r.yhi) - std::midpoint(b.r.ylo, b.r.yhi));
        // Separation 2: the gap between the enclosing circles exceeds 2 r.
        return d * (1 - 1e-12) > 4 * r * (1 + 1e-12);
    };
    std::vector<std::pair<std::int32_t, std::int32_t>> st;
    for (std::size_t u = 0; u < t.nodes.size(); ++u)
        if (!t.nodes[u].leaf()) st.emplace_back(t.nodes[u].left, t.nodes[u].right);
    std::uint64_t n_pairs = 0;
    while (!st.empty()) {
        auto [a, b] = st.back();
        st.pop_back();
        const Node& A = t.nodes[static_cast<std::size_t>(a)];
        const Node& B = t.nodes[static_cast<std::size_t>(b)];
        if (separated(A, B)) {
            ++n_pairs;
            if (A.size() == 1) scan(t.perm[A.begin], B);
            if (B.size() == 1) scan(t.perm[B.begin], A);
            continue;
        }
        bool split_a = !A.leaf() && (B.leaf() || A.r.lmax() >= B.r.lmax());
        if (split_a) {
            st.emplace_back(A.left, b);
            st.emplace_back(A.right, b);
        } else {
            st.emplace_back(a, B.left);
            st.emplace_back(a, B.right);
        }
    }
    if (pairs) *pairs += n_pairs;
    return best;
}

std::vector<std::uint32_t> nn_brute(const std::vector<Point>& pts, std::span<const std::uint32_t> ids) {
    std::vector<std::uint32_t> best(pts.size(), kNoNeighbor);
    for (auto p : ids)
        for (auto q : ids) {
            if (p == q) continue;
            std::uint32_t b = best[p];
            if (b == kNoNeighbor) {
                best[p] = q;
                continue;
            }
            int c = geom::compare_distance(pts[p], pts[q], pts[b]);
            if (c < 0 || (c == 0 && q < b)) best[p] = q;
        }
    return best;
}

geom::Triangulation dt_from_split_tree(const SplitTree& t, std::span<const std::uint32_t> labels, const DtConfig& cfg,
                                       ChainStats* stats) {
    geom::Triangulation tri;
    if (t.empty()) return tri;
    const auto& P = *t.pts;
    auto label = [&](std::uint32_t id) { return labels.empty() ? id : labels[id]; };
    if (cfg.direct || t.size() <= cfg.base) {
        for (auto id : t.perm) tri.insert(P[id], label(id));
        if (stats) stats->sizes.push_back(t.size());
        return tri;
    }
    // Sample chain P_0 > P_1 > ... with |P_{i+1}| <= ceil(|P_i| / 2).
    Rng rng(cfg.seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::vector<std::uint32_t>> levels{t.perm};
    std::size_t redraws = 0;
    while (levels.back().size() > cfg.base) {
        const auto& cur = levels.back();
        std::vector<std::uint32_t> next;
        for (;;) {
            next.clear();
            for (auto id : cur)
                if (coin(rng)) next.push_back(id);
            if (next.size() <= (cur.size() + 1) / 2) break;
            ++redraws;
        }
        levels.push_back(std::move(next));
    }
    if (stats) {
        for (auto& l : levels) stats->sizes.push_back(l.size());
        stats->redraws += redraws;
    }
    std::vector<std::uint32_t> vid(P.size(), geom::Triangulation::kNone);
    for (auto id : levels.back()) vid[id] = tri.insert(P[id], label(id));
    for (std::size_t i = levels.size() - 1; i-- > 0;) {
        auto sub = derive_subset(t, levels[i]);
        auto nn = nn_graph(sub);
        for (auto id : sub.perm) {
            if (vid[id] != geom::Triangulation::kNone) continue;
            std::uint32_t h = nn[id] == kNoNeighbor ? geom::Triangulation::kNone : vid[nn[id]];
            vid[id] = tri.insert(P[id], label(id), h);
        }
    }
    return tri;
}

}  // namespace selfimp::splittree

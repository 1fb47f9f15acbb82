#include "selfimp/dtpipe.hpp"

#include "selfimp/predicates.hpp"
#include "selfimp/vlist.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>

namespace selfimp::dtpipe {

std::uint64_t Cost::novel() const { return step[1] + step[2] + step[3] + step[4] + step[5] + step[6]; }
std::uint64_t Cost::substituted() const { return step[7] + step[8]; }

namespace {

using Tri3 = std::array<std::uint32_t, 3>;

std::uint64_t predicates_now() {
    const auto& s = geom::predicate_stats();
    return s.orient + s.incircle;
}

Tri3 canon(Tri3 t) {
    int r = 0;
    if (t[1] < t[static_cast<std::size_t>(r)]) r = 1;
    if (t[2] < t[static_cast<std::size_t>(r)]) r = 2;
    return {t[static_cast<std::size_t>(r)], t[static_cast<std::size_t>((r + 1) % 3)], t[static_cast<std::size_t>((r + 2) % 3)]};
}

std::vector<Tri3> label_triangles(const geom::Mesh& m) {
    std::vector<Tri3> out;
    out.reserve(m.tris.size());
    for (const auto& t : m.tris) out.push_back(canon({m.label(t[0]), m.label(t[1]), m.label(t[2])}));
    std::sort(out.begin(), out.end());
    return out;
}

constexpr double kEps = std::numeric_limits<double>::epsilon();

using QPoint = std::array<mpq_class, 2>;

// Ring element: a circumcenter of a canonical (or any) triangle, or the outward
// direction of a hull edge. Doubles carry an error bound; the exact value is
// computed on demand.
struct Elem {
    bool ray = false;
    Point p0, p1, p2;
    double x = 0, y = 0, err = 0;
    mutable std::optional<QPoint> q;

    const QPoint& exact() const {
        if (q) return *q;
        if (ray) {
            q = QPoint{mpq_class(p1.y) - mpq_class(p0.y), mpq_class(p0.x) - mpq_class(p1.x)};
            return *q;
        }
        mpq_class bx = mpq_class(p1.x) - p0.x, by = mpq_class(p1.y) - p0.y;
        mpq_class cx = mpq_class(p2.x) - p0.x, cy = mpq_class(p2.y) - p0.y;
        mpq_class b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
        mpq_class d = 2 * (bx * cy - by * cx);
        q = QPoint{mpq_class(p0.x) + (cy * b2 - by * c2) / d, mpq_class(p0.y) + (bx * c2 - cx * b2) / d};
        return *q;
    }
};

Elem center_of(const Point& a, const Point& b, const Point& c) {
    Elem e;
    e.p0 = a, e.p1 = b, e.p2 = c;
    double bx = b.x - a.x, by = b.y - a.y, cx = c.x - a.x, cy = c.y - a.y;
    double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    double d = 2 * (bx * cy - by * cx);
    double ux = (cy * b2 - by * c2) / d, uy = (bx * c2 - cx * b2) / d;
    e.x = a.x + ux, e.y = a.y + uy;
    double ad = std::fabs(d);
    double kd = 2 * (std::fabs(bx * cy) + std::fabs(by * cx)) / ad;
    double ex = (std::fabs(cy) * b2 + std::fabs(by) * c2) / ad + std::fabs(ux) * kd;
    double ey = (std::fabs(bx) * c2 + std::fabs(cx) * b2) / ad + std::fabs(uy) * kd;
    e.err = 64 * kEps * (ex + ey) + 4 * kEps * (std::fabs(a.x) + std::fabs(a.y) + std::fabs(e.x) + std::fabs(e.y));
    if (!(ad > 0) || !std::isfinite(e.err)) e.err = std::numeric_limits<double>::infinity();
    return e;
}

Elem ray_of(const Point& from, const Point& to) {
    Elem e;
    e.ray = true;
    e.p0 = from, e.p1 = to;
    e.x = to.y - from.y, e.y = from.x - to.x;
    e.err = 2 * kEps * (std::fabs(e.x) + std::fabs(e.y));
    return e;
}

// Direction from apex towards e (e itself for a ray).
struct Dir {
    double x, y, err;
};

Dir dir(const Elem& apex, const Elem& e) {
    if (e.ray) return {e.x, e.y, e.err};
    return {e.x - apex.x, e.y - apex.y, e.err + apex.err};
}

QPoint dir_exact(const Elem& apex, const Elem& e) {
    if (e.ray) return e.exact();
    const auto& a = apex.exact();
    const auto& p = e.exact();
    return {p[0] - a[0], p[1] - a[1]};
}

// sign of cross(dir(apex, e), dir(apex, f))
int cross_sign(const Elem& apex, const Elem& e, const Elem& f, std::uint64_t& fallbacks) {
    Dir u = dir(apex, e), w = dir(apex, f);
    double v = u.x * w.y - u.y * w.x;
    double bound = (std::fabs(u.x) + std::fabs(u.y)) * w.err + (std::fabs(w.x) + std::fabs(w.y) + w.err) * u.err +
                   8 * kEps * (std::fabs(u.x * w.y) + std::fabs(u.y * w.x));
    if (std::fabs(v) > bound) return v > 0 ? 1 : -1;
    ++fallbacks;
    auto a = dir_exact(apex, e), b = dir_exact(apex, f);
    mpq_class r = a[0] * b[1] - a[1] * b[0];
    return sgn(r);
}

// sign(|q - s|^2 - |q - w|^2)
int farther(const Elem& q, const Point& s, const Point& w, std::uint64_t& fallbacks) {
    double wx = w.x - s.x, wy = w.y - s.y, sx = 2 * q.x - s.x - w.x, sy = 2 * q.y - s.y - w.y;
    double v = wx * sx + wy * sy;
    double bound = 2 * q.err * (std::fabs(wx) + std::fabs(wy)) +
                   8 * kEps * (std::fabs(wx) + std::fabs(wy)) *
                       (std::fabs(sx) + std::fabs(sy) + std::fabs(s.x) + std::fabs(s.y) + std::fabs(w.x) + std::fabs(w.y) +
                        2 * (std::fabs(q.x) + std::fabs(q.y)));
    if (std::fabs(v) > bound) return v > 0 ? 1 : -1;
    ++fallbacks;
    const auto& e = q.exact();
    mpq_class r = (mpq_class(w.x) - s.x) * (2 * e[0] - s.x - w.x) + (mpq_class(w.y) - s.y) * (2 * e[1] - s.y - w.y);
    return sgn(r);
}

// Geode triangle ready for membership tests.
struct Region {
    const Elem* apex;
    const Elem* a;
    const Elem* b;
    Point site;
    const std::vector<Point>* nbrs;  // canonical neighbours of the site

    bool contains(const Elem& q, std::uint64_t& fallbacks, std::uint64_t& tests) const {
        ++tests;
        if (cross_sign(*apex, *a, q, fallbacks) < 0) return false;
        ++tests;
        if (cross_sign(*apex, *b, q, fallbacks) > 0) return false;
        for (const auto& w : *nbrs) {
            ++tests;
            if (farther(q, site, w, fallbacks) > 0) return false;
        }
        return true;
    }
};

Elem element(const geom::Mesh& del, std::uint32_t site, const Ring& ring, std::int32_t e) {
    if (e >= 0) {
        auto t = static_cast<std::size_t>(e);
        return center_of(del.corner(t, 0), del.corner(t, 1), del.corner(t, 2));
    }
    // Hull edge next to the site: after the last ring triangle (out) or before the first (in).
    auto t = static_cast<std::size_t>(e == kRayOut ? ring.tris.back() : ring.tris.front());
    int k = 0;
    while (del.tris[t][static_cast<std::size_t>(k)] != site) ++k;
    const Point& v = del.pts[site];
    if (e == kRayOut) return ray_of(del.pts[del.tris[t][static_cast<std::size_t>((k + 2) % 3)]], v);
    return ray_of(v, del.pts[del.tris[t][static_cast<std::size_t>((k + 1) % 3)]]);
}

std::vector<std::uint32_t> ring_neighbours(const geom::Mesh& del, std::uint32_t site, const Ring& ring) {
    std::vector<std::uint32_t> ids;
    for (auto t : ring.tris)
        for (auto v : del.tris[static_cast<std::size_t>(t)])
            if (v != site) ids.push_back(v);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

}  // namespace

std::vector<Ring> cell_rings(const geom::Mesh& del) {
    const std::size_t nv = del.pts.size();
    std::vector<std::int32_t> some(nv, -1);
    for (std::size_t t = 0; t < del.tris.size(); ++t)
        for (auto v : del.tris[t])
            if (some[v] < 0) some[v] = static_cast<std::int32_t>(t);
    std::vector<Ring> rings(nv);
    for (std::uint32_t v = 0; v < nv; ++v) {
        const std::int32_t t0 = some[v];
        if (t0 < 0) continue;
        auto at = [&](std::int32_t t) {
            const auto& tr = del.tris[static_cast<std::size_t>(t)];
            return tr[0] == v ? 0 : (tr[1] == v ? 1 : 2);
        };
        std::int32_t t = t0;
        bool open = false;
        for (;;) {
            std::int32_t p = del.adj[static_cast<std::size_t>(t)][static_cast<std::size_t>((at(t) + 2) % 3)];
            if (p < 0) {
                open = true;
                break;
            }
            if (p == t0) break;
            t = p;
        }
        const std::int32_t start = open ? t : t0;
        auto& r = rings[v];
        r.unbounded = open;
        t = start;
        do {
            r.tris.push_back(t);
            t = del.adj[static_cast<std::size_t>(t)][static_cast<std::size_t>((at(t) + 1) % 3)];
        } while (t >= 0 && t != start);
    }
    return rings;
}

std::int32_t cell_apex(const Ring& ring, std::span<const std::uint32_t> occupancy) {
    std::int32_t best = -1;
    for (auto t : ring.tris) {
        auto s = static_cast<std::size_t>(t);
        if (best < 0 || occupancy[s] < occupancy[static_cast<std::size_t>(best)] ||
            (occupancy[s] == occupancy[static_cast<std::size_t>(best)] && t < best))
            best = t;
    }
    return best;
}

std::vector<GeodeTri> geode_triangles(std::uint32_t site, const Ring& ring, std::int32_t apex) {
    std::vector<std::int32_t> e = ring.tris;
    if (ring.unbounded) e.push_back(kRayOut), e.push_back(kRayIn);
    std::vector<GeodeTri> out;
    for (std::size_t i = 0; i < e.size(); ++i) {
        std::int32_t a = e[i], b = e[(i + 1) % e.size()];
        if (a == apex || b == apex) continue;
        out.push_back({site, apex, a, b});
    }
    return out;
}

void finish_state(DtState& st) {
    st.g0_tri = geom::Triangulation();
    for (std::size_t i = 0; i < st.partition.g0.size(); ++i) st.g0_tri.insert(st.g0_points[i], st.partition.g0[i]);
    st.del_g0 = st.g0_tri.mesh();
    st.rings = cell_rings(st.canonical.del);
}

DtState train_dt(model::DtSource& src, std::size_t n, const Config& cfg, TrainReport* report) {
    if (n == 0) throw InvalidArgument("train_dt: n must be positive");
    TrainReport rep;
    DtState st;
    st.n = n;

    rep.partition_samples = algebra::partition_samples(cfg.partition.d_test);
    auto pool = src.take(rep.partition_samples, "partition");
    st.partition = algebra::learn_approx_partition(pool, n, cfg.partition);
    for (auto i : st.partition.g0) st.g0_points.push_back(pool.front().p[i]);

    std::vector<std::uint32_t> plus;
    for (const auto& g : st.partition.groups) plus.insert(plus.end(), g.begin(), g.end());
    if (!plus.empty()) {
        rep.lambda = cfg.lambda ? cfg.lambda : vlist::lambda_desk(n);
        auto batch = src.take(rep.lambda, "canonical");
        std::vector<Point> pts;
        pts.reserve(batch.size() * plus.size());
        for (const auto& inst : batch)
            for (auto i : plus) pts.push_back(inst.p[i]);
        rep.pool_points = pts.size();
        Rng rng(cfg.seed);
        st.canonical = geom::build_canonical_v(pts, n, cfg.net, rng);
    }

    std::size_t max_n = 0;
    for (const auto& g : st.partition.groups) {
        std::size_t need = std::max(trie::samples_needed(trie::TrieKind::Triangle, n, g.size(), cfg.t0_const),
                                    trie::samples_needed(trie::TrieKind::SplitOrder, n, g.size(), cfg.t0_const));
        rep.group_samples_uncapped.push_back(need);
        rep.group_samples.push_back(std::max<std::size_t>(1, std::min(need, cfg.trie_cap)));
        max_n = std::max(max_n, rep.group_samples.back());
    }
    rep.trie_samples = max_n;
    st.tries.resize(st.partition.groups.size());
    for (std::size_t k = 0; k < st.tries.size(); ++k) {
        auto m = static_cast<std::uint32_t>(st.partition.groups[k].size());
        st.tries[k].b = trie::TriangleTrie(m);
        st.tries[k].pi = trie::SplitOrderTrie(m);
        st.tries[k].samples = rep.group_samples[k];
    }
    std::vector<Point> z;
    for (std::size_t s = 0; s < max_n; ++s) {
        auto inst = src.take("tries");
        for (std::size_t k = 0; k < st.tries.size(); ++k) {
            if (s >= st.tries[k].samples) continue;
            z.clear();
            for (auto i : st.partition.groups[k]) z.push_back(inst.p[i]);
            st.tries[k].b.train(z, st.canonical.del);
            st.tries[k].pi.train(z);
        }
    }
    for (auto& t : st.tries) {
        t.b.freeze(st.canonical.del);
        t.pi.freeze();
    }
    finish_state(st);
    if (report) *report = rep;
    return st;
}

namespace {

struct GroupWork {
    encodings::Code b;
    std::vector<std::pair<std::int32_t, geom::Triangulation>> dts;  // (canonical triangle, Del(Q_{j,t}))
    std::array<std::uint64_t, 6> step{};
    std::uint64_t b_visits = 0, pi_visits = 0, sum_delta = 0, scattered = 0;
    bool b_fallback = false, pi_fallback = false;
};

void run_group(const DtState& st, std::size_t j, const std::shared_ptr<const std::vector<Point>>& all,
               const Options& opt, GroupWork& w) {
    const auto& g = st.partition.groups[j];
    const auto& del = st.canonical.del;
    const std::size_t m = g.size();
    std::vector<Point> pts(m);
    for (std::size_t i = 0; i < m; ++i) pts[i] = (*all)[g[i]];

    // 1. outcomes of B and Pi
    auto p0 = predicates_now();
    geom::LocateContext ctx;
    auto bq = st.tries[j].b.query(pts, del, &ctx);
    auto pq = st.tries[j].pi.query(pts);
    w.b_visits = bq.visits, w.pi_visits = pq.visits;
    w.b_fallback = !bq.hit, w.pi_fallback = !pq.hit;
    w.step[1] = predicates_now() - p0 + pq.visits;
    w.b = bq.code;

    // 2. conflict lists
    p0 = predicates_now();
    std::vector<std::vector<std::int32_t>> delta(m);
    for (std::size_t i = 0; i < m; ++i) {
        delta[i] = geom::circumdisk_bfs(del, pts[i], static_cast<std::int32_t>(bq.code[i]));
        w.sum_delta += delta[i].size();
    }
    w.step[2] = predicates_now() - p0;

    if (m == 1) {
        for (auto t : delta[0]) {
            geom::Triangulation one;
            one.insert(pts[0], g[0]);
            w.dts.emplace_back(t, std::move(one));
        }
        w.scattered = delta[0].size();
        w.step[3] = w.scattered;
        return;
    }

    // 3. preorder list of the group, scattered over the conflict triangles
    auto tree = trie::split_tree_from_code(all, g, pq.code);
    std::vector<std::pair<std::int32_t, std::uint32_t>> items;
    items.reserve(w.sum_delta);
    for (auto id : tree.perm) {
        auto i = static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), id) - g.begin());
        for (auto t : delta[i]) items.emplace_back(t, id);
    }
    w.scattered = items.size();
    w.step[3] = tree.nodes.size() + items.size();
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::int32_t> touched;
    std::vector<std::vector<std::uint32_t>> lists;
    for (const auto& [t, id] : items) {
        if (touched.empty() || touched.back() != t) touched.push_back(t), lists.emplace_back();
        lists.back().push_back(id);
    }

    // 4. split trees of the subsets
    p0 = predicates_now();
    splittree::BatchStats bs;
    auto subs = splittree::derive_subsets_batched(tree, lists, &bs);
    w.step[4] = predicates_now() - p0 + bs.uf_ops;

    // 5. their Delaunay triangulations
    p0 = predicates_now();
    for (std::size_t k = 0; k < subs.size(); ++k) w.dts.emplace_back(touched[k], splittree::dt_from_split_tree(subs[k], {}, opt.dt));
    w.step[5] = predicates_now() - p0;
}

// Copy of the largest triangulation with the others' points added.
geom::Triangulation merged(std::span<const geom::Triangulation* const> parts, std::vector<std::uint32_t>& stamp,
                           std::uint32_t& gen) {
    const geom::Triangulation* big = nullptr;
    for (auto* p : parts)
        if (p && (!big || p->vertex_count() > big->vertex_count())) big = p;
    geom::Triangulation out = big ? *big : geom::Triangulation();
    if (!big) return out;
    ++gen;
    for (std::uint32_t v = 0; v < out.vertex_count(); ++v) stamp[out.label(v)] = gen;
    for (auto* p : parts) {
        if (!p || p == big) continue;
        for (std::uint32_t v = 0; v < p->vertex_count(); ++v) {
            auto l = p->label(v);
            if (stamp[l] == gen) continue;
            stamp[l] = gen;
            out.insert(p->point(v), l);
        }
    }
    return out;
}

}  // namespace

Output operate_dt(const DtState& st, std::span<const Point> inst, const Options& opt) {
    if (inst.size() != st.n) throw InvalidArgument("operate_dt: instance length mismatch");
    const auto& part = st.partition;
    for (std::size_t i = 0; i < part.g0.size(); ++i)
        if (!(inst[part.g0[i]] == st.g0_points[i])) throw ModelViolation("operate_dt: a constant point moved");
    Output out;
    Cost& c = out.cost;
    const std::size_t groups = part.groups.size();
    if (groups == 0) {
        out.mesh = st.del_g0;
        return out;
    }
    const std::size_t n = st.n;
    const auto& del = st.canonical.del;
    auto all = std::make_shared<const std::vector<Point>>(inst.begin(), inst.end());

    std::vector<GroupWork> work(groups);
    std::vector<std::exception_ptr> errs(groups);
    auto task = [&](std::size_t j) {
        try {
            run_group(st, j, all, opt, work[j]);
        } catch (...) {
            errs[j] = std::current_exception();
        }
    };
    if (opt.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t j = 0; j < groups; ++j) task(j);
    } else {
        for (std::size_t j = 0; j < groups; ++j) task(j);
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    for (const auto& w : work) {
        for (int s = 1; s <= 5; ++s) c.step[static_cast<std::size_t>(s)] += w.step[static_cast<std::size_t>(s)];
        c.b_visits += w.b_visits, c.pi_visits += w.pi_visits;
        c.b_fallbacks += w.b_fallback, c.pi_fallbacks += w.pi_fallback;
        c.sum_delta += w.sum_delta, c.scattered += w.scattered;
        ++c.groups;
    }

    // 6. Del(P_t) per conflict triangle, then per geode triangle
    auto p0 = predicates_now();
    std::uint64_t tests = 0;
    std::vector<std::uint32_t> occ(del.size(), 0);
    std::vector<std::int32_t> slot(del.size(), -1);
    std::vector<std::int32_t> live;
    std::vector<std::vector<const geom::Triangulation*>> parts;
    for (const auto& w : work)
        for (const auto& [t, tri] : w.dts) {
            auto s = static_cast<std::size_t>(t);
            if (slot[s] < 0) slot[s] = static_cast<std::int32_t>(live.size()), live.push_back(t), parts.emplace_back();
            parts[static_cast<std::size_t>(slot[s])].push_back(&tri);
            occ[s] += static_cast<std::uint32_t>(tri.vertex_count());
        }
    std::vector<std::uint32_t> stamp(n, 0);
    std::uint32_t gen = 0;
    std::vector<geom::Triangulation> delp(live.size());
    for (std::size_t s = 0; s < live.size(); ++s) delp[s] = merged(parts[s], stamp, gen);

    std::vector<Tri3> stitched;
    for (std::size_t t = 0; t < del.size(); ++t)
        if (occ[t] == 0) {
            const auto& v = del.tris[t];
            stitched.push_back(canon({static_cast<std::uint32_t>(n + v[0]), static_cast<std::uint32_t>(n + v[1]),
                                      static_cast<std::uint32_t>(n + v[2])}));
        }

    std::vector<std::uint32_t> sites;
    for (auto t : live)
        for (auto v : del.tris[static_cast<std::size_t>(t)]) sites.push_back(v);
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    auto delp_of = [&](std::int32_t e) -> const geom::Triangulation* {
        if (e < 0 || slot[static_cast<std::size_t>(e)] < 0) return nullptr;
        return &delp[static_cast<std::size_t>(slot[static_cast<std::size_t>(e)])];
    };
    std::vector<std::uint32_t> fstamp(n, 0);
    std::uint32_t fgen = 0;
    for (auto v : sites) {
        const auto& ring = st.rings[v];
        const std::int32_t apex = cell_apex(ring, occ);
        auto taus = geode_triangles(v, ring, apex);
        auto nb_ids = ring_neighbours(del, v, ring);
        std::vector<Point> nbrs;
        for (auto w : nb_ids) nbrs.push_back(del.pts[w]);
        std::optional<Elem> apex_e;
        for (const auto& g : taus) {
            const geom::Triangulation* ps[3] = {delp_of(g.apex), delp_of(g.a), delp_of(g.b)};
            if (!ps[0] && !ps[1] && !ps[2]) continue;
            if (!apex_e) apex_e = element(del, v, ring, apex);
            Elem ea = element(del, v, ring, g.a), eb = element(del, v, ring, g.b);
            if (cross_sign(*apex_e, ea, eb, c.exact_fallbacks) == 0) continue;  // degenerate sector
            auto f = merged(ps, fstamp, fgen);
            // The site's canonical neighbours join so that Voronoi vertices on the
            // cell boundary (one instance point, two canonical sites) show up too.
            f.insert(del.pts[v], static_cast<std::uint32_t>(n + v));
            for (auto w : nb_ids) f.insert(del.pts[w], static_cast<std::uint32_t>(n + w));
            ++c.geode_sets;
            c.geode_points += f.vertex_count();
            Region reg{&*apex_e, &ea, &eb, del.pts[v], &nbrs};
            auto fm = f.mesh();
            for (std::size_t t = 0; t < fm.tris.size(); ++t) {
                Tri3 lab{fm.label(fm.tris[t][0]), fm.label(fm.tris[t][1]), fm.label(fm.tris[t][2])};
                if (lab[0] >= n && lab[1] >= n && lab[2] >= n) continue;
                Elem q = center_of(fm.corner(t, 0), fm.corner(t, 1), fm.corner(t, 2));
                if (reg.contains(q, c.exact_fallbacks, tests)) stitched.push_back(canon(lab));
            }
        }
    }
    std::sort(stitched.begin(), stitched.end());
    stitched.erase(std::unique(stitched.begin(), stitched.end()), stitched.end());
    c.step[6] = predicates_now() - p0 + tests;

    // 7. Del of the non-constant points (recomputed, walking hints from the stitched graph)
    p0 = predicates_now();
    const std::size_t labels = n + del.pts.size();
    std::vector<std::uint32_t> off(labels + 1, 0);
    for (const auto& t : stitched)
        for (int k = 0; k < 3; ++k) ++off[t[static_cast<std::size_t>(k)] + 1];
    for (std::size_t i = 1; i <= labels; ++i) off[i] += off[i - 1];
    std::vector<std::uint32_t> adj(off.back());
    {
        auto fill = off;
        for (const auto& t : stitched)
            for (int k = 0; k < 3; ++k) {
                auto a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
                adj[fill[a]++] = b;
            }
    }
    geom::Triangulation plus;
    std::vector<std::uint32_t> order;
    {
        const std::uint32_t none = geom::Triangulation::kNone;
        std::vector<std::uint32_t> hint(labels, none);
        std::vector<char> seen(labels, 0);
        std::vector<std::uint32_t> queue{part.groups.front().front()};
        seen[queue[0]] = 1;
        for (std::size_t h = 0; h < queue.size(); ++h) {
            auto u = queue[h];
            std::uint32_t here = hint[u];
            if (u < n) {
                here = plus.insert(inst[u], u, hint[u]);
                order.push_back(u);
            }
            for (std::uint32_t e = off[u]; e < off[u + 1]; ++e)
                if (!seen[adj[e]]) seen[adj[e]] = 1, hint[adj[e]] = here, queue.push_back(adj[e]);
        }
    }
    c.step[7] = predicates_now() - p0;

    // 8. merge with the constant points (recomputed)
    p0 = predicates_now();
    if (part.g0.empty()) {
        out.mesh = plus.mesh();
    } else {
        geom::Triangulation full = st.g0_tri;
        std::uint32_t hint = geom::Triangulation::kNone;
        for (auto u : order) hint = full.insert(inst[u], u, hint);
        out.mesh = full.mesh();
    }
    c.step[8] = predicates_now() - p0;

    if (opt.keep_stitched) out.stitched = std::move(stitched);
    if (opt.keep_occupancy) out.occupancy = std::move(occ);
    if (opt.keep_codes)
        for (auto& w : work) out.b_codes.push_back(std::move(w.b));
    return out;
}

std::vector<std::array<std::uint32_t, 3>> reference_stitched(const DtState& st, std::span<const Point> inst) {
    geom::Triangulation t;
    const auto& v = st.canonical.v;
    for (std::size_t k = 0; k < v.size(); ++k) t.insert(v[k], static_cast<std::uint32_t>(st.n + k));
    for (const auto& g : st.partition.groups)
        for (auto i : g) t.insert(inst[i], i);
    return label_triangles(t.mesh());
}

// ---------------------------------------------------------------------------

namespace {

using QPoly = std::vector<QPoint>;

// Part of poly at least as close to s as to w.
QPoly clip(const QPoly& poly, const QPoint& s, const QPoint& w) {
    QPoly out;
    const std::size_t k = poly.size();
    if (k == 0) return out;
    mpq_class wx = w[0] - s[0], wy = w[1] - s[1], sx = s[0] + w[0], sy = s[1] + w[1];
    auto f = [&](const QPoint& r) -> mpq_class { return wx * (2 * r[0] - sx) + wy * (2 * r[1] - sy); };
    std::vector<mpq_class> val(k);
    for (std::size_t i = 0; i < k; ++i) val[i] = f(poly[i]);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % k];
        int fp = sgn(val[i]), fq = sgn(val[(i + 1) % k]);
        if (fp <= 0) out.push_back(p);
        if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
            mpq_class r = val[i] / (val[i] - val[(i + 1) % k]);
            out.push_back({p[0] + (q[0] - p[0]) * r, p[1] + (q[1] - p[1]) * r});
        }
    }
    return out;
}

mpq_class area2(const QPoly& p) {
    mpq_class a = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& u = p[i];
        const auto& v = p[(i + 1) % p.size()];
        a += u[0] * v[1] - u[1] * v[0];
    }
    return a;
}

// Vertex set of a convex polygon without repeats or straight-angle vertices;
// empty when the polygon has no area.
std::vector<std::pair<mpq_class, mpq_class>> shape(const QPoly& p) {
    QPoly q;
    for (const auto& v : p)
        if (q.empty() || q.back() != v) q.push_back(v);
    while (q.size() > 1 && q.front() == q.back()) q.pop_back();
    std::vector<std::pair<mpq_class, mpq_class>> out;
    if (q.size() < 3 || sgn(area2(q)) == 0) return out;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto& a = q[(i + q.size() - 1) % q.size()];
        const auto& b = q[i];
        const auto& c = q[(i + 1) % q.size()];
        mpq_class cr = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if (sgn(cr) != 0) out.emplace_back(b[0], b[1]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

QPoint qpt(const Point& p) { return {mpq_class(p.x), mpq_class(p.y)}; }

}  // namespace

FragmentAudit audit_fragments(const DtState& st, std::span<const Point> inst, std::size_t trivial_sample,
                              std::uint64_t seed) {
    FragmentAudit res;
    if (st.partition.groups.empty()) return res;
    const std::size_t n = st.n;
    const auto& del = st.canonical.del;
    const auto& vpts = st.canonical.v;

    // Conflict sets by exhaustive scan, independent of the tries and the BFS.
    std::vector<std::vector<std::uint32_t>> p(del.size());
    for (const auto& g : st.partition.groups)
        for (auto i : g)
            for (auto t : geom::circumdisk_scan(del, inst[i])) p[static_cast<std::size_t>(t)].push_back(i);
    std::vector<std::uint32_t> occ(del.size());
    for (std::size_t t = 0; t < del.size(); ++t) occ[t] = static_cast<std::uint32_t>(p[t].size());

    // Full diagram: neighbours per label (instance index, or n + canonical index).
    geom::Triangulation full;
    for (std::size_t k = 0; k < vpts.size(); ++k) full.insert(vpts[k], static_cast<std::uint32_t>(n + k));
    for (const auto& g : st.partition.groups)
        for (auto i : g) full.insert(inst[i], i);
    auto fm = full.mesh();
    std::vector<std::vector<std::uint32_t>> nb(n + vpts.size());
    for (const auto& t : fm.tris)
        for (int k = 0; k < 3; ++k) {
            auto a = fm.label(t[static_cast<std::size_t>(k)]), b = fm.label(t[static_cast<std::size_t>((k + 1) % 3)]);
            nb[a].push_back(b), nb[b].push_back(a);
        }
    auto site_point = [&](std::uint32_t l) { return l < n ? inst[l] : vpts[l - n]; };

    struct Job {
        GeodeTri g;
    };
    std::vector<Job> busy, quiet;
    for (std::uint32_t v = 0; v < st.rings.size(); ++v) {
        const auto& ring = st.rings[v];
        if (ring.tris.empty()) continue;
        for (const auto& g : geode_triangles(v, ring, cell_apex(ring, occ))) {
            if (g.a < 0 || g.b < 0) {
                ++res.unbounded_skipped;
                continue;
            }
            bool empty = occ[static_cast<std::size_t>(g.apex)] + occ[static_cast<std::size_t>(g.a)] +
                             occ[static_cast<std::size_t>(g.b)] ==
                         0;
            (empty ? quiet : busy).push_back({g});
        }
    }
    Rng rng(seed);
    std::shuffle(quiet.begin(), quiet.end(), rng);
    if (quiet.size() > trivial_sample) quiet.resize(trivial_sample);
    busy.insert(busy.end(), quiet.begin(), quiet.end());

    std::size_t failed = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : failed)
    for (std::size_t j = 0; j < busy.size(); ++j) {
        const auto& g = busy[j].g;
        auto corner = [&](std::int32_t t) {
            auto s = static_cast<std::size_t>(t);
            Elem e = center_of(del.corner(s, 0), del.corner(s, 1), del.corner(s, 2));
            return e.exact();
        };
        QPoly tau{corner(g.apex), corner(g.a), corner(g.b)};
        mpq_class whole = area2(tau);
        if (sgn(whole) == 0) continue;
        std::vector<std::uint32_t> f{static_cast<std::uint32_t>(n + g.site)};
        for (auto t : {g.apex, g.a, g.b})
            for (auto i : p[static_cast<std::size_t>(t)]) f.push_back(i);
        std::sort(f.begin(), f.end());
        f.erase(std::unique(f.begin(), f.end()), f.end());
        mpq_class covered = 0;
        bool ok = true;
        for (auto s : f) {
            QPoint qs = qpt(site_point(s));
            QPoly in_f = tau, in_x = tau;
            for (auto w : f)
                if (w != s) in_f = clip(in_f, qs, qpt(site_point(w)));
            for (auto w : nb[s]) in_x = clip(in_x, qs, qpt(site_point(w)));
            if (shape(in_f) != shape(in_x)) ok = false;
            if (in_x.size() >= 3) covered += area2(in_x);
        }
        if (covered != whole) ok = false;
        if (!ok) ++failed;
    }
    res.checked = busy.size();
    res.failed = failed;
    return res;
}

BenchReport bench_dt(const DtState& st, const std::vector<model::DtInstance>& batch, Exec exec, bool check) {
    BenchReport rep;
    rep.instances = batch.size();
    if (batch.empty()) return rep;
    Options opt;
    opt.keep_occupancy = true;
    opt.keep_codes = true;
    std::vector<Output> outs(batch.size());
    std::vector<char> correct(batch.size(), 1);
    std::vector<std::exception_ptr> errs(batch.size());
    auto one = [&](std::size_t i) {
        try {
            outs[i] = operate_dt(st, batch[i].p, opt);
            if (check) correct[i] = label_triangles(outs[i].mesh) == label_triangles(geom::delaunay(batch[i].p));
        } catch (...) {
            errs[i] = std::current_exception();
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::size_t i = 0; i < batch.size(); ++i) one(i);
    } else {
        for (std::size_t i = 0; i < batch.size(); ++i) one(i);
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);

    const double m = static_cast<double>(batch.size());
    std::size_t plus = 0;
    for (const auto& g : st.partition.groups) plus += g.size();
    std::vector<double> occ(st.canonical.del.size(), 0.0);
    std::vector<std::map<encodings::Code, std::uint64_t>> table(st.partition.groups.size());
    double groups = 0, bfb = 0, pfb = 0, delta = 0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const auto& c = outs[i].cost;
        for (std::size_t s = 1; s <= 8; ++s) rep.mean_step[s] += static_cast<double>(c.step[s]);
        rep.mean_novel += static_cast<double>(c.novel());
        rep.mean_substituted += static_cast<double>(c.substituted());
        rep.mean_exact_fallbacks += static_cast<double>(c.exact_fallbacks);
        delta += static_cast<double>(c.sum_delta);
        groups += c.groups, bfb += c.b_fallbacks, pfb += c.pi_fallbacks;
        for (std::size_t t = 0; t < outs[i].occupancy.size(); ++t) occ[t] += outs[i].occupancy[t];
        for (std::size_t j = 0; j < outs[i].b_codes.size(); ++j) ++table[j][outs[i].b_codes[j]];
        if (!correct[i]) rep.all_correct = false;
    }
    for (auto& v : rep.mean_step) v /= m;
    rep.mean_novel /= m;
    rep.mean_substituted /= m;
    rep.mean_exact_fallbacks /= m;
    rep.mean_delta_per_point = plus ? delta / (m * static_cast<double>(plus)) : 0.0;
    double total = 0;
    for (double v : occ) {
        rep.occupancy_max_mean = std::max(rep.occupancy_max_mean, v / m);
        total += v;
    }
    rep.occupancy_mean = occ.empty() ? 0.0 : total / (m * static_cast<double>(occ.size()));
    rep.b_fallback_rate = groups > 0 ? bfb / groups : 0;
    rep.pi_fallback_rate = groups > 0 ? pfb / groups : 0;
    for (const auto& tb : table) {
        std::vector<std::uint64_t> counts;
        for (const auto& [k, cnt] : tb) counts.push_back(cnt);
        rep.entropy_sum += plugin_entropy(counts);
    }
    rep.ratio = rep.mean_novel / (static_cast<double>(st.n) + rep.entropy_sum);
    return rep;
}

}  // namespace selfimp::dtpipe

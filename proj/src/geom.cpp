#include "selfimp/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace selfimp::geom {

namespace {

constexpr int nx(int k) { return k == 2 ? 0 : k + 1; }
constexpr int pv(int k) { return k == 0 ? 2 : k - 1; }

std::array<std::uint32_t, 3> rotate_min(std::array<std::uint32_t, 3> t) {
    int r = 0;
    if (t[1] < t[r]) r = 1;
    if (t[2] < t[r]) r = 2;
    return {t[static_cast<std::size_t>(r)], t[static_cast<std::size_t>(nx(r))], t[static_cast<std::size_t>(pv(r))]};
}

}  // namespace

std::vector<std::array<std::uint32_t, 3>> triangle_set(const Mesh& m) {
    std::vector<std::array<std::uint32_t, 3>> out;
    out.reserve(m.tris.size());
    for (const auto& t : m.tris) out.push_back(rotate_min({m.label(t[0]), m.label(t[1]), m.label(t[2])}));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------

bool Triangulation::ghost(std::int32_t t) const {
    const auto& v = tris_[static_cast<std::size_t>(t)].v;
    return v[0] == kGhost || v[1] == kGhost || v[2] == kGhost;
}

bool Triangulation::conflict(std::int32_t t, const Point& p) const {
    const auto& v = tris_[static_cast<std::size_t>(t)].v;
    int g = v[0] == kGhost ? 0 : v[1] == kGhost ? 1 : v[2] == kGhost ? 2 : -1;
    if (g < 0) return incircle_perturbed(pts_[v[0]], pts_[v[1]], pts_[v[2]], p) > 0;
    const Point& a = pts_[v[static_cast<std::size_t>(nx(g))]];
    const Point& b = pts_[v[static_cast<std::size_t>(pv(g))]];
    int o = orient(a, b, p);
    if (o != 0) return o > 0;
    // On the hull line: inside only on the open segment.
    const Point& lo = lex_less(a, b) ? a : b;
    const Point& hi = lex_less(a, b) ? b : a;
    return lex_less(lo, p) && lex_less(p, hi);
}

std::int32_t Triangulation::walk(std::int32_t t, const Point& p) const {
    int rot = 0;
    for (;;) {
        if (ghost(t)) return t;
        const Tri& T = tris_[static_cast<std::size_t>(t)];
        bool moved = false;
        for (int j = 0; j < 3; ++j) {
            int k = (j + rot) % 3;
            if (orient(pts_[T.v[static_cast<std::size_t>(nx(k))]], pts_[T.v[static_cast<std::size_t>(pv(k))]], p) < 0) {
                t = T.nb[static_cast<std::size_t>(k)];
                moved = true;
                break;
            }
        }
        if (!moved) return t;
        rot = rot == 2 ? 0 : rot + 1;
    }
}

std::int32_t Triangulation::new_tri(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    Tri t{{a, b, c}, {-1, -1, -1}, true};
    if (!free_.empty()) {
        std::int32_t id = free_.back();
        free_.pop_back();
        tris_[static_cast<std::size_t>(id)] = t;
        return id;
    }
    tris_.push_back(t);
    return static_cast<std::int32_t>(tris_.size() - 1);
}

std::size_t Triangulation::finite_triangles() const {
    std::size_t c = 0;
    for (std::size_t t = 0; t < tris_.size(); ++t)
        if (tris_[t].alive && !ghost(static_cast<std::int32_t>(t))) ++c;
    return c;
}

void Triangulation::bootstrap() {
    if (pending_.size() < 3) return;
    std::uint32_t a = pending_[0], b = pending_[1];
    std::size_t third = 0;
    int o = 0;
    for (std::size_t k = 2; k < pending_.size() && o == 0; ++k) {
        o = orient(pts_[a], pts_[b], pts_[pending_[k]]);
        if (o != 0) third = k;
    }
    if (o == 0) return;
    std::uint32_t c = pending_[third];
    if (o < 0) std::swap(a, b);
    std::int32_t ids[4] = {new_tri(a, b, c), new_tri(c, b, kGhost), new_tri(a, c, kGhost), new_tri(b, a, kGhost)};
    for (std::int32_t s : ids)
        for (int k = 0; k < 3; ++k) {
            auto& S = tris_[static_cast<std::size_t>(s)];
            std::uint32_t u = S.v[static_cast<std::size_t>(nx(k))], w = S.v[static_cast<std::size_t>(pv(k))];
            for (std::int32_t r : ids) {
                const auto& R = tris_[static_cast<std::size_t>(r)];
                for (int j = 0; j < 3; ++j)
                    if (R.v[static_cast<std::size_t>(nx(j))] == w && R.v[static_cast<std::size_t>(pv(j))] == u)
                        S.nb[static_cast<std::size_t>(k)] = r;
            }
        }
    vtri_[a] = vtri_[b] = vtri_[c] = ids[0];
    last_ = ids[0];
    std::vector<std::uint32_t> rest;
    for (std::size_t k = 2; k < pending_.size(); ++k)
        if (k != third) rest.push_back(pending_[k]);
    pending_.clear();
    for (std::uint32_t v : rest) insert_vertex(v, kNone);
}

void Triangulation::insert_vertex(std::uint32_t v, std::uint32_t hint) {
    const Point p = pts_[v];
    std::int32_t start = last_;
    if (hint != kNone && hint < vtri_.size() && vtri_[hint] >= 0) start = vtri_[hint];
    if (ghost(start)) {
        const auto& S = tris_[static_cast<std::size_t>(start)];
        for (int k = 0; k < 3; ++k)
            if (S.v[static_cast<std::size_t>(k)] == kGhost) start = S.nb[static_cast<std::size_t>(k)];
    }
    std::int32_t t = walk(start, p);
    if (!ghost(t))
        for (std::uint32_t u : tris_[static_cast<std::size_t>(t)].v)
            if (pts_[u] == p) throw DuplicateValue("triangulation: duplicate point");

    if (stamp_.size() < tris_.size()) stamp_.resize(tris_.size() * 2, 0);
    gen_ += 2;
    const std::uint32_t in = gen_, out = gen_ + 1;
    cavity_.assign(1, t);
    stack_.assign(1, t);
    stamp_[static_cast<std::size_t>(t)] = in;
    while (!stack_.empty()) {
        std::int32_t c = stack_.back();
        stack_.pop_back();
        for (std::int32_t o : tris_[static_cast<std::size_t>(c)].nb) {
            auto& st = stamp_[static_cast<std::size_t>(o)];
            if (st == in || st == out) continue;
            if (conflict(o, p)) {
                st = in;
                cavity_.push_back(o);
                stack_.push_back(o);
            } else {
                st = out;
            }
        }
    }

    struct Edge {
        std::uint32_t a, b;
        std::int32_t outside, old;
    };
    std::vector<Edge> rim;
    for (std::int32_t c : cavity_) {
        const auto& C = tris_[static_cast<std::size_t>(c)];
        for (int k = 0; k < 3; ++k) {
            std::int32_t o = C.nb[static_cast<std::size_t>(k)];
            if (stamp_[static_cast<std::size_t>(o)] != in)
                rim.push_back({C.v[static_cast<std::size_t>(nx(k))], C.v[static_cast<std::size_t>(pv(k))], o, c});
        }
    }
    for (std::int32_t c : cavity_) {
        tris_[static_cast<std::size_t>(c)].alive = false;
        free_.push_back(c);
    }
    std::vector<std::pair<std::uint32_t, std::int32_t>> by_start;
    by_start.reserve(rim.size());
    std::vector<std::int32_t> made;
    made.reserve(rim.size());
    for (const auto& e : rim) {
        std::int32_t n = new_tri(e.a, e.b, v);
        made.push_back(n);
        tris_[static_cast<std::size_t>(n)].nb[2] = e.outside;
        auto& O = tris_[static_cast<std::size_t>(e.outside)];
        for (auto& x : O.nb)
            if (x == e.old) {
                // The outside triangle may border several cavity triangles; match the edge.
                int j = static_cast<int>(&x - O.nb.data());
                if (O.v[static_cast<std::size_t>(nx(j))] == e.b && O.v[static_cast<std::size_t>(pv(j))] == e.a) x = n;
            }
        by_start.emplace_back(e.a, n);
    }
    std::sort(by_start.begin(), by_start.end());
    auto starting_at = [&](std::uint32_t a) {
        auto it = std::lower_bound(by_start.begin(), by_start.end(), std::make_pair(a, INT32_MIN));
        return it->second;
    };
    for (std::size_t i = 0; i < made.size(); ++i) {
        auto& N = tris_[static_cast<std::size_t>(made[i])];
        std::int32_t after = starting_at(N.v[1]);
        N.nb[0] = after;
        tris_[static_cast<std::size_t>(after)].nb[1] = made[i];
    }
    if (stamp_.size() < tris_.size()) stamp_.resize(tris_.size() * 2, 0);
    for (std::int32_t n : made) {
        if (ghost(n)) continue;
        last_ = n;
        for (std::uint32_t u : tris_[static_cast<std::size_t>(n)].v) vtri_[u] = n;
    }
    for (std::int32_t n : made)
        if (ghost(n))
            for (std::uint32_t u : tris_[static_cast<std::size_t>(n)].v)
                if (u != kGhost && (vtri_[u] < 0 || !tris_[static_cast<std::size_t>(vtri_[u])].alive)) vtri_[u] = n;
}

std::uint32_t Triangulation::insert(const Point& p, std::uint32_t label, std::uint32_t hint) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("triangulation: non-finite point");
    auto v = static_cast<std::uint32_t>(pts_.size());
    if (last_ < 0) {
        for (std::uint32_t u : pending_)
            if (pts_[u] == p) throw DuplicateValue("triangulation: duplicate point");
        pts_.push_back(p);
        labels_.push_back(label);
        vtri_.push_back(-1);
        pending_.push_back(v);
        bootstrap();
        return v;
    }
    pts_.push_back(p);
    labels_.push_back(label);
    vtri_.push_back(-1);
    try {
        insert_vertex(v, hint);
    } catch (...) {
        pts_.pop_back();
        labels_.pop_back();
        vtri_.pop_back();
        throw;
    }
    return v;
}

Mesh Triangulation::mesh() const {
    Mesh m;
    const std::size_t nv = pts_.size();
    std::vector<std::uint32_t> order(nv);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return labels_[a] < labels_[b]; });
    std::vector<std::uint32_t> fresh(nv);
    bool identity = true;
    m.pts.reserve(nv);
    m.ids.reserve(nv);
    for (std::uint32_t i = 0; i < nv; ++i) {
        fresh[order[i]] = i;
        m.pts.push_back(pts_[order[i]]);
        m.ids.push_back(labels_[order[i]]);
        if (labels_[order[i]] != i) identity = false;
    }
    if (identity) m.ids.clear();

    struct Entry {
        std::array<std::uint32_t, 3> v;
        std::int32_t old;
        int rot;
    };
    std::vector<Entry> es;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (!tris_[t].alive || ghost(static_cast<std::int32_t>(t))) continue;
        std::array<std::uint32_t, 3> v{fresh[tris_[t].v[0]], fresh[tris_[t].v[1]], fresh[tris_[t].v[2]]};
        int r = 0;
        if (v[1] < v[static_cast<std::size_t>(r)]) r = 1;
        if (v[2] < v[static_cast<std::size_t>(r)]) r = 2;
        es.push_back({{v[static_cast<std::size_t>(r)], v[static_cast<std::size_t>(nx(r))], v[static_cast<std::size_t>(pv(r))]},
                      static_cast<std::int32_t>(t), r});
    }
    std::sort(es.begin(), es.end(), [](const Entry& a, const Entry& b) { return a.v < b.v; });
    std::vector<std::int32_t> newid(tris_.size(), -1);
    for (std::size_t i = 0; i < es.size(); ++i) newid[static_cast<std::size_t>(es[i].old)] = static_cast<std::int32_t>(i);
    m.tris.reserve(es.size());
    m.adj.reserve(es.size());
    for (const auto& e : es) {
        m.tris.push_back(e.v);
        std::array<std::int32_t, 3> a{};
        for (int k = 0; k < 3; ++k)
            a[static_cast<std::size_t>(k)] =
                newid[static_cast<std::size_t>(tris_[static_cast<std::size_t>(e.old)].nb[static_cast<std::size_t>((k + e.rot) % 3)])];
        m.adj.push_back(a);
    }
    return m;
}

Mesh delaunay(std::span<const Point> pts) {
    std::vector<std::uint32_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(0x9e3779b97f4a7c15ULL ^ pts.size());
    std::shuffle(order.begin(), order.end(), rng);
    Triangulation t;
    for (std::uint32_t i : order) t.insert(pts[i], i);
    return t.mesh();
}

std::size_t empty_circumdisk_violations(const Mesh& m) {
    std::size_t bad = 0;
    for (std::size_t t = 0; t < m.tris.size(); ++t) {
        Point a = m.corner(t, 0), b = m.corner(t, 1), c = m.corner(t, 2);
        for (std::uint32_t v = 0; v < m.pts.size(); ++v) {
            if (v == m.tris[t][0] || v == m.tris[t][1] || v == m.tris[t][2]) continue;
            if (incircle(a, b, c, m.pts[v]) > 0) ++bad;
        }
    }
    return bad;
}

bool mesh_consistent(const Mesh& m) {
    if (m.adj.size() != m.tris.size()) return false;
    for (std::size_t t = 0; t < m.tris.size(); ++t) {
        if (orient(m.corner(t, 0), m.corner(t, 1), m.corner(t, 2)) <= 0) return false;
        for (int k = 0; k < 3; ++k) {
            std::int32_t s = m.adj[t][static_cast<std::size_t>(k)];
            if (s < 0) continue;
            std::uint32_t a = m.tris[t][static_cast<std::size_t>(nx(k))], b = m.tris[t][static_cast<std::size_t>(pv(k))];
            bool ok = false;
            for (int j = 0; j < 3; ++j)
                if (m.tris[static_cast<std::size_t>(s)][static_cast<std::size_t>(nx(j))] == b &&
                    m.tris[static_cast<std::size_t>(s)][static_cast<std::size_t>(pv(j))] == a &&
                    m.adj[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] == static_cast<std::int32_t>(t))
                    ok = true;
            if (!ok) return false;
        }
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const auto& t : m.tris)
        for (int k = 0; k < 3; ++k) edges.emplace_back(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>(nx(k))]);
    std::sort(edges.begin(), edges.end());
    return std::adjacent_find(edges.begin(), edges.end()) == edges.end();
}

bool inside_triangle(const std::array<Point, 3>& tri, const Point& p) {
    return orient(tri[0], tri[1], p) >= 0 && orient(tri[1], tri[2], p) >= 0 && orient(tri[2], tri[0], p) >= 0;
}

std::int32_t locate_scan(const Mesh& m, const Point& q) {
    for (std::size_t t = 0; t < m.tris.size(); ++t)
        if (inside_triangle({m.corner(t, 0), m.corner(t, 1), m.corner(t, 2)}, q)) return static_cast<std::int32_t>(t);
    throw OutsideMesh();
}

std::int32_t locate(const Mesh& m, const Point& q, LocateContext* ctx) {
    if (m.tris.empty()) throw OutsideMesh();
    std::int32_t t = ctx ? std::clamp<std::int32_t>(ctx->last, 0, static_cast<std::int32_t>(m.tris.size()) - 1) : 0;
    int rot = 0;
    std::uint64_t steps = 0;
    for (;;) {
        ++steps;
        int s[3];
        std::int32_t next = -2;
        for (int j = 0; j < 3 && next == -2; ++j) {
            int k = (j + rot) % 3;
            s[k] = orient(m.corner(static_cast<std::size_t>(t), nx(k)), m.corner(static_cast<std::size_t>(t), pv(k)), q);
            if (s[k] < 0) next = m.adj[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
        }
        if (next == -1) throw OutsideMesh();
        if (next >= 0) {
            t = next;
            rot = rot == 2 ? 0 : rot + 1;
            continue;
        }
        if (ctx) {
            ctx->last = t;
            ctx->steps += steps;
        }
        if (s[0] == 0 || s[1] == 0 || s[2] == 0) return locate_scan(m, q);
        return t;
    }
}

namespace {

thread_local std::vector<std::uint32_t> bfs_stamp;
thread_local std::uint32_t bfs_gen = 0;

}  // namespace

std::vector<std::int32_t> circumdisk_bfs(const Mesh& m, const Point& q, std::int32_t start, std::uint64_t* tests) {
    std::vector<std::int32_t> out;
    if (bfs_stamp.size() < m.tris.size()) bfs_stamp.assign(m.tris.size(), 0), bfs_gen = 0;
    bfs_gen += 1;
    if (bfs_gen == 0) {
        std::fill(bfs_stamp.begin(), bfs_stamp.end(), 0);
        bfs_gen = 1;
    }
    std::uint64_t n_tests = 0;
    auto in_disk = [&](std::int32_t t) {
        ++n_tests;
        auto s = static_cast<std::size_t>(t);
        return incircle_perturbed(m.corner(s, 0), m.corner(s, 1), m.corner(s, 2), q) > 0;
    };
    bfs_stamp[static_cast<std::size_t>(start)] = bfs_gen;
    if (in_disk(start)) out.push_back(start);
    for (std::size_t h = 0; h < out.size(); ++h)
        for (std::int32_t o : m.adj[static_cast<std::size_t>(out[h])]) {
            if (o < 0 || bfs_stamp[static_cast<std::size_t>(o)] == bfs_gen) continue;
            bfs_stamp[static_cast<std::size_t>(o)] = bfs_gen;
            if (in_disk(o)) out.push_back(o);
        }
    if (tests) *tests += n_tests;
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::int32_t> circumdisk_scan(const Mesh& m, const Point& q) {
    std::vector<std::int32_t> out;
    for (std::size_t t = 0; t < m.tris.size(); ++t)
        if (incircle_perturbed(m.corner(t, 0), m.corner(t, 1), m.corner(t, 2), q) > 0) out.push_back(static_cast<std::int32_t>(t));
    return out;
}

Point circumcenter(const Point& a, const Point& b, const Point& c) {
    double bx = b.x - a.x, by = b.y - a.y, cx = c.x - a.x, cy = c.y - a.y;
    double d = 2 * (bx * cy - by * cx);
    double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

// ---------------------------------------------------------------------------

std::size_t net_size(std::size_t n, double c_net) {
    double nn = static_cast<double>(n);
    return static_cast<std::size_t>(std::ceil(c_net * nn * std::max(1.0, std::log(nn))));
}

NetAudit audit_net(std::span<const Point> pool, std::span<const Point> net, std::size_t n, std::size_t disks, Rng& rng) {
    NetAudit a;
    if (pool.empty() || net.empty() || n == 0) return a;
    std::size_t k = std::max<std::size_t>(1, (pool.size() + n - 1) / n);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<double> d(pool.size());
    for (std::size_t s = 0; s < disks; ++s) {
        Point c = pool[pick(rng)];
        for (std::size_t i = 0; i < pool.size(); ++i) d[i] = std::hypot(pool[i].x - c.x, pool[i].y - c.y);
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
        double r = d[k - 1];
        bool hit = std::any_of(net.begin(), net.end(), [&](const Point& p) { return std::hypot(p.x - c.x, p.y - c.y) <= r; });
        ++a.disks;
        if (!hit) ++a.misses;
    }
    return a;
}

CanonicalV build_canonical_v(std::span<const Point> pool, std::size_t n, const NetConfig& cfg, Rng& rng) {
    if (pool.empty() || n == 0) throw InvalidArgument("canonical set: empty pool");
    CanonicalV cv;
    const std::size_t k = std::min(pool.size(), net_size(n, cfg.c_net));
    std::vector<std::uint32_t> idx(pool.size());
    for (std::size_t attempt = 0;; ++attempt) {
        std::iota(idx.begin(), idx.end(), 0u);
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> u(i, idx.size() - 1);
            std::swap(idx[i], idx[u(rng)]);
        }
        cv.net.clear();
        for (std::size_t i = 0; i < k; ++i) cv.net.push_back(pool[idx[i]]);
        std::sort(cv.net.begin(), cv.net.end(), lex_less);
        cv.net.erase(std::unique(cv.net.begin(), cv.net.end()), cv.net.end());
        auto audit = audit_net(pool, cv.net, n, cfg.audit_disks, rng);
        cv.audit_disks = audit.disks;
        cv.audit_misses = audit.misses;
        cv.retries = attempt;
        if (audit.misses == 0 || attempt >= cfg.max_retries) break;
    }
    double xlo = pool[0].x, xhi = xlo, ylo = pool[0].y, yhi = ylo;
    for (const auto& p : pool) {
        xlo = std::min(xlo, p.x), xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y), yhi = std::max(yhi, p.y);
    }
    Point c{std::midpoint(xlo, xhi), std::midpoint(ylo, yhi)};
    double s = std::max(xhi - xlo, yhi - ylo) / 2 * cfg.huge_scale;
    if (!(s > 0)) s = cfg.huge_scale;
    cv.huge = {Point{c.x - 3 * s, c.y - 2 * s}, Point{c.x + 3 * s, c.y - 2 * s}, Point{c.x, c.y + 4 * s}};
    cv.v = cv.net;
    cv.v.insert(cv.v.end(), cv.huge.begin(), cv.huge.end());
    cv.del = delaunay(cv.v);
    auto m = static_cast<std::uint32_t>(cv.net.size());
    cv.del.boundary = {m, m + 1, m + 2};
    return cv;
}

}  // namespace selfimp::geom

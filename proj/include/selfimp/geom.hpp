#pragma once

#include "selfimp/common.hpp"
#include "selfimp/predicates.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace selfimp::geom {

struct OutsideMesh : Error {
    OutsideMesh() : Error("query point lies outside the triangulated region") {}
};

// Finite triangles, counterclockwise. adj[t][k] is the triangle across the edge
// opposite tris[t][k], or -1 on the hull. Triangles are sorted canonically
// (rotated so the smallest vertex comes first), so ids do not depend on how the
// mesh was built.
struct Mesh {
    std::vector<Point> pts;
    std::vector<std::uint32_t> ids;  // caller labels per vertex; empty means 0..k-1
    std::vector<std::array<std::uint32_t, 3>> tris;
    std::vector<std::array<std::int32_t, 3>> adj;
    std::vector<std::uint32_t> boundary;  // huge-triangle vertices, if any

    std::size_t size() const { return tris.size(); }
    std::uint32_t label(std::uint32_t v) const { return ids.empty() ? v : ids[v]; }
    Point corner(std::size_t t, int k) const { return pts[tris[t][static_cast<std::size_t>(k)]]; }
};

// Triangles as sorted label triples (each rotated to start at its smallest label).
std::vector<std::array<std::uint32_t, 3>> triangle_set(const Mesh& m);

// Incremental Delaunay triangulation (Bowyer-Watson with a vertex at infinity).
// Cocircular ties use incircle_perturbed, which makes the result independent of
// insertion order. Collinear inputs stay pending until a third direction shows up.
class Triangulation {
public:
    static constexpr std::uint32_t kGhost = UINT32_MAX;
    static constexpr std::uint32_t kNone = UINT32_MAX;

    Triangulation() = default;

    // Returns the new vertex id. hint is a vertex id to start the walk from.
    // Throws DuplicateValue when p is already a vertex.
    std::uint32_t insert(const Point& p, std::uint32_t label, std::uint32_t hint = kNone);

    std::size_t vertex_count() const { return pts_.size(); }
    const Point& point(std::uint32_t v) const { return pts_[v]; }
    std::uint32_t label(std::uint32_t v) const { return labels_[v]; }
    std::size_t finite_triangles() const;

    // Vertices reordered by ascending label.
    Mesh mesh() const;

private:
    struct Tri {
        std::array<std::uint32_t, 3> v;
        std::array<std::int32_t, 3> nb;
        bool alive = true;
    };
    std::vector<Point> pts_;
    std::vector<std::uint32_t> labels_;
    std::vector<std::int32_t> vtri_;  // some live triangle incident to each vertex
    std::vector<Tri> tris_;
    std::vector<std::int32_t> free_;
    std::vector<std::uint32_t> pending_;  // while all points are collinear
    std::int32_t last_ = -1;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t gen_ = 0;
    std::vector<std::int32_t> cavity_, stack_;

    bool ghost(std::int32_t t) const;
    bool conflict(std::int32_t t, const Point& p) const;
    std::int32_t walk(std::int32_t start, const Point& p) const;
    std::int32_t new_tri(std::uint32_t a, std::uint32_t b, std::uint32_t c);
    void bootstrap();
    void insert_vertex(std::uint32_t v, std::uint32_t hint);
};

// Trusted oracle: Delaunay triangulation of distinct points.
Mesh delaunay(std::span<const Point> pts);

// Exhaustive check: returns the number of (triangle, vertex) pairs with the vertex
// strictly inside the triangle's circumcircle.
std::size_t empty_circumdisk_violations(const Mesh& m);

// Structural check: orientation, adjacency symmetry, edge multiplicity.
bool mesh_consistent(const Mesh& m);

struct LocateContext {
    std::int32_t last = 0;
    std::uint64_t steps = 0;
};

// Triangle containing q. Points on shared boundaries resolve to the lowest id.
// Throws OutsideMesh when q is outside every triangle.
std::int32_t locate(const Mesh& m, const Point& q, LocateContext* ctx = nullptr);
std::int32_t locate_scan(const Mesh& m, const Point& q);

// Triangles whose (perturbed) circumdisk strictly contains q, found by BFS from a
// triangle containing q. Sorted ascending.
std::vector<std::int32_t> circumdisk_bfs(const Mesh& m, const Point& q, std::int32_t start,
                                         std::uint64_t* tests = nullptr);
std::vector<std::int32_t> circumdisk_scan(const Mesh& m, const Point& q);

Point circumcenter(const Point& a, const Point& b, const Point& c);

// Point set plus three far vertices enclosing it, and its Delaunay mesh.
struct CanonicalV {
    std::vector<Point> net;
    std::array<Point, 3> huge{};
    std::vector<Point> v;  // net followed by the huge triangle
    Mesh del;
    std::size_t retries = 0;
    std::size_t audit_disks = 0, audit_misses = 0;
};

struct NetConfig {
    double c_net = 8.0;
    double huge_scale = 4096.0;  // huge triangle vs. bounding box of the pool
    std::size_t audit_disks = 1000;
    std::size_t max_retries = 4;
};

// Net size used for n input points: ceil(c_net * n * max(1, ln n)).
std::size_t net_size(std::size_t n, double c_net);

// Random (1/n)-net of the pooled points for disks, audited with random heavy disks;
// a failed audit redraws, up to max_retries times.
CanonicalV build_canonical_v(std::span<const Point> pool, std::size_t n, const NetConfig& cfg, Rng& rng);

// Fraction of audited heavy disks (at least |pool|/n points) that miss the net.
struct NetAudit {
    std::size_t disks = 0, misses = 0;
};
NetAudit audit_net(std::span<const Point> pool, std::span<const Point> net, std::size_t n, std::size_t disks, Rng& rng);

bool inside_triangle(const std::array<Point, 3>& tri, const Point& p);

// Voronoi cells (convex polygons, counterclockwise) clipped to a box, one per site.
struct Voronoi {
    std::vector<std::vector<Point>> cells;
    double xlo = 0, ylo = 0, xhi = 0, yhi = 0;
};

Voronoi voronoi_from_delaunay(const Mesh& m, double margin = 1.0);

// Point-in-cell test with a relative tolerance.
bool voronoi_contains(const Voronoi& vd, std::uint32_t site, const Point& q, double tol = 1e-9);

}  // namespace selfimp::geom

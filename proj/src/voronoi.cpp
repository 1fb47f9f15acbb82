#include "selfimp/geom.hpp"

#include <algorithm>
#include <cmath>

namespace selfimp::geom {

namespace {

// Keeps the part of poly where n.x * x + n.y * y <= c.
std::vector<Point> clip(const std::vector<Point>& poly, double nxv, double nyv, double c) {
    std::vector<Point> out;
    const std::size_t k = poly.size();
    for (std::size_t i = 0; i < k; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % k];
        double fa = nxv * a.x + nyv * a.y - c, fb = nxv * b.x + nyv * b.y - c;
        if (fa <= 0) out.push_back(a);
        if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) {
            double t = fa / (fa - fb);
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return out;
}

}  // namespace

Voronoi voronoi_from_delaunay(const Mesh& m, double margin) {
    Voronoi vd;
    const std::size_t n = m.pts.size();
    vd.cells.resize(n);
    if (n == 0) return vd;
    double xlo = m.pts[0].x, xhi = xlo, ylo = m.pts[0].y, yhi = ylo;
    for (const auto& p : m.pts) {
        xlo = std::min(xlo, p.x), xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y), yhi = std::max(yhi, p.y);
    }
    double pad = margin * std::max({xhi - xlo, yhi - ylo, 1.0});
    vd.xlo = xlo - pad, vd.xhi = xhi + pad, vd.ylo = ylo - pad, vd.yhi = yhi + pad;

    std::vector<std::vector<std::uint32_t>> nbr(n);
    if (m.tris.empty()) {
        for (std::uint32_t a = 0; a < n; ++a)
            for (std::uint32_t b = 0; b < n; ++b)
                if (a != b) nbr[a].push_back(b);
    } else {
        for (const auto& t : m.tris)
            for (int k = 0; k < 3; ++k) nbr[t[static_cast<std::size_t>(k)]].push_back(t[static_cast<std::size_t>((k + 1) % 3)]);
        for (auto& l : nbr) {
            // Each undirected edge shows up from one side on the hull; add both directions.
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
        }
        for (std::uint32_t a = 0; a < n; ++a)
            for (std::uint32_t b : std::vector<std::uint32_t>(nbr[a])) nbr[b].push_back(a);
        for (auto& l : nbr) {
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
        }
    }
    for (std::uint32_t s = 0; s < n; ++s) {
        std::vector<Point> cell{{vd.xlo, vd.ylo}, {vd.xhi, vd.ylo}, {vd.xhi, vd.yhi}, {vd.xlo, vd.yhi}};
        const Point& v = m.pts[s];
        for (std::uint32_t w : nbr[s]) {
            const Point& q = m.pts[w];
            // |x - v|^2 <= |x - q|^2  <=>  2 (q - v) . x <= |q|^2 - |v|^2
            cell = clip(cell, 2 * (q.x - v.x), 2 * (q.y - v.y), (q.x * q.x + q.y * q.y) - (v.x * v.x + v.y * v.y));
            if (cell.empty()) break;
        }
        vd.cells[s] = std::move(cell);
    }
    return vd;
}

bool voronoi_contains(const Voronoi& vd, std::uint32_t site, const Point& q, double tol) {
    const auto& c = vd.cells[site];
    if (c.size() < 3) return false;
    double scale = std::max(vd.xhi - vd.xlo, vd.yhi - vd.ylo);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Point& a = c[i];
        const Point& b = c[(i + 1) % c.size()];
        double cr = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
        if (cr < -tol * scale * scale) return false;
    }
    return true;
}

}  // namespace selfimp::geom

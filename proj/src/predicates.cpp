#include "selfimp/predicates.hpp"

#include <cmath>
#include <vector>

namespace selfimp::geom {

namespace {

thread_local PredicateStats g_stats;

constexpr double kEps = 1.1102230246251565e-16;  // 2^-53
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

// Nonoverlapping expansions, components in increasing magnitude, zeros removed.
using Expansion = std::vector<double>;

inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    double bv = s - a;
    double av = s - bv;
    e = (a - av) + (b - bv);
}

inline void two_prod(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

Expansion grow(const Expansion& e, double b) {
    Expansion h;
    h.reserve(e.size() + 1);
    double q = b;
    for (double c : e) {
        double s, err;
        two_sum(q, c, s, err);
        q = s;
        if (err != 0.0) h.push_back(err);
    }
    if (q != 0.0 || h.empty()) h.push_back(q);
    return h;
}

Expansion add(const Expansion& e, const Expansion& f) {
    Expansion h = e;
    for (double c : f) h = grow(h, c);
    return h;
}

Expansion negate(Expansion e) {
    for (double& c : e) c = -c;
    return e;
}

Expansion scale(const Expansion& e, double b) {
    Expansion h;
    h.reserve(2 * e.size());
    if (e.empty()) return h;
    double q, err;
    two_prod(e[0], b, q, err);
    if (err != 0.0) h.push_back(err);
    for (std::size_t i = 1; i < e.size(); ++i) {
        double p1, p0;
        two_prod(e[i], b, p1, p0);
        double s, e1;
        two_sum(q, p0, s, e1);
        if (e1 != 0.0) h.push_back(e1);
        double s2, e2;
        two_sum(p1, s, s2, e2);
        if (e2 != 0.0) h.push_back(e2);
        q = s2;
    }
    if (q != 0.0 || h.empty()) h.push_back(q);
    return h;
}

Expansion mul(const Expansion& e, const Expansion& f) {
    Expansion h{0.0};
    for (double c : f) h = add(h, scale(e, c));
    return h;
}

Expansion diff(double a, double b) {
    double s, e;
    two_sum(a, -b, s, e);
    Expansion out;
    if (e != 0.0) out.push_back(e);
    out.push_back(s);
    return out;
}

int sign_of(const Expansion& e) {
    for (auto it = e.rbegin(); it != e.rend(); ++it) {
        if (*it > 0) return 1;
        if (*it < 0) return -1;
    }
    return 0;
}

int orient_exact(const Point& a, const Point& b, const Point& c) {
    Expansion acx = diff(a.x, c.x), bcy = diff(b.y, c.y);
    Expansion acy = diff(a.y, c.y), bcx = diff(b.x, c.x);
    return sign_of(add(mul(acx, bcy), negate(mul(acy, bcx))));
}

int incircle_exact(const Point& a, const Point& b, const Point& c, const Point& d) {
    Expansion adx = diff(a.x, d.x), ady = diff(a.y, d.y);
    Expansion bdx = diff(b.x, d.x), bdy = diff(b.y, d.y);
    Expansion cdx = diff(c.x, d.x), cdy = diff(c.y, d.y);
    Expansion alift = add(mul(adx, adx), mul(ady, ady));
    Expansion blift = add(mul(bdx, bdx), mul(bdy, bdy));
    Expansion clift = add(mul(cdx, cdx), mul(cdy, cdy));
    Expansion bc = add(mul(bdx, cdy), negate(mul(cdx, bdy)));
    Expansion ca = add(mul(cdx, ady), negate(mul(adx, cdy)));
    Expansion ab = add(mul(adx, bdy), negate(mul(bdx, ady)));
    Expansion det = add(add(mul(alift, bc), mul(blift, ca)), mul(clift, ab));
    return sign_of(det);
}

}  // namespace

PredicateStats& predicate_stats() { return g_stats; }

int orient(const Point& a, const Point& b, const Point& c) {
    ++g_stats.orient;
    double detleft = (a.x - c.x) * (b.y - c.y);
    double detright = (a.y - c.y) * (b.x - c.x);
    double det = detleft - detright;
    double detsum = std::fabs(detleft) + std::fabs(detright);
    if (std::fabs(det) > kOrientBound * detsum) return det > 0 ? 1 : -1;
    ++g_stats.exact;
    return orient_exact(a, b, c);
}

int incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
    ++g_stats.incircle;
    double adx = a.x - d.x, ady = a.y - d.y;
    double bdx = b.x - d.x, bdy = b.y - d.y;
    double cdx = c.x - d.x, cdy = c.y - d.y;
    double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    double cdxady = cdx * ady, adxcdy = adx * cdy;
    double adxbdy = adx * bdy, bdxady = bdx * ady;
    double alift = adx * adx + ady * ady;
    double blift = bdx * bdx + bdy * bdy;
    double clift = cdx * cdx + cdy * cdy;
    double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * alift +
                       (std::fabs(cdxady) + std::fabs(adxcdy)) * blift +
                       (std::fabs(adxbdy) + std::fabs(bdxady)) * clift;
    if (std::fabs(det) > kIncircleBound * permanent) return det > 0 ? 1 : -1;
    ++g_stats.exact;
    return incircle_exact(a, b, c, d);
}

int incircle_perturbed(const Point& a, const Point& b, const Point& c, const Point& d) {
    int s = incircle(a, b, c, d);
    if (s != 0) return s;
    ++g_stats.perturbed_ties;
    // Cofactors of the lifted column in the 4x4 lifting determinant.
    const Point* pts[4] = {&a, &b, &c, &d};
    int order[4] = {0, 1, 2, 3};
    for (int i = 1; i < 4; ++i)
        for (int j = i; j > 0 && lex_less(*pts[order[j]], *pts[order[j - 1]]); --j) std::swap(order[j], order[j - 1]);
    for (int k = 0; k < 4; ++k) {
        int i = order[k];
        int cof = 0;
        switch (i) {
            case 0: cof = orient(b, c, d); break;
            case 1: cof = -orient(a, c, d); break;
            case 2: cof = orient(a, b, d); break;
            default: cof = -orient(a, b, c); break;
        }
        if (cof != 0) return cof;
    }
    return 0;
}

int compare_distance(const Point& p, const Point& a, const Point& b) {
    double ax = a.x - p.x, ay = a.y - p.y, bx = b.x - p.x, by = b.y - p.y;
    double da = ax * ax + ay * ay, db = bx * bx + by * by;
    double d = da - db;
    // Each squared length carries relative error under 4 eps after the differences.
    double bound = 8.0 * kEps * (da + db);
    if (std::fabs(d) > bound) return d > 0 ? 1 : -1;
    ++g_stats.exact;
    Expansion eax = diff(a.x, p.x), eay = diff(a.y, p.y);
    Expansion ebx = diff(b.x, p.x), eby = diff(b.y, p.y);
    Expansion ea = add(mul(eax, eax), mul(eay, eay));
    Expansion eb = add(mul(ebx, ebx), mul(eby, eby));
    return sign_of(add(ea, negate(eb)));
}

}  // namespace selfimp::geom

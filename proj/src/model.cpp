#include "selfimp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace selfimp::model {

ParamDist ParamDist::uniform(double lo, double hi) {
    if (!(lo < hi)) throw ModelViolation("uniform distribution needs lo < hi");
    ParamDist d;
    d.kind = Kind::Uniform;
    d.lo = lo;
    d.hi = hi;
    return d;
}

ParamDist ParamDist::trunc_gauss(double mean, double sd, double lo, double hi) {
    if (!(lo < hi) || !(sd > 0)) throw ModelViolation("truncated gaussian needs lo < hi and sd > 0");
    ParamDist d;
    d.kind = Kind::TruncGauss;
    d.mean = mean;
    d.sd = sd;
    d.lo = lo;
    d.hi = hi;
    return d;
}

ParamDist ParamDist::mixture(std::vector<ParamDist> comps, std::vector<double> weights) {
    if (comps.empty() || comps.size() != weights.size()) throw ModelViolation("mixture needs matching components and weights");
    for (double w : weights)
        if (!(w > 0)) throw ModelViolation("mixture weights must be positive");
    ParamDist d;
    d.kind = Kind::Mixture;
    d.comps = std::move(comps);
    d.weights = std::move(weights);
    return d;
}

ParamDist ParamDist::point(double v) {
    ParamDist d;
    d.kind = Kind::Point;
    d.value = v;
    return d;
}

double ParamDist::sample(Rng& rng) const {
    switch (kind) {
        case Kind::Uniform: return std::uniform_real_distribution<double>(lo, hi)(rng);
        case Kind::TruncGauss: {
            std::normal_distribution<double> g(mean, sd);
            for (int attempt = 0; attempt < 10000; ++attempt) {
                double v = g(rng);
                if (v >= lo && v <= hi) return v;
            }
            throw ModelViolation("truncated gaussian has negligible mass on its support");
        }
        case Kind::Mixture: {
            std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
            return comps[pick(rng)].sample(rng);
        }
        case Kind::Point: return value;
    }
    return 0.0;
}

double ParamDist::support_lo() const {
    switch (kind) {
        case Kind::Mixture: {
            double v = comps[0].support_lo();
            for (auto& c : comps) v = std::min(v, c.support_lo());
            return v;
        }
        case Kind::Point: return value;
        default: return lo;
    }
}

double ParamDist::support_hi() const {
    switch (kind) {
        case Kind::Mixture: {
            double v = comps[0].support_hi();
            for (auto& c : comps) v = std::max(v, c.support_hi());
            return v;
        }
        case Kind::Point: return value;
        default: return hi;
    }
}

bool ParamDist::degenerate() const {
    if (kind == Kind::Point) return true;
    if (kind == Kind::Mixture)
        return std::any_of(comps.begin(), comps.end(), [](const ParamDist& c) { return c.degenerate(); });
    return false;
}

PlaneDist PlaneDist::product(ParamDist a, ParamDist b) {
    PlaneDist d;
    d.comps.emplace_back(std::move(a), std::move(b));
    d.weights.push_back(1.0);
    return d;
}

Point PlaneDist::sample(Rng& rng) const {
    std::size_t k = 0;
    if (comps.size() > 1) k = std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng);
    double a = comps[k].first.sample(rng);
    double b = comps[k].second.sample(rng);
    return {a, b};
}

bool PlaneDist::degenerate() const {
    if (comps.empty()) return true;
    return std::any_of(comps.begin(), comps.end(),
                       [](const auto& c) { return c.first.degenerate() || c.second.degenerate(); });
}

Curve::Curve(std::vector<double> knots, std::vector<double> values) : knots_(std::move(knots)), values_(std::move(values)) {
    std::size_t k = knots_.size();
    if (k < 2 || values_.size() != k) throw ModelViolation("curve needs at least two knots and matching values");
    std::vector<double> secant(k - 1);
    for (std::size_t j = 0; j + 1 < k; ++j) {
        if (!(knots_[j] < knots_[j + 1])) throw ModelViolation("curve knots must be strictly increasing");
        if (values_[j] == values_[j + 1]) throw ModelViolation("curve pieces must be strictly monotone");
        secant[j] = (values_[j + 1] - values_[j]) / (knots_[j + 1] - knots_[j]);
    }
    // Harmonic-mean slopes keep each Hermite piece monotone; flips get slope 0.
    slopes_.assign(k, 0.0);
    slopes_[0] = secant[0];
    slopes_[k - 1] = secant[k - 2];
    for (std::size_t j = 1; j + 1 < k; ++j) {
        double a = secant[j - 1], b = secant[j];
        slopes_[j] = (a * b <= 0) ? 0.0 : 2.0 / (1.0 / a + 1.0 / b);
    }
}

Curve Curve::affine(double slope, double offset, double lo, double hi) {
    if (slope == 0) throw ModelViolation("affine curve needs a nonzero slope");
    return Curve({lo, hi}, {slope * lo + offset, slope * hi + offset});
}

double Curve::operator()(double u) const {
    std::size_t k = knots_.size();
    if (u <= knots_[0]) return values_[0] + slopes_[0] * (u - knots_[0]);
    if (u >= knots_[k - 1]) return values_[k - 1] + slopes_[k - 1] * (u - knots_[k - 1]);
    std::size_t j = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), u) - knots_.begin()) - 1;
    double h = knots_[j + 1] - knots_[j];
    double t = (u - knots_[j]) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * values_[j] + h10 * h * slopes_[j] + h01 * values_[j + 1] + h11 * h * slopes_[j + 1];
}

int Curve::extrema() const {
    int flips = 0;
    for (std::size_t j = 1; j + 1 < knots_.size(); ++j) {
        bool up0 = values_[j] > values_[j - 1];
        bool up1 = values_[j + 1] > values_[j];
        if (up0 != up1) ++flips;
    }
    return flips;
}

std::vector<std::pair<int, int>> Poly2::exponents(int degree) {
    std::vector<std::pair<int, int>> e;
    for (int a = 0; a <= degree; ++a)
        for (int b = 0; a + b <= degree; ++b) e.emplace_back(a, b);
    return e;
}

double Poly2::operator()(const Point& u) const {
    auto ex = exponents(degree);
    double s = 0.0;
    for (std::size_t k = 0; k < ex.size(); ++k) {
        if (coeffs[k] == 0) continue;
        s += coeffs[k] * std::pow(u.x, ex[k].first) * std::pow(u.y, ex[k].second);
    }
    return s;
}

bool Poly2::is_constant() const {
    for (std::size_t k = 1; k < coeffs.size(); ++k)
        if (coeffs[k] != 0) return false;
    return true;
}

SortInstance SortModel::sample(Rng& rng, std::uint64_t draw) const {
    SortInstance inst;
    inst.draw = draw;
    inst.x.resize(n);
    for (std::size_t k = 0; k < groups.size(); ++k) {
        double u = params[k].sample(rng);
        for (auto i : groups[k]) inst.x[i] = curves[i](u);
    }
    return inst;
}

DtInstance DtModel::sample(Rng& rng, std::uint64_t draw) const {
    DtInstance inst;
    inst.draw = draw;
    inst.p.resize(n);
    for (std::size_t k = 0; k < groups.size(); ++k) {
        Point u = params[k].sample(rng);
        for (auto i : groups[k]) inst.p[i] = {hx[i](u), hy[i](u)};
    }
    return inst;
}

std::vector<std::uint32_t> DtModel::const_set() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < n; ++i)
        if (hx[i].is_constant() && hy[i].is_constant()) out.push_back(i);
    return out;
}

Partition canonical(Partition p) {
    for (auto& g : p) std::sort(g.begin(), g.end());
    std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return p;
}

namespace {

std::vector<std::uint32_t> check_partition(Partition& groups, std::size_t n) {
    if (n == 0) throw ModelViolation("model needs n >= 1");
    std::vector<std::uint32_t> group_of(n, UINT32_MAX);
    for (std::size_t k = 0; k < groups.size(); ++k) {
        if (groups[k].empty()) throw ModelViolation("empty group");
        for (auto i : groups[k]) {
            if (i >= n) throw ModelViolation("group index out of range");
            if (group_of[i] != UINT32_MAX) throw ModelViolation("index in two groups");
            group_of[i] = static_cast<std::uint32_t>(k);
        }
    }
    for (auto g : group_of)
        if (g == UINT32_MAX) throw ModelViolation("groups do not cover every index");
    for (auto& g : groups) std::sort(g.begin(), g.end());
    return group_of;
}

}  // namespace

int count_crossings(const Curve& a, const Curve& b, double lo, double hi, int grid) {
    int crossings = 0;
    int prev = 0;
    for (int s = 0; s <= grid; ++s) {
        double u = lo + (hi - lo) * s / grid;
        double d = a(u) - b(u);
        int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (sg != 0) {
            if (prev != 0 && sg != prev) ++crossings;
            prev = sg;
        }
    }
    return crossings;
}

SortModel build_sort_model(Partition groups, std::vector<ParamDist> params, std::vector<Curve> curves, int c0,
                           const BuildOptions& opt) {
    SortModel m;
    m.n = curves.size();
    m.c0 = c0;
    m.group_of = check_partition(groups, m.n);
    if (params.size() != groups.size()) throw ModelViolation("one parameter distribution per group required");
    for (auto& p : params)
        if (p.degenerate() && !opt.allow_degenerate) throw ModelViolation("discrete parameter distribution rejected");
    for (auto& c : curves)
        if (c.extrema() > c0) throw ModelViolation("curve has more extrema than c0");
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const auto& g = groups[k];
        if (g.size() < 2 || params[k].degenerate()) continue;
        double lo = params[k].support_lo(), hi = params[k].support_hi();
        int grid = g.size() > 64 ? 128 : 512;
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = a + 1; b < g.size(); ++b)
                if (count_crossings(curves[g[a]], curves[g[b]], lo, hi, grid) > opt.intersection_cap)
                    throw ModelViolation("same-group curves cross more often than the cap");
    }
    m.groups = std::move(groups);
    m.params = std::move(params);
    m.curves = std::move(curves);
    return m;
}

DtModel build_dt_model(Partition groups, std::vector<PlaneDist> params, std::vector<Poly2> hx, std::vector<Poly2> hy,
                       int d0, const BuildOptions& opt) {
    DtModel m;
    m.n = hx.size();
    m.d0 = d0;
    if (hy.size() != m.n) throw ModelViolation("need one x and one y polynomial per index");
    m.group_of = check_partition(groups, m.n);
    if (params.size() != groups.size()) throw ModelViolation("one parameter distribution per group required");
    for (auto& p : params)
        if (p.degenerate() && !opt.allow_degenerate) throw ModelViolation("discrete parameter distribution rejected");
    std::size_t want = Poly2::exponents(d0).size();
    for (std::size_t i = 0; i < m.n; ++i) {
        if (hx[i].degree != d0 || hy[i].degree != d0 || hx[i].coeffs.size() != want || hy[i].coeffs.size() != want)
            throw ModelViolation("polynomial degree does not match d0");
    }
    m.groups = std::move(groups);
    m.params = std::move(params);
    m.hx = std::move(hx);
    m.hy = std::move(hy);
    return m;
}

Partition ground_truth(const SortModel& m) { return canonical(m.groups); }
Partition ground_truth(const DtModel& m) { return canonical(m.groups); }

namespace {

Partition random_partition(std::size_t n, std::size_t max_group, Rng& rng) {
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    Partition p;
    std::size_t pos = 0;
    std::uniform_int_distribution<std::size_t> size_dist(1, std::max<std::size_t>(1, max_group));
    while (pos < n) {
        std::size_t s = std::min(size_dist(rng), n - pos);
        p.emplace_back(perm.begin() + static_cast<long>(pos), perm.begin() + static_cast<long>(pos + s));
        pos += s;
    }
    return canonical(std::move(p));
}

ParamDist line_dist(const std::string& kind) {
    if (kind == "uniform") return ParamDist::uniform(0.0, 1.0);
    if (kind == "gauss") return ParamDist::trunc_gauss(0.5, 0.2, 0.0, 1.0);
    if (kind == "mixture")
        return ParamDist::mixture({ParamDist::uniform(0.0, 0.3), ParamDist::trunc_gauss(0.7, 0.1, 0.4, 1.0)}, {0.4, 0.6});
    throw InvalidArgument("unknown parameter distribution '" + kind + "'");
}

Curve random_curve(const std::string& family, int c0, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sign = [&] { return unit(rng) < 0.5 ? -1.0 : 1.0; };
    if (family == "affine") return Curve::affine(sign() * (0.5 + 1.5 * unit(rng)), 2 * unit(rng) - 1, lo, hi);
    int flips = 0;
    if (family == "wavy") flips = static_cast<int>(std::uniform_int_distribution<int>(0, std::max(0, c0))(rng));
    else if (family != "monotone") throw InvalidArgument("unknown curve family '" + family + "'");
    int pieces = std::max(3, flips + 2);
    std::vector<int> flip_at(static_cast<std::size_t>(pieces), 0);
    std::vector<int> interior(static_cast<std::size_t>(pieces - 1));
    std::iota(interior.begin(), interior.end(), 1);
    std::shuffle(interior.begin(), interior.end(), rng);
    for (int f = 0; f < flips; ++f) flip_at[static_cast<std::size_t>(interior[static_cast<std::size_t>(f)])] = 1;
    std::vector<double> knots, values;
    double dir = sign();
    double v = 2 * unit(rng) - 1;
    for (int j = 0; j <= pieces; ++j) {
        knots.push_back(lo + (hi - lo) * j / pieces);
        if (j > 0) {
            if (flip_at[static_cast<std::size_t>(j - 1)]) dir = -dir;
            v += dir * (0.1 + unit(rng));
        }
        values.push_back(v);
    }
    return Curve(knots, values);
}

}  // namespace

SortModel generate_sort_model(const SortSpec& spec, Rng& rng, const BuildOptions& opt) {
    if (spec.n == 0) throw ModelViolation("model needs n >= 1");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (spec.family == "uniform_iid") {
        Partition g;
        std::vector<ParamDist> params;
        std::vector<Curve> curves;
        for (std::uint32_t i = 0; i < spec.n; ++i) {
            g.push_back({i});
            params.push_back(line_dist(spec.dist));
            curves.push_back(Curve::affine(1.0, 0.0, 0.0, 1.0));
        }
        return build_sort_model(g, params, curves, spec.c0, opt);
    }
    if (spec.family == "fan") {
        // Each group holds two sorted orders; groups occupy disjoint value bands.
        std::size_t k = std::max<std::size_t>(1, spec.num_groups);
        Partition g(k);
        std::vector<std::uint32_t> perm(spec.n);
        std::iota(perm.begin(), perm.end(), 0u);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < spec.n; ++i) g[i % k].push_back(perm[i]);
        g = canonical(g);
        std::vector<ParamDist> params;
        std::vector<Curve> curves(spec.n);
        for (std::size_t gi = 0; gi < k; ++gi) {
            params.push_back(ParamDist::mixture({ParamDist::uniform(-2.0, -1.0), ParamDist::uniform(1.0, 2.0)}, {0.5, 0.5}));
            double m = static_cast<double>(g[gi].size());
            double band = static_cast<double>(gi) * (4.0 * m + 10.0);
            for (std::size_t j = 0; j < g[gi].size(); ++j) {
                double slope = static_cast<double>(j) - (m - 1) / 2;
                if (slope == 0) slope = 0.25;
                curves[g[gi][j]] = Curve::affine(slope, band + 1e-3 * static_cast<double>(j), -2.0, 2.0);
            }
        }
        return build_sort_model(g, params, curves, spec.c0, opt);
    }
    for (int attempt = 0; attempt < 64; ++attempt) {
        Partition g = random_partition(spec.n, spec.max_group, rng);
        std::vector<ParamDist> params;
        std::vector<Curve> curves(spec.n);
        static const char* kFamilies[] = {"affine", "monotone", "wavy"};
        for (auto& grp : g) {
            params.push_back(line_dist(spec.dist));
            std::string fam = spec.family;
            if (fam == "mixed") fam = kFamilies[std::uniform_int_distribution<int>(0, spec.c0 > 0 ? 2 : 1)(rng)];
            for (auto i : grp) curves[i] = random_curve(fam, spec.c0, 0.0, 1.0, rng);
        }
        try {
            return build_sort_model(g, params, curves, spec.c0, opt);
        } catch (const ModelViolation&) {
            continue;
        }
    }
    throw ModelViolation("model generation exhausted its rejection budget");
}

namespace {

Poly2 poly_terms(int d0, std::initializer_list<std::pair<std::pair<int, int>, double>> terms) {
    Poly2 p;
    p.degree = d0;
    auto ex = Poly2::exponents(d0);
    p.coeffs.assign(ex.size(), 0.0);
    for (auto& [e, c] : terms) {
        auto it = std::find(ex.begin(), ex.end(), e);
        if (it == ex.end()) throw InvalidArgument("monomial exceeds degree");
        p.coeffs[static_cast<std::size_t>(it - ex.begin())] = c;
    }
    return p;
}

Poly2 random_poly(int d0, Rng& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    Poly2 p;
    p.degree = d0;
    p.coeffs.resize(Poly2::exponents(d0).size());
    for (auto& c : p.coeffs) c = coef(rng);
    // Keep at least one linear term clearly nonzero.
    std::size_t lin = d0 >= 1 ? (std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : static_cast<std::size_t>(d0 + 1)) : 0;
    if (lin && std::fabs(p.coeffs[lin]) < 0.3) p.coeffs[lin] = p.coeffs[lin] < 0 ? -0.5 : 0.5;
    return p;
}

}  // namespace

DtModel generate_dt_model(const DtSpec& spec, Rng& rng, const BuildOptions& opt) {
    if (spec.n == 0) throw ModelViolation("model needs n >= 1");
    int d0 = std::max(1, spec.d0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Partition g;
    std::vector<PlaneDist> params;
    std::vector<Poly2> hx(spec.n), hy(spec.n);
    auto unit_square = [] { return PlaneDist::product(ParamDist::uniform(0.0, 1.0), ParamDist::uniform(0.0, 1.0)); };
    if (spec.family == "uniform") {
        for (std::uint32_t i = 0; i < spec.n; ++i) {
            g.push_back({i});
            params.push_back(unit_square());
            hx[i] = poly_terms(d0, {{{1, 0}, 1.0}});
            hy[i] = poly_terms(d0, {{{0, 1}, 1.0}});
        }
        return build_dt_model(g, params, hx, hy, d0, opt);
    }
    if (spec.family != "poly" && spec.family != "mixed" && spec.family != "clustered")
        throw InvalidArgument("unknown dt model family '" + spec.family + "'");
    std::vector<std::uint32_t> perm(spec.n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::size_t n_const = 0;
    if (spec.family == "mixed") n_const = static_cast<std::size_t>(std::floor(spec.const_fraction * static_cast<double>(spec.n)));
    for (std::size_t k = 0; k < n_const; ++k) {
        std::uint32_t i = perm[k];
        g.push_back({i});
        params.push_back(unit_square());
        hx[i] = poly_terms(d0, {{{0, 0}, 4 * unit(rng) - 2}});
        hy[i] = poly_terms(d0, {{{0, 0}, 4 * unit(rng) - 2}});
    }
    std::uniform_int_distribution<std::size_t> size_dist(1, std::max<std::size_t>(1, spec.max_group));
    std::size_t pos = n_const;
    while (pos < spec.n) {
        std::size_t s = std::min(size_dist(rng), spec.n - pos);
        std::vector<std::uint32_t> grp(perm.begin() + static_cast<long>(pos), perm.begin() + static_cast<long>(pos + s));
        pos += s;
        for (auto i : grp) {
            hx[i] = random_poly(d0, rng);
            hy[i] = random_poly(d0, rng);
        }
        if (spec.family == "clustered") {
            PlaneDist pd;
            for (int c = 0; c < 3; ++c) {
                double cx = unit(rng) * 0.9, cy = unit(rng) * 0.9;
                pd.comps.emplace_back(ParamDist::uniform(cx, cx + 1e-4), ParamDist::uniform(cy, cy + 1e-4));
                pd.weights.push_back(1.0 + c);
            }
            params.push_back(pd);
        } else {
            params.push_back(unit_square());
        }
        g.push_back(grp);
    }
    // Keep group order aligned with params while canonicalising member order.
    for (auto& grp : g) std::sort(grp.begin(), grp.end());
    return build_dt_model(g, params, hx, hy, d0, opt);
}

}  // namespace selfimp::model

#include "selfimp/algebra.hpp"

#include <Eigen/Dense>
#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace selfimp::algebra {

namespace {

void exps_rec(int m, int left, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == m) {
        out.push_back(cur);
        return;
    }
    for (int e = 0; e <= left; ++e) {
        cur.push_back(e);
        exps_rec(m, left - e, cur, out);
        cur.pop_back();
    }
}

// Joint affine whitening of the sample columns (centre, rotate onto the
// principal axes, scale each axis to [-1, 1]). Polynomial relations keep
// their degree under invertible affine maps; per-axis scaling alone leaves thin
// point clouds badly conditioned. Returns false when the columns already satisfy
// a linear relation to working precision.
bool whiten(std::vector<std::vector<double>>& cols, double tol) {
    const auto m = static_cast<Eigen::Index>(cols.size());
    const auto k = static_cast<Eigen::Index>(cols[0].size());
    Eigen::MatrixXd x(k, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index s = 0; s < k; ++s) x(s, j) = cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
    for (Eigen::Index j = 0; j < m; ++j) {
        double lo = x.col(j).minCoeff(), hi = x.col(j).maxCoeff();
        if (!(hi > lo)) return false;
        x.col(j) = (x.col(j).array() - (lo + (hi - lo) / 2)) / ((hi - lo) / 2);
    }
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(m - 1) <= tol * sv(0)) return false;
    Eigen::MatrixXd z = x * svd.matrixV();
    for (Eigen::Index j = 0; j < m; ++j) {
        double mx = z.col(j).cwiseAbs().maxCoeff();
        for (Eigen::Index s = 0; s < k; ++s) cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)] = z(s, j) / mx;
    }
    return true;
}

bool dependent_samples(std::vector<std::span<const double>> cols, int d, const RankConfig& cfg) {
    const int m = static_cast<int>(cols.size());
    auto basis = monomial_basis(m, d);
    const std::size_t k = basis.size();
    for (auto& c : cols)
        if (c.size() < k) throw InvalidArgument("dependence test needs kappa samples per coordinate");
    std::vector<std::vector<double>> norm;
    for (auto& c : cols) norm.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(k));
    if (!whiten(norm, cfg.tol)) return true;
    // Chebyshev products T_a(x) T_b(y) ... over the same exponent set span the same
    // space as the monomials, with far better conditioning on [-1, 1].
    Matrix a(k, std::vector<double>(k));
    std::vector<std::vector<double>> cheb(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(d) + 1));
    for (std::size_t s = 0; s < k; ++s) {
        for (int j = 0; j < m; ++j) {
            auto& t = cheb[static_cast<std::size_t>(j)];
            double x = norm[static_cast<std::size_t>(j)][s];
            t[0] = 1;
            if (d >= 1) t[1] = x;
            for (int e = 2; e <= d; ++e) t[static_cast<std::size_t>(e)] = 2 * x * t[static_cast<std::size_t>(e - 1)] - t[static_cast<std::size_t>(e - 2)];
        }
        for (std::size_t c = 0; c < k; ++c) {
            double v = 1;
            for (int j = 0; j < m; ++j) v *= cheb[static_cast<std::size_t>(j)][static_cast<std::size_t>(basis.exps[c][static_cast<std::size_t>(j)])];
            a[s][c] = v;
        }
    }
    return dependence_test(a, cfg) == Dependence::Dependent;
}

}  // namespace

MonomialBasis monomial_basis(int m, int d) {
    if (m < 1 || d < 0) throw InvalidArgument("monomial basis needs m >= 1, d >= 0");
    MonomialBasis b{m, d, {}};
    std::vector<int> cur;
    exps_rec(m, d, cur, b.exps);
    return b;
}

std::size_t kappa(int m, int d) {
    // C(m + d, m), exact in integers
    std::size_t r = 1;
    for (int i = 1; i <= m; ++i) r = r * static_cast<std::size_t>(d + i) / static_cast<std::size_t>(i);
    return r;
}

std::vector<double> extend(std::span<const double> vals, const MonomialBasis& basis) {
    if (vals.size() != static_cast<std::size_t>(basis.m)) throw InvalidArgument("extend: wrong number of values");
    std::vector<double> out;
    out.reserve(basis.size());
    for (const auto& e : basis.exps) {
        double v = 1;
        for (std::size_t j = 0; j < e.size(); ++j)
            for (int p = 0; p < e[j]; ++p) v *= vals[j];
        out.push_back(v);
    }
    return out;
}

std::size_t numeric_rank(Matrix a, double tol) {
    const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    // Equilibrate: columns, then rows, to unit max magnitude.
    for (std::size_t j = 0; j < cols; ++j) {
        double mx = 0;
        for (auto& r : a) mx = std::max(mx, std::abs(r[j]));
        if (mx > 0)
            for (auto& r : a) r[j] /= mx;
    }
    for (auto& r : a) {
        double mx = 0;
        for (double v : r) mx = std::max(mx, std::abs(v));
        if (mx > 0)
            for (double& v : r) v /= mx;
    }
    // Complete pivoting: partial pivots do not reveal rank on these Vandermonde-like
    // matrices (independent samples can leave a tiny late pivot).
    std::vector<std::size_t> colp(cols);
    std::iota(colp.begin(), colp.end(), 0);
    std::size_t rank = 0;
    while (rank < rows && rank < cols) {
        std::size_t pi = rank, pj = rank;
        double best = 0;
        for (std::size_t i = rank; i < rows; ++i)
            for (std::size_t j = rank; j < cols; ++j)
                if (std::abs(a[i][colp[j]]) > best) best = std::abs(a[i][colp[j]]), pi = i, pj = j;
        if (best <= tol) break;
        std::swap(a[pi], a[rank]);
        std::swap(colp[pj], colp[rank]);
        const std::size_t c0 = colp[rank];
        for (std::size_t i = rank + 1; i < rows; ++i) {
            double f = a[i][c0] / a[rank][c0];
            if (f == 0) continue;
            for (std::size_t j = rank; j < cols; ++j) a[i][colp[j]] -= f * a[rank][colp[j]];
        }
        ++rank;
    }
    return rank;
}

std::size_t exact_rank(const Matrix& a) {
    const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    std::vector<std::vector<mpq_class>> q(rows, std::vector<mpq_class>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) q[i][j] = a[i][j];
    std::size_t rank = 0;
    for (std::size_t j = 0; j < cols && rank < rows; ++j) {
        std::size_t piv = rank;
        while (piv < rows && sgn(q[piv][j]) == 0) ++piv;
        if (piv == rows) continue;
        std::swap(q[piv], q[rank]);
        for (std::size_t i = rank + 1; i < rows; ++i) {
            if (sgn(q[i][j]) == 0) continue;
            mpq_class f = q[i][j] / q[rank][j];
            for (std::size_t c = j; c < cols; ++c) q[i][c] -= f * q[rank][c];
        }
        ++rank;
    }
    return rank;
}

Dependence dependence_test(const Matrix& vectors, const RankConfig& cfg) {
    const std::size_t k = vectors.size();
    if (k == 0) throw InvalidArgument("dependence test needs at least one vector");
    for (const auto& v : vectors) {
        if (v.size() != k) throw InvalidArgument("dependence test needs k vectors of length k");
        for (double x : v)
            if (!std::isfinite(x)) throw InvalidArgument("dependence test: non-finite entry");
    }
    std::size_t r = cfg.exact ? exact_rank(vectors) : numeric_rank(vectors, cfg.tol);
    return r < k ? Dependence::Dependent : Dependence::Independent;
}

bool test_constant(double a, double b) { return a == b; }

bool test_coupled(std::span<const double> x1, std::span<const double> x2, int d, const RankConfig& cfg) {
    return dependent_samples({x1, x2}, d, cfg);
}

bool test_triple(std::span<const double> x1, std::span<const double> x2, std::span<const double> x3, int d,
                 const RankConfig& cfg) {
    return dependent_samples({x1, x2, x3}, d, cfg);
}

int d_test_desk(int d0) { return std::max(2 * d0 * d0, 4); }

std::size_t partition_samples(int d_test) { return kappa(3, d_test); }

ApproxPartition learn_approx_partition(model::DtSource& src, std::size_t n, const PartitionConfig& cfg) {
    return learn_approx_partition(src.take(partition_samples(cfg.d_test), "partition"), n, cfg);
}

ApproxPartition learn_approx_partition(const std::vector<model::DtInstance>& pool, std::size_t n,
                                       const PartitionConfig& cfg) {
    const std::size_t need = partition_samples(cfg.d_test);
    if (pool.size() < need) throw SampleStarvation("partition");
    for (const auto& inst : pool)
        if (inst.p.size() != n) throw InvalidArgument("instance size differs from n");
    ApproxPartition out;
    // Coordinate c of point i is column 2 i + c.
    std::vector<std::vector<double>> col(2 * n, std::vector<double>(need));
    for (std::size_t s = 0; s < need; ++s)
        for (std::size_t i = 0; i < n; ++i) {
            col[2 * i][s] = pool[s].p[i].x;
            col[2 * i + 1][s] = pool[s].p[i].y;
        }
    std::vector<char> is_const(2 * n);
    for (std::size_t c = 0; c < 2 * n; ++c) is_const[c] = test_constant(col[c][0], col[c][1]);
    std::vector<std::uint32_t> live;  // non-constant points
    for (std::uint32_t i = 0; i < n; ++i) {
        if (is_const[2 * i] && is_const[2 * i + 1]) out.g0.push_back(i);
        else live.push_back(i);
    }
    UnionFind uf(n);
    auto name = [](std::size_t c) { return "p" + std::to_string(c / 2) + (c % 2 ? ".y" : ".x"); };
    std::vector<std::size_t> coords;
    for (auto i : live)
        for (std::size_t c = 2 * i; c <= 2 * i + 1; ++c)
            if (!is_const[c]) coords.push_back(c);

    // Phase one: coupled pairs.
    std::vector<std::vector<char>> coupled(2 * n, std::vector<char>(2 * n, 0));
    for (std::size_t a = 0; a < coords.size(); ++a)
        for (std::size_t b = a + 1; b < coords.size(); ++b) {
            std::size_t ca = coords[a], cb = coords[b];
            bool same_point = ca / 2 == cb / 2;
            if (!same_point && uf.find(ca / 2) == uf.find(cb / 2)) continue;
            ++out.coupled_tests;
            if (!test_coupled(col[ca], col[cb], cfg.d_test, cfg.rank)) continue;
            coupled[ca][cb] = coupled[cb][ca] = 1;
            if (!same_point && uf.unite(ca / 2, cb / 2)) out.log.push_back("coupled " + name(ca) + " " + name(cb));
        }

    // Phase two: an uncoupled pair from one group against one coordinate of another.
    auto current = [&] {
        std::vector<std::vector<std::size_t>> by_root(n);
        for (auto c : coords) by_root[uf.find(c / 2)].push_back(c);
        std::vector<std::vector<std::size_t>> g;
        for (auto& v : by_root)
            if (!v.empty()) g.push_back(v);
        return g;
    };
    bool merged = true;
    while (merged) {
        merged = false;
        auto groups = current();
        for (std::size_t ga = 0; ga < groups.size() && !merged; ++ga) {
            const auto& A = groups[ga];
            std::size_t r1 = SIZE_MAX, r2 = SIZE_MAX;
            for (std::size_t a = 0; a < A.size() && r1 == SIZE_MAX; ++a)
                for (std::size_t b = a + 1; b < A.size(); ++b)
                    if (!coupled[A[a]][A[b]]) {
                        r1 = A[a], r2 = A[b];
                        break;
                    }
            if (r1 == SIZE_MAX) continue;
            for (std::size_t gb = 0; gb < groups.size(); ++gb) {
                if (gb == ga) continue;
                std::size_t r3 = groups[gb].front();
                if (coupled[r1][r3] || coupled[r2][r3]) throw Error("phase two: triple is not pairwise uncoupled");
                ++out.triple_tests;
                if (test_triple(col[r1], col[r2], col[r3], cfg.d_test, cfg.rank)) {
                    uf.unite(r1 / 2, r3 / 2);
                    out.log.push_back("triple " + name(r1) + " " + name(r2) + " " + name(r3));
                    merged = true;
                }
            }
        }
    }
    std::vector<std::vector<std::uint32_t>> by_root(n);
    for (auto i : live) by_root[uf.find(i)].push_back(i);
    for (auto& g : by_root)
        if (!g.empty()) out.groups.push_back(g);
    out.groups = model::canonical(std::move(out.groups));
    return out;
}

bool partition_valid(const ApproxPartition& p, const model::Partition& truth, const std::vector<std::uint32_t>& consts) {
    auto g0 = p.g0;
    auto c = consts;
    std::sort(g0.begin(), g0.end());
    std::sort(c.begin(), c.end());
    if (g0 != c) return false;
    std::size_t n = 0;
    for (auto& g : truth) n += g.size();
    std::vector<std::int64_t> owner(n, -1);
    for (std::size_t k = 0; k < truth.size(); ++k)
        for (auto i : truth[k]) owner[i] = static_cast<std::int64_t>(k);
    std::vector<int> pieces(truth.size(), 0);
    std::vector<char> seen(n, 0);
    for (auto i : g0) seen[i] = 1;
    for (const auto& g : p.groups) {
        if (g.empty()) return false;
        for (auto i : g) {
            if (i >= n || seen[i] || owner[i] != owner[g.front()]) return false;
            seen[i] = 1;
        }
        if (++pieces[static_cast<std::size_t>(owner[g.front()])] >= 3) return false;
    }
    return std::all_of(seen.begin(), seen.end(), [](char s) { return s; });
}

}  // namespace selfimp::algebra

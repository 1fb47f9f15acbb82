#include "selfimp/vlist.hpp"

#include <algorithm>
#include <cmath>

namespace selfimp::vlist {

std::uint32_t VList::interval_of(double v) const {
    return static_cast<std::uint32_t>(std::upper_bound(pivots.begin(), pivots.end(), v) - pivots.begin());
}

VList build_vlist(const std::vector<model::SortInstance>& samples) {
    if (samples.empty()) throw InvalidArgument("build_vlist: no samples");
    const std::size_t n = samples[0].x.size();
    const std::size_t lambda = samples.size();
    std::vector<double> pool;
    pool.reserve(n * lambda);
    for (auto& s : samples) {
        if (s.x.size() != n) throw InvalidArgument("build_vlist: ragged samples");
        pool.insert(pool.end(), s.x.begin(), s.x.end());
    }
    std::sort(pool.begin(), pool.end());
    VList v;
    v.lambda = lambda;
    for (std::size_t k = 1; k < pool.size(); ++k)
        if (pool[k] == pool[k - 1]) ++v.duplicates;
    v.pivots.resize(n);
    for (std::size_t r = 1; r <= n; ++r) v.pivots[r - 1] = pool[lambda * r - 1];
    for (std::size_t r = 1; r < n; ++r)
        if (!(v.pivots[r - 1] < v.pivots[r]))
            throw ModelViolation("build_vlist: tied pooled values collapse two pivots");
    return v;
}

Occupancy occupancy(const VList& v, const std::vector<model::SortInstance>& fresh, double threshold) {
    Occupancy occ;
    occ.threshold = threshold;
    occ.mean.assign(v.n() + 1, 0.0);
    if (fresh.empty()) return occ;
    for (auto& inst : fresh)
        for (double x : inst.x) occ.mean[v.interval_of(x)] += 1.0;
    for (auto& m : occ.mean) m /= static_cast<double>(fresh.size());
    auto it = std::max_element(occ.mean.begin(), occ.mean.end());
    occ.max_mean = *it;
    occ.argmax = static_cast<std::size_t>(it - occ.mean.begin());
    occ.violation = occ.max_mean > threshold;
    return occ;
}

double lambda_theory(std::size_t n) {
    double nn = static_cast<double>(n);
    return std::ceil(nn * nn * std::log(std::max(nn, 2.0)));
}

std::size_t lambda_desk(std::size_t n) {
    double nn = static_cast<double>(n);
    return std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(nn * std::log(std::max(nn, 2.0)))));
}

}  // namespace selfimp::vlist

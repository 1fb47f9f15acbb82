#include "selfimp/encodings.hpp"

#include <map>

namespace selfimp::encodings {

Code b_encode(std::span<const double> z, const vlist::VList& v) {
    Code out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = v.interval_of(z[i]);
    return out;
}

Code pi_encode(std::span<const double> z) {
    Code out(z.size());
    std::map<double, std::uint32_t> seen;
    for (std::size_t i = 0; i < z.size(); ++i) {
        auto [it, inserted] = seen.emplace(z[i], static_cast<std::uint32_t>(i + 1));
        if (!inserted) throw DuplicateValue("pi_encode: tied values");
        out[i] = it == seen.begin() ? 0 : std::prev(it)->second;
    }
    return out;
}

std::vector<std::uint32_t> sort_from_pi(std::span<const std::uint32_t> code) {
    const std::size_t m = code.size();
    // next[0] is the sentinel head; node i + 1 stands for position i.
    std::vector<std::uint32_t> next(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) {
        std::uint32_t pred = code[i];
        if (pred > i) throw InconsistentCode("sort_from_pi: predecessor points forward");
        next[i + 1] = next[pred];
        next[pred] = static_cast<std::uint32_t>(i + 1);
    }
    std::vector<std::uint32_t> order;
    order.reserve(m);
    for (std::uint32_t cur = next[0]; cur != 0; cur = next[cur]) order.push_back(cur - 1);
    return order;
}

std::vector<std::uint32_t> sort_from_pi(std::span<const std::uint32_t> code, std::span<const double> z) {
    if (code.size() != z.size()) throw InvalidArgument("sort_from_pi: code and values differ in length");
    auto order = sort_from_pi(code);
    for (std::size_t k = 1; k < order.size(); ++k)
        if (!(z[order[k - 1]] < z[order[k]])) throw InconsistentCode("sort_from_pi: code does not sort the values");
    return order;
}

}  // namespace selfimp::encodings

#pragma once

#include "selfimp/vlist.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace selfimp::encodings {

using Code = std::vector<std::uint32_t>;

struct InconsistentCode : Error {
    using Error::Error;
};

// Interval index of every value.
Code b_encode(std::span<const double> z, const vlist::VList& v);

// Entry i is 0 when z_i is a prefix minimum, otherwise the 1-based position of the
// largest earlier value below z_i. Throws DuplicateValue on ties.
Code pi_encode(std::span<const double> z);

// Sorted order (0-based positions) rebuilt from a predecessor code by linked-list
// insertion. Throws InconsistentCode when an entry points forward.
std::vector<std::uint32_t> sort_from_pi(std::span<const std::uint32_t> code);

// Same, then checks the order against the values.
std::vector<std::uint32_t> sort_from_pi(std::span<const std::uint32_t> code, std::span<const double> z);

}  // namespace selfimp::encodings

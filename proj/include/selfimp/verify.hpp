#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

// Oracle-equivalence and invariant suites, one per acceptance criterion.
// Full scale runs the sizes the acceptance binary pins; quick scale is a
// reduced version for `selfimp verify`.
namespace selfimp::verify {

struct Result {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

constexpr int kCriteria = 13;

const char* criterion_name(int id);

// Criteria 6, 11 and 13 share the DT end-to-end run, so run them together
// through run_all when possible.
std::vector<Result> run_all(bool full, std::uint64_t seed, const std::vector<int>& only = {},
                            const std::function<void(const Result&)>& on_result = {});

std::string format_line(const Result& r);

}  // namespace selfimp::verify

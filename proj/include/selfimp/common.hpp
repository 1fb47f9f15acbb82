#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace selfimp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input or model assumptions do not hold (ties, degenerate distributions, ...).
struct ModelViolation : Error {
    using Error::Error;
};

struct DuplicateValue : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct SampleStarvation : Error {
    explicit SampleStarvation(std::string stage_name)
        : Error("instance stream exhausted during stage '" + stage_name + "'"), stage(std::move(stage_name)) {}
    std::string stage;
};

struct FormatError : Error {
    using Error::Error;
};

using Rng = std::mt19937_64;

// Deterministic 64-bit mixer, used for hashing and priority generation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Exec { Serial, Parallel };

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

inline bool lex_less(const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n = 0);
    std::size_t find(std::size_t a);
    bool unite(std::size_t a, std::size_t b);
    std::size_t size() const { return parent_.size(); }
    // Groups in order of smallest member; members ascending.
    std::vector<std::vector<std::size_t>> groups();
    std::uint64_t operations() const { return ops_; }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::uint32_t> rank_;
    std::uint64_t ops_ = 0;
};

double log2_safe(double x);

// Plug-in entropy in bits of an empirical distribution given by counts.
double plugin_entropy(const std::vector<std::uint64_t>& counts);

std::string build_id();

}  // namespace selfimp

#pragma once

#include "selfimp/common.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace selfimp::model {

using Partition = std::vector<std::vector<std::uint32_t>>;

// Distribution on the real line.
struct ParamDist {
    enum class Kind { Uniform, TruncGauss, Mixture, Point };
    Kind kind = Kind::Uniform;
    double lo = 0.0, hi = 1.0;       // support (Uniform, TruncGauss)
    double mean = 0.0, sd = 1.0;     // TruncGauss
    double value = 0.0;              // Point
    std::vector<ParamDist> comps;    // Mixture
    std::vector<double> weights;     // Mixture

    static ParamDist uniform(double lo, double hi);
    static ParamDist trunc_gauss(double mean, double sd, double lo, double hi);
    static ParamDist mixture(std::vector<ParamDist> comps, std::vector<double> weights);
    static ParamDist point(double v);

    double sample(Rng& rng) const;
    double support_lo() const;
    double support_hi() const;
    bool degenerate() const;
};

// Distribution on the plane: a mixture of products of line distributions.
struct PlaneDist {
    std::vector<std::pair<ParamDist, ParamDist>> comps;
    std::vector<double> weights;

    static PlaneDist product(ParamDist a, ParamDist b);
    Point sample(Rng& rng) const;
    bool degenerate() const;
};

// Continuous piecewise-monotone curve: monotone cubic Hermite pieces between knots,
// extended linearly outside the knot range.
class Curve {
public:
    Curve() = default;
    Curve(std::vector<double> knots, std::vector<double> values);
    static Curve affine(double slope, double offset, double lo, double hi);

    double operator()(double u) const;
    // Number of interior knots where the direction of monotonicity flips.
    int extrema() const;
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> knots_, values_, slopes_;
};

// Bivariate polynomial; coefficients over exponent pairs (a, b), a + b <= degree,
// in lexicographic order of (a, b).
struct Poly2 {
    int degree = 0;
    std::vector<double> coeffs;

    static std::vector<std::pair<int, int>> exponents(int degree);
    double operator()(const Point& u) const;
    bool is_constant() const;
};

struct SortInstance {
    std::vector<double> x;
    std::uint64_t draw = 0;
};

struct DtInstance {
    std::vector<Point> p;
    std::uint64_t draw = 0;
};

struct SortModel {
    std::size_t n = 0;
    int c0 = 0;
    Partition groups;
    std::vector<ParamDist> params;  // one per group
    std::vector<Curve> curves;      // one per index
    std::vector<std::uint32_t> group_of;

    SortInstance sample(Rng& rng, std::uint64_t draw = 0) const;
};

struct DtModel {
    std::size_t n = 0;
    int d0 = 1;
    Partition groups;
    std::vector<PlaneDist> params;  // one per group
    std::vector<Poly2> hx, hy;      // one per index
    std::vector<std::uint32_t> group_of;

    DtInstance sample(Rng& rng, std::uint64_t draw = 0) const;
    // Indices whose two coordinate polynomials are both constant.
    std::vector<std::uint32_t> const_set() const;
};

struct BuildOptions {
    bool allow_degenerate = false;  // permit point-mass parameter distributions (tests only)
    int intersection_cap = 16;      // same-group curve crossings
};

// Validates and assembles a model. Throws ModelViolation on any broken assumption.
SortModel build_sort_model(Partition groups, std::vector<ParamDist> params, std::vector<Curve> curves, int c0,
                           const BuildOptions& opt = {});
DtModel build_dt_model(Partition groups, std::vector<PlaneDist> params, std::vector<Poly2> hx, std::vector<Poly2> hy,
                       int d0, const BuildOptions& opt = {});

// Random model families used by the harness and the test suites.
struct SortSpec {
    std::string family = "mixed";  // uniform_iid | affine | monotone | wavy | fan | mixed
    std::size_t n = 32;
    int c0 = 1;
    std::size_t max_group = 8;
    std::size_t num_groups = 0;  // fan: number of groups (0 means 1)
    std::string dist = "uniform";  // uniform | gauss | mixture
};

struct DtSpec {
    std::string family = "mixed";  // uniform | poly | mixed | clustered
    std::size_t n = 32;
    int d0 = 2;
    std::size_t max_group = 4;
    double const_fraction = 0.1;
};

SortModel generate_sort_model(const SortSpec& spec, Rng& rng, const BuildOptions& opt = {});
DtModel generate_dt_model(const DtSpec& spec, Rng& rng, const BuildOptions& opt = {});

Partition ground_truth(const SortModel& m);
Partition ground_truth(const DtModel& m);
Partition canonical(Partition p);

// Counts sign changes of the difference of two curves on a dense grid over [lo, hi].
int count_crossings(const Curve& a, const Curve& b, double lo, double hi, int grid = 4096);

// Pull-based instance source; training stages draw from one stream in stage order.
template <class Inst>
class Source {
public:
    virtual ~Source() = default;
    virtual std::optional<Inst> next() = 0;
    Inst take(const std::string& stage) {
        auto v = next();
        if (!v) throw SampleStarvation(stage);
        return std::move(*v);
    }
    std::vector<Inst> take(std::size_t count, const std::string& stage) {
        std::vector<Inst> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) out.push_back(take(stage));
        return out;
    }
};

template <class Model, class Inst>
class ModelSource : public Source<Inst> {
public:
    ModelSource(const Model& m, std::uint64_t seed, std::uint64_t limit = UINT64_MAX)
        : model_(m), rng_(seed), limit_(limit) {}
    std::optional<Inst> next() override {
        if (draw_ >= limit_) return std::nullopt;
        return model_.sample(rng_, draw_++);
    }

private:
    const Model& model_;
    Rng rng_;
    std::uint64_t draw_ = 0;
    std::uint64_t limit_;
};

template <class Inst>
class VectorSource : public Source<Inst> {
public:
    explicit VectorSource(std::vector<Inst> data) : data_(std::move(data)) {}
    std::optional<Inst> next() override {
        if (pos_ >= data_.size()) return std::nullopt;
        return data_[pos_++];
    }

private:
    std::vector<Inst> data_;
    std::size_t pos_ = 0;
};

using SortSource = Source<SortInstance>;
using DtSource = Source<DtInstance>;
using SortModelSource = ModelSource<SortModel, SortInstance>;
using DtModelSource = ModelSource<DtModel, DtInstance>;

}  // namespace selfimp::model

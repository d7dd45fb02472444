// The IFS layer: per-(state, symbol) contractions g, their inverses T, cylinder boxes,
// projection, Birkhoff sums, fixed points and distortion bookkeeping.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rstp/environment.hpp"
#include "rstp/error.hpp"
#include "rstp/precision.hpp"
#include "rstp/subshift.hpp"

namespace rstp {

struct Box {
    Point lo{};
    Point hi{};
};

// g(x) = offset + ratio * R(rotation) * x in d = 2. In d = 1 an optional perturbation
// delta replaces x by lo + L * h((x - lo) / L), h(t) = expm1(delta t) / expm1(delta),
// which keeps the image interval and makes log g' vary by |delta| across U.
struct MapSpec {
    HighReal ratio = HighReal(1) / 3;
    HighPoint offset{};
    double rotation_degrees = 0.0;
    double perturbation = 0.0;
};

class MapFamily {
public:
    // per_state[state][symbol - 1]. Validates contraction into U, the open-set condition
    // and contraction on average; throws InvalidModel or NotContracting.
    MapFamily(int dim, HighPoint domain_lo, HighPoint domain_hi, std::vector<std::vector<MapSpec>> per_state,
              const EnvironmentModel& model);

    // [0,1] with ratios r_s and offsets c_s for a single-state model
    static MapFamily interval(const std::vector<std::pair<HighReal, HighReal>>& ratio_offset,
                              const EnvironmentModel& model);

    int dim() const noexcept { return dim_; }
    const Box& domain() const noexcept { return domain_; }
    const HighPoint& domain_lo_high() const noexcept { return lo_; }
    const HighPoint& domain_hi_high() const noexcept { return hi_; }
    double domain_diameter() const noexcept { return domain_diameter_; }
    Point anchor() const noexcept { return to_double(anchor_); }
    const HighPoint& anchor_high() const noexcept { return anchor_; }
    bool perturbed() const noexcept { return perturbed_; }
    std::size_t states() const noexcept { return maps_.size(); }
    int symbols(int state) const { return static_cast<int>(maps_.at(static_cast<std::size_t>(state)).size()); }
    const MapSpec& spec(int state, int symbol) const { return entry(state, symbol).spec; }
    double ratio(int state, int symbol) const { return entry(state, symbol).ratio; }

    template <class T>
    PointT<T> apply(int state, int symbol, const PointT<T>& x) const;
    template <class T>
    PointT<T> invert(int state, int symbol, const PointT<T>& y) const;

    // psi(state, s, y) = log |g'| at the preimage of the image point y
    double log_derivative(int state, int symbol, const Point& y) const;
    // inf and sup of psi over U
    std::pair<double, double> log_derivative_bounds(int state, int symbol) const;

    template <class T>
    std::vector<PointT<T>> domain_corners() const;

    template <class T>
    bool in_domain(const PointT<T>& x, double tol = 1e-12) const;

private:
    struct Entry {
        MapSpec spec;
        double ratio = 0.0;
        // linear part ratio * R, row-major, in both precisions
        std::array<double, 4> lin{};
        std::array<HighReal, 4> lin_high{};
        Point offset{};
        double delta = 0.0;
        double log_ratio = 0.0;
    };
    const Entry& entry(int state, int symbol) const;

    template <class T>
    static T h_forward(const T& t, double delta);
    template <class T>
    static T h_inverse(const T& u, double delta);

    int dim_ = 1;
    HighPoint lo_{}, hi_{}, anchor_{};
    Box domain_{};
    double domain_diameter_ = 1.0;
    bool perturbed_ = false;
    std::vector<std::vector<Entry>> maps_;
};

struct CylinderBox {
    Word word;
    Box box;
    double diameter = 0.0;
    Point anchor{};
};

struct DistortionBudget {
    // epsilon[n - 1] is the budget at depth n
    std::vector<double> epsilon;
    double at(std::size_t n) const { return n == 0 || epsilon.empty() ? 0.0 : epsilon[std::min(n, epsilon.size()) - 1]; }
};

class Potential;

// g_omega^v(x), innermost map applied first.
template <class T>
PointT<T> compose(const OmegaPath& path, const MapFamily& maps, const Word& word, PointT<T> x)
{
    for (std::size_t i = word.size(); i-- > 0;)
        x = maps.apply<T>(path.state(word.start_offset + i), word.symbols[i], x);
    return x;
}

// T_omega^v(y), outermost inverse applied first.
template <class T>
PointT<T> invert_along(const OmegaPath& path, const MapFamily& maps, const Word& word, PointT<T> y)
{
    for (std::size_t i = 0; i < word.size(); ++i)
        y = maps.invert<T>(path.state(word.start_offset + i), word.symbols[i], y);
    return y;
}

// y in U_omega^v: every intermediate preimage stays in U.
template <class T>
bool in_cylinder(const OmegaPath& path, const MapFamily& maps, const Word& word, PointT<T> y, double tol = 1e-9)
{
    if (!maps.in_domain<T>(y, tol)) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
        y = maps.invert<T>(path.state(word.start_offset + i), word.symbols[i], y);
        if (!maps.in_domain<T>(y, tol)) return false;
    }
    return true;
}

// Images of the corners of U under g^v. In d = 1 the maps are increasing, in d = 2 affine,
// so the cylinder is the hull of these points.
template <class T>
std::vector<PointT<T>> cylinder_corners(const OmegaPath& path, const MapFamily& maps, const Word& word)
{
    auto corners = maps.domain_corners<T>();
    for (auto& c : corners) c = compose<T>(path, maps, word, c);
    return corners;
}

template <class T>
double cylinder_diameter(const std::vector<PointT<T>>& corners, int dim)
{
    double d = 0.0;
    for (std::size_t i = 0; i < corners.size(); ++i)
        for (std::size_t j = i + 1; j < corners.size(); ++j) d = std::max(d, distance<T>(corners[i], corners[j], dim));
    return d;
}

CylinderBox cylinder_box(const OmegaPath& path, const MapFamily& maps, const Word& word);

// g^{v_0 ... v_{depth-1}}(x0) for the anchor x0 (centre of U).
Point project_point(const OmegaPath& path, const MapFamily& maps, const Word& prefix, std::size_t depth);

double birkhoff_sum(const OmegaPath& path, const MapFamily& maps, const Potential& potential, const Word& word,
                    const Point& x);

// Same sum along a high-precision inverse orbit (no membership check).
double birkhoff_sum_high(const OmegaPath& path, const MapFamily& maps, const Potential& potential, const Word& word,
                         const HighPoint& x);

// Sum at the image point g^v(base), i.e. along the points g^{v_i ... v_{n-1}}(base).
double birkhoff_sum_at_image(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                             const Word& word, const Point& base);

// Same with base = x0, the cylinder anchor.
double birkhoff_sum_at_anchor(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                              const Word& word);

Point fixed_point(const OmegaPath& path, const MapFamily& maps, const Word& word);
HighPoint fixed_point_high(const OmegaPath& path, const MapFamily& maps, const Word& word);

// epsilon(n): max over sampled depth-n cylinders of |log(diam / |U|) - S_n psi(anchor)| and of the
// spread of S_n psi across the cylinder, divided by n; then made nonincreasing. Zero for similarities.
DistortionBudget calibrate_distortion(const OmegaPath& path, const MapFamily& maps, std::size_t max_depth,
                                      std::uint64_t seed = 0, std::size_t samples_per_depth = 2048);

// ------------------------------------------------------------------------------------------

template <class T>
T MapFamily::h_forward(const T& t, double delta)
{
    if (delta == 0.0) return t;
    return expm1_of(T(delta * t)) / expm1_of(T(delta));
}

template <class T>
T MapFamily::h_inverse(const T& u, double delta)
{
    if (delta == 0.0) return u;
    return log1p_of(T(u * expm1_of(T(delta)))) / T(delta);
}

template <class T>
PointT<T> MapFamily::apply(int state, int symbol, const PointT<T>& x) const
{
    const Entry& e = entry(state, symbol);
    const auto& lin = [&]() -> const auto& {
        if constexpr (std::is_same_v<T, double>) return e.lin;
        else return e.lin_high;
    }();
    PointT<T> off;
    if constexpr (std::is_same_v<T, double>) off = e.offset;
    else off = e.spec.offset;
    if (dim_ == 1) {
        T u = x[0];
        if (e.delta != 0.0) {
            const T lo = T(lo_[0]);
            const T len = T(hi_[0] - lo_[0]);
            u = lo + len * h_forward<T>(T((x[0] - lo) / len), e.delta);
        }
        return {T(off[0] + lin[0] * u), T(0)};
    }
    return {T(off[0] + lin[0] * x[0] + lin[1] * x[1]), T(off[1] + lin[2] * x[0] + lin[3] * x[1])};
}

template <class T>
PointT<T> MapFamily::invert(int state, int symbol, const PointT<T>& y) const
{
    const Entry& e = entry(state, symbol);
    PointT<T> off;
    if constexpr (std::is_same_v<T, double>) off = e.offset;
    else off = e.spec.offset;
    if (dim_ == 1) {
        T u;
        if constexpr (std::is_same_v<T, double>) u = (y[0] - off[0]) / e.lin[0];
        else u = (y[0] - off[0]) / e.lin_high[0];
        if (e.delta != 0.0) {
            const T lo = T(lo_[0]);
            const T len = T(hi_[0] - lo_[0]);
            u = lo + len * h_inverse<T>(T((u - lo) / len), e.delta);
        }
        return {u, T(0)};
    }
    // (ratio R)^{-1} = R^T / ratio
    const T dx = y[0] - off[0];
    const T dy = y[1] - off[1];
    if constexpr (std::is_same_v<T, double>) {
        const double r2 = e.ratio * e.ratio;
        return {(e.lin[0] * dx + e.lin[2] * dy) / r2, (e.lin[1] * dx + e.lin[3] * dy) / r2};
    } else {
        const HighReal r2 = e.spec.ratio * e.spec.ratio;
        return {T((e.lin_high[0] * dx + e.lin_high[2] * dy) / r2), T((e.lin_high[1] * dx + e.lin_high[3] * dy) / r2)};
    }
}

template <class T>
std::vector<PointT<T>> MapFamily::domain_corners() const
{
    if (dim_ == 1) return {PointT<T>{T(lo_[0]), T(0)}, PointT<T>{T(hi_[0]), T(0)}};
    return {PointT<T>{T(lo_[0]), T(lo_[1])}, PointT<T>{T(hi_[0]), T(lo_[1])}, PointT<T>{T(hi_[0]), T(hi_[1])},
            PointT<T>{T(lo_[0]), T(hi_[1])}};
}

template <class T>
bool MapFamily::in_domain(const PointT<T>& x, double tol) const
{
    const double slack = tol * domain_diameter_;
    for (int i = 0; i < dim_; ++i) {
        if (to_double(T(x[i] - T(lo_[i]))) < -slack) return false;
        if (to_double(T(T(hi_[i]) - x[i])) < -slack) return false;
    }
    return true;
}

} // namespace rstp

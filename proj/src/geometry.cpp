#include "rstp/geometry.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/constants/constants.hpp>

#include "rstp/potential.hpp"

namespace rstp {

namespace {

// exact values at multiples of 90 degrees
std::pair<HighReal, HighReal> cos_sin(double degrees)
{
    const double q = degrees / 90.0;
    if (q == std::round(q)) {
        const long k = ((static_cast<long>(std::llround(q)) % 4) + 4) % 4;
        static const int c[4] = {1, 0, -1, 0};
        static const int s[4] = {0, 1, 0, -1};
        return {HighReal(c[k]), HighReal(s[k])};
    }
    const HighReal rad = HighReal(degrees) * boost::math::constants::pi<HighReal>() / 180;
    return {cos(rad), sin(rad)};
}

struct Poly {
    std::vector<Point> v;
};

// interior overlap of two convex polygons along the separating axes of both
bool interiors_overlap(const Poly& a, const Poly& b, double tol)
{
    for (const Poly* p : {&a, &b}) {
        const std::size_t n = p->v.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& p0 = p->v[i];
            const Point& p1 = p->v[(i + 1) % n];
            const double nx = -(p1[1] - p0[1]);
            const double ny = p1[0] - p0[0];
            const double len = std::hypot(nx, ny);
            if (len == 0.0) continue;
            double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
            for (const auto& q : a.v) {
                const double t = (q[0] * nx + q[1] * ny) / len;
                amin = std::min(amin, t);
                amax = std::max(amax, t);
            }
            for (const auto& q : b.v) {
                const double t = (q[0] * nx + q[1] * ny) / len;
                bmin = std::min(bmin, t);
                bmax = std::max(bmax, t);
            }
            if (std::min(amax, bmax) - std::max(amin, bmin) <= tol) return false;
        }
    }
    return true;
}

} // namespace

MapFamily::MapFamily(int dim, HighPoint domain_lo, HighPoint domain_hi, std::vector<std::vector<MapSpec>> per_state,
                     const EnvironmentModel& model)
    : dim_(dim), lo_(domain_lo), hi_(domain_hi)
{
    if (dim_ != 1 && dim_ != 2) throw Error(ErrorKind::InvalidModel, "dimension must be 1 or 2");
    if (dim_ == 1) {
        lo_[1] = 0;
        hi_[1] = 0;
    }
    double diam2 = 0.0;
    for (int i = 0; i < dim_; ++i) {
        if (!(lo_[i] < hi_[i])) throw Error(ErrorKind::InvalidModel, "domain must have lo < hi in every coordinate");
        const double w = to_double(HighReal(hi_[i] - lo_[i]));
        diam2 += w * w;
        anchor_[i] = (lo_[i] + hi_[i]) / 2;
    }
    domain_diameter_ = std::sqrt(diam2);
    domain_ = {to_double(lo_), to_double(hi_)};

    if (per_state.size() != model.size())
        throw Error(ErrorKind::InvalidModel, "maps are given for " + std::to_string(per_state.size()) +
                                                 " states, the environment has " + std::to_string(model.size()));
    maps_.resize(per_state.size());
    for (std::size_t st = 0; st < per_state.size(); ++st) {
        const int l = model.state(static_cast<int>(st)).l;
        if (static_cast<int>(per_state[st].size()) != l)
            throw Error(ErrorKind::InvalidModel, "state " + std::to_string(st) + ": expected " + std::to_string(l) +
                                                     " maps, got " + std::to_string(per_state[st].size()));
        for (std::size_t s = 0; s < per_state[st].size(); ++s) {
            const MapSpec& spec = per_state[st][s];
            const std::string where = "state " + std::to_string(st) + " symbol " + std::to_string(s + 1);
            if (!(spec.ratio > 0)) throw Error(ErrorKind::InvalidModel, where + ": ratio must be positive");
            if (!std::isfinite(spec.rotation_degrees) || !std::isfinite(spec.perturbation))
                throw Error(ErrorKind::InvalidModel, where + ": non-finite rotation or perturbation");
            if (dim_ == 1 && spec.rotation_degrees != 0.0)
                throw Error(ErrorKind::InvalidModel, where + ": rotation needs dimension 2");
            if (dim_ == 2 && spec.perturbation != 0.0)
                throw Error(ErrorKind::InvalidModel, where + ": perturbation is supported in dimension 1 only");
            Entry e;
            e.spec = spec;
            if (dim_ == 1) e.spec.offset[1] = 0;
            e.ratio = to_double(spec.ratio);
            e.log_ratio = to_double(HighReal(log(spec.ratio)));
            e.delta = spec.perturbation;
            if (dim_ == 1) {
                e.lin_high = {spec.ratio, HighReal(0), HighReal(0), spec.ratio};
            } else {
                const auto [c, sn] = cos_sin(spec.rotation_degrees);
                e.lin_high = {HighReal(spec.ratio * c), HighReal(-spec.ratio * sn), HighReal(spec.ratio * sn),
                              HighReal(spec.ratio * c)};
            }
            for (int k = 0; k < 4; ++k) e.lin[static_cast<std::size_t>(k)] = to_double(e.lin_high[static_cast<std::size_t>(k)]);
            e.offset = to_double(e.spec.offset);
            perturbed_ = perturbed_ || e.delta != 0.0;
            maps_[st].push_back(std::move(e));
        }
    }

    // every image inside U, images at one state with disjoint interiors
    const double tol = 1e-12 * domain_diameter_;
    for (std::size_t st = 0; st < maps_.size(); ++st) {
        std::vector<Poly> images;
        for (std::size_t s = 0; s < maps_[st].size(); ++s) {
            Poly poly;
            for (const auto& c : domain_corners<HighReal>()) {
                const HighPoint y = apply<HighReal>(static_cast<int>(st), static_cast<int>(s + 1), c);
                if (!in_domain<HighReal>(y, 1e-12))
                    throw Error(ErrorKind::InvalidModel, "state " + std::to_string(st) + " symbol " +
                                                             std::to_string(s + 1) + ": image leaves the domain");
                poly.v.push_back(to_double(y));
            }
            if (dim_ == 1) {
                // degenerate segments: thicken in y so the same axis test applies
                poly.v = {{poly.v[0][0], 0.0}, {poly.v[1][0], 0.0}, {poly.v[1][0], 1.0}, {poly.v[0][0], 1.0}};
            }
            images.push_back(std::move(poly));
        }
        for (std::size_t a = 0; a < images.size(); ++a)
            for (std::size_t b = a + 1; b < images.size(); ++b)
                if (interiors_overlap(images[a], images[b], tol))
                    throw Error(ErrorKind::InvalidModel, "state " + std::to_string(st) + ": images of symbols " +
                                                             std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                                                             " overlap");
    }

    const auto pi = stationary_frequencies(model);
    double avg = 0.0;
    for (std::size_t st = 0; st < maps_.size(); ++st) {
        double worst = -1e300;
        for (int s = 1; s <= symbols(static_cast<int>(st)); ++s)
            worst = std::max(worst, log_derivative_bounds(static_cast<int>(st), s).second);
        avg += pi[st] * worst;
    }
    if (!(avg < 0.0)) {
        std::ostringstream os;
        os << "average of max sup log|g'| is " << avg << ", must be negative";
        throw Error(ErrorKind::NotContracting, os.str());
    }
}

MapFamily MapFamily::interval(const std::vector<std::pair<HighReal, HighReal>>& ratio_offset,
                              const EnvironmentModel& model)
{
    std::vector<MapSpec> row;
    for (const auto& [r, c] : ratio_offset) {
        MapSpec m;
        m.ratio = r;
        m.offset = {c, HighReal(0)};
        row.push_back(m);
    }
    std::vector<std::vector<MapSpec>> all(model.size(), row);
    return MapFamily(1, {HighReal(0), HighReal(0)}, {HighReal(1), HighReal(0)}, std::move(all), model);
}

const MapFamily::Entry& MapFamily::entry(int state, int symbol) const
{
    if (state < 0 || static_cast<std::size_t>(state) >= maps_.size())
        throw Error(ErrorKind::OutOfRange, "state " + std::to_string(state) + " out of range");
    const auto& row = maps_[static_cast<std::size_t>(state)];
    if (symbol < 1 || static_cast<std::size_t>(symbol) > row.size())
        throw Error(ErrorKind::OutOfRange,
                    "symbol " + std::to_string(symbol) + " out of range at state " + std::to_string(state));
    return row[static_cast<std::size_t>(symbol - 1)];
}

double MapFamily::log_derivative(int state, int symbol, const Point& y) const
{
    const Entry& e = entry(state, symbol);
    if (e.delta == 0.0) return e.log_ratio;
    const Point x = invert<double>(state, symbol, y);
    const double lo = domain_.lo[0];
    const double len = domain_.hi[0] - lo;
    const double t = std::clamp((x[0] - lo) / len, 0.0, 1.0);
    return e.log_ratio + std::log(e.delta / std::expm1(e.delta)) + e.delta * t;
}

std::pair<double, double> MapFamily::log_derivative_bounds(int state, int symbol) const
{
    const Entry& e = entry(state, symbol);
    if (e.delta == 0.0) return {e.log_ratio, e.log_ratio};
    const double c = e.log_ratio + std::log(e.delta / std::expm1(e.delta));
    return {c + std::min(0.0, e.delta), c + std::max(0.0, e.delta)};
}

CylinderBox cylinder_box(const OmegaPath& path, const MapFamily& maps, const Word& word)
{
    if (!is_admissible(path, word)) throw Error(ErrorKind::NotAdmissible, "word " + to_string(word) + " is not admissible");
    const auto corners = cylinder_corners<double>(path, maps, word);
    CylinderBox out;
    out.word = word;
    out.box.lo = {1e300, maps.dim() == 1 ? 0.0 : 1e300};
    out.box.hi = {-1e300, maps.dim() == 1 ? 0.0 : -1e300};
    for (const auto& c : corners)
        for (int i = 0; i < maps.dim(); ++i) {
            out.box.lo[static_cast<std::size_t>(i)] = std::min(out.box.lo[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(i)]);
            out.box.hi[static_cast<std::size_t>(i)] = std::max(out.box.hi[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(i)]);
        }
    // the difference of nearby corners cancels badly in double precision
    out.diameter = cylinder_diameter<HighReal>(cylinder_corners<HighReal>(path, maps, word), maps.dim());
    out.anchor = compose<double>(path, maps, word, maps.anchor());
    return out;
}

Point project_point(const OmegaPath& path, const MapFamily& maps, const Word& prefix, std::size_t depth)
{
    if (prefix.size() < depth)
        throw Error(ErrorKind::NotAdmissible, "prefix shorter than the requested depth");
    const Word w = prefix.prefix(depth);
    if (!is_admissible(path, w)) throw Error(ErrorKind::NotAdmissible, "prefix " + to_string(w) + " is not admissible");
    return compose<double>(path, maps, w, maps.anchor());
}

double birkhoff_sum(const OmegaPath& path, const MapFamily& maps, const Potential& potential, const Word& word,
                    const Point& x)
{
    if (!in_cylinder<double>(path, maps, word, x))
        throw Error(ErrorKind::PointOutsideCylinder, "point is not in the cylinder of " + to_string(word));
    double sum = 0.0;
    Point y = x;
    for (std::size_t i = 0; i < word.size(); ++i) {
        const int st = path.state(word.start_offset + i);
        sum += potential.evaluate(maps, st, word.symbols[i], y);
        y = maps.invert<double>(st, word.symbols[i], y);
    }
    return sum;
}

double birkhoff_sum_high(const OmegaPath& path, const MapFamily& maps, const Potential& potential, const Word& word,
                         const HighPoint& x)
{
    double sum = 0.0;
    HighPoint y = x;
    for (std::size_t i = 0; i < word.size(); ++i) {
        const int st = path.state(word.start_offset + i);
        if (potential.symbolwise(maps)) {
            sum += potential.symbol_value(maps, st, word.symbols[i]);
            continue;
        }
        sum += potential.evaluate(maps, st, word.symbols[i], to_double(y));
        y = maps.invert<HighReal>(st, word.symbols[i], y);
    }
    return sum;
}

double birkhoff_sum_at_anchor(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                              const Word& word)
{
    return birkhoff_sum_at_image(path, maps, potential, word, maps.anchor());
}

double birkhoff_sum_at_image(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                             const Word& word, const Point& base)
{
    double sum = 0.0;
    if (potential.symbolwise(maps)) {
        for (std::size_t i = 0; i < word.size(); ++i)
            sum += potential.symbol_value(maps, path.state(word.start_offset + i), word.symbols[i]);
        return sum;
    }
    // walk outward: after step i the point is g^{v_i ... v_{n-1}}(base)
    Point x = base;
    for (std::size_t i = word.size(); i-- > 0;) {
        const int st = path.state(word.start_offset + i);
        x = maps.apply<double>(st, word.symbols[i], x);
        sum += potential.evaluate(maps, st, word.symbols[i], x);
    }
    return sum;
}

namespace {

template <class T>
PointT<T> fixed_point_impl(const OmegaPath& path, const MapFamily& maps, const Word& word, double tol)
{
    if (word.empty()) throw Error(ErrorKind::NotContracting, "the empty word is the identity");
    if (!is_admissible(path, word)) throw Error(ErrorKind::NotAdmissible, "word " + to_string(word) + " is not admissible");
    double log_rate = 0.0;
    for (std::size_t i = 0; i < word.size(); ++i)
        log_rate += maps.log_derivative_bounds(path.state(word.start_offset + i), word.symbols[i]).second;
    if (!(log_rate < 0.0))
        throw Error(ErrorKind::NotContracting, "composite map of " + to_string(word) + " is not a strict contraction");

    if (!maps.perturbed()) {
        // g^v(x) = M x + b, found from the images of 0, e1, e2
        const PointT<T> zero{T(0), T(0)};
        const PointT<T> b = compose<T>(path, maps, word, zero);
        const PointT<T> i1 = compose<T>(path, maps, word, PointT<T>{T(1), T(0)});
        const PointT<T> i2 = compose<T>(path, maps, word, PointT<T>{T(0), T(1)});
        const T m00 = i1[0] - b[0], m10 = i1[1] - b[1];
        const T m01 = i2[0] - b[0], m11 = i2[1] - b[1];
        if (maps.dim() == 1) return {T(b[0] / (T(1) - m00)), T(0)};
        // (I - M) x = b
        const T a00 = T(1) - m00, a01 = -m01, a10 = -m10, a11 = T(1) - m11;
        const T det = a00 * a11 - a01 * a10;
        return {T((a11 * b[0] - a01 * b[1]) / det), T((a00 * b[1] - a10 * b[0]) / det)};
    }
    PointT<T> x = lift<T>(maps.anchor());
    for (int it = 0; it < 100000; ++it) {
        const PointT<T> y = compose<T>(path, maps, word, x);
        const double step = distance<T>(x, y, maps.dim());
        x = y;
        if (step <= tol) {
            const PointT<T> z = compose<T>(path, maps, word, x);
            if (distance<T>(x, z, maps.dim()) <= tol) return z;
        }
    }
    throw Error(ErrorKind::NotContracting, "fixed point iteration did not settle for " + to_string(word));
}

} // namespace

Point fixed_point(const OmegaPath& path, const MapFamily& maps, const Word& word)
{
    return fixed_point_impl<double>(path, maps, word, 1e-12);
}

HighPoint fixed_point_high(const OmegaPath& path, const MapFamily& maps, const Word& word)
{
    return fixed_point_impl<HighReal>(path, maps, word, 1e-60);
}

DistortionBudget calibrate_distortion(const OmegaPath& path, const MapFamily& maps, std::size_t max_depth,
                                      std::uint64_t seed, std::size_t samples_per_depth)
{
    if (max_depth > path.horizon())
        throw Error(ErrorKind::OutOfHorizon, "calibration depth exceeds the horizon");
    DistortionBudget budget;
    budget.epsilon.assign(max_depth, 0.0);
    if (!maps.perturbed()) return budget;

    const Potential psi = Potential::psi();
    std::mt19937_64 gen(seed);
    // perturbation is one-dimensional: a grid of base points on [lo, hi]
    const auto& dom = maps.domain();
    std::vector<Point> grid;
    for (int j = 0; j <= 16; ++j) grid.push_back({dom.lo[0] + (dom.hi[0] - dom.lo[0]) * j / 16.0, 0.0});
    // both the diameter gap at the anchor and the spread of S_n psi across the cylinder
    auto measure = [&](const Word& w) {
        const auto corners = cylinder_corners<HighReal>(path, maps, w);
        const double diam = cylinder_diameter<HighReal>(corners, maps.dim());
        const double s = birkhoff_sum_at_anchor(path, maps, psi, w);
        double lo = s, hi = s;
        for (const auto& b : grid) {
            const double v = birkhoff_sum_at_image(path, maps, psi, w, b);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return std::max(std::abs(std::log(diam / maps.domain_diameter()) - s), hi - lo) /
               static_cast<double>(w.size());
    };
    for (std::size_t n = 1; n <= max_depth; ++n) {
        double worst = 0.0;
        if (count_cylinders(path, 0, n) <= samples_per_depth) {
            for_each_cylinder(path, 0, n, [&](const Word& w) { worst = std::max(worst, measure(w)); });
        } else {
            for (std::size_t k = 0; k < samples_per_depth; ++k) {
                // uniform random walk through the admissible graph
                Word w;
                for (std::size_t i = 0; i < n; ++i) {
                    std::vector<int> allowed;
                    for (int s = 1; s <= path.alphabet(i); ++s)
                        if (i == 0 || path.transition(i - 1).at(w.back() - 1, s - 1)) allowed.push_back(s);
                    w.symbols.push_back(allowed[static_cast<std::size_t>(gen() % allowed.size())]);
                }
                worst = std::max(worst, measure(w));
            }
        }
        budget.epsilon[n - 1] = worst;
    }
    for (std::size_t n = max_depth; n-- > 1;)
        budget.epsilon[n - 1] = std::max(budget.epsilon[n - 1], budget.epsilon[n]);
    return budget;
}

} // namespace rstp

#include "rstp/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rstp/parallel.hpp"

namespace rstp {

namespace {

// grid snapping slack, relative to the scale
constexpr double kGridSlack = 1e-9;

void check_scales(const std::vector<double>& scales)
{
    if (scales.empty()) throw Error(ErrorKind::EmptyInput, "no scales");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0)) throw Error(ErrorKind::OutOfRange, "scales must be positive");
        if (i > 0 && !(scales[i] < scales[i - 1])) throw Error(ErrorKind::OutOfRange, "scales must strictly decrease");
    }
}

template <class Fill>
BoxCountResult count_with(std::size_t inputs, const std::vector<double>& scales, const BoxCountOptions& opts,
                          Fill&& fill)
{
    if (inputs == 0) throw Error(ErrorKind::EmptyInput, "nothing to count");
    check_scales(scales);
    BoxCountResult r;
    r.scales = scales;
    r.counts.assign(scales.size(), 0);
    parallel_for(scales.size(), opts.threads, [&](std::size_t i) {
        std::set<std::pair<long long, long long>> occupied;
        fill(scales[i], occupied);
        r.counts[i] = occupied.size();
    });
    if (opts.window) {
        r.window = *opts.window;
        if (r.window.second >= scales.size() || r.window.first > r.window.second)
            throw Error(ErrorKind::OutOfRange, "fit window outside the scale list");
    } else {
        if (scales.size() < 5) throw Error(ErrorKind::DegenerateFit, "fewer than 3 scales left after trimming");
        r.window = {1, scales.size() - 2};
    }
    fit_slope(r);
    return r;
}

} // namespace

void fit_slope(BoxCountResult& r)
{
    const auto [a, b] = r.window;
    const std::size_t m = b - a + 1;
    if (b < a || m < 3) throw Error(ErrorKind::DegenerateFit, "fewer than 3 points in the fit window");
    double sx = 0, sy = 0;
    for (std::size_t i = a; i <= b; ++i) {
        sx += -std::log(r.scales[i]);
        sy += std::log(static_cast<double>(r.counts[i]));
    }
    const double mx = sx / static_cast<double>(m), my = sy / static_cast<double>(m);
    double sxx = 0, sxy = 0;
    for (std::size_t i = a; i <= b; ++i) {
        const double dx = -std::log(r.scales[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(static_cast<double>(r.counts[i])) - my);
    }
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double rss = 0;
    for (std::size_t i = a; i <= b; ++i) {
        const double e = std::log(static_cast<double>(r.counts[i])) - (r.intercept - r.slope * std::log(r.scales[i]));
        rss += e * e;
    }
    r.slope_stderr = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
}

BoxCountResult box_count(const std::vector<Point>& points, int dim, const std::vector<double>& scales,
                         const BoxCountOptions& opts)
{
    return count_with(points.size(), scales, opts, [&](double s, auto& occupied) {
        for (const auto& p : points) {
            const auto x = static_cast<long long>(std::floor((p[0] - opts.origin[0]) / s + kGridSlack));
            const auto y = dim == 2 ? static_cast<long long>(std::floor((p[1] - opts.origin[1]) / s + kGridSlack)) : 0;
            occupied.insert({x, y});
        }
    });
}

BoxCountResult box_count(const std::vector<Box>& cells, int dim, const std::vector<double>& scales,
                         const BoxCountOptions& opts)
{
    return count_with(cells.size(), scales, opts, [&](double s, auto& occupied) {
        auto range = [&](double lo, double hi, double o) {
            const auto a = static_cast<long long>(std::floor((lo - o) / s + kGridSlack));
            const auto b = static_cast<long long>(std::ceil((hi - o) / s - kGridSlack)) - 1;
            return std::make_pair(a, std::max(a, b));
        };
        for (const auto& c : cells) {
            const auto [x0, x1] = range(c.lo[0], c.hi[0], opts.origin[0]);
            const auto [y0, y1] = dim == 2 ? range(c.lo[1], c.hi[1], opts.origin[1]) : std::make_pair(0LL, 0LL);
            for (long long x = x0; x <= x1; ++x)
                for (long long y = y0; y <= y1; ++y) occupied.insert({x, y});
        }
    });
}

std::vector<double> geometric_scales(double base, int k_lo, int k_hi)
{
    std::vector<double> out;
    for (int k = k_lo; k <= k_hi; ++k) out.push_back(std::pow(base, -k));
    return out;
}

DimensionReport dimension_report(const OmegaPath& path, const MapFamily& maps, const Potential& psi,
                                 const Potential& phi, const TargetSpec& targets, std::size_t depth,
                                 const std::vector<double>& scales, const DimensionOptions& opts)
{
    DimensionReport rep;
    const std::pair<double, double> bracket{0.0, static_cast<double>(maps.dim()) + 0.5};
    rep.t0 = solve_pressure_root(path, maps, psi, phi, RootMode::BowenRuelle, bracket, opts.pressure_n, opts.partition)
                 .root;
    rep.q0 =
        solve_pressure_root(path, maps, psi, phi, RootMode::Target, bracket, opts.pressure_n, opts.partition).root;

    const auto words = enumerate_cylinders(path, 0, depth, opts.cover.cap);
    std::vector<Point> points(words.size());
    parallel_for(words.size(), opts.cover.threads,
                 [&](std::size_t i) { points[i] = project_point(path, maps, words[i], depth); });
    rep.attractor = box_count(points, maps.dim(), scales, opts.boxes);

    const auto cover = build_target_cover(path, maps, phi, targets, depth, depth, opts.cover);
    std::vector<Box> boxes;
    boxes.reserve(cover.size());
    for (const auto& c : cover) boxes.push_back(c.box);
    rep.target = box_count(boxes, maps.dim(), scales, opts.boxes);

    rep.attractor_slope = rep.attractor.slope;
    rep.target_slope = rep.target.slope;
    rep.attractor_gap = rep.attractor_slope - rep.t0;
    rep.target_gap = rep.target_slope - rep.q0;
    return rep;
}

} // namespace rstp

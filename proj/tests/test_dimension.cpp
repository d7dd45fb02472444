#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "rstp/dimension.hpp"

using namespace rstp;

namespace {

const double kCantor = std::log(2.0) / std::log(3.0);

std::vector<Point> cantor_points(std::size_t depth)
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, depth + 1);
    const auto maps = fixtures::cantor_maps(*m);
    std::vector<Point> pts;
    for (const auto& w : enumerate_cylinders(path, 0, depth)) pts.push_back(project_point(path, maps, w, depth));
    return pts;
}

} // namespace

TEST_CASE("box counting examples")
{
    const auto scales = geometric_scales(3.0, 2, 8);
    const auto cantor = box_count(cantor_points(10), 1, scales);
    CHECK(std::abs(cantor.slope - kCantor) <= 1e-9);
    CHECK(std::abs(cantor.slope - kCantor) <= 0.02);
    CHECK(cantor.window == std::make_pair<std::size_t, std::size_t>(1, 5));
    for (std::size_t i = 0; i < scales.size(); ++i) CHECK(cantor.counts[i] == (1ULL << (i + 2)));

    const auto single = box_count(std::vector<Point>{{0.3, 0.0}}, 1, scales);
    CHECK(std::abs(single.slope) <= 0.05);

    std::vector<Point> grid;
    for (int i = 0; i < 100000; ++i) grid.push_back({(i + 0.5) / 100000.0, 0.0});
    CHECK(std::abs(box_count(grid, 1, scales).slope - 1.0) <= 0.05);
}

TEST_CASE("box counting errors")
{
    const auto scales = geometric_scales(3.0, 2, 8);
    CHECK_THROWS_AS(box_count(std::vector<Point>{}, 1, scales), Error);
    try {
        box_count(std::vector<Point>{{0.1, 0.0}}, 1, geometric_scales(3.0, 2, 5));
        FAIL("expected DegenerateFit");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateFit);
    }
    try {
        box_count(std::vector<Point>{{0.1, 0.0}}, 1, {0.1, 0.2, 0.05});
        FAIL("expected OutOfRange");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OutOfRange);
    }
    BoxCountOptions opts;
    opts.window = std::make_pair<std::size_t, std::size_t>(2, 3);
    try {
        box_count(std::vector<Point>{{0.1, 0.0}}, 1, scales, opts);
        FAIL("expected DegenerateFit");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateFit);
    }
}

TEST_CASE("box counts refine by at most 3^d")
{
    const auto scales = geometric_scales(3.0, 1, 9);
    const auto pts = cantor_points(10);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        BoxCountOptions opts;
        opts.origin = {u(gen), 0.0};
        const auto r = box_count(pts, 1, scales, opts);
        for (std::size_t i = 0; i + 1 < scales.size(); ++i) CHECK(r.counts[i] <= r.counts[i + 1] * 3);
        for (std::size_t i = 0; i + 1 < scales.size(); ++i) CHECK(r.counts[i] <= r.counts[i + 1]);
    }
}

TEST_CASE("box counting is robust to grid offsets")
{
    const auto scales = geometric_scales(3.0, 2, 8);
    const auto pts = cantor_points(10);
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double lo = 1e9, hi = -1e9;
    for (int t = 0; t < 3; ++t) {
        BoxCountOptions opts;
        opts.origin = {u(gen), 0.0};
        const double s = box_count(pts, 1, scales, opts).slope;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    CHECK(hi - lo <= 0.02);
}

TEST_CASE("Cantor slope error shrinks with depth")
{
    const auto scales = geometric_scales(3.0, 2, 10);
    double previous = 1e9;
    for (std::size_t depth : {6u, 8u, 10u}) {
        const double err = std::abs(box_count(cantor_points(depth), 1, scales).slope - kCantor);
        CHECK(err < previous);
        previous = err;
    }
}

TEST_CASE("box counting of cells in the plane")
{
    // unit square tiled by 2^-8 boxes
    std::vector<Box> cells;
    const double h = 1.0 / 256;
    for (int i = 0; i < 256; ++i)
        for (int j = 0; j < 256; ++j) cells.push_back({{i * h, j * h}, {(i + 1) * h, (j + 1) * h}});
    const auto r = box_count(cells, 2, geometric_scales(2.0, 1, 7));
    for (std::size_t i = 0; i < r.scales.size(); ++i) CHECK(r.counts[i] == (1ULL << (2 * (i + 1))));
    CHECK(r.slope == doctest::Approx(2.0));
    CHECK(r.slope_stderr <= 1e-9);
}

TEST_CASE("dimension report")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 40);
    const auto scales = geometric_scales(3.0, 2, 8);
    const TargetSpec zero = TargetSpec::per_time({HighPoint{HighReal(0), HighReal(0)}});

    SUBCASE("Cantor, alpha = 0")
    {
        const auto maps = fixtures::cantor_maps(*m);
        const auto rep = dimension_report(path, maps, Potential::psi(), Potential::zero(), zero, 10, scales);
        CHECK(rep.t0 == doctest::Approx(kCantor).epsilon(1e-9));
        CHECK(std::abs(rep.attractor_slope - rep.t0) <= 0.03);
        CHECK(rep.attractor_gap == doctest::Approx(rep.attractor_slope - rep.t0));
    }
    SUBCASE("Cantor, alpha = 1")
    {
        const auto maps = fixtures::cantor_maps(*m);
        const auto rep = dimension_report(path, maps, Potential::psi(), Potential::psi(), zero, 10, scales);
        CHECK(rep.q0 == doctest::Approx(kCantor / 2).epsilon(1e-9));
        CHECK(rep.target_slope >= rep.q0 - 0.01);
        CHECK(rep.target_gap == doctest::Approx(rep.target_slope - rep.q0));
    }
    SUBCASE("halves of the interval")
    {
        const auto maps = fixtures::uniform_maps(*m, HighReal(1) / 2);
        const auto rep = dimension_report(path, maps, Potential::psi(), Potential::zero(), zero, 12,
                                          geometric_scales(2.0, 2, 10));
        CHECK(std::abs(rep.attractor_slope - 1.0) <= 0.03);
        CHECK(std::abs(rep.target_slope - 1.0) <= 0.03);
    }
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "rstp/error.hpp"
#include "rstp/potential.hpp"

using namespace rstp;

namespace {

Word word(std::vector<int> s, std::size_t offset = 0) { return Word{std::move(s), offset}; }

std::shared_ptr<const EnvironmentModel> alternating_binary()
{
    EnvState a, b;
    a.l = 2;
    b.l = 2;
    a.a_to.emplace(1, BinaryMatrix(2, 2, true));
    b.a_to.emplace(0, BinaryMatrix(2, 2, true));
    return std::make_shared<const EnvironmentModel>(EnvironmentModel({a, b}, {{0.0, 1.0}, {1.0, 0.0}}));
}

// ratio 1/4 at state 0, 1/2 at state 1
MapFamily state_dependent(const EnvironmentModel& m)
{
    auto spec = [](HighReal r, HighReal c) {
        MapSpec s;
        s.ratio = r;
        s.offset = {c, HighReal(0)};
        return s;
    };
    std::vector<std::vector<MapSpec>> per = {
        {spec(HighReal(1) / 4, HighReal(0)), spec(HighReal(1) / 4, HighReal(3) / 4)},
        {spec(HighReal(1) / 2, HighReal(0)), spec(HighReal(1) / 2, HighReal(1) / 2)}};
    return MapFamily(1, {HighReal(0), HighReal(0)}, {HighReal(1), HighReal(0)}, per, m);
}

// four quarter-size squares, rotated by 90 degrees, in the corners of [0,1]^2
MapFamily rotated_squares(const EnvironmentModel& m)
{
    std::vector<MapSpec> row;
    const HighReal q = HighReal(1) / 4;
    // R90 maps [0,1]^2 to [-1,0]x[0,1]; shift each image back into its corner
    const std::vector<std::pair<int, int>> corners = {{0, 0}, {3, 0}, {0, 3}, {3, 3}};
    for (auto [cx, cy] : corners) {
        MapSpec s;
        s.ratio = q;
        s.rotation_degrees = 90;
        s.offset = {HighReal(cx) * q + q, HighReal(cy) * q};
        row.push_back(s);
    }
    return MapFamily(2, {HighReal(0), HighReal(0)}, {HighReal(1), HighReal(1)}, {row}, m);
}

MapFamily perturbed_cantor(const EnvironmentModel& m, double delta)
{
    std::vector<MapSpec> row(2);
    row[0].ratio = fixtures::third();
    row[0].perturbation = delta;
    row[1].ratio = fixtures::third();
    row[1].offset = {HighReal(2) / 3, HighReal(0)};
    row[1].perturbation = -delta;
    return MapFamily(1, {HighReal(0), HighReal(0)}, {HighReal(1), HighReal(0)}, {row}, m);
}

bool box_inside(const Box& inner, const Box& outer, int dim, double tol = 1e-12)
{
    for (int i = 0; i < dim; ++i)
        if (inner.lo[i] < outer.lo[i] - tol || inner.hi[i] > outer.hi[i] + tol) return false;
    return true;
}

bool interiors_disjoint(const Box& a, const Box& b, int dim, double tol = 1e-12)
{
    for (int i = 0; i < dim; ++i)
        if (std::min(a.hi[i], b.hi[i]) - std::max(a.lo[i], b.lo[i]) <= tol) return true;
    return false;
}

} // namespace

TEST_CASE("cantor cylinder boxes")
{
    const auto model = fixtures::full_shift(2);
    const auto path = fixtures::path_of(model, 40);
    const auto maps = fixtures::cantor_maps(*model);
    const auto c1 = cylinder_box(path, maps, word({1}));
    CHECK(c1.box.lo[0] == doctest::Approx(0.0));
    CHECK(c1.box.hi[0] == doctest::Approx(1.0 / 3));
    CHECK(c1.diameter == doctest::Approx(1.0 / 3));
    const auto c12 = cylinder_box(path, maps, word({1, 2}));
    CHECK(c12.box.lo[0] == doctest::Approx(2.0 / 9));
    CHECK(c12.box.hi[0] == doctest::Approx(1.0 / 3));
    CHECK(c12.diameter == doctest::Approx(1.0 / 9));
    const auto c0 = cylinder_box(path, maps, word({}));
    CHECK(c0.diameter == doctest::Approx(1.0));
    CHECK_THROWS_AS(cylinder_box(path, maps, word({3})), Error);
}

TEST_CASE("projection converges to the coded point")
{
    const auto model = fixtures::full_shift(2);
    const auto path = fixtures::path_of(model, 40);
    const auto maps = fixtures::cantor_maps(*model);
    for (int k = 1; k <= 20; ++k)
        CHECK(project_point(path, maps, word(std::vector<int>(20, 1)), k)[0] <= std::pow(3.0, -k) + 1e-15);
    CHECK(std::abs(project_point(path, maps, word(std::vector<int>(10, 2)), 10)[0] - 1.0) <= std::pow(3.0, -10));
    std::vector<int> alt;
    for (int i = 0; i < 20; ++i) alt.push_back(1 + i % 2);
    CHECK(std::abs(project_point(path, maps, word(alt), 20)[0] - 0.25) <= std::pow(3.0, -20));
    // Cauchy gaps bounded by the cylinder diameter
    for (std::size_t k = 0; k < 19; ++k) {
        const double gap = std::abs(project_point(path, maps, word(alt), k)[0] - project_point(path, maps, word(alt), k + 1)[0]);
        CHECK(gap <= cylinder_box(path, maps, word(alt).prefix(k)).diameter + 1e-15);
    }
}

TEST_CASE("birkhoff sums")
{
    const auto model = fixtures::full_shift(2);
    const auto path = fixtures::path_of(model, 40);
    const auto maps = fixtures::cantor_maps(*model);
    const Word w = word({1, 2, 2, 1});
    const Point x = cylinder_box(path, maps, w).anchor;
    CHECK(birkhoff_sum(path, maps, Potential::psi(), w, x) == doctest::Approx(4 * std::log(1.0 / 3)));
    CHECK(birkhoff_sum(path, maps, Potential::psi(1.0), w.prefix(2), x) == doctest::Approx(2 * std::log(1.0 / 3)));
    CHECK_THROWS_AS(birkhoff_sum(path, maps, Potential::psi(), w, Point{0.9, 0.0}), Error);

    const auto alt = alternating_binary();
    const auto apath = fixtures::path_of(alt, 10);
    const auto amaps = state_dependent(*alt);
    const Word v = word({1, 2, 1, 1});
    const double s = birkhoff_sum(apath, amaps, Potential::psi(), v, cylinder_box(apath, amaps, v).anchor);
    CHECK(s == doctest::Approx(2 * std::log(0.25) + 2 * std::log(0.5)));
}

TEST_CASE("fixed points")
{
    const auto model = fixtures::full_shift(2);
    const auto path = fixtures::path_of(model, 40);
    const auto maps = fixtures::cantor_maps(*model);
    CHECK(fixed_point(path, maps, word({2}))[0] == doctest::Approx(1.0));
    CHECK(fixed_point(path, maps, word({1, 2}))[0] == doctest::Approx(0.25));
    CHECK(fixed_point(path, maps, word({1}))[0] == doctest::Approx(0.0));
    CHECK_THROWS_AS(fixed_point(path, maps, word({})), Error);
    for (const auto& w : enumerate_cylinders(path, 0, 6)) {
        const auto fp = fixed_point(path, maps, w);
        const auto b = cylinder_box(path, maps, w);
        CHECK(fp[0] >= b.box.lo[0] - 1e-12);
        CHECK(fp[0] <= b.box.hi[0] + 1e-12);
    }
    const auto pm = perturbed_cantor(*model, 0.4);
    const auto fp = fixed_point(path, pm, word({1, 2}));
    CHECK(std::abs(compose<double>(path, pm, word({1, 2}), fp)[0] - fp[0]) <= 1e-12);
}

TEST_CASE("nesting, disjointness, exactness and round trips")
{
    const auto m2 = fixtures::alternating_2_3();
    const auto p2 = fixtures::path_of(m2, 20);
    const auto maps_alt = fixtures::uniform_maps(*m2, HighReal(1) / 4);
    const auto m4 = fixtures::full_shift(4);
    const auto p4 = fixtures::path_of(m4, 20);
    const auto maps_rot = rotated_squares(*m4);
    const auto mg = fixtures::golden_mean();
    const auto pg = fixtures::path_of(mg, 20);
    const auto maps_gm = fixtures::cantor_maps(*mg);

    struct Case {
        const OmegaPath* path;
        const MapFamily* maps;
        std::size_t depth;
    };
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const Case& c : {Case{&p2, &maps_alt, 7}, Case{&p4, &maps_rot, 5}, Case{&pg, &maps_gm, 10}}) {
        const int dim = c.maps->dim();
        std::vector<CylinderBox> prev{cylinder_box(*c.path, *c.maps, word({}))};
        for (std::size_t n = 1; n <= c.depth; ++n) {
            std::vector<CylinderBox> level;
            for (const auto& w : enumerate_cylinders(*c.path, 0, n)) level.push_back(cylinder_box(*c.path, *c.maps, w));
            for (std::size_t i = 0; i < level.size(); ++i) {
                const auto parent = std::find_if(prev.begin(), prev.end(),
                                                 [&](const CylinderBox& b) { return b.word == level[i].word.star(); });
                REQUIRE(parent != prev.end());
                CHECK(box_inside(level[i].box, parent->box, dim));
                const double s = birkhoff_sum_at_anchor(*c.path, *c.maps, Potential::psi(), level[i].word);
                CHECK(std::abs(std::log(level[i].diameter / c.maps->domain_diameter()) - s) <= 1e-12);
                if (level.size() <= 400)
                    for (std::size_t j = i + 1; j < level.size(); ++j)
                        CHECK(interiors_disjoint(level[i].box, level[j].box, dim));
            }
            prev = std::move(level);
        }
        for (const auto& w : enumerate_cylinders(*c.path, 0, std::min<std::size_t>(c.depth, 5))) {
            const Point x{u(gen), dim == 2 ? u(gen) : 0.0};
            const Point back = invert_along<double>(*c.path, *c.maps, w, compose<double>(*c.path, *c.maps, w, x));
            CHECK(distance<double>(back, x, dim) <= 1e-10);
        }
    }
}

TEST_CASE("map family validation")
{
    const auto model = fixtures::full_shift(2);
    auto bad = [&](std::vector<std::pair<HighReal, HighReal>> ro) {
        try {
            MapFamily::interval(ro, *model);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::ConfigError;
    };
    CHECK(bad({{HighReal(1) / 2, HighReal(0)}, {HighReal(1) / 2, HighReal(1) / 4}}) == ErrorKind::InvalidModel);
    CHECK(bad({{HighReal(1) / 2, HighReal(0)}, {HighReal(1) / 2, HighReal(3) / 4}}) == ErrorKind::InvalidModel);
    // touching boundaries are allowed
    CHECK_NOTHROW(MapFamily::interval({{HighReal(1) / 2, HighReal(0)}, {HighReal(1) / 2, HighReal(1) / 2}}, *model));
}

TEST_CASE("distortion calibration")
{
    const auto model = fixtures::full_shift(2);
    const auto path = fixtures::path_of(model, 40);
    const auto exact = calibrate_distortion(path, fixtures::cantor_maps(*model), 12);
    for (double e : exact.epsilon) CHECK(e == 0.0);
    for (double delta : {0.2, 0.5, 1.0}) {
        const auto budget = calibrate_distortion(path, perturbed_cantor(*model, delta), 14, 5, 256);
        for (std::size_t n = 0; n < budget.epsilon.size(); ++n) {
            CHECK(budget.epsilon[n] <= delta + 1e-12);
            if (n > 0) CHECK(budget.epsilon[n] <= budget.epsilon[n - 1]);
        }
        CHECK(budget.epsilon[0] > 0.0);
    }
}

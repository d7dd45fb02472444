#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "rstp/moran.hpp"

using namespace rstp;

#define CHECK_THROWS_AS_KIND(expr, k) CHECK(kind_of([&] { (void)(expr); }) == (k))

namespace {

template <class F>
std::optional<ErrorKind> kind_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

ScheduleSpec schedule_of(std::vector<double> eps, std::vector<std::size_t> p, std::size_t gap = 1)
{
    ScheduleSpec s;
    s.generations = static_cast<int>(eps.size());
    s.epsilon = std::move(eps);
    s.p_min = std::move(p);
    s.gap = gap;
    return s;
}

TargetSpec zero_target() { return TargetSpec::per_time({HighPoint{HighReal(0), HighReal(0)}}); }

// Cantor cylinders down to `depth`, every node of generation g carrying mass 2^-g
MoranTree cantor_tree(int depth)
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 40);
    const auto maps = fixtures::cantor_maps(*m);
    MoranTree tree;
    tree.dim = 1;
    MoranNode root;
    root.lo = maps.domain_lo_high();
    root.hi = maps.domain_hi_high();
    root.anchor = maps.anchor_high();
    root.diameter = 1.0;
    tree.add(root, std::nullopt);
    std::vector<std::size_t> level{0};
    for (int g = 1; g <= depth; ++g) {
        std::vector<std::size_t> next;
        for (std::size_t id : level)
            for (int s = 1; s <= 2; ++s) {
                MoranNode n;
                n.generation = g;
                n.word = tree.nodes[id].word.extended(s);
                const auto corners = cylinder_corners<HighReal>(path, maps, n.word);
                n.lo = corners[0];
                n.hi = corners[1];
                n.diameter = cylinder_diameter<HighReal>(corners, 1);
                n.pre_diameter = n.diameter;
                n.anchor = compose<HighReal>(path, maps, n.word, maps.anchor_high());
                n.mass = std::ldexp(1.0, -g);
                next.push_back(tree.add(n, id));
            }
        level = std::move(next);
    }
    return tree;
}

bool intersects(const MoranNode& n, const HighPoint& c, double r, int dim)
{
    HighReal d2 = 0;
    for (int i = 0; i < dim; ++i) {
        const auto k = static_cast<std::size_t>(i);
        HighReal gap = 0;
        if (c[k] < n.lo[k]) gap = n.lo[k] - c[k];
        if (c[k] > n.hi[k]) gap = c[k] - n.hi[k];
        d2 += gap * gap;
    }
    return d2 <= HighReal(r) * HighReal(r);
}

} // namespace

TEST_CASE("schedule validation")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 50);
    CHECK_NOTHROW(validate_schedule(schedule_of({0.3, 0.2}, {3, 3}), path));
    CHECK_THROWS_AS_KIND(validate_schedule(schedule_of({0.2, 0.3}, {3, 4}), path), ErrorKind::InvalidSchedule);
    CHECK_THROWS_AS_KIND(validate_schedule(schedule_of({0.3, 0.2}, {4, 3}), path), ErrorKind::InvalidSchedule);
    CHECK_THROWS_AS_KIND(validate_schedule(schedule_of({0.3}, {3, 4}), path), ErrorKind::InvalidSchedule);
    CHECK_THROWS_AS_KIND(validate_schedule(schedule_of({1.5}, {3}), path), ErrorKind::InvalidSchedule);

    const auto gm = fixtures::golden_mean();
    const auto gpath = fixtures::path_of(gm, 50);
    CHECK_THROWS_AS_KIND(validate_schedule(schedule_of({0.3}, {3}, 1), gpath), ErrorKind::InvalidSchedule);
    CHECK_NOTHROW(validate_schedule(schedule_of({0.3}, {3}, 2), gpath));
}

TEST_CASE("Cantor tree with a per-time target at 0")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 120);
    const auto maps = fixtures::cantor_maps(*m);
    const auto psi = Potential::psi();
    const auto phi = Potential::psi(1.0);
    const auto tree = build_moran_tree(path, maps, psi, phi, zero_target(), schedule_of({0.3, 0.2}, {3, 4}), 7);

    CHECK(tree.depth() == 2);
    CHECK(tree.generation(1).size() == 4); // one child of each sibling pair survives
    CHECK(tree.generation(2).size() == 4 * 8);

    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
        const auto& n = tree.nodes[id];
        if (!n.children.empty()) {
            double sum = 0.0;
            for (std::size_t c : n.children) sum += tree.nodes[c].mass;
            CHECK(sum == doctest::Approx(n.mass).epsilon(1e-12));
        }
        if (n.generation == 0) continue;
        const auto& parent = tree.nodes[*n.parent];
        // nesting: the escorted word extends the parent word
        REQUIRE(n.word.size() > parent.word.size());
        for (std::size_t i = 0; i < parent.word.size(); ++i) CHECK(n.word.symbols[i] == parent.word.symbols[i]);
        // escort growth with alpha = 1
        const double eps = n.generation == 1 ? 0.3 : 0.2;
        CHECK(std::log(n.diameter) >= (2.0 + 2.0 * eps) * std::log(n.pre_diameter) - 1e-12);
        CHECK(n.hit_lhs <= n.hit_rhs);
        // the escort starts right after the pre-escort word and follows the code of 0 (symbol 1)
        for (std::size_t i = n.pre_escort.size(); i < n.word.size(); ++i) CHECK(n.word.symbols[i] == 1);
    }

    // separation: doubled pre-escort intervals of siblings are disjoint
    for (const auto& n : tree.nodes)
        for (std::size_t a = 0; a < n.children.size(); ++a)
            for (std::size_t b = a + 1; b < n.children.size(); ++b) {
                const auto& x = tree.nodes[n.children[a]];
                const auto& y = tree.nodes[n.children[b]];
                const double d = std::abs(to_double(x.anchor[0] - y.anchor[0]));
                CHECK(d >= 2.0 * x.pre_diameter + 2.0 * y.pre_diameter - 1e-15);
            }

    // the hit condition holds at the leaf anchor for the leaf and for every ancestor generation
    for (std::size_t id : tree.leaves()) {
        const auto& leaf = tree.nodes[id];
        const auto hits = hit_test(path, maps, phi, zero_target(), leaf.anchor, leaf.pre_escort.size());
        for (std::size_t a = id; a != 0; a = *tree.nodes[a].parent) {
            bool found = false;
            for (const auto& h : hits) found = found || h.word == tree.nodes[a].pre_escort;
            CHECK(found);
        }
    }

    // ball masses: everything, nothing, one generation-1 box
    CHECK(mass_of_ball(tree, maps.anchor_high(), 1.0) == doctest::Approx(1.0));
    const auto& first = tree.nodes[tree.generation(1).front()];
    CHECK(mass_of_ball(tree, {HighReal(1) / 2, HighReal(0)}, 1.0 / 7.0) == 0.0);
    const HighPoint mid{(first.lo[0] + first.hi[0]) / 2, HighReal(0)};
    CHECK(mass_of_ball(tree, mid, first.diameter / 2 * (1 + 1e-12)) == doctest::Approx(first.mass).epsilon(1e-12));
}

TEST_CASE("tree construction does not depend on the thread count")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 120);
    const auto maps = fixtures::cantor_maps(*m);
    const auto sched = schedule_of({0.3, 0.2}, {3, 4});
    MoranOptions one, four;
    four.threads = 4;
    const auto a = build_moran_tree(path, maps, Potential::psi(), Potential::psi(), zero_target(), sched, 3, one);
    const auto b = build_moran_tree(path, maps, Potential::psi(), Potential::psi(), zero_target(), sched, 3, four);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].word == b.nodes[i].word);
        CHECK(a.nodes[i].mass == b.nodes[i].mass);
    }
}

TEST_CASE("the seed rotates the greedy selection")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 120);
    const auto maps = fixtures::cantor_maps(*m);
    const auto sched = schedule_of({0.3}, {3});
    bool differs = false;
    const auto base = build_moran_tree(path, maps, Potential::psi(), Potential::psi(), zero_target(), sched, 0);
    for (std::uint64_t seed = 1; seed < 8 && !differs; ++seed) {
        const auto t = build_moran_tree(path, maps, Potential::psi(), Potential::psi(), zero_target(), sched, seed);
        for (std::size_t i = 1; i < t.nodes.size(); ++i) differs = differs || !(t.nodes[i].word == base.nodes[i].word);
    }
    CHECK(differs);
}

TEST_CASE("Gibbs masses follow the weighting potential")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 120);
    const auto maps = MapFamily::interval({{HighReal(1) / 4, HighReal(0)}, {HighReal(1) / 2, HighReal(1) / 2}}, *m);
    MoranOptions opts;
    opts.gibbs = Potential::psi(0.5);
    const auto tree = build_moran_tree(path, maps, Potential::psi(), Potential::psi(), zero_target(),
                                       schedule_of({0.3}, {4}), 0, opts);
    const auto& kids = tree.nodes[0].children;
    REQUIRE(kids.size() >= 2);
    double total = 0.0;
    std::vector<double> w;
    for (std::size_t c : kids) {
        const auto& v = tree.nodes[c].pre_escort;
        double s = 0.0;
        for (int sym : v.symbols) s += 0.5 * std::log(sym == 1 ? 0.25 : 0.5);
        w.push_back(std::exp(s));
        total += w.back();
    }
    for (std::size_t i = 0; i < kids.size(); ++i)
        CHECK(tree.nodes[kids[i]].mass == doctest::Approx(w[i] / total).epsilon(1e-12));
}

TEST_CASE("recurrence targets build through reachable extensions")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 120);
    const auto maps = fixtures::cantor_maps(*m);
    const auto tree = build_moran_tree(path, maps, Potential::psi(), Potential::psi(), TargetSpec::recurrence(),
                                       schedule_of({0.3, 0.2}, {2, 3}), 1);
    CHECK(tree.depth() == 2);
    for (std::size_t id : tree.leaves()) CHECK(tree.nodes[id].hit_lhs <= tree.nodes[id].hit_rhs);
}

TEST_CASE("schedules that outgrow the horizon are infeasible")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 20);
    const auto maps = fixtures::cantor_maps(*m);
    CHECK_THROWS_AS_KIND(build_moran_tree(path, maps, Potential::psi(), Potential::psi(), zero_target(),
                                          schedule_of({0.3, 0.2}, {3, 4}), 0),
                         ErrorKind::ScheduleInfeasible);
}

TEST_CASE("mass of a ball agrees with a leaf sum")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 120);
    const auto maps = fixtures::cantor_maps(*m);
    const auto tree = build_moran_tree(path, maps, Potential::psi(), Potential::psi(), zero_target(),
                                       schedule_of({0.3, 0.2}, {4, 5}), 2);
    const auto leaves = tree.leaves();
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const HighPoint c{HighReal(u(gen)), HighReal(0)};
        const double r = std::pow(10.0, -6.0 * u(gen));
        double brute = 0.0;
        for (std::size_t id : leaves)
            if (intersects(tree.nodes[id], c, r, 1)) brute += tree.nodes[id].mass;
        CHECK(mass_of_ball(tree, c, r) == doctest::Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("uniform binary tree on the Cantor set")
{
    const auto tree = cantor_tree(10);
    const double t = std::log(2.0) / std::log(3.0);
    // at the leftmost leaf every ball B(x, 3^-k) carries exactly the level-k mass
    const auto& left = tree.nodes[tree.leaves().front()];
    for (int k = 4; k <= 10; ++k) {
        const double r = std::pow(3.0, -k);
        CHECK(std::log(mass_of_ball(tree, left.anchor, r)) / std::log(r) == doctest::Approx(t).epsilon(1e-9));
    }
    // elsewhere a ball of radius 3^-k meets at most two level-k cylinders
    std::vector<double> radii;
    for (int k = 4; k <= 9; ++k) radii.push_back(std::pow(3.0, -k));
    const auto probe = mass_exponent_probe(tree, 50, radii, 5, 1.0);
    CHECK(probe.rows.size() == 300);
    for (const auto& row : probe.rows) {
        const double k = -std::log(row.radius) / std::log(3.0);
        CHECK(row.exponent <= t + 1e-9);
        CHECK(row.exponent >= t * (k - 1.0) / k - 1e-9);
    }
    CHECK(probe.min_exponent >= t * 3.0 / 4.0 - 1e-9);
}

TEST_CASE("a single-child chain carries no dimension")
{
    const auto m = fixtures::full_shift(2);
    const auto path = fixtures::path_of(m, 40);
    const auto maps = fixtures::cantor_maps(*m);
    MoranTree tree;
    MoranNode root;
    root.lo = maps.domain_lo_high();
    root.hi = maps.domain_hi_high();
    root.diameter = 1.0;
    std::size_t id = tree.add(root, std::nullopt);
    Word w;
    for (int g = 1; g <= 12; ++g) {
        w = w.extended(1);
        MoranNode n;
        n.generation = g;
        n.word = w;
        const auto corners = cylinder_corners<HighReal>(path, maps, w);
        n.lo = corners[0];
        n.hi = corners[1];
        n.diameter = cylinder_diameter<HighReal>(corners, 1);
        n.anchor = compose<HighReal>(path, maps, w, maps.anchor_high());
        id = tree.add(n, id);
    }
    const auto probe = mass_exponent_probe(tree, 5, {1e-2, 1e-3, 1e-4, 1e-5}, 0, 1.0);
    CHECK(probe.min_exponent == doctest::Approx(0.0));
}

TEST_CASE("default probe radii sit inside the tree's scale range")
{
    const auto tree = cantor_tree(6);
    const auto radii = default_probe_radii(tree, 5);
    REQUIRE(radii.size() == 5);
    for (std::size_t i = 1; i < radii.size(); ++i) CHECK(radii[i] > radii[i - 1]);
    CHECK(radii.front() > std::pow(3.0, -6));
    CHECK(radii.back() < 1.0 / 3.0);
}

// Nested Moran families carrying a mass distribution, built inside the shrinking-target set,
// and the ball-mass probes used to read off a lower dimension bound.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rstp/geometry.hpp"
#include "rstp/potential.hpp"
#include "rstp/targets.hpp"

namespace rstp {

struct ScheduleSpec {
    int generations = 1;
    std::vector<double> epsilon;      // per generation, decreasing, in (0, 1)
    std::vector<std::size_t> p_min;   // per generation, nondecreasing
    std::size_t gap = 1;              // joining gap, at least the mixing index
    std::size_t reach_bound = 8;      // extension budget for per-word and recurrence targets
};

// Throws InvalidSchedule naming the violated constraint.
void validate_schedule(const ScheduleSpec& schedule, const OmegaPath& path);

struct MoranNode {
    Word word;       // escorted word; empty at the root
    Word pre_escort; // w * v(l)
    std::size_t escort_length = 0;
    int generation = 0;
    double mass = 1.0;
    double diameter = 0.0;
    double pre_diameter = 0.0;
    HighPoint lo{}, hi{}; // bounding box of the escorted cylinder
    HighPoint anchor{};
    HighPoint target{};
    double hit_lhs = 0.0;
    double hit_rhs = 0.0;
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
};

struct MoranTree {
    int dim = 1;
    std::vector<MoranNode> nodes; // nodes[0] is the root

    std::size_t add(MoranNode node, std::optional<std::size_t> parent);
    std::vector<std::size_t> leaves() const;
    std::vector<std::size_t> generation(int g) const;
    int depth() const;
};

struct MoranOptions {
    int threads = 1;
    std::size_t cap = 1'000'000;   // candidates per parent
    Potential gibbs;               // child masses proportional to exp(S of this potential); zero = uniform
    double alpha = -1.0;           // sup phi/psi; negative means derive it from the potentials
    double precision_floor = 1e-80; // relative diameter below which the 100-digit arithmetic is not trusted
};

// The ratio sup phi / psi used by the escort growth inequality.
double potential_ratio(const MapFamily& maps, const Potential& psi, const Potential& phi);

MoranTree build_moran_tree(const OmegaPath& path, const MapFamily& maps, const Potential& psi, const Potential& phi,
                           const TargetSpec& targets, const ScheduleSpec& schedule, std::uint64_t seed,
                           const MoranOptions& opts = {});

double mass_of_ball(const MoranTree& tree, const HighPoint& center, double radius);

struct ProbeRow {
    Point center{};
    double radius = 0.0;
    double mass = 0.0;
    double exponent = 0.0;
};

struct ProbeResult {
    double min_exponent = 0.0;
    std::vector<ProbeRow> rows;
};

// Centers are leaf anchors drawn with the seed; radii outside (smallest leaf diameter, |U|) are skipped.
ProbeResult mass_exponent_probe(const MoranTree& tree, std::size_t num_centers, const std::vector<double>& radii,
                                std::uint64_t seed, double domain_diameter);

// Log-spaced radii strictly inside (smallest leaf diameter, largest generation-1 diameter).
std::vector<double> default_probe_radii(const MoranTree& tree, std::size_t count);

} // namespace rstp

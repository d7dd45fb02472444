// Shrinking targets: target sequences, the sets V^v, hit testing and reachability checks.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rstp/geometry.hpp"
#include "rstp/potential.hpp"

namespace rstp {

enum class TargetKind {
    PerTime,    // z depends on the state reached at time |v|
    PerWord,    // z depends on that state and on the last symbol of v
    Recurrence, // z is the fixed point of g^v
};

struct TargetSpec {
    TargetKind kind = TargetKind::PerTime;
    std::vector<HighPoint> per_state;                // PerTime: [state]
    std::vector<std::vector<HighPoint>> per_symbol;  // PerWord: [state][last symbol - 1]
    std::size_t membership_depth = 20;

    static TargetSpec per_time(std::vector<HighPoint> points, std::size_t membership_depth = 20);
    static TargetSpec per_word(std::vector<std::vector<HighPoint>> points, std::size_t membership_depth = 20);
    static TargetSpec recurrence(std::size_t membership_depth = 20);

    // target attached to the word v (start offset included)
    HighPoint target(const OmegaPath& path, const MapFamily& maps, const Word& v) const;
};

// A code of length min(depth, horizon - position) at `position` whose cylinder contains z.
// With predecessor > 0 the first symbol must be allowed after that symbol.
std::optional<Word> locate_in_fiber(const OmegaPath& path, const MapFamily& maps, const HighPoint& z,
                                    std::size_t position, std::size_t depth, int predecessor = 0);

struct TargetCell {
    Word word;
    Box box;
    double diameter = 0.0;
    double radius = 0.0; // e^{sup S phi}
    Point anchor{};      // g^v(z)
};

struct CoverOptions {
    std::size_t cap = kDefaultCylinderCap;
    int threads = 1;
    bool check_membership = true;
};

// V^v = g^v(B(z, e^{sup S_{|v|} phi}) intersected with U) for every admissible v with |v| in [lo, hi],
// the ball taken as its circumscribed square.
std::vector<TargetCell> build_target_cover(const OmegaPath& path, const MapFamily& maps, const Potential& phi,
                                           const TargetSpec& targets, std::size_t depth_lo, std::size_t depth_hi,
                                           const CoverOptions& opts = {});

struct HitRecord {
    Word word;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin() const { return rhs - lhs; }
};

// Every v with |v| <= max_depth, x in U^v and |T^v x - z^v| <= e^{S_{|v|} phi(x)}.
std::vector<HitRecord> hit_test(const OmegaPath& path, const MapFamily& maps, const Potential& phi,
                                const TargetSpec& targets, const HighPoint& x, std::size_t max_depth);

std::vector<Point> sample_target_points(const OmegaPath& path, const MapFamily& maps, const Potential& phi,
                                        const TargetSpec& targets, std::size_t count, std::size_t depth,
                                        std::uint64_t seed, const CoverOptions& opts = {});

struct ReachabilityReport {
    std::size_t words_checked = 0;
    std::size_t max_k = 0;
    std::vector<Word> failures;
    double gamma_ratio = 0.0; // max_k / depth
};

// For each v of length depth, the shortest extension v' (|v'| <= gap_bound) such that the target of
// vv' lies in the attractor slice that can follow vv'.
ReachabilityReport verify_target_reachability(const OmegaPath& path, const MapFamily& maps,
                                              const TargetSpec& targets, std::size_t depth, std::size_t gap_bound,
                                              std::size_t cap = kDefaultCylinderCap);

// The shortest such extension for one word; nullopt when none exists within gap_bound.
std::optional<Word> reachable_extension(const OmegaPath& path, const MapFamily& maps, const TargetSpec& targets,
                                        const Word& v, std::size_t gap_bound);

} // namespace rstp

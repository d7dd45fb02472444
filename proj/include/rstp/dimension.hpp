// Box-counting estimates and the comparison of fitted slopes with the pressure roots.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rstp/geometry.hpp"
#include "rstp/potential.hpp"
#include "rstp/targets.hpp"
#include "rstp/thermo.hpp"

namespace rstp {

struct BoxCountResult {
    std::vector<double> scales;         // strictly decreasing
    std::vector<std::uint64_t> counts;  // occupied grid cells per scale
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    std::pair<std::size_t, std::size_t> window{0, 0}; // inclusive index range of the fit
};

struct BoxCountOptions {
    // inclusive index window; by default the coarsest and finest scales are dropped
    std::optional<std::pair<std::size_t, std::size_t>> window;
    Point origin{0.0, 0.0}; // grid offset
    int threads = 1;
};

BoxCountResult box_count(const std::vector<Point>& points, int dim, const std::vector<double>& scales,
                         const BoxCountOptions& opts = {});

// A box occupies every grid cell its closed extent meets (touching a grid line from one side does not count).
BoxCountResult box_count(const std::vector<Box>& cells, int dim, const std::vector<double>& scales,
                         const BoxCountOptions& opts = {});

// Least squares of log count against log(1 / scale) over the window; fills slope, stderr and intercept.
void fit_slope(BoxCountResult& result);

// scales base^-k for k = k_lo..k_hi
std::vector<double> geometric_scales(double base, int k_lo, int k_hi);

struct DimensionOptions {
    std::size_t pressure_n = 10;
    PartitionOptions partition;
    CoverOptions cover;
    BoxCountOptions boxes;
};

struct DimensionReport {
    double t0 = 0.0;
    double q0 = 0.0;
    double attractor_slope = 0.0;
    double target_slope = 0.0;
    double attractor_gap = 0.0; // attractor slope - t0
    double target_gap = 0.0;    // target slope - q0
    BoxCountResult attractor;
    BoxCountResult target;
};

DimensionReport dimension_report(const OmegaPath& path, const MapFamily& maps, const Potential& psi,
                                 const Potential& phi, const TargetSpec& targets, std::size_t depth,
                                 const std::vector<double>& scales, const DimensionOptions& opts = {});

} // namespace rstp

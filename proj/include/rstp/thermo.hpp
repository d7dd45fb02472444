// Partition functions, pressure, the two pressure roots and finite-level Gibbs weights.
#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "rstp/geometry.hpp"
#include "rstp/potential.hpp"
#include "rstp/subshift.hpp"

namespace rstp {

enum class AnchorRule {
    CylinderAnchor, // S_n at g^v(x0)
    SupSample,      // max of S_n over images g^v(x) of a grid of x in U
};

struct PartitionOptions {
    AnchorRule rule = AnchorRule::CylinderAnchor;
    int samples = 9;
    std::size_t cap = kDefaultCylinderCap;
    int threads = 1;
};

// log sum_v exp(S_n at the anchor of v) over admissible v of length n at offset.
// Dynamic program for symbolwise potentials, enumeration otherwise.
double partition_function_log(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                              std::size_t offset, std::size_t n, const PartitionOptions& opts = {});

// Per-cylinder Birkhoff sums (one column per sample point); enumeration order.
std::vector<std::vector<double>> cylinder_sums(const OmegaPath& path, const MapFamily& maps,
                                               const Potential& potential, std::size_t offset, std::size_t n,
                                               const PartitionOptions& opts = {});

struct PressureCurve {
    std::vector<std::pair<std::size_t, double>> samples; // (n, (1/n) log Z_n)
    double extrapolated = 0.0;
    double uncertainty = 0.0;
};

// Richardson step in 1/n: consecutive differences of log Z_n cancel the O(1/n) term.
PressureCurve pressure_estimate(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                                const std::vector<std::size_t>& n_schedule, const PartitionOptions& opts = {});

enum class RootMode { BowenRuelle, Target };

struct RootResult {
    double root = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double residual = 0.0;
    std::size_t n_used = 0;
};

// Zero of q -> (1/n) log Z_n(q * base) with base = psi (BowenRuelle) or psi + phi (Target).
RootResult solve_pressure_root(const OmegaPath& path, const MapFamily& maps, const Potential& psi,
                               const Potential& phi, RootMode mode, std::pair<double, double> bracket,
                               std::size_t n, const PartitionOptions& opts = {}, double width = 1e-12);

// Sum over states of pi(state) * max_s sup of the potential; must be negative for root finding.
double average_sup(const EnvironmentModel& model, const MapFamily& maps, const Potential& potential);

struct GibbsWeights {
    std::map<Word, double> weights;
    double lambda = 0.0; // Z_{n+1} / Z_n, NaN when n + 1 runs past the horizon
};

GibbsWeights gibbs_weights(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                           std::size_t offset, std::size_t n, const PartitionOptions& opts = {});

struct GibbsDiagnostic {
    std::vector<std::pair<std::size_t, double>> deviation;
    double pressure = 0.0;
    bool nonincreasing = true;
};

GibbsDiagnostic gibbs_ratio_diagnostic(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                                       const std::vector<std::size_t>& depths, const PartitionOptions& opts = {});

struct PowerIterationResult {
    double pressure = 0.0;
    double lambda = 0.0;
    std::vector<double> eigenvector;
    int iterations = 0;
};

// Single-state environment and symbolwise potential: log spectral radius of A diag(e^potential).
PowerIterationResult fixed_environment_pressure(const EnvironmentModel& model, const MapFamily& maps,
                                                const Potential& potential, int max_iterations = 10000,
                                                double tol = 1e-14);

} // namespace rstp

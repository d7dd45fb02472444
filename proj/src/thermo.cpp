#include "rstp/thermo.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "rstp/parallel.hpp"

namespace rstp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double dp_log_partition(const OmegaPath& path, const MapFamily& maps, const Potential& potential, std::size_t offset,
                        std::size_t n)
{
    if (n == 0) return 0.0;
    const int st0 = path.state(offset);
    std::vector<double> alpha(static_cast<std::size_t>(path.alphabet(offset)));
    for (int s = 1; s <= path.alphabet(offset); ++s)
        alpha[static_cast<std::size_t>(s - 1)] = potential.symbol_value(maps, st0, s);
    for (std::size_t k = 1; k < n; ++k) {
        const auto& a = path.transition(offset + k - 1);
        const int st = path.state(offset + k);
        std::vector<double> next(static_cast<std::size_t>(a.cols()), kNegInf);
        std::vector<double> terms;
        for (int t = 0; t < a.cols(); ++t) {
            terms.clear();
            for (int s = 0; s < a.rows(); ++s)
                if (a.at(s, t)) terms.push_back(alpha[static_cast<std::size_t>(s)]);
            next[static_cast<std::size_t>(t)] = log_sum_exp(terms) + potential.symbol_value(maps, st, t + 1);
        }
        alpha = std::move(next);
    }
    return log_sum_exp(alpha);
}

std::vector<Point> sample_bases(const MapFamily& maps, const PartitionOptions& opts)
{
    std::vector<Point> bases{maps.anchor()};
    if (opts.rule != AnchorRule::SupSample) return bases;
    const auto& d = maps.domain();
    if (maps.dim() == 1) {
        const int k = std::max(opts.samples, 2);
        for (int j = 0; j < k; ++j)
            bases.push_back({d.lo[0] + (d.hi[0] - d.lo[0]) * j / (k - 1), 0.0});
    } else {
        const int m = std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(opts.samples)))));
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                bases.push_back({d.lo[0] + (d.hi[0] - d.lo[0]) * a / (m - 1), d.lo[1] + (d.hi[1] - d.lo[1]) * b / (m - 1)});
    }
    return bases;
}

// log Z_n(q * base) from precomputed sums of base
double scaled_log_partition(const std::vector<std::vector<double>>& sums, double q)
{
    std::vector<double> terms;
    terms.reserve(sums.size());
    for (const auto& row : sums) {
        double best = kNegInf;
        for (double s : row) best = std::max(best, q * s);
        terms.push_back(best);
    }
    return log_sum_exp(terms);
}

void require_range(const OmegaPath& path, std::size_t offset, std::size_t n)
{
    if (offset + n > path.horizon())
        throw Error(ErrorKind::OutOfHorizon, "offset " + std::to_string(offset) + " + n " + std::to_string(n) +
                                                 " exceeds horizon " + std::to_string(path.horizon()));
}

} // namespace

std::vector<std::vector<double>> cylinder_sums(const OmegaPath& path, const MapFamily& maps,
                                               const Potential& potential, std::size_t offset, std::size_t n,
                                               const PartitionOptions& opts)
{
    require_range(path, offset, n);
    const auto words = enumerate_cylinders(path, offset, n, opts.cap);
    const auto bases = potential.symbolwise(maps) ? std::vector<Point>{maps.anchor()} : sample_bases(maps, opts);
    std::vector<std::vector<double>> sums(words.size());
    parallel_for(words.size(), opts.threads, [&](std::size_t i) {
        auto& row = sums[i];
        row.reserve(bases.size());
        for (const auto& b : bases) row.push_back(birkhoff_sum_at_image(path, maps, potential, words[i], b));
    });
    return sums;
}

double partition_function_log(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                              std::size_t offset, std::size_t n, const PartitionOptions& opts)
{
    require_range(path, offset, n);
    if (potential.symbolwise(maps)) return dp_log_partition(path, maps, potential, offset, n);
    return scaled_log_partition(cylinder_sums(path, maps, potential, offset, n, opts), 1.0);
}

PressureCurve pressure_estimate(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                                const std::vector<std::size_t>& n_schedule, const PartitionOptions& opts)
{
    if (n_schedule.empty()) throw Error(ErrorKind::EmptyInput, "empty depth schedule");
    for (std::size_t i = 0; i < n_schedule.size(); ++i) {
        if (n_schedule[i] == 0) throw Error(ErrorKind::OutOfRange, "depths must be positive");
        if (i > 0 && n_schedule[i] <= n_schedule[i - 1])
            throw Error(ErrorKind::OutOfRange, "depth schedule must be increasing");
    }
    PressureCurve curve;
    std::vector<double> logz;
    for (std::size_t n : n_schedule) {
        const double lz = partition_function_log(path, maps, potential, 0, n, opts);
        logz.push_back(lz);
        curve.samples.emplace_back(n, lz / static_cast<double>(n));
    }
    std::vector<double> extrapolants;
    for (std::size_t i = 1; i < logz.size(); ++i)
        extrapolants.push_back((logz[i] - logz[i - 1]) / static_cast<double>(n_schedule[i] - n_schedule[i - 1]));
    if (extrapolants.empty()) {
        curve.extrapolated = curve.samples.back().second;
        curve.uncertainty = std::numeric_limits<double>::infinity();
    } else if (extrapolants.size() == 1) {
        curve.extrapolated = extrapolants.back();
        curve.uncertainty = std::abs(extrapolants.back() - curve.samples.back().second);
    } else {
        curve.extrapolated = extrapolants.back();
        curve.uncertainty = std::abs(extrapolants.back() - extrapolants[extrapolants.size() - 2]);
    }
    return curve;
}

double average_sup(const EnvironmentModel& model, const MapFamily& maps, const Potential& potential)
{
    const auto pi = stationary_frequencies(model);
    double avg = 0.0;
    for (std::size_t st = 0; st < model.size(); ++st) {
        double worst = kNegInf;
        for (int s = 1; s <= model.state(static_cast<int>(st)).l; ++s)
            worst = std::max(worst, potential.bounds(maps, static_cast<int>(st), s).second);
        avg += pi[st] * worst;
    }
    return avg;
}

RootResult solve_pressure_root(const OmegaPath& path, const MapFamily& maps, const Potential& psi,
                               const Potential& phi, RootMode mode, std::pair<double, double> bracket,
                               std::size_t n, const PartitionOptions& opts, double width)
{
    require_range(path, 0, n);
    if (n == 0) throw Error(ErrorKind::OutOfRange, "root depth must be positive");
    const Potential base = mode == RootMode::BowenRuelle ? psi : psi + phi;
    const double avg = average_sup(*path.model, maps, base);
    if (!(avg < 0.0)) {
        std::ostringstream os;
        os << "average sup of the potential is " << avg << ", must be negative";
        throw Error(ErrorKind::NotContractingPotential, os.str());
    }
    const double dn = static_cast<double>(n);
    std::function<double(double)> pressure;
    std::vector<std::vector<double>> sums;
    if (base.symbolwise(maps)) {
        pressure = [&](double q) { return dp_log_partition(path, maps, base.scaled(q), 0, n) / dn; };
    } else {
        sums = cylinder_sums(path, maps, base, 0, n, opts);
        pressure = [&](double q) { return scaled_log_partition(sums, q) / dn; };
    }
    double lo = bracket.first, hi = bracket.second;
    if (!(lo < hi)) throw Error(ErrorKind::NoSignChange, "bracket must satisfy lo < hi");
    const double plo = pressure(lo), phi_ = pressure(hi);
    if (!(plo > 0.0 && phi_ < 0.0)) {
        std::ostringstream os;
        os << "pressure is " << plo << " at " << lo << " and " << phi_ << " at " << hi;
        throw Error(ErrorKind::NoSignChange, os.str());
    }
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (pressure(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    RootResult r;
    r.lo = lo;
    r.hi = hi;
    r.root = 0.5 * (lo + hi);
    r.residual = std::abs(pressure(r.root));
    r.n_used = n;
    return r;
}

GibbsWeights gibbs_weights(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                           std::size_t offset, std::size_t n, const PartitionOptions& opts)
{
    require_range(path, offset, n);
    const auto words = enumerate_cylinders(path, offset, n, opts.cap);
    std::vector<double> sums(words.size());
    parallel_for(words.size(), opts.threads,
                 [&](std::size_t i) { sums[i] = birkhoff_sum_at_anchor(path, maps, potential, words[i]); });
    const double lz = log_sum_exp(sums);
    GibbsWeights out;
    for (std::size_t i = 0; i < words.size(); ++i) out.weights.emplace(words[i], std::exp(sums[i] - lz));
    if (offset + n + 1 <= path.horizon()) {
        PartitionOptions o = opts;
        o.rule = AnchorRule::CylinderAnchor;
        out.lambda = std::exp(partition_function_log(path, maps, potential, offset, n + 1, o) - lz);
    } else {
        out.lambda = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

GibbsDiagnostic gibbs_ratio_diagnostic(const OmegaPath& path, const MapFamily& maps, const Potential& potential,
                                       const std::vector<std::size_t>& depths, const PartitionOptions& opts)
{
    GibbsDiagnostic diag;
    PartitionOptions o = opts;
    o.rule = AnchorRule::CylinderAnchor;
    diag.pressure = pressure_estimate(path, maps, potential, depths, o).extrapolated;
    for (std::size_t n : depths) {
        const auto w = gibbs_weights(path, maps, potential, 0, n, o);
        double worst = 0.0;
        for (const auto& [word, weight] : w.weights) {
            const double s = birkhoff_sum_at_anchor(path, maps, potential, word);
            worst = std::max(worst, std::abs(std::log(weight) - (s - static_cast<double>(n) * diag.pressure)) /
                                        static_cast<double>(n));
        }
        diag.deviation.emplace_back(n, worst);
    }
    for (std::size_t i = 1; i < diag.deviation.size(); ++i)
        if (diag.deviation[i].second > diag.deviation[i - 1].second + 0.01) diag.nonincreasing = false;
    return diag;
}

PowerIterationResult fixed_environment_pressure(const EnvironmentModel& model, const MapFamily& maps,
                                                const Potential& potential, int max_iterations, double tol)
{
    if (model.size() != 1)
        throw Error(ErrorKind::InvalidModel, "power iteration needs a single-state environment");
    if (!potential.symbolwise(maps))
        throw Error(ErrorKind::InvalidModel, "power iteration needs a symbolwise potential");
    const int l = model.state(0).l;
    const auto& a = model.transition(0, 0);
    std::vector<double> weight(static_cast<std::size_t>(l));
    double shift = kNegInf;
    for (int s = 0; s < l; ++s) shift = std::max(shift, potential.symbol_value(maps, 0, s + 1));
    for (int s = 0; s < l; ++s)
        weight[static_cast<std::size_t>(s)] = std::exp(potential.symbol_value(maps, 0, s + 1) - shift);
    // v_t <- sum_s v_s A[s][t] w_t, the row-vector form of the DP; averaging consecutive
    // iterates removes oscillation on periodic matrices.
    std::vector<double> v(static_cast<std::size_t>(l), 1.0 / l);
    PowerIterationResult r;
    for (int it = 1; it <= max_iterations; ++it) {
        std::vector<double> next(static_cast<std::size_t>(l), 0.0);
        for (int s = 0; s < l; ++s)
            for (int t = 0; t < l; ++t)
                if (a.at(s, t)) next[static_cast<std::size_t>(t)] += v[static_cast<std::size_t>(s)] * weight[static_cast<std::size_t>(t)];
        double norm = 0.0;
        for (double x : next) norm += x;
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = 0.5 * (next[i] / norm + v[i]);
        double change = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - v[i]));
        v = std::move(next);
        r.iterations = it;
        if (change < tol) break;
    }
    // with sum(v) = 1 the total mass of v M is the eigenvalue
    double total = 0.0;
    for (int s = 0; s < l; ++s)
        for (int t = 0; t < l; ++t)
            if (a.at(s, t)) total += v[static_cast<std::size_t>(s)] * weight[static_cast<std::size_t>(t)];
    r.lambda = total * std::exp(shift);
    r.pressure = std::log(total) + shift;
    r.eigenvector = v;
    return r;
}

} // namespace rstp

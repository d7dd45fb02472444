#include "rstp/targets.hpp"

#include <cmath>
#include <functional>

#include "rstp/parallel.hpp"

namespace rstp {

namespace {

constexpr double kMembershipTol = 1e-12;
// inverse branches amplify the 100-digit rounding; start there and never exceed kMembershipTol
constexpr double kDeepTol = 1e-60;

double grown(double tol, double grow) { return std::min(kMembershipTol, tol * grow); }

std::size_t end_position(const Word& v) { return v.start_offset + v.size(); }

} // namespace

TargetSpec TargetSpec::per_time(std::vector<HighPoint> points, std::size_t membership_depth)
{
    TargetSpec t;
    t.kind = TargetKind::PerTime;
    t.per_state = std::move(points);
    t.membership_depth = membership_depth;
    return t;
}

TargetSpec TargetSpec::per_word(std::vector<std::vector<HighPoint>> points, std::size_t membership_depth)
{
    TargetSpec t;
    t.kind = TargetKind::PerWord;
    t.per_symbol = std::move(points);
    t.membership_depth = membership_depth;
    return t;
}

TargetSpec TargetSpec::recurrence(std::size_t membership_depth)
{
    TargetSpec t;
    t.kind = TargetKind::Recurrence;
    t.membership_depth = membership_depth;
    return t;
}

HighPoint TargetSpec::target(const OmegaPath& path, const MapFamily& maps, const Word& v) const
{
    const auto state = static_cast<std::size_t>(path.state(end_position(v)));
    switch (kind) {
    case TargetKind::PerTime:
        if (state >= per_state.size())
            throw Error(ErrorKind::ConfigError, "no target point for state " + std::to_string(state));
        return per_state[state];
    case TargetKind::PerWord: {
        if (state >= per_symbol.size() || per_symbol[state].empty())
            throw Error(ErrorKind::ConfigError, "no target points for state " + std::to_string(state));
        const std::size_t s = v.empty() ? 0 : static_cast<std::size_t>(v.back() - 1);
        if (s >= per_symbol[state].size())
            throw Error(ErrorKind::ConfigError, "no target point for state " + std::to_string(state) + " symbol " +
                                                    std::to_string(s + 1));
        return per_symbol[state][s];
    }
    case TargetKind::Recurrence:
        if (v.empty()) return maps.anchor_high();
        return fixed_point_high(path, maps, v);
    }
    return maps.anchor_high();
}

std::optional<Word> locate_in_fiber(const OmegaPath& path, const MapFamily& maps, const HighPoint& z,
                                    std::size_t position, std::size_t depth, int predecessor)
{
    if (position > path.horizon()) throw Error(ErrorKind::OutOfHorizon, "fiber position beyond the horizon");
    if (!maps.in_domain<HighReal>(z, kMembershipTol)) return std::nullopt;
    const std::size_t d = std::min(depth, path.horizon() - position);
    Word code;
    code.start_offset = position;
    // the tolerance grows with the inverse expansion along the code
    std::function<bool(const HighPoint&, double)> dfs = [&](const HighPoint& y, double tol) -> bool {
        const std::size_t k = code.size();
        if (k == d) return true;
        const std::size_t pos = position + k;
        const int st = path.state(pos);
        for (int s = 1; s <= path.alphabet(pos); ++s) {
            if (k == 0 && predecessor > 0 && position > 0 && !path.transition(position - 1).at(predecessor - 1, s - 1))
                continue;
            if (k > 0 && !path.transition(pos - 1).at(code.back() - 1, s - 1)) continue;
            const double grow = std::exp(-maps.log_derivative_bounds(st, s).first);
            const HighPoint pre = maps.invert<HighReal>(st, s, y);
            if (!maps.in_domain<HighReal>(pre, grown(tol, grow))) continue;
            code.symbols.push_back(s);
            if (dfs(pre, grown(tol, grow))) return true;
            code.symbols.pop_back();
        }
        return false;
    };
    if (d == 0) return code;
    if (dfs(z, kDeepTol)) return code;
    return std::nullopt;
}

namespace {

std::optional<TargetCell> make_cell(const OmegaPath& path, const MapFamily& maps, const Potential& phi,
                                    const HighPoint& z, const Word& v)
{
    double sup_sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        sup_sum += phi.bounds(maps, path.state(v.start_offset + i), v.symbols[i]).second;
    const double r = std::exp(sup_sum);
    const HighReal hr(r);
    HighPoint lo{}, hi{};
    for (int i = 0; i < maps.dim(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        lo[k] = std::max<HighReal>(z[k] - hr, maps.domain_lo_high()[k]);
        hi[k] = std::min<HighReal>(z[k] + hr, maps.domain_hi_high()[k]);
        if (lo[k] > hi[k]) return std::nullopt;
    }
    std::vector<HighPoint> corners;
    if (maps.dim() == 1) corners = {lo, hi};
    else corners = {lo, {hi[0], lo[1]}, hi, {lo[0], hi[1]}};
    for (auto& c : corners) c = compose<HighReal>(path, maps, v, c);
    TargetCell cell;
    cell.word = v;
    cell.radius = r;
    cell.diameter = cylinder_diameter<HighReal>(corners, maps.dim());
    cell.box.lo = {1e300, 0.0};
    cell.box.hi = {-1e300, 0.0};
    if (maps.dim() == 2) {
        cell.box.lo[1] = 1e300;
        cell.box.hi[1] = -1e300;
    }
    for (const auto& c : corners)
        for (int i = 0; i < maps.dim(); ++i) {
            const auto k = static_cast<std::size_t>(i);
            cell.box.lo[k] = std::min(cell.box.lo[k], to_double(c[k]));
            cell.box.hi[k] = std::max(cell.box.hi[k], to_double(c[k]));
        }
    cell.anchor = to_double(compose<HighReal>(path, maps, v, z));
    return cell;
}

} // namespace

std::vector<TargetCell> build_target_cover(const OmegaPath& path, const MapFamily& maps, const Potential& phi,
                                           const TargetSpec& targets, std::size_t depth_lo, std::size_t depth_hi,
                                           const CoverOptions& opts)
{
    if (depth_lo > depth_hi) throw Error(ErrorKind::OutOfRange, "empty depth range");
    if (depth_hi > path.horizon()) throw Error(ErrorKind::OutOfHorizon, "cover depth exceeds the horizon");
    std::vector<TargetCell> out;
    for (std::size_t n = depth_lo; n <= depth_hi; ++n) {
        const auto words = enumerate_cylinders(path, 0, n, opts.cap);
        std::vector<std::optional<TargetCell>> cells(words.size());
        parallel_for(words.size(), opts.threads, [&](std::size_t i) {
            const HighPoint z = targets.target(path, maps, words[i]);
            if (opts.check_membership && targets.kind != TargetKind::Recurrence &&
                !locate_in_fiber(path, maps, z, end_position(words[i]), targets.membership_depth))
                throw Error(ErrorKind::TargetOutsideFiber,
                            "target (" + std::to_string(to_double(z[0])) + ", " + std::to_string(to_double(z[1])) +
                                ") is not in the fiber at time " + std::to_string(end_position(words[i])));
            cells[i] = make_cell(path, maps, phi, z, words[i]);
        });
        for (auto& c : cells)
            if (c) out.push_back(std::move(*c));
    }
    return out;
}

std::vector<HitRecord> hit_test(const OmegaPath& path, const MapFamily& maps, const Potential& phi,
                                const TargetSpec& targets, const HighPoint& x, std::size_t max_depth)
{
    std::vector<HitRecord> hits;
    if (!maps.in_domain<HighReal>(x, kMembershipTol)) return hits;
    const std::size_t depth = std::min(max_depth, path.horizon());
    Word v;
    // y = T^v x, s = S_{|v|} phi(x) along the inverse orbit
    std::function<void(const HighPoint&, double, double)> dfs = [&](const HighPoint& y, double s, double tol) {
        const HighPoint z = targets.target(path, maps, v);
        const double lhs = distance<HighReal>(y, z, maps.dim());
        const double rhs = std::exp(s);
        if (lhs <= rhs) hits.push_back({v, lhs, rhs});
        if (v.size() == depth) return;
        const std::size_t pos = v.size();
        const int st = path.state(pos);
        for (int sym = 1; sym <= path.alphabet(pos); ++sym) {
            if (pos > 0 && !path.transition(pos - 1).at(v.back() - 1, sym - 1)) continue;
            const double grow = std::exp(-maps.log_derivative_bounds(st, sym).first);
            const HighPoint pre = maps.invert<HighReal>(st, sym, y);
            if (!maps.in_domain<HighReal>(pre, grown(tol, grow))) continue;
            const double step = phi.evaluate(maps, st, sym, to_double(y));
            v.symbols.push_back(sym);
            dfs(pre, s + step, grown(tol, grow));
            v.symbols.pop_back();
        }
    };
    dfs(x, 0.0, kDeepTol);
    return hits;
}

std::vector<Point> sample_target_points(const OmegaPath& path, const MapFamily& maps, const Potential& phi,
                                        const TargetSpec& targets, std::size_t count, std::size_t depth,
                                        std::uint64_t seed, const CoverOptions& opts)
{
    const auto cells = build_target_cover(path, maps, phi, targets, depth, depth, opts);
    if (cells.empty()) throw Error(ErrorKind::EmptyCover, "no target cells at depth " + std::to_string(depth));
    std::vector<Point> out;
    out.reserve(count);
    const std::size_t start = static_cast<std::size_t>(seed % cells.size());
    for (std::size_t i = 0; i < count; ++i) out.push_back(cells[(start + i) % cells.size()].anchor);
    return out;
}

std::optional<Word> reachable_extension(const OmegaPath& path, const MapFamily& maps, const TargetSpec& targets,
                                        const Word& v, std::size_t gap_bound)
{
    const std::size_t end = end_position(v);
    for (std::size_t k = 0; k <= gap_bound && end + k <= path.horizon(); ++k) {
        std::optional<Word> found;
        auto check = [&](const Word& ext) {
            if (found) return;
            Word full = v;
            full.symbols.insert(full.symbols.end(), ext.symbols.begin(), ext.symbols.end());
            if (k > 0 && !v.empty() && !path.transition(end - 1).at(v.back() - 1, ext.symbols.front() - 1)) return;
            HighPoint z;
            try {
                z = targets.target(path, maps, full);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::NotContracting) return;
                throw;
            }
            const int pred = full.empty() ? 0 : full.back();
            if (locate_in_fiber(path, maps, z, end + k, targets.membership_depth, pred)) found = ext;
        };
        if (k == 0) {
            Word empty;
            empty.start_offset = end;
            check(empty);
        } else {
            for_each_cylinder(path, end, k, check);
        }
        if (found) return found;
    }
    return std::nullopt;
}

ReachabilityReport verify_target_reachability(const OmegaPath& path, const MapFamily& maps,
                                              const TargetSpec& targets, std::size_t depth, std::size_t gap_bound,
                                              std::size_t cap)
{
    if (depth > path.horizon()) throw Error(ErrorKind::OutOfHorizon, "reachability depth exceeds the horizon");
    ReachabilityReport report;
    for (const auto& v : enumerate_cylinders(path, 0, depth, cap)) {
        ++report.words_checked;
        const auto ext = reachable_extension(path, maps, targets, v, gap_bound);
        if (!ext) report.failures.push_back(v);
        else report.max_k = std::max(report.max_k, ext->size());
    }
    report.gamma_ratio = depth == 0 ? 0.0 : static_cast<double>(report.max_k) / static_cast<double>(depth);
    return report;
}

} // namespace rstp

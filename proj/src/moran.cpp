#include "rstp/moran.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "rstp/parallel.hpp"

namespace rstp {

namespace {

std::size_t end_position(const Word& w) { return w.start_offset + w.size(); }

Word concat(const Word& a, const Word& b)
{
    Word out = a;
    out.symbols.insert(out.symbols.end(), b.symbols.begin(), b.symbols.end());
    return out;
}

void bounding_box(const std::vector<HighPoint>& corners, int dim, HighPoint& lo, HighPoint& hi)
{
    lo = corners.front();
    hi = corners.front();
    for (const auto& c : corners)
        for (int i = 0; i < dim; ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (c[k] < lo[k]) lo[k] = c[k];
            if (c[k] > hi[k]) hi[k] = c[k];
        }
}

struct Candidate {
    Word word; // w * v
    Word tail; // v
    HighPoint anchor{};
    double diameter = 0.0;
    double log_weight = 0.0;
};

std::uint64_t mix(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Greedy choice of candidates whose balls B(anchor, 2 diam) are pairwise disjoint, scanning the
// lexicographic list from a seeded starting point.
std::vector<std::size_t> separated_subset(const std::vector<Candidate>& cands, const HighPoint& origin, int dim,
                                          std::uint64_t rotation)
{
    std::vector<std::size_t> chosen;
    if (cands.empty()) return chosen;
    double dmax = 0.0;
    for (const auto& c : cands) dmax = std::max(dmax, c.diameter);
    const double cell = 4.0 * dmax;
    std::map<std::pair<long long, long long>, std::vector<std::size_t>> grid;
    auto key_of = [&](const HighPoint& a) {
        long long kx = static_cast<long long>(std::floor(to_double((a[0] - origin[0]) / cell)));
        long long ky = dim == 2 ? static_cast<long long>(std::floor(to_double((a[1] - origin[1]) / cell))) : 0;
        return std::make_pair(kx, ky);
    };
    const std::size_t start = static_cast<std::size_t>(rotation % cands.size());
    for (std::size_t t = 0; t < cands.size(); ++t) {
        const std::size_t i = (start + t) % cands.size();
        const auto key = key_of(cands[i].anchor);
        bool ok = true;
        for (long long dx = -1; dx <= 1 && ok; ++dx)
            for (long long dy = (dim == 2 ? -1 : 0); dy <= (dim == 2 ? 1 : 0) && ok; ++dy) {
                const auto it = grid.find({key.first + dx, key.second + dy});
                if (it == grid.end()) continue;
                for (std::size_t j : it->second) {
                    const double d = distance<HighReal>(cands[i].anchor, cands[j].anchor, dim);
                    if (d < 2.0 * cands[i].diameter + 2.0 * cands[j].diameter) {
                        ok = false;
                        break;
                    }
                }
            }
        if (!ok) continue;
        grid[key].push_back(i);
        chosen.push_back(i);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

[[noreturn]] void infeasible(int g, const Word& w, const std::string& what)
{
    throw Error(ErrorKind::ScheduleInfeasible,
                "generation " + std::to_string(g) + ", word " + to_string(w) + ": " + what);
}

} // namespace

void validate_schedule(const ScheduleSpec& schedule, const OmegaPath& path)
{
    const auto g = static_cast<std::size_t>(std::max(schedule.generations, 0));
    if (schedule.generations < 1) throw Error(ErrorKind::InvalidSchedule, "at least one generation is required");
    if (schedule.epsilon.size() != g || schedule.p_min.size() != g)
        throw Error(ErrorKind::InvalidSchedule, "epsilon and p_min need one entry per generation");
    for (std::size_t i = 0; i < g; ++i) {
        if (!(schedule.epsilon[i] > 0.0 && schedule.epsilon[i] < 1.0))
            throw Error(ErrorKind::InvalidSchedule, "epsilon[" + std::to_string(i) + "] must lie in (0, 1)");
        if (schedule.p_min[i] < 1)
            throw Error(ErrorKind::InvalidSchedule, "p_min[" + std::to_string(i) + "] must be positive");
        if (i > 0 && !(schedule.epsilon[i] < schedule.epsilon[i - 1]))
            throw Error(ErrorKind::InvalidSchedule, "epsilon must be strictly decreasing");
        if (i > 0 && schedule.p_min[i] < schedule.p_min[i - 1])
            throw Error(ErrorKind::InvalidSchedule, "p_min must be nondecreasing");
    }
    if (schedule.gap < 1) throw Error(ErrorKind::InvalidSchedule, "gap must be at least 1");
    const std::size_t h = path.horizon();
    for (std::size_t o = 0; o + schedule.gap <= h; ++o) {
        try {
            mixing_index(path, o, static_cast<int>(schedule.gap));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotMixingWithinBound) throw;
            throw Error(ErrorKind::InvalidSchedule, "gap " + std::to_string(schedule.gap) +
                                                        " is below the mixing index at offset " + std::to_string(o));
        }
    }
}

std::size_t MoranTree::add(MoranNode node, std::optional<std::size_t> parent)
{
    node.parent = parent;
    nodes.push_back(std::move(node));
    const std::size_t id = nodes.size() - 1;
    if (parent) nodes.at(*parent).children.push_back(id);
    return id;
}

std::vector<std::size_t> MoranTree::leaves() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].children.empty()) out.push_back(i);
    return out;
}

std::vector<std::size_t> MoranTree::generation(int g) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].generation == g) out.push_back(i);
    return out;
}

int MoranTree::depth() const
{
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.generation);
    return d;
}

double potential_ratio(const MapFamily& maps, const Potential& psi, const Potential& phi)
{
    if (psi.table_values().empty() && phi.table_values().empty() && psi.psi_coeff() != 0.0)
        return phi.psi_coeff() / psi.psi_coeff();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t st = 0; st < maps.states(); ++st) {
        const int state = static_cast<int>(st);
        for (int s = 1; s <= maps.symbols(state); ++s) {
            const auto [plo, phi_hi] = phi.bounds(maps, state, s);
            const auto [slo, shi] = psi.bounds(maps, state, s);
            if (slo < 0.0) best = std::max(best, plo / slo);
            if (shi < 0.0) best = std::max(best, phi_hi / shi);
        }
    }
    return best;
}

MoranTree build_moran_tree(const OmegaPath& path, const MapFamily& maps, const Potential& psi, const Potential& phi,
                           const TargetSpec& targets, const ScheduleSpec& schedule, std::uint64_t seed,
                           const MoranOptions& opts)
{
    validate_schedule(schedule, path);
    const int dim = maps.dim();
    const double alpha = opts.alpha >= 0.0 ? opts.alpha : potential_ratio(maps, psi, phi);
    const double log_u = std::log(maps.domain_diameter());

    MoranTree tree;
    tree.dim = dim;
    MoranNode root;
    root.lo = maps.domain_lo_high();
    root.hi = maps.domain_hi_high();
    root.anchor = maps.anchor_high();
    root.diameter = maps.domain_diameter();
    root.pre_diameter = root.diameter;
    tree.add(std::move(root), std::nullopt);

    std::vector<std::size_t> parents{0};
    for (int g = 1; g <= schedule.generations; ++g) {
        const auto gi = static_cast<std::size_t>(g - 1);
        const std::size_t p = schedule.p_min[gi];
        const double eps = schedule.epsilon[gi];
        std::vector<std::vector<MoranNode>> produced(parents.size());

        parallel_for(parents.size(), opts.threads, [&](std::size_t pi) {
            const MoranNode& parent = tree.nodes[parents[pi]];
            const Word& w = parent.word;
            const std::size_t offset = w.empty() ? 0 : end_position(w) + schedule.gap - 1;
            if (offset + p > path.horizon()) infeasible(g, w, "candidates run past the horizon");
            const auto tails = enumerate_cylinders(path, offset, p, opts.cap);

            std::vector<Candidate> cands;
            for (const auto& v : tails) {
                Candidate c;
                if (w.empty()) {
                    c.word = v;
                } else {
                    try {
                        c.word = join_words(path, w, v, schedule.gap);
                    } catch (const Error& e) {
                        if (e.kind() == ErrorKind::NoBridge || e.kind() == ErrorKind::NotAdmissible) continue;
                        throw;
                    }
                }
                c.tail = v;
                const auto corners = cylinder_corners<HighReal>(path, maps, c.word);
                c.diameter = cylinder_diameter<HighReal>(corners, dim);
                c.anchor = compose<HighReal>(path, maps, c.word, maps.anchor_high());
                if (maps.perturbed()) {
                    const double sp = birkhoff_sum_at_anchor(path, maps, psi, c.word);
                    const double sf = birkhoff_sum_at_anchor(path, maps, phi, c.word);
                    if (sp == 0.0 || std::abs(sf / sp - alpha) > eps) continue;
                }
                c.log_weight = birkhoff_sum_at_anchor(path, maps, opts.gibbs, v);
                cands.push_back(std::move(c));
            }
            const auto rotation = mix(seed ^ mix(static_cast<std::uint64_t>(parents[pi]) * 1315423911ULL +
                                                 static_cast<std::uint64_t>(g)));
            const auto chosen = separated_subset(cands, parent.lo, dim, rotation);
            if (chosen.empty())
                throw Error(ErrorKind::EmptySelection,
                            "generation " + std::to_string(g) + ": no admissible child below " + to_string(w));

            std::vector<double> logs;
            for (std::size_t i : chosen) logs.push_back(cands[i].log_weight);
            const double norm = log_sum_exp(logs);

            for (std::size_t idx = 0; idx < chosen.size(); ++idx) {
                const Candidate& c = cands[chosen[idx]];
                // c* : the candidate followed by the connector that reaches the target time
                Word star = c.word;
                HighPoint z;
                if (targets.kind == TargetKind::PerTime) {
                    const std::size_t n = end_position(c.word) + schedule.gap - 1;
                    if (n > path.horizon()) infeasible(g, c.word, "escort runs past the horizon");
                    Word at;
                    at.start_offset = n;
                    z = targets.target(path, maps, at);
                    const int pred = schedule.gap == 1 ? c.word.back() : 0;
                    const auto code = locate_in_fiber(path, maps, z, n, 1, pred);
                    if (!code) infeasible(g, c.word, "target is not in the fiber after the word");
                    const auto bridge =
                        bridge_word(path, end_position(c.word) - 1, c.word.back(), code->symbols.front(), schedule.gap);
                    star.symbols.insert(star.symbols.end(), bridge.begin(), bridge.end());
                } else {
                    const auto ext = reachable_extension(path, maps, targets, c.word, schedule.reach_bound);
                    if (!ext) infeasible(g, c.word, "no reachable target within the extension budget");
                    star = concat(c.word, *ext);
                    z = targets.target(path, maps, star);
                }
                const std::size_t n = end_position(star);
                const auto code = locate_in_fiber(path, maps, z, n, path.horizon() - n, star.back());
                if (!code || code->empty()) infeasible(g, c.word, "escort runs past the horizon");

                const double s_phi = birkhoff_sum_at_image(path, maps, phi, star, to_double(z));
                const double r = std::exp(s_phi - static_cast<double>(star.size()) * eps * eps * eps);
                std::size_t k = 0;
                for (std::size_t j = 1; j <= code->size(); ++j) {
                    const auto corners = cylinder_corners<HighReal>(path, maps, code->prefix(j));
                    bool inside = true;
                    for (const auto& q : corners)
                        if (distance<HighReal>(q, z, dim) > r) {
                            inside = false;
                            break;
                        }
                    if (inside) {
                        k = j;
                        break;
                    }
                }
                if (k == 0) infeasible(g, c.word, "escort runs past the horizon");

                MoranNode node;
                node.generation = g;
                node.pre_escort = c.word;
                node.word = concat(star, code->prefix(k));
                node.escort_length = node.word.size() - c.word.size();
                node.pre_diameter = c.diameter;
                node.target = z;
                const auto corners = cylinder_corners<HighReal>(path, maps, node.word);
                node.diameter = cylinder_diameter<HighReal>(corners, dim);
                bounding_box(corners, dim, node.lo, node.hi);
                node.anchor = compose<HighReal>(path, maps, node.word, maps.anchor_high());
                if (!(node.diameter > 0.0) || node.diameter / maps.domain_diameter() < opts.precision_floor)
                    throw Error(ErrorKind::ExplosionGuard, "generation " + std::to_string(g) +
                                                               ": cylinder below the working precision");

                const double lhs_log = std::log(node.diameter) - log_u;
                const double rhs_log = (1.0 + alpha + 2.0 * eps) * (std::log(c.diameter) - log_u);
                if (lhs_log < rhs_log)
                    infeasible(g, c.word, "escort growth inequality fails (log diameter " + std::to_string(lhs_log) +
                                              " < " + std::to_string(rhs_log) + ")");

                const HighPoint tx = invert_along<HighReal>(path, maps, star, node.anchor);
                node.hit_lhs = distance<HighReal>(tx, z, dim);
                node.hit_rhs = std::exp(birkhoff_sum_high(path, maps, phi, star, node.anchor));
                if (!(node.hit_lhs <= node.hit_rhs)) infeasible(g, c.word, "leaf anchor misses the target");

                node.mass = parent.mass * std::exp(c.log_weight - norm);
                produced[pi].push_back(std::move(node));
            }
        });

        std::vector<std::size_t> next;
        for (std::size_t pi = 0; pi < parents.size(); ++pi)
            for (auto& node : produced[pi]) next.push_back(tree.add(std::move(node), parents[pi]));
        parents = std::move(next);
    }
    return tree;
}

double mass_of_ball(const MoranTree& tree, const HighPoint& center, double radius)
{
    if (tree.nodes.empty()) return 0.0;
    const HighReal r(radius);
    const HighReal r2 = r * r;
    const int dim = tree.dim;
    std::function<double(std::size_t)> visit = [&](std::size_t id) -> double {
        const MoranNode& n = tree.nodes[id];
        HighReal near2 = 0, far2 = 0;
        for (int i = 0; i < dim; ++i) {
            const auto k = static_cast<std::size_t>(i);
            HighReal gap = 0;
            if (center[k] < n.lo[k]) gap = n.lo[k] - center[k];
            else if (center[k] > n.hi[k]) gap = center[k] - n.hi[k];
            near2 += gap * gap;
            const HighReal a = abs(center[k] - n.lo[k]);
            const HighReal b = abs(center[k] - n.hi[k]);
            const HighReal f = a > b ? a : b;
            far2 += f * f;
        }
        if (near2 > r2) return 0.0;
        if (far2 <= r2 || n.children.empty()) return n.mass;
        double sum = 0.0;
        for (std::size_t c : n.children) sum += visit(c);
        return sum;
    };
    return visit(0);
}

ProbeResult mass_exponent_probe(const MoranTree& tree, std::size_t num_centers, const std::vector<double>& radii,
                                std::uint64_t seed, double domain_diameter)
{
    ProbeResult out;
    out.min_exponent = std::numeric_limits<double>::infinity();
    const auto leaves = tree.leaves();
    if (leaves.empty() || num_centers == 0) throw Error(ErrorKind::EmptyInput, "no leaves to probe");
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t id : leaves) smallest = std::min(smallest, tree.nodes[id].diameter);
    std::mt19937_64 gen(seed);
    for (std::size_t c = 0; c < num_centers; ++c) {
        const auto& leaf = tree.nodes[leaves[static_cast<std::size_t>(gen() % leaves.size())]];
        for (double r : radii) {
            if (!(r > smallest && r < domain_diameter && r < 1.0)) continue;
            ProbeRow row;
            row.center = to_double(leaf.anchor);
            row.radius = r;
            row.mass = mass_of_ball(tree, leaf.anchor, r);
            row.exponent = std::log(row.mass) / std::log(r);
            out.min_exponent = std::min(out.min_exponent, row.exponent);
            out.rows.push_back(row);
        }
    }
    if (out.rows.empty()) throw Error(ErrorKind::EmptyInput, "no probe radius inside the admissible range");
    return out;
}

std::vector<double> default_probe_radii(const MoranTree& tree, std::size_t count)
{
    std::vector<double> out;
    const auto leaves = tree.leaves();
    const auto first = tree.generation(1);
    if (leaves.empty() || first.empty() || count == 0) return out;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t id : leaves) lo = std::min(lo, tree.nodes[id].diameter);
    double hi = 0.0;
    for (std::size_t id : first) hi = std::max(hi, tree.nodes[id].pre_diameter);
    if (!(hi > lo)) return out;
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(std::exp(a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(count + 1)));
    return out;
}

} // namespace rstp

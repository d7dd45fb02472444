#include "rstp/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rstp/config.hpp"
#include "rstp/dimension.hpp"
#include "rstp/moran.hpp"
#include "rstp/thermo.hpp"

namespace rstp::cli {

using nlohmann::json;

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::optional<std::size_t> depth;
    std::string mode = "bowen-ruelle";
    std::string potential = "psi";
    std::string set = "attractor";
};

struct Context {
    ExperimentConfig cfg;
    OmegaPath path;
    std::optional<MapFamily> maps;
    std::filesystem::path dir;
    int threads = 1;

    PartitionOptions partition() const
    {
        PartitionOptions o;
        o.rule = cfg.analysis.anchor_rule;
        o.cap = cfg.analysis.cap;
        o.threads = threads;
        return o;
    }
    CoverOptions cover() const
    {
        CoverOptions o;
        o.cap = cfg.analysis.cap;
        o.threads = threads;
        return o;
    }
    std::pair<double, double> bracket() const
    {
        return cfg.analysis.bracket.value_or(std::make_pair(0.0, static_cast<double>(cfg.dim) + 0.5));
    }
    std::vector<double> scales() const
    {
        return geometric_scales(cfg.analysis.scale_base, cfg.analysis.scale_k_lo, cfg.analysis.scale_k_hi);
    }
};

std::string overrides_of(const std::string& command, const Flags& f)
{
    std::string s;
    if (f.seed) s += "seed=" + std::to_string(*f.seed) + ";";
    if (f.depth) s += "depth=" + std::to_string(*f.depth) + ";";
    if (command == "pressure") s += "mode=" + f.mode + ";potential=" + f.potential + ";";
    if (command == "box-dim") s += "set=" + f.set + ";";
    return s;
}

std::filesystem::path output_root(const Flags& f)
{
    if (!f.out.empty()) return f.out;
    if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
    return "rstp-out";
}

Context prepare(const std::string& command, const Flags& f)
{
    Context c;
    c.cfg = load_config(f.config);
    if (f.seed) c.cfg.seed = *f.seed;
    if (f.depth) {
        c.cfg.analysis.depth = *f.depth;
        if (command == "pressure") c.cfg.analysis.pressure_n = *f.depth;
    }
    c.threads = std::max(f.threads, 1);
    c.path = c.cfg.path();
    c.maps.emplace(c.cfg.map_family());
    c.dir = output_root(f) / hex64(config_hash(c.cfg.source, overrides_of(command, f)));
    return c;
}

std::string word_text(const Word& w) { return to_string(w); }

json root_json(const RootResult& r)
{
    return {{"root", r.root}, {"lo", r.lo}, {"hi", r.hi}, {"residual", r.residual}, {"n", r.n_used}};
}

json cmd_pressure(Context& c, const Flags& f)
{
    Potential pot;
    if (f.potential == "zero") pot = Potential::zero();
    else if (f.potential == "psi") pot = c.cfg.psi;
    else pot = c.cfg.psi + c.cfg.phi;
    const auto curve = pressure_estimate(c.path, *c.maps, pot, c.cfg.analysis.n_schedule, c.partition());
    std::string csv = csv_row({"n", "log_z", "pressure_n"});
    for (const auto& [n, p] : curve.samples)
        csv += csv_row({std::to_string(n), format_double(p * static_cast<double>(n)), format_double(p)});
    const auto mode = f.mode == "target" ? RootMode::Target : RootMode::BowenRuelle;
    const auto root = solve_pressure_root(c.path, *c.maps, c.cfg.psi, c.cfg.phi, mode, c.bracket(),
                                          c.cfg.analysis.pressure_n, c.partition());
    write_atomic(c.dir / "pressure_curve.csv", csv);
    json s = {{"command", "pressure"},
              {"potential", f.potential},
              {"potential_form", pot.describe()},
              {"pressure", curve.extrapolated},
              {"uncertainty", curve.uncertainty},
              {"mode", f.mode},
              {"root", root_json(root)}};
    return s;
}

std::string box_rows(const std::string& set, const BoxCountResult& r)
{
    std::string csv;
    for (std::size_t i = 0; i < r.scales.size(); ++i)
        csv += csv_row({set, format_double(r.scales[i]), std::to_string(r.counts[i]),
                        format_double(-std::log(r.scales[i])), format_double(std::log(static_cast<double>(r.counts[i]))),
                        i >= r.window.first && i <= r.window.second ? "1" : "0"});
    return csv;
}

json box_json(const BoxCountResult& r)
{
    return {{"slope", r.slope},
            {"slope_stderr", r.slope_stderr},
            {"intercept", r.intercept},
            {"window", {r.window.first, r.window.second}}};
}

const std::vector<std::string> kBoxHeader{"set", "scale", "count", "log_inv_scale", "log_count", "in_window"};

json cmd_dimension(Context& c)
{
    DimensionOptions o;
    o.pressure_n = c.cfg.analysis.pressure_n;
    o.partition = c.partition();
    o.cover = c.cover();
    o.boxes.threads = c.threads;
    const auto rep = dimension_report(c.path, *c.maps, c.cfg.psi, c.cfg.phi, c.cfg.targets, c.cfg.analysis.depth,
                                      c.scales(), o);
    write_atomic(c.dir / "dimension_boxes.csv",
                 csv_row(kBoxHeader) + box_rows("attractor", rep.attractor) + box_rows("target", rep.target));
    return {{"command", "dimension"},
            {"depth", c.cfg.analysis.depth},
            {"t0", rep.t0},
            {"q0", rep.q0},
            {"attractor_slope", rep.attractor_slope},
            {"target_slope", rep.target_slope},
            {"attractor_gap", rep.attractor_gap},
            {"target_gap", rep.target_gap},
            {"attractor_fit", box_json(rep.attractor)},
            {"target_fit", box_json(rep.target)}};
}

std::pair<std::size_t, std::size_t> cover_depths(const Context& c)
{
    return c.cfg.analysis.cover_depths.value_or(std::make_pair(c.cfg.analysis.depth, c.cfg.analysis.depth));
}

json cmd_target_cover(Context& c)
{
    const auto [lo, hi] = cover_depths(c);
    const auto cells = build_target_cover(c.path, *c.maps, c.cfg.phi, c.cfg.targets, lo, hi, c.cover());
    std::string csv = csv_row({"word", "length", "lo_x", "lo_y", "hi_x", "hi_y", "diameter", "radius", "anchor_x",
                               "anchor_y"});
    for (const auto& cell : cells)
        csv += csv_row({word_text(cell.word), std::to_string(cell.word.size()), format_double(cell.box.lo[0]),
                        format_double(cell.box.lo[1]), format_double(cell.box.hi[0]), format_double(cell.box.hi[1]),
                        format_double(cell.diameter), format_double(cell.radius), format_double(cell.anchor[0]),
                        format_double(cell.anchor[1])});
    write_atomic(c.dir / "target_cover.csv", csv);
    double dmax = 0.0;
    for (const auto& cell : cells) dmax = std::max(dmax, cell.diameter);
    return {{"command", "target-cover"},
            {"depth_lo", lo},
            {"depth_hi", hi},
            {"cells", cells.size()},
            {"max_diameter", dmax}};
}

json cmd_moran(Context& c)
{
    if (!c.cfg.schedule) throw Error(ErrorKind::ConfigError, "/schedule: missing");
    const auto q = solve_pressure_root(c.path, *c.maps, c.cfg.psi, c.cfg.phi, RootMode::Target, c.bracket(),
                                       c.cfg.analysis.pressure_n, c.partition());
    MoranOptions o;
    o.threads = c.threads;
    o.cap = c.cfg.analysis.cap;
    o.gibbs = (c.cfg.psi + c.cfg.phi).scaled(q.root);
    const auto tree = build_moran_tree(c.path, *c.maps, c.cfg.psi, c.cfg.phi, c.cfg.targets, *c.cfg.schedule,
                                       c.cfg.seed, o);
    const auto radii = default_probe_radii(tree, c.cfg.analysis.probe_radii);
    const auto probe =
        mass_exponent_probe(tree, c.cfg.analysis.probe_centers, radii, c.cfg.seed, c.maps->domain_diameter());

    std::string dump = csv_row({"id", "parent", "generation", "word", "pre_escort", "escort_length", "mass", "diameter",
                                "pre_diameter", "lo_x", "lo_y", "hi_x", "hi_y", "anchor_x", "anchor_y", "hit_lhs",
                                "hit_rhs"});
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& n = tree.nodes[i];
        const auto a = to_double(n.anchor);
        dump += csv_row({std::to_string(i), n.parent ? std::to_string(*n.parent) : "", std::to_string(n.generation),
                         word_text(n.word), word_text(n.pre_escort), std::to_string(n.escort_length),
                         format_double(n.mass), format_double(n.diameter), format_double(n.pre_diameter),
                         format_double(to_double(n.lo[0])), format_double(to_double(n.lo[1])),
                         format_double(to_double(n.hi[0])), format_double(to_double(n.hi[1])), format_double(a[0]), format_double(a[1]), format_double(n.hit_lhs),
                         format_double(n.hit_rhs)});
    }
    std::string pcsv = csv_row({"center_x", "center_y", "radius", "mass", "exponent"});
    for (const auto& r : probe.rows)
        pcsv += csv_row({format_double(r.center[0]), format_double(r.center[1]), format_double(r.radius),
                         format_double(r.mass), format_double(r.exponent)});
    write_atomic(c.dir / "moran_tree.csv", dump);
    write_atomic(c.dir / "moran_probe.csv", pcsv);

    double total = 0.0;
    for (std::size_t id : tree.leaves()) total += tree.nodes[id].mass;
    return {{"command", "moran"},
            {"q0", q.root},
            {"alpha", potential_ratio(*c.maps, c.cfg.psi, c.cfg.phi)},
            {"generations", tree.depth()},
            {"nodes", tree.nodes.size()},
            {"leaves", tree.leaves().size()},
            {"leaf_mass_total", total},
            {"probes", probe.rows.size()},
            {"min_exponent", probe.min_exponent}};
}

json cmd_box_dim(Context& c, const Flags& f)
{
    const auto depth = c.cfg.analysis.depth;
    BoxCountOptions bo;
    bo.threads = c.threads;
    BoxCountResult r;
    if (f.set == "target") {
        const auto [lo, hi] = cover_depths(c);
        std::vector<Box> boxes;
        for (const auto& cell : build_target_cover(c.path, *c.maps, c.cfg.phi, c.cfg.targets, lo, hi, c.cover()))
            boxes.push_back(cell.box);
        r = box_count(boxes, c.cfg.dim, c.scales(), bo);
    } else {
        const auto words = enumerate_cylinders(c.path, 0, depth, c.cfg.analysis.cap);
        std::vector<Point> pts;
        pts.reserve(words.size());
        for (const auto& w : words) pts.push_back(project_point(c.path, *c.maps, w, depth));
        r = box_count(pts, c.cfg.dim, c.scales(), bo);
    }
    write_atomic(c.dir / ("box_dim_" + f.set + ".csv"), csv_row(kBoxHeader) + box_rows(f.set, r));
    json s = box_json(r);
    s["command"] = "box-dim";
    s["set"] = f.set;
    s["depth"] = depth;
    return s;
}

int cmd_validate(const Flags& f, std::ostream& out)
{
    std::ifstream in(f.config, std::ios::binary);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read " + f.config);
    std::ostringstream text;
    text << in.rdbuf();
    json doc;
    try {
        doc = json::parse(text.str());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, std::string("malformed JSON: ") + e.what());
    }
    const auto dir = output_root(f) / hex64(config_hash(doc, overrides_of("validate", f)));
    json checks = json::array();
    bool ok = true;
    auto record = [&](const std::string& name, bool passed, json detail) {
        ok = ok && passed;
        checks.push_back({{"check", name}, {"ok", passed}, {"detail", std::move(detail)}});
    };

    std::optional<ExperimentConfig> cfg;
    try {
        cfg = parse_config(text.str());
        record("load", true, "model, maps and targets are well formed");
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) throw;
        record("load", false, e.what());
    }
    if (cfg) {
        if (f.seed) cfg->seed = *f.seed;
        const auto path = cfg->path();
        const auto maps = cfg->map_family();
        const auto& a = cfg->analysis;

        for (const auto& [name, pot] : {std::make_pair("psi", cfg->psi), std::make_pair("psi+phi", cfg->psi + cfg->phi)}) {
            const double s = average_sup(*cfg->model, maps, pot);
            record(std::string("contraction ") + name, s < 0.0, {{"average_sup", s}});
        }
        if (cfg->schedule) {
            try {
                validate_schedule(*cfg->schedule, path);
                record("schedule", true, "constraints hold");
            } catch (const Error& e) {
                record("schedule", false, e.what());
            }
        }
        if (cfg->targets.kind == TargetKind::PerTime) {
            json missing = json::array();
            for (std::size_t k = 0; k <= a.reach_depth && k <= path.horizon(); ++k) {
                Word at;
                at.start_offset = k;
                const HighPoint z = cfg->targets.target(path, maps, at);
                if (!locate_in_fiber(path, maps, z, k, cfg->targets.membership_depth)) missing.push_back(k);
            }
            record("targets in fiber", missing.empty(), {{"times_outside", missing}});
        } else {
            const auto rep = verify_target_reachability(path, maps, cfg->targets, a.reach_depth, a.gap_bound, a.cap);
            json failures = json::array();
            for (const auto& w : rep.failures) failures.push_back(word_text(w));
            record("target reachability", rep.failures.empty(),
                   {{"words_checked", rep.words_checked},
                    {"max_k", rep.max_k},
                    {"gamma_ratio", rep.gamma_ratio},
                    {"failures", failures}});
        }
    }
    const json report = {{"command", "validate"}, {"ok", ok}, {"checks", checks}};
    write_atomic(dir / "validate_report.json", report.dump(2) + "\n");
    out << report.dump(2) << "\n";
    return ok ? 0 : 1;
}

} // namespace

int exit_code_for(ErrorKind kind)
{
    if (is_configuration_error(kind)) return 2;
    switch (kind) {
    case ErrorKind::ExplosionGuard:
    case ErrorKind::Overflow:
    case ErrorKind::ScheduleInfeasible:
    case ErrorKind::EmptySelection:
    case ErrorKind::NoSignChange:
    case ErrorKind::NotMixingWithinBound:
    case ErrorKind::DegenerateFit:
    case ErrorKind::EmptyCover:
        return 3;
    default:
        return 1;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Random subshift shrinking-target experiments"};
    app.require_subcommand(1);
    Flags f;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "experiment configuration (JSON)")->required();
        sub->add_option("--out", f.out, "output root directory");
        sub->add_option("--seed", f.seed, "environment seed (overrides the config)");
        sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--depth", f.depth, "analysis depth (overrides the config)")->check(CLI::PositiveNumber);
    };
    auto* pressure = app.add_subcommand("pressure", "pressure curve and pressure root");
    common(pressure);
    pressure->add_option("--mode", f.mode)->check(CLI::IsMember({"bowen-ruelle", "target"}));
    pressure->add_option("--potential", f.potential)->check(CLI::IsMember({"zero", "psi", "psi+phi"}));
    auto* dimension = app.add_subcommand("dimension", "pressure roots against box-counting slopes");
    common(dimension);
    auto* cover = app.add_subcommand("target-cover", "cells covering the shrinking-target set");
    common(cover);
    auto* moran = app.add_subcommand("moran", "Moran tree and mass exponent probe");
    common(moran);
    auto* box = app.add_subcommand("box-dim", "box-counting slope of the attractor or the target cover");
    common(box);
    box->add_option("--set", f.set)->check(CLI::IsMember({"attractor", "target"}));
    auto* validate = app.add_subcommand("validate", "configuration invariants and target reachability");
    common(validate);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(f, out);
        const std::string name = app.get_subcommands().front()->get_name();
        Context c = prepare(name, f);
        json summary;
        if (pressure->parsed()) summary = cmd_pressure(c, f);
        else if (dimension->parsed()) summary = cmd_dimension(c);
        else if (cover->parsed()) summary = cmd_target_cover(c);
        else if (moran->parsed()) summary = cmd_moran(c);
        else summary = cmd_box_dim(c, f);
        summary["config_hash"] = c.dir.filename().string();
        const std::string file = (name == "box-dim" ? "box_dim_" + f.set : name == "target-cover" ? "target_cover" : name) +
                                 "_summary.json";
        write_atomic(c.dir / file, summary.dump(2) + "\n");
        out << summary.dump(2) << "\n";
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, const char* const* argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace rstp::cli

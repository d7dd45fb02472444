#include "rstp/config.hpp"

#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace rstp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw Error(ErrorKind::ConfigError, (where.empty() ? std::string("/") : where) + ": " + what);
}

std::string child(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string child(const std::string& where, std::size_t i) { return where + "/" + std::to_string(i); }

void allow_keys(const json& obj, const std::string& where, const std::set<std::string>& keys)
{
    if (!obj.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : obj.items())
        if (!keys.count(k)) fail(child(where, k), "unknown key");
}

const json* find(const json& obj, const std::string& key)
{
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const json& need(const json& obj, const std::string& key, const std::string& where)
{
    const json* j = find(obj, key);
    if (!j) fail(child(where, key), "missing");
    return *j;
}

const json& need_array(const json& j, const std::string& where)
{
    if (!j.is_array()) fail(where, "expected an array");
    return j;
}

HighReal number(const json& j, const std::string& where)
{
    if (j.is_number()) {
        std::ostringstream os;
        os.precision(17);
        os << j.get<double>();
        return HighReal(os.str());
    }
    if (j.is_string()) {
        try {
            return parse_rational(j.get<std::string>());
        } catch (const Error& e) {
            fail(where, e.what());
        }
    }
    fail(where, "expected a number or a rational string");
}

double real(const json& j, const std::string& where) { return to_double(number(j, where)); }

std::size_t count(const json& j, const std::string& where, std::size_t min = 0)
{
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(where, "expected a nonnegative integer");
    const auto v = j.get<std::size_t>();
    if (v < min) fail(where, "must be at least " + std::to_string(min));
    return v;
}

HighPoint point(const json& j, int dim, const std::string& where)
{
    HighPoint p{HighReal(0), HighReal(0)};
    if (dim == 1 && !j.is_array()) {
        p[0] = number(j, where);
        return p;
    }
    need_array(j, where);
    if (j.size() != static_cast<std::size_t>(dim)) fail(where, "expected " + std::to_string(dim) + " coordinates");
    for (std::size_t i = 0; i < j.size(); ++i) p[i] = number(j[i], child(where, i));
    return p;
}

std::shared_ptr<const EnvironmentModel> parse_environment(const json& env, ExperimentConfig& cfg)
{
    const std::string where = "/environment";
    allow_keys(env, where, {"full_shift", "states", "markov", "start", "seed", "horizon"});
    if (const json* s = find(env, "seed")) cfg.seed = count(*s, child(where, "seed"));
    if (const json* h = find(env, "horizon")) cfg.horizon = count(*h, child(where, "horizon"), 1);
    if (const json* fs = find(env, "full_shift")) {
        if (find(env, "states") || find(env, "markov")) fail(where, "full_shift excludes states and markov");
        const std::size_t l = count(*fs, child(where, "full_shift"), 2);
        return std::make_shared<const EnvironmentModel>(EnvironmentModel::full_shift(static_cast<int>(l)));
    }
    const json& states = need_array(need(env, "states", where), child(where, "states"));
    const json& markov_j = need_array(need(env, "markov", where), child(where, "markov"));
    std::vector<std::vector<double>> markov;
    for (std::size_t i = 0; i < markov_j.size(); ++i) {
        const auto w = child(child(where, "markov"), i);
        std::vector<double> row;
        for (std::size_t k = 0; k < need_array(markov_j[i], w).size(); ++k)
            row.push_back(real(markov_j[i][k], child(w, k)));
        markov.push_back(std::move(row));
    }
    std::vector<EnvState> out;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto w = child(child(where, "states"), i);
        allow_keys(states[i], w, {"l", "A"});
        EnvState st;
        st.id = static_cast<int>(i);
        st.l = static_cast<int>(count(need(states[i], "l", w), child(w, "l"), 1));
        out.push_back(std::move(st));
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto w = child(child(where, "states"), i);
        const json* a = find(states[i], "A");
        if (!a) {
            // full matrices towards every successor the chain can reach
            if (i < markov.size())
                for (std::size_t j = 0; j < markov[i].size() && j < out.size(); ++j)
                    if (markov[i][j] > 0.0) out[i].a_to.emplace(static_cast<int>(j), BinaryMatrix(out[i].l, out[j].l, true));
            continue;
        }
        if (!a->is_object()) fail(child(w, "A"), "expected an object keyed by successor state");
        for (const auto& [key, rows] : a->items()) {
            const auto wa = child(child(w, "A"), key);
            std::size_t succ = 0;
            try {
                std::size_t used = 0;
                succ = std::stoul(key, &used);
                if (used != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                fail(wa, "successor must be a state index");
            }
            if (succ >= out.size()) fail(wa, "no state " + key);
            std::vector<std::vector<int>> m;
            for (std::size_t r = 0; r < need_array(rows, wa).size(); ++r) {
                std::vector<int> row;
                for (std::size_t c = 0; c < need_array(rows[r], child(wa, r)).size(); ++c) {
                    const json& e = rows[r][c];
                    if (!e.is_number_integer() || (e.get<int>() != 0 && e.get<int>() != 1))
                        fail(child(child(wa, r), c), "entries must be 0 or 1");
                    row.push_back(e.get<int>());
                }
                m.push_back(std::move(row));
            }
            try {
                out[i].a_to.emplace(static_cast<int>(succ), BinaryMatrix::from_rows(m));
            } catch (const Error& e) {
                fail(wa, e.what());
            }
        }
    }
    int start = 0;
    if (const json* s = find(env, "start")) start = static_cast<int>(count(*s, child(where, "start")));
    return std::make_shared<const EnvironmentModel>(std::move(out), std::move(markov), start);
}

MapSpec parse_map(const json& j, int dim, const std::string& where)
{
    allow_keys(j, where, {"ratio", "offset", "rotation", "perturbation"});
    MapSpec m;
    m.ratio = number(need(j, "ratio", where), child(where, "ratio"));
    m.offset = point(need(j, "offset", where), dim, child(where, "offset"));
    if (const json* r = find(j, "rotation")) m.rotation_degrees = real(*r, child(where, "rotation"));
    if (const json* p = find(j, "perturbation")) m.perturbation = real(*p, child(where, "perturbation"));
    return m;
}

void parse_maps(const json& maps, ExperimentConfig& cfg)
{
    const std::string where = "/maps";
    allow_keys(maps, where, {"dim", "domain", "states", "all_states"});
    cfg.dim = 1;
    if (const json* d = find(maps, "dim")) cfg.dim = static_cast<int>(count(*d, child(where, "dim"), 1));
    if (cfg.dim > 2) fail(child(where, "dim"), "dimension must be 1 or 2");
    cfg.lo = {HighReal(0), HighReal(0)};
    cfg.hi = {HighReal(1), HighReal(cfg.dim == 2 ? 1 : 0)};
    if (const json* dom = find(maps, "domain")) {
        const auto w = child(where, "domain");
        allow_keys(*dom, w, {"lo", "hi"});
        cfg.lo = point(need(*dom, "lo", w), cfg.dim, child(w, "lo"));
        cfg.hi = point(need(*dom, "hi", w), cfg.dim, child(w, "hi"));
    }
    auto row_of = [&](const json& row, const std::string& w) {
        std::vector<MapSpec> specs;
        for (std::size_t s = 0; s < need_array(row, w).size(); ++s) specs.push_back(parse_map(row[s], cfg.dim, child(w, s)));
        return specs;
    };
    const json* states = find(maps, "states");
    const json* all = find(maps, "all_states");
    if ((states == nullptr) == (all == nullptr)) fail(where, "give exactly one of states and all_states");
    if (all) {
        const auto row = row_of(*all, child(where, "all_states"));
        cfg.maps.assign(cfg.model->size(), row);
    } else {
        need_array(*states, child(where, "states"));
        for (std::size_t i = 0; i < states->size(); ++i)
            cfg.maps.push_back(row_of((*states)[i], child(child(where, "states"), i)));
    }
}

Potential parse_phi(const json& j, const ExperimentConfig& cfg)
{
    const std::string where = "/potentials/phi";
    allow_keys(j, where, {"alpha", "table"});
    Potential phi;
    if (const json* a = find(j, "alpha")) {
        const double alpha = real(*a, child(where, "alpha"));
        if (alpha < 0.0) fail(child(where, "alpha"), "must be nonnegative");
        phi = Potential::psi(alpha);
    }
    if (const json* t = find(j, "table")) {
        const auto w = child(where, "table");
        std::vector<std::vector<double>> table;
        for (std::size_t st = 0; st < need_array(*t, w).size(); ++st) {
            const auto ws = child(w, st);
            if (st >= cfg.model->size()) fail(ws, "no state " + std::to_string(st));
            std::vector<double> row;
            for (std::size_t s = 0; s < need_array((*t)[st], ws).size(); ++s) {
                if (static_cast<int>(s) >= cfg.model->state(static_cast<int>(st)).l)
                    fail(child(ws, s), "no symbol " + std::to_string(s + 1));
                row.push_back(real((*t)[st][s], child(ws, s)));
            }
            table.push_back(std::move(row));
        }
        phi = phi + Potential::table(std::move(table));
    }
    return phi;
}

void parse_targets(const json& j, ExperimentConfig& cfg)
{
    const std::string where = "/targets";
    allow_keys(j, where, {"kind", "point", "points", "membership_depth"});
    std::size_t depth = 20;
    if (const json* d = find(j, "membership_depth")) depth = count(*d, child(where, "membership_depth"), 1);
    const auto& kind_j = need(j, "kind", where);
    if (!kind_j.is_string()) fail(child(where, "kind"), "expected a string");
    const auto kind = kind_j.get<std::string>();
    const std::size_t states = cfg.model->size();
    if (kind == "recurrence") {
        if (find(j, "point") || find(j, "points")) fail(where, "recurrence targets take no points");
        cfg.targets = TargetSpec::recurrence(depth);
        return;
    }
    if (kind != "per-time" && kind != "per-word") fail(child(where, "kind"), "expected per-time, per-word or recurrence");
    const json* single = find(j, "point");
    const json* many = find(j, "points");
    if ((single == nullptr) == (many == nullptr)) fail(where, "give exactly one of point and points");
    if (kind == "per-time") {
        std::vector<HighPoint> pts;
        if (single) pts.assign(states, point(*single, cfg.dim, child(where, "point")));
        else {
            const auto w = child(where, "points");
            if (need_array(*many, w).size() != states) fail(w, "expected one point per state");
            for (std::size_t i = 0; i < many->size(); ++i) pts.push_back(point((*many)[i], cfg.dim, child(w, i)));
        }
        cfg.targets = TargetSpec::per_time(std::move(pts), depth);
        return;
    }
    std::vector<std::vector<HighPoint>> pts(states);
    if (single) {
        const HighPoint p = point(*single, cfg.dim, child(where, "point"));
        for (std::size_t st = 0; st < states; ++st)
            pts[st].assign(static_cast<std::size_t>(cfg.model->state(static_cast<int>(st)).l), p);
    } else {
        const auto w = child(where, "points");
        if (need_array(*many, w).size() != states) fail(w, "expected one list per state");
        for (std::size_t st = 0; st < states; ++st) {
            const auto ws = child(w, st);
            const auto l = static_cast<std::size_t>(cfg.model->state(static_cast<int>(st)).l);
            if (need_array((*many)[st], ws).size() != l) fail(ws, "expected one point per symbol");
            for (std::size_t s = 0; s < l; ++s) pts[st].push_back(point((*many)[st][s], cfg.dim, child(ws, s)));
        }
    }
    cfg.targets = TargetSpec::per_word(std::move(pts), depth);
}

ScheduleSpec parse_schedule(const json& j)
{
    const std::string where = "/schedule";
    allow_keys(j, where, {"generations", "epsilon", "p_min", "gap", "reach_bound"});
    ScheduleSpec s;
    const auto& eps = need_array(need(j, "epsilon", where), child(where, "epsilon"));
    for (std::size_t i = 0; i < eps.size(); ++i) s.epsilon.push_back(real(eps[i], child(child(where, "epsilon"), i)));
    const auto& p = need_array(need(j, "p_min", where), child(where, "p_min"));
    for (std::size_t i = 0; i < p.size(); ++i) s.p_min.push_back(count(p[i], child(child(where, "p_min"), i), 1));
    s.generations = static_cast<int>(s.epsilon.size());
    if (const json* g = find(j, "generations")) s.generations = static_cast<int>(count(*g, child(where, "generations"), 1));
    if (const json* g = find(j, "gap")) s.gap = count(*g, child(where, "gap"), 1);
    if (const json* r = find(j, "reach_bound")) s.reach_bound = count(*r, child(where, "reach_bound"));
    return s;
}

void parse_analysis(const json& j, ExperimentConfig& cfg)
{
    const std::string where = "/analysis";
    allow_keys(j, where,
               {"n_schedule", "pressure_n", "bracket", "depth", "scales", "cover_depths", "anchor_rule", "cap",
                "probe", "reach_depth", "gap_bound"});
    auto& a = cfg.analysis;
    if (const json* s = find(j, "n_schedule")) {
        const auto w = child(where, "n_schedule");
        a.n_schedule.clear();
        for (std::size_t i = 0; i < need_array(*s, w).size(); ++i) a.n_schedule.push_back(count((*s)[i], child(w, i), 1));
        if (a.n_schedule.empty()) fail(w, "must not be empty");
    }
    if (const json* n = find(j, "pressure_n")) a.pressure_n = count(*n, child(where, "pressure_n"), 1);
    if (const json* b = find(j, "bracket")) {
        const auto w = child(where, "bracket");
        if (need_array(*b, w).size() != 2) fail(w, "expected [lo, hi]");
        a.bracket = std::make_pair(real((*b)[0], child(w, 0)), real((*b)[1], child(w, 1)));
        if (!(a.bracket->first < a.bracket->second)) fail(w, "lo must be below hi");
    }
    if (const json* d = find(j, "depth")) a.depth = count(*d, child(where, "depth"), 1);
    if (const json* s = find(j, "scales")) {
        const auto w = child(where, "scales");
        allow_keys(*s, w, {"base", "k_lo", "k_hi"});
        a.scale_base = real(need(*s, "base", w), child(w, "base"));
        a.scale_k_lo = static_cast<int>(count(need(*s, "k_lo", w), child(w, "k_lo")));
        a.scale_k_hi = static_cast<int>(count(need(*s, "k_hi", w), child(w, "k_hi")));
        if (!(a.scale_base > 1.0)) fail(child(w, "base"), "must exceed 1");
        if (a.scale_k_hi < a.scale_k_lo) fail(w, "k_hi must not be below k_lo");
    }
    if (const json* c = find(j, "cover_depths")) {
        const auto w = child(where, "cover_depths");
        if (need_array(*c, w).size() != 2) fail(w, "expected [lo, hi]");
        a.cover_depths = std::make_pair(count((*c)[0], child(w, 0)), count((*c)[1], child(w, 1)));
        if (a.cover_depths->first > a.cover_depths->second) fail(w, "lo must not exceed hi");
    }
    if (const json* r = find(j, "anchor_rule")) {
        const auto w = child(where, "anchor_rule");
        if (*r == "anchor") a.anchor_rule = AnchorRule::CylinderAnchor;
        else if (*r == "sup-sample") a.anchor_rule = AnchorRule::SupSample;
        else fail(w, "expected anchor or sup-sample");
    }
    if (const json* c = find(j, "cap")) a.cap = count(*c, child(where, "cap"), 1);
    if (const json* p = find(j, "probe")) {
        const auto w = child(where, "probe");
        allow_keys(*p, w, {"centers", "radii"});
        if (const json* c = find(*p, "centers")) a.probe_centers = count(*c, child(w, "centers"), 1);
        if (const json* r = find(*p, "radii")) a.probe_radii = count(*r, child(w, "radii"), 1);
    }
    if (const json* r = find(j, "reach_depth")) a.reach_depth = count(*r, child(where, "reach_depth"));
    if (const json* g = find(j, "gap_bound")) a.gap_bound = count(*g, child(where, "gap_bound"));
}

} // namespace

HighReal parse_rational(const std::string& text)
{
    static const std::regex decimal(R"(\s*[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\s*)");
    const auto slash = text.find('/');
    const std::string num = text.substr(0, slash);
    const std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
    if (!std::regex_match(num, decimal) || !std::regex_match(den, decimal))
        throw Error(ErrorKind::ConfigError, "not a rational number: \"" + text + "\"");
    auto trim = [](const std::string& s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        return s.substr(a, b - a + 1);
    };
    const HighReal d(trim(den));
    if (d == 0) throw Error(ErrorKind::ConfigError, "zero denominator in \"" + text + "\"");
    return HighReal(trim(num)) / d;
}

OmegaPath ExperimentConfig::path() const { return sample_environment_path(model, seed, horizon); }

MapFamily ExperimentConfig::map_family() const { return MapFamily(dim, lo, hi, maps, *model); }

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig cfg;
    try {
        cfg.source = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, std::string("malformed JSON: ") + e.what());
    }
    const json& doc = cfg.source;
    allow_keys(doc, "", {"environment", "maps", "potentials", "targets", "schedule", "analysis"});
    cfg.model = parse_environment(need(doc, "environment", ""), cfg);
    parse_maps(need(doc, "maps", ""), cfg);
    if (const json* p = find(doc, "potentials")) {
        allow_keys(*p, "/potentials", {"phi"});
        if (const json* phi = find(*p, "phi")) cfg.phi = parse_phi(*phi, cfg);
    }
    if (const json* t = find(doc, "targets")) parse_targets(*t, cfg);
    else cfg.targets = TargetSpec::per_time(std::vector<HighPoint>(cfg.model->size(), cfg.lo));
    if (const json* s = find(doc, "schedule")) cfg.schedule = parse_schedule(*s);
    if (const json* a = find(doc, "analysis")) parse_analysis(*a, cfg);
    (void)cfg.map_family(); // validates the maps against the model
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read " + file.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

std::uint64_t config_hash(const json& doc, const std::string& overrides)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    feed(doc.dump());
    feed("\n");
    feed(overrides);
    return h;
}

std::string hex64(std::uint64_t value)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string csv_field(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields)
{
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    return out + "\r\n";
}

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_atomic(const std::filesystem::path& file, const std::string& contents)
{
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + tmp.string());
        out << contents;
        if (!out.flush()) throw Error(ErrorKind::ConfigError, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, file);
}

} // namespace rstp

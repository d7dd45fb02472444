// Experiment configuration (one JSON document) and artifact writing.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rstp/environment.hpp"
#include "rstp/geometry.hpp"
#include "rstp/moran.hpp"
#include "rstp/potential.hpp"
#include "rstp/targets.hpp"
#include "rstp/thermo.hpp"

namespace rstp {

struct AnalysisConfig {
    std::vector<std::size_t> n_schedule{2, 4, 6, 8, 10};
    std::size_t pressure_n = 10;
    std::optional<std::pair<double, double>> bracket;
    std::size_t depth = 10;
    double scale_base = 3.0;
    int scale_k_lo = 2;
    int scale_k_hi = 8;
    std::optional<std::pair<std::size_t, std::size_t>> cover_depths;
    AnchorRule anchor_rule = AnchorRule::CylinderAnchor;
    std::size_t cap = kDefaultCylinderCap;
    std::size_t probe_centers = 20;
    std::size_t probe_radii = 12;
    std::size_t reach_depth = 6;
    std::size_t gap_bound = 4;
};

struct ExperimentConfig {
    nlohmann::json source; // the parsed document
    std::shared_ptr<const EnvironmentModel> model;
    std::uint64_t seed = 1;
    std::size_t horizon = 200;
    int dim = 1;
    HighPoint lo{}, hi{};
    std::vector<std::vector<MapSpec>> maps;
    Potential psi = Potential::psi();
    Potential phi;
    TargetSpec targets;
    std::optional<ScheduleSpec> schedule;
    AnalysisConfig analysis;

    OmegaPath path() const;
    MapFamily map_family() const;
};

// "1/3", "-0.25", "2" or a JSON number.
HighReal parse_rational(const std::string& text);

// Throws ConfigError with a JSON-pointer location for semantic problems and the parser's
// line and column for malformed documents. Model and map validation errors propagate.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);

// 64-bit FNV-1a of the canonical document (sorted keys, no whitespace) followed by the overrides.
std::uint64_t config_hash(const nlohmann::json& doc, const std::string& overrides);
std::string hex64(std::uint64_t value);

// RFC 4180: fields with commas, quotes or line breaks are quoted, quotes doubled, CRLF line ends.
std::string csv_field(const std::string& field);
std::string csv_row(const std::vector<std::string>& fields);
std::string format_double(double value);

// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& file, const std::string& contents);

} // namespace rstp

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bvflow/drift.hpp"
#include "bvflow/rng.hpp"

namespace bvflow {

// Resolved experiment description.  `resolved` is the full config with
// defaults materialized; every output JSON embeds it verbatim.
struct ExperimentConfig {
    nlohmann::json resolved;

    BVDrift drift = BVDrift::zero();
    TimeGrid grid;
    std::vector<double> initial_points;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds; // for multi-seed commands
    double epsilon = 0.0;             // occupation bandwidth
    double h = 0.01;                  // finite-difference offset
    int n_quad_points = 21;
    int bins = 400;
    std::vector<double> z_grid;
    std::vector<double> level_grid;   // empty = auto
};

// Accepts either JSON (first non-space byte '{') or flat dotted key-value
// lines:  grid.dt = 0.001, drift.segments.0.kind = constant, '#' comments.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json parse_config_file(const std::string& path);

// Validates and fills defaults; throws ConfigError naming the missing or
// malformed field.
ExperimentConfig resolve_config(const nlohmann::json& raw);

BVDrift drift_from_json(const nlohmann::json& spec);

} // namespace bvflow

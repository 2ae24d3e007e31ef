#include <doctest.h>

#include <cmath>

#include "bvflow/config.hpp"
#include "bvflow/csv.hpp"
#include "bvflow/errors.hpp"

using namespace bvflow;

namespace {

const char* kFlatConfig = R"cfg(
# two-level drift
drift.breakpoints = [0]
drift.segments.0.kind = constant
drift.segments.0.value = 1
drift.segments.1.kind = constant
drift.segments.1.value = -1
grid.T = 10
grid.dt = 0.001
initial_points = [-0.5, 0.5]
seed = 7
)cfg";

} // namespace

TEST_CASE("flat key-value text parses into the same document as JSON") {
    nlohmann::json flat = parse_config_text(kFlatConfig);
    nlohmann::json direct = nlohmann::json::parse(R"({
      "drift": {"breakpoints": [0],
                "segments": [{"kind": "constant", "value": 1},
                             {"kind": "constant", "value": -1}]},
      "grid": {"T": 10, "dt": 0.001},
      "initial_points": [-0.5, 0.5],
      "seed": 7
    })");
    CHECK(flat == direct);
    // and the JSON encoding goes through the same entry point
    CHECK(parse_config_text(direct.dump()) == direct);
}

TEST_CASE("resolution validates and fills defaults") {
    ExperimentConfig cfg = resolve_config(parse_config_text(kFlatConfig));
    CHECK(cfg.grid.dt == 0.001);
    CHECK(cfg.grid.n_steps == 10000);
    CHECK(cfg.seed == 7);
    CHECK(cfg.drift.value(0.5) == -1.0);
    CHECK(cfg.epsilon == doctest::Approx(std::max(0.01, 2.0 * std::sqrt(0.001))));
    CHECK(cfg.seeds.size() == 20);
    CHECK(cfg.seeds[0] == 7);
    // echo carries the materialized defaults
    CHECK(cfg.resolved["epsilon"].get<double>() == cfg.epsilon);
    CHECK(cfg.resolved["seeds"].size() == 20);
    // echo round-trips through its own serialization
    CHECK(nlohmann::json::parse(cfg.resolved.dump()) == cfg.resolved);
}

TEST_CASE("missing fields are named in the error") {
    nlohmann::json doc = parse_config_text(kFlatConfig);
    doc["grid"].erase("dt");
    CHECK_THROWS_WITH(resolve_config(doc), "config: missing field 'grid.dt'");
    doc.erase("grid");
    CHECK_THROWS_WITH(resolve_config(doc), "config: missing field 'grid'");
    nlohmann::json no_drift = parse_config_text(kFlatConfig);
    no_drift.erase("drift");
    CHECK_THROWS_WITH(resolve_config(no_drift), "config: missing field 'drift'");
}

TEST_CASE("malformed segment specs are refused") {
    nlohmann::json doc = parse_config_text(kFlatConfig);
    doc["drift"]["segments"][0].erase("value");
    CHECK_THROWS_AS(resolve_config(doc), ConfigError);
    doc["drift"]["segments"][0] = {{"kind", "mystery"}};
    CHECK_THROWS_AS(resolve_config(doc), ConfigError);
}

TEST_CASE("all segment kinds round-trip through the config") {
    nlohmann::json doc = nlohmann::json::parse(R"({
      "drift": {"breakpoints": [-1, 0, 1],
                "segments": [{"kind": "constant", "value": 1},
                             {"kind": "affine", "intercept": 0.0, "slope": -0.5},
                             {"kind": "tanh_scaled", "scale": -1, "rate": 2, "center": 0.5, "offset": 0},
                             {"kind": "tabulated", "xs": [1, 2, 3], "ys": [-0.5, -0.8, -1.0]}]},
      "grid": {"T": 1, "dt": 0.01}
    })");
    ExperimentConfig cfg = resolve_config(doc);
    CHECK(cfg.drift.value(-2.0) == 1.0);
    CHECK(cfg.drift.value(-0.5) == doctest::Approx(0.25));
    CHECK(cfg.drift.value(2.0) == doctest::Approx(-0.8));
    CHECK(cfg.drift.breakpoints().size() == 3);
}

TEST_CASE("csv formatting round-trips doubles") {
    for (double v : {1.0 / 3.0, 0.1, -2.718281828459045, 1e-300, 123456789.123456789}) {
        CHECK(std::stod(format_g17(v)) == v);
    }
}

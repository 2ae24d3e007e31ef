#include "bvflow/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bvflow/errors.hpp"

namespace bvflow {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// value text: JSON if it parses, bare string otherwise
json parse_value(const std::string& text) {
    json v = json::parse(text, nullptr, false);
    if (!v.is_discarded()) return v;
    return json(text);
}

void insert_dotted(json& doc, const std::string& key, const json& value) {
    json* node = &doc;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(trim(part));
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& p = parts[i];
        if (p.empty()) throw ConfigError("config: empty key component in '" + key + "'");
        bool is_index = std::all_of(p.begin(), p.end(), [](char c) { return std::isdigit(c); });
        bool last = (i + 1 == parts.size());
        if (is_index) {
            std::size_t idx = std::stoul(p);
            if (!node->is_array()) *node = json::array();
            while (node->size() <= idx) node->push_back(json());
            if (last) {
                (*node)[idx] = value;
            } else {
                node = &(*node)[idx];
            }
        } else {
            if (!node->is_object()) *node = json::object();
            if (last) {
                (*node)[p] = value;
            } else {
                node = &(*node)[p];
            }
        }
    }
}

double require_number(const json& j, const std::string& field, const std::string& path) {
    if (!j.contains(field)) throw ConfigError("config: missing field '" + path + "'");
    const json& v = j.at(field);
    if (!v.is_number()) throw ConfigError("config: field '" + path + "' must be a number");
    return v.get<double>();
}

} // namespace

json parse_config_text(const std::string& text) {
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json doc = json::parse(text, nullptr, false);
        if (doc.is_discarded()) throw ConfigError("config: malformed JSON");
        return doc;
    }
    json doc = json::object();
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: line " + std::to_string(lineno) + " has no key");
        insert_dotted(doc, key, parse_value(value));
    }
    return doc;
}

json parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

BVDrift drift_from_json(const json& spec) {
    if (!spec.is_object()) throw ConfigError("config: 'drift' must be an object");
    std::vector<double> breakpoints;
    if (spec.contains("breakpoints")) {
        if (!spec["breakpoints"].is_array())
            throw ConfigError("config: 'drift.breakpoints' must be an array");
        for (const auto& b : spec["breakpoints"]) breakpoints.push_back(b.get<double>());
    }
    if (!spec.contains("segments") || !spec["segments"].is_array())
        throw ConfigError("config: missing field 'drift.segments'");
    std::vector<Segment> segments;
    for (const auto& s : spec["segments"]) {
        if (!s.is_object() || !s.contains("kind"))
            throw ConfigError("config: each drift segment needs a 'kind'");
        std::string kind = s["kind"].get<std::string>();
        if (kind == "constant") {
            if (!s.contains("value")) throw ConfigError("config: constant segment needs 'value'");
            segments.push_back(Segment::constant(s["value"].get<double>()));
        } else if (kind == "affine") {
            segments.push_back(Segment::affine(s.value("intercept", 0.0), s.value("slope", 0.0)));
        } else if (kind == "tanh_scaled") {
            segments.push_back(Segment::tanh_scaled(s.value("scale", 1.0), s.value("rate", 1.0),
                                                    s.value("center", 0.0), s.value("offset", 0.0)));
        } else if (kind == "tabulated") {
            if (!s.contains("xs") || !s.contains("ys"))
                throw ConfigError("config: tabulated segment needs 'xs' and 'ys'");
            segments.push_back(Segment::tabulated(s["xs"].get<std::vector<double>>(),
                                                  s["ys"].get<std::vector<double>>()));
        } else {
            throw ConfigError("config: unknown segment kind '" + kind + "'");
        }
    }
    return BVDrift(std::move(breakpoints), std::move(segments));
}

ExperimentConfig resolve_config(const json& raw) {
    ExperimentConfig cfg;
    if (!raw.is_object()) throw ConfigError("config: top level must be an object");

    if (!raw.contains("drift")) throw ConfigError("config: missing field 'drift'");
    cfg.drift = drift_from_json(raw["drift"]);

    if (!raw.contains("grid")) throw ConfigError("config: missing field 'grid'");
    const json& grid = raw["grid"];
    double T = require_number(grid, "T", "grid.T");
    double dt = require_number(grid, "dt", "grid.dt");
    if (!(dt > 0.0)) throw ConfigError("config: field 'grid.dt' must be > 0");
    if (!(T > 0.0)) throw ConfigError("config: field 'grid.T' must be > 0");
    cfg.grid = TimeGrid(T, dt);

    if (raw.contains("initial_points")) {
        cfg.initial_points = raw["initial_points"].get<std::vector<double>>();
        for (std::size_t i = 1; i < cfg.initial_points.size(); ++i)
            if (!(cfg.initial_points[i] > cfg.initial_points[i - 1]))
                throw ConfigError("config: 'initial_points' must be strictly increasing");
    }

    cfg.seed = raw.value("seed", std::uint64_t{1});
    if (raw.contains("seeds")) {
        cfg.seeds = raw["seeds"].get<std::vector<std::uint64_t>>();
    } else {
        int n_seeds = raw.value("n_seeds", 20);
        if (n_seeds < 1) throw ConfigError("config: 'n_seeds' must be >= 1");
        for (int i = 0; i < n_seeds; ++i) cfg.seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
    }

    cfg.epsilon = raw.value("epsilon", std::max(0.01, 2.0 * std::sqrt(cfg.grid.dt)));
    if (!(cfg.epsilon > 0.0)) throw ConfigError("config: 'epsilon' must be > 0");
    cfg.h = raw.value("h", 0.01);
    if (!(cfg.h > 0.0)) throw ConfigError("config: 'h' must be > 0");
    cfg.n_quad_points = raw.value("n_quad_points", 21);
    cfg.bins = raw.value("bins", 400);
    if (raw.contains("z_grid")) cfg.z_grid = raw["z_grid"].get<std::vector<double>>();
    if (raw.contains("level_grid")) cfg.level_grid = raw["level_grid"].get<std::vector<double>>();

    // echo: the raw config with every applied default materialized
    cfg.resolved = raw;
    cfg.resolved["grid"]["T"] = cfg.grid.horizon;
    cfg.resolved["grid"]["dt"] = cfg.grid.dt;
    cfg.resolved["seed"] = cfg.seed;
    cfg.resolved["seeds"] = cfg.seeds;
    cfg.resolved["epsilon"] = cfg.epsilon;
    cfg.resolved["h"] = cfg.h;
    cfg.resolved["n_quad_points"] = cfg.n_quad_points;
    cfg.resolved["bins"] = cfg.bins;
    return cfg;
}

} // namespace bvflow

#pragma once

// Problem configuration from JSON. Parse errors carry JSON-pointer-style
// paths to the offending entry.

#include <optional>
#include <string>

#include <json.hpp>

#include "critflow/coefficient.hpp"
#include "critflow/domain.hpp"
#include "critflow/errors.hpp"

namespace critflow {

using Json = nlohmann::json;

struct ProblemConfig {
    DomainSpec domain;
    CoefficientField coefficient;
    struct { double h = 0.02; bool align_interface = true; } mesh;
    struct { double tol = 1e-10; int max_iter = 0; } solver;
    struct {
        double epsilon_level = 0.05;
        double g_min = 1e-12;
        double corner_exclusion = 0.0;  // 0: 5h
        int n_level_lines = 20;
    } analysis;
    struct {
        std::string solution_csv, gradient_csv, levels_svg, report_json;
    } outputs;
    std::string name = "run";
};

namespace config_detail {

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError("missing required entry " + path + "/" + key);
    return j.at(key);
}

inline double number_at(const Json& j, const std::string& key, const std::string& path,
                        std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError("missing required entry " + path + "/" + key);
    }
    if (!j.at(key).is_number()) throw ConfigError("expected a number at " + path + "/" + key);
    return j.at(key).get<double>();
}

inline Vec2 point_at(const Json& j, const std::string& key, const std::string& path) {
    const Json& p = require(j, key, path);
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw ConfigError("expected a point [x, y] at " + path + "/" + key);
    return {p[0].get<double>(), p[1].get<double>()};
}

}  // namespace config_detail

inline DomainSpec parse_domain(const Json& j, const std::string& path = "/domain") {
    using namespace config_detail;
    DomainSpec spec;
    const Json& outer = require(j, "outer", path);
    const std::string kind = require(outer, "kind", path + "/outer").get<std::string>();
    spec.outer.center = point_at(outer, "center", path + "/outer");
    spec.outer.radius = number_at(outer, "radius", path + "/outer");
    if (kind == "disc") {
        // no cut
    } else if (kind == "half_disc") {
        HalfPlaneCut cut;
        const std::string axis = require(outer, "cut_axis", path + "/outer").get<std::string>();
        if (axis == "x") cut.axis = CutAxis::X;
        else if (axis == "y") cut.axis = CutAxis::Y;
        else throw ConfigError("cut_axis must be \"x\" or \"y\" at " + path + "/outer/cut_axis");
        cut.value = number_at(outer, "cut_value", path + "/outer");
        const std::string keep =
            outer.contains("keep") ? outer.at("keep").get<std::string>() : "above";
        if (keep == "above" || keep == "positive") cut.keep_positive = true;
        else if (keep == "below" || keep == "negative") cut.keep_positive = false;
        else throw ConfigError("keep must be above/below at " + path + "/outer/keep");
        spec.outer.cut = cut;
    } else {
        throw ConfigError("unknown outer kind \"" + kind + "\" at " + path + "/outer/kind");
    }
    if (j.contains("holes")) {
        const Json& holes = j.at("holes");
        if (!holes.is_array()) throw ConfigError("expected an array at " + path + "/holes");
        for (std::size_t k = 0; k < holes.size(); ++k) {
            const std::string hp = path + "/holes/" + std::to_string(k);
            Hole h;
            h.center = point_at(holes[k], "center", hp);
            h.radius = number_at(holes[k], "radius", hp);
            spec.holes.push_back(h);
        }
    }
    spec.validate();
    return spec;
}

inline CoefficientField parse_coefficient(const Json& j, const std::string& path = "/coefficient") {
    using namespace config_detail;
    const std::string kind = require(j, "kind", path).get<std::string>();
    if (kind == "constant") return CoefficientField::constant(number_at(j, "value", path));
    if (kind == "smooth_x2") return CoefficientField::smooth_x2();
    if (kind == "lipschitz_abs_x") return CoefficientField::lipschitz_abs_x();
    if (kind == "radius_sq") return CoefficientField::radius_sq();
    if (kind == "radius") return CoefficientField::radius();
    if (kind == "dist_to_point") return CoefficientField::dist_to_point(point_at(j, "point", path));
    if (kind == "piecewise_radial")
        return CoefficientField::piecewise_radial(number_at(j, "r0", path), number_at(j, "r1", path),
                                                  number_at(j, "rho_minus", path),
                                                  number_at(j, "rho_plus", path));
    if (kind == "piecewise_halfplane")
        return CoefficientField::piecewise_halfplane(number_at(j, "y1", path),
                                                     number_at(j, "rho_minus", path),
                                                     number_at(j, "rho_plus", path));
    if (kind == "custom") return CoefficientField::custom(require(j, "expr", path).get<std::string>());
    throw ConfigError("unknown coefficient kind \"" + kind + "\" at " + path + "/kind");
}

inline ProblemConfig parse_config(const Json& j) {
    using namespace config_detail;
    ProblemConfig cfg;
    cfg.domain = parse_domain(require(j, "domain", ""));
    cfg.coefficient = parse_coefficient(require(j, "coefficient", ""));

    const Json& mesh = require(j, "mesh", "");
    cfg.mesh.h = number_at(mesh, "h", "/mesh");
    if (!(cfg.mesh.h > 0)) throw ConfigError("mesh/h must be positive");
    if (mesh.contains("align_interface")) cfg.mesh.align_interface = mesh.at("align_interface").get<bool>();

    if (j.contains("solver")) {
        const Json& s = j.at("solver");
        cfg.solver.tol = number_at(s, "tol", "/solver", 1e-10);
        cfg.solver.max_iter = static_cast<int>(number_at(s, "max_iter", "/solver", 0));
        if (!(cfg.solver.tol > 0)) throw ConfigError("solver/tol must be positive");
    }
    if (j.contains("analysis")) {
        const Json& a = j.at("analysis");
        cfg.analysis.epsilon_level = number_at(a, "epsilon_level", "/analysis", 0.05);
        cfg.analysis.g_min = number_at(a, "g_min", "/analysis", 1e-12);
        cfg.analysis.corner_exclusion = number_at(a, "corner_exclusion", "/analysis", 0.0);
        cfg.analysis.n_level_lines = static_cast<int>(number_at(a, "n_level_lines", "/analysis", 20));
        if (!(cfg.analysis.epsilon_level > 0 && cfg.analysis.epsilon_level < 0.5))
            throw ConfigError("analysis/epsilon_level must lie in (0, 0.5)");
    }
    if (j.contains("outputs")) {
        const Json& o = j.at("outputs");
        auto get = [&](const char* key) {
            return o.contains(key) ? o.at(key).get<std::string>() : std::string();
        };
        cfg.outputs.solution_csv = get("solution_csv");
        cfg.outputs.gradient_csv = get("gradient_csv");
        cfg.outputs.levels_svg = get("levels_svg");
        cfg.outputs.report_json = get("report_json");
    }
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
    return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace critflow

#pragma once

// Batch pipeline: mesh -> solve -> critical-point analysis -> level lines
// -> artifacts (CSV / SVG / JSON report). Exit status: 0 when the solve
// converged and the certified topology matches the expected count with
// integer windings; 2 on an analysis mismatch (report still written); 1 on
// hard errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "critflow/config.hpp"
#include "critflow/critpoint.hpp"
#include "critflow/fem.hpp"
#include "critflow/levelset.hpp"
#include "critflow/meshgen.hpp"
#include "critflow/svg.hpp"

namespace critflow {

struct RunResult {
    int exit_code = 1;
    Json report;
    std::shared_ptr<const Mesh> mesh;
    std::optional<SolutionField> solution;
    std::optional<CriticalPointReport> analysis;
    std::vector<std::string> messages;
};

namespace pipeline_detail {

inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void ensure_parent(const std::string& path) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

inline void write_solution_csv(const std::string& path, const SolutionField& u) {
    std::ofstream out(path);
    if (!out) throw CritflowError("cannot open " + path + " for writing");
    out << "x,y,u\n";
    for (int v = 0; v < u.mesh->vertex_count(); ++v)
        out << g17(u.mesh->vertices[v].x) << "," << g17(u.mesh->vertices[v].y) << ","
            << g17(u.nodal_values[v]) << "\n";
}

inline void write_gradient_csv(const std::string& path, const SolutionField& u) {
    std::ofstream out(path);
    if (!out) throw CritflowError("cannot open " + path + " for writing");
    out << "cx,cy,gx,gy\n";
    for (int t = 0; t < u.mesh->triangle_count(); ++t) {
        const Vec2 c = u.mesh->centroid_of(t);
        const Vec2 g = u.element_gradients[t];
        out << g17(c.x) << "," << g17(c.y) << "," << g17(g.x) << "," << g17(g.y) << "\n";
    }
}

}  // namespace pipeline_detail

inline Json report_to_json(const CriticalPointReport& rep, const SolutionField& u,
                           const ProblemConfig& cfg, bool not_applicable) {
    Json j;
    const int M = u.mesh->hole_count();
    j["M"] = M;
    j["expected"] = rep.expected;
    j["total_index"] = rep.total_index;
    j["count_ok"] = not_applicable ? true : (rep.total_index == rep.expected);
    j["not_applicable"] = not_applicable;
    j["points"] = Json::array();
    for (const CriticalPoint& p : rep.points) {
        Json pj;
        pj["x"] = p.location.x;
        pj["y"] = p.location.y;
        pj["index"] = p.index;
        pj["patch_radius"] = p.patch_radius;
        pj["confidence"] =
            p.confidence == CriticalPoint::Confidence::Certified ? "certified" : "heuristic";
        j["points"].push_back(pj);
    }
    j["hopf"] = Json{{"exterior", rep.hopf_exterior_ok}, {"interior", rep.hopf_interior_ok}};
    j["boundary_windings"] = Json{
        {"exterior_level_line", rep.boundary_windings.exterior_level_line},
        {"interior_level_lines", rep.boundary_windings.interior_level_lines},
        {"epsilon", rep.boundary_windings.epsilon_used},
        {"resolved", rep.boundary_windings.resolved},
    };
    j["boundary_corners"] = Json::array();
    for (const Vec2& c : rep.boundary_corners)
        j["boundary_corners"].push_back(Json{{"x", c.x}, {"y", c.y}});
    j["levels"] = Json{{"count", cfg.analysis.n_level_lines}, {"spacing", "uniform k/(n+1)"}};
    j["solve"] = Json{{"iterations", u.stats.iterations},
                      {"residual", u.stats.residual},
                      {"min_element_rho", u.stats.min_element_rho},
                      {"vertices", u.mesh->vertex_count()},
                      {"triangles", u.mesh->triangle_count()},
                      {"h", u.mesh->h}};
    j["warnings"] = rep.warnings;
    for (const std::string& n : u.notes) j["warnings"].push_back(n);
    return j;
}

inline RunResult run(const ProblemConfig& cfg) {
    RunResult res;
    try {
        std::optional<InterfaceCurve> iface;
        if (cfg.mesh.align_interface) iface = cfg.coefficient.interface_curve();
        res.mesh = std::make_shared<const Mesh>(generate_mesh(cfg.domain, cfg.mesh.h, iface));

        SolverOptions sopt;
        sopt.tol = cfg.solver.tol;
        sopt.max_iter = cfg.solver.max_iter;
        sopt.threads = fem_detail::env_threads();
        res.solution = solve_dirichlet(res.mesh, make_rho_fn(cfg.coefficient), sopt);
    } catch (const CritflowError& e) {
        res.messages.push_back(std::string("error: ") + e.what());
        res.exit_code = 1;
        return res;
    }

    const SolutionField& u = *res.solution;
    const int M = res.mesh->hole_count();
    const bool not_applicable = (M == 0);
    bool analysis_ok = true;

    CriticalPointReport rep;
    try {
        DetectOptions dopt;
        dopt.g_threshold = 0.0;
        const auto candidates = detect_critical_points(u, dopt);
        CertifyOptions copt;
        copt.epsilon_level = cfg.analysis.epsilon_level;
        copt.winding.g_min = cfg.analysis.g_min;
        if (not_applicable) {
            // constant-zero solution: the M-1 count law needs at least one hole
            rep.expected = -1;
            rep.warnings.push_back("M = 0: expected count M-1 = -1 is outside the scope of the "
                                   "count law; case marked not applicable");
        } else {
            rep = certify_indices(u, candidates, copt);
        }
    } catch (const CritflowError& e) {
        rep.warnings.push_back(std::string("analysis: ") + e.what());
        analysis_ok = false;
    }

    const HopfResult hopf = hopf_check(u, cfg.analysis.corner_exclusion);
    rep.hopf_exterior_ok = hopf.exterior_ok;
    rep.hopf_interior_ok = hopf.interior_ok;

    // integer-winding checks: each boundary winding lies near an integer and
    // the argument principle composes to the expected total
    bool windings_ok = true;
    if (!not_applicable && analysis_ok) {
        const auto& bw = rep.boundary_windings;
        windings_ok = bw.resolved &&
                      std::abs(bw.exterior_level_line - std::lround(bw.exterior_level_line)) <= 0.05;
        double interior_sum = 0.0;
        for (double w : bw.interior_level_lines) {
            windings_ok = windings_ok && std::abs(w - std::lround(w)) <= 0.05;
            interior_sum += w;
        }
        windings_ok = windings_ok &&
                      std::abs(bw.exterior_level_line + interior_sum - rep.expected) <= 0.1;
    }

    res.analysis = rep;
    res.report = report_to_json(rep, u, cfg, not_applicable);
    res.report["name"] = cfg.name;
    res.report["windings_integer_ok"] = windings_ok;

    try {
        if (!cfg.outputs.solution_csv.empty()) {
            pipeline_detail::ensure_parent(cfg.outputs.solution_csv);
            pipeline_detail::write_solution_csv(cfg.outputs.solution_csv, u);
        }
        if (!cfg.outputs.gradient_csv.empty()) {
            pipeline_detail::ensure_parent(cfg.outputs.gradient_csv);
            pipeline_detail::write_gradient_csv(cfg.outputs.gradient_csv, u);
        }
        if (!cfg.outputs.levels_svg.empty()) {
            pipeline_detail::ensure_parent(cfg.outputs.levels_svg);
            SvgOptions svg;
            svg.n_levels = cfg.analysis.n_level_lines;
            write_levels_svg(cfg.outputs.levels_svg, u, svg);
        }
        if (!cfg.outputs.report_json.empty()) {
            pipeline_detail::ensure_parent(cfg.outputs.report_json);
            std::ofstream out(cfg.outputs.report_json);
            if (!out) throw CritflowError("cannot open " + cfg.outputs.report_json + " for writing");
            out << res.report.dump(2) << "\n";
        }
    } catch (const CritflowError& e) {
        res.messages.push_back(std::string("error: ") + e.what());
        res.exit_code = 1;
        return res;
    }

    const bool count_ok = not_applicable || (analysis_ok && rep.total_index == rep.expected);
    res.exit_code = (count_ok && windings_ok && analysis_ok) || not_applicable ? 0 : 2;
    return res;
}

// Lightweight structural validation of a report against the shipped schema
// subset (type / required / properties / items).
inline bool validate_against_schema(const Json& doc, const Json& schema, std::string* why = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (schema.contains("type")) {
        const std::string t = schema.at("type").get<std::string>();
        const bool ok = (t == "object" && doc.is_object()) || (t == "array" && doc.is_array()) ||
                        (t == "number" && doc.is_number()) ||
                        (t == "integer" && doc.is_number_integer()) ||
                        (t == "boolean" && doc.is_boolean()) || (t == "string" && doc.is_string());
        if (!ok) return fail("expected type " + t);
    }
    if (schema.contains("required"))
        for (const auto& key : schema.at("required"))
            if (!doc.contains(key.get<std::string>()))
                return fail("missing required key " + key.get<std::string>());
    if (schema.contains("properties") && doc.is_object())
        for (const auto& [key, sub] : schema.at("properties").items())
            if (doc.contains(key)) {
                std::string inner;
                if (!validate_against_schema(doc.at(key), sub, &inner))
                    return fail(key + ": " + inner);
            }
    if (schema.contains("items") && doc.is_array())
        for (const auto& el : doc) {
            std::string inner;
            if (!validate_against_schema(el, schema.at("items"), &inner))
                return fail("item: " + inner);
        }
    return true;
}

}  // namespace critflow

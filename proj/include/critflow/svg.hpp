#pragma once

// Self-contained SVG figures: level lines (uniformly spaced levels
// k/(n+1)), a gradient quiver on a coarse grid, and the domain boundary.
// Output is deterministic: fixed 6-decimal coordinates, fixed ordering.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "critflow/critpoint.hpp"
#include "critflow/errors.hpp"
#include "critflow/levelset.hpp"

namespace critflow {

struct SvgOptions {
    int n_levels = 20;
    int quiver_grid = 24;   // arrows across the longer bounding-box side
    int width_px = 720;
};

namespace svg_detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace svg_detail

inline void write_levels_svg(const std::string& path, const SolutionField& u,
                             const SvgOptions& opt = {}) {
    using svg_detail::num;
    const Mesh& mesh = *u.mesh;
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& v : mesh.vertices) {
        lo.x = std::min(lo.x, v.x); lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x); hi.y = std::max(hi.y, v.y);
    }
    const double span_x = hi.x - lo.x, span_y = hi.y - lo.y;
    const double pad = 0.03 * std::max(span_x, span_y);
    const double scale = opt.width_px / (span_x + 2 * pad);
    const int height_px = static_cast<int>(scale * (span_y + 2 * pad));
    // SVG y points down
    auto X = [&](double x) { return (x - lo.x + pad) * scale; };
    auto Y = [&](double y) { return (hi.y - y + pad) * scale; };

    std::ofstream out(path);
    if (!out) throw CritflowError("cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width_px
        << "\" height=\"" << height_px << "\" viewBox=\"0 0 " << opt.width_px << " "
        << height_px << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // domain boundary
    out << "<g stroke=\"black\" stroke-width=\"1.2\" fill=\"none\">\n";
    for (const auto& loop : mesh.boundary_loops()) {
        out << "<polygon points=\"";
        for (int e : loop) {
            const Vec2& p = mesh.vertices[mesh.boundary_edges[e].a];
            out << num(X(p.x)) << "," << num(Y(p.y)) << " ";
        }
        out << "\"/>\n";
    }
    out << "</g>\n";

    // level lines
    out << "<g stroke=\"#1f77b4\" stroke-width=\"0.8\" fill=\"none\">\n";
    for (int k = 1; k <= opt.n_levels; ++k) {
        const double level = static_cast<double>(k) / (opt.n_levels + 1);
        for (const ContourPolyline& c : extract_level_lines(u, level)) {
            out << (c.closed ? "<polygon points=\"" : "<polyline points=\"");
            for (const Vec2& p : c.points) out << num(X(p.x)) << "," << num(Y(p.y)) << " ";
            out << "\"/>\n";
        }
    }
    out << "</g>\n";

    // gradient quiver on a coarse grid
    double gmax = 0.0;
    for (const Vec2& g : u.element_gradients) gmax = std::max(gmax, norm(g));
    const double step = std::max(span_x, span_y) / opt.quiver_grid;
    out << "<g stroke=\"#c0392b\" stroke-width=\"0.7\" fill=\"#c0392b\">\n";
    if (gmax > 0.0) {
        for (int j = 0; ; ++j) {
            const double y = lo.y + (j + 0.5) * step;
            if (y > hi.y) break;
            for (int i = 0; ; ++i) {
                const double x = lo.x + (i + 0.5) * step;
                if (x > hi.x) break;
                const int t = u.locator->find({x, y});
                if (t < 0) continue;
                const Vec2 g = u.element_gradients[t];
                const double gn = norm(g);
                if (gn <= 0.0) continue;
                const double len = step * (0.15 + 0.55 * std::sqrt(gn / gmax));
                const Vec2 d = g * (len / gn);
                const Vec2 a{x - 0.5 * d.x, y - 0.5 * d.y};
                const Vec2 b{x + 0.5 * d.x, y + 0.5 * d.y};
                const Vec2 orth = perp(d) * 0.18;
                const Vec2 h1 = b - d * 0.3 + orth;
                const Vec2 h2 = b - d * 0.3 - orth;
                out << "<line x1=\"" << num(X(a.x)) << "\" y1=\"" << num(Y(a.y))
                    << "\" x2=\"" << num(X(b.x)) << "\" y2=\"" << num(Y(b.y)) << "\"/>\n";
                out << "<polygon points=\"" << num(X(b.x)) << "," << num(Y(b.y)) << " "
                    << num(X(h1.x)) << "," << num(Y(h1.y)) << " "
                    << num(X(h2.x)) << "," << num(Y(h2.y)) << "\"/>\n";
            }
        }
    }
    out << "</g>\n";
    out << "</svg>\n";
    if (!out) throw CritflowError("write to " + path + " failed");
}

}  // namespace critflow

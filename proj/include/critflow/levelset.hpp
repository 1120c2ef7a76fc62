#pragma once

// Level lines of P1 fields by marching triangles, and connected-component
// decompositions of sub/super-level sets by union-find over triangles.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "critflow/errors.hpp"
#include "critflow/fem.hpp"
#include "critflow/mesh.hpp"

namespace critflow {

struct ContourPolyline {
    enum class Orientation { CCW, CW, Open };
    std::vector<Vec2> points;  // closed contours: first point not repeated
    bool closed = false;
    double level = 0.0;
    Orientation orientation = Orientation::Open;

    double signed_area() const { return polygon_signed_area(points); }
};

inline ContourPolyline circle_contour(const Vec2& center, double radius, int n = 64) {
    ContourPolyline c;
    c.closed = true;
    c.orientation = ContourPolyline::Orientation::CCW;
    c.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * i / n;
        c.points.push_back(center + Vec2{radius * std::cos(a), radius * std::sin(a)});
    }
    return c;
}

// Marching triangles. Vertices where u equals the level exactly are nudged
// by +1e-12 before marching (symbolic perturbation), so every crossed
// triangle has exactly two crossed edges.
inline std::vector<ContourPolyline> extract_level_lines(const SolutionField& u, double level) {
    const Mesh& mesh = *u.mesh;
    std::vector<double> d(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        d[v] = u.nodal_values[v] - level;
        if (d[v] == 0.0) d[v] = 1e-12;
    }

    struct Crossing { Vec2 point; bool has_point = false; std::vector<std::pair<int, int>> links; };
    auto edge_id = [](int a, int b) { return std::pair<int, int>(std::min(a, b), std::max(a, b)); };
    std::map<std::pair<int, int>, Crossing> crossings;

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        std::vector<std::pair<int, int>> crossed;
        for (int k = 0; k < 3; ++k) {
            const int a = tr[k], b = tr[(k + 1) % 3];
            if ((d[a] > 0) != (d[b] > 0)) crossed.push_back({a, b});
        }
        if (crossed.empty()) continue;
        // with no exact zeros a triangle is crossed on exactly two edges
        if (crossed.size() != 2) continue;
        for (auto [a, b] : crossed) {
            auto& c = crossings[edge_id(a, b)];
            if (!c.has_point) {
                const double t01 = d[a] / (d[a] - d[b]);
                c.point = mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) * t01;
                c.has_point = true;
            }
        }
        const auto e0 = edge_id(crossed[0].first, crossed[0].second);
        const auto e1 = edge_id(crossed[1].first, crossed[1].second);
        crossings[e0].links.push_back({t, 1});
        crossings[e1].links.push_back({t, 0});
    }

    // adjacency between crossed edges through the triangles
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> nbr;  // edge -> neighbour edges
    {
        std::map<int, std::vector<std::pair<int, int>>> tri_edges;
        for (const auto& [e, c] : crossings)
            for (const auto& [t, _] : c.links) tri_edges[t].push_back(e);
        for (const auto& [t, es] : tri_edges) {
            if (es.size() != 2) continue;
            nbr[es[0]].push_back(es[1]);
            nbr[es[1]].push_back(es[0]);
        }
    }

    std::vector<ContourPolyline> out;
    std::set<std::pair<int, int>> used;
    auto walk = [&](std::pair<int, int> start, bool expect_closed) {
        ContourPolyline poly;
        poly.level = level;
        std::pair<int, int> cur = start, prev = {-1, -1};
        while (true) {
            used.insert(cur);
            poly.points.push_back(crossings[cur].point);
            std::pair<int, int> next = {-1, -1};
            for (const auto& n : nbr[cur])
                if (n != prev && !used.count(n)) { next = n; break; }
            if (next.first == -1) {
                // either closed back to start or hit an open end
                bool closes = false;
                for (const auto& n : nbr[cur]) closes = closes || (n == start && poly.points.size() > 2);
                poly.closed = closes && expect_closed;
                break;
            }
            prev = cur;
            cur = next;
        }
        if (poly.closed) {
            if (poly.signed_area() < 0.0) std::reverse(poly.points.begin(), poly.points.end());
            poly.orientation = ContourPolyline::Orientation::CCW;
        } else {
            poly.orientation = ContourPolyline::Orientation::Open;
        }
        return poly;
    };

    // open chains first (their ends have a single neighbour)
    for (const auto& [e, c] : crossings) {
        if (used.count(e) || nbr[e].size() >= 2) continue;
        out.push_back(walk(e, false));
    }
    for (const auto& [e, c] : crossings) {
        if (used.count(e)) continue;
        out.push_back(walk(e, true));
    }
    // deterministic order: by descending point count, then by first point
    std::sort(out.begin(), out.end(), [](const ContourPolyline& a, const ContourPolyline& b) {
        if (a.points.size() != b.points.size()) return a.points.size() > b.points.size();
        if (a.points[0].x != b.points[0].x) return a.points[0].x < b.points[0].x;
        return a.points[0].y < b.points[0].y;
    });
    return out;
}

struct SuperlevelComponent {
    int id = 0;
    std::vector<int> adjacent_holes;
    int representative_triangle = -1;
    int triangle_count = 0;
};

struct LevelSetDecomposition {
    double level = 0.0;
    int sublevel_components = 0;
    std::vector<SuperlevelComponent> superlevel_components;
    int K_plus = 0;
    // per-triangle super-level component id, -1 outside the super-level set
    std::vector<int> super_component_of_triangle;
};

namespace levelset_detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace levelset_detail

// Components of the strict super- and sub-level sets of the P1 field
// itself: a triangle carries super-level territory iff its vertex maximum
// exceeds the level, and two adjacent triangles' territories join iff the
// interpolant exceeds the level somewhere on the shared edge (its endpoint
// maximum). Classifying whole triangles by their barycentric mean instead
// shatters under-resolved collars near small holes into spurious singleton
// components at near-extreme levels.
inline LevelSetDecomposition level_components(const SolutionField& u, double level) {
    const Mesh& mesh = *u.mesh;
    LevelSetDecomposition dec;
    dec.level = level;

    std::vector<char> super(mesh.triangle_count()), sub(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        const double vmax = std::max({u.nodal_values[tr[0]], u.nodal_values[tr[1]], u.nodal_values[tr[2]]});
        const double vmin = std::min({u.nodal_values[tr[0]], u.nodal_values[tr[1]], u.nodal_values[tr[2]]});
        super[t] = vmax > level;
        sub[t] = vmin < level;
    }

    levelset_detail::UnionFind uf_super(mesh.triangle_count());
    levelset_detail::UnionFind uf_sub(mesh.triangle_count());
    for (const auto& [e, ts] : mesh.edge_triangle_map()) {
        if (ts.size() != 2) continue;
        const double emax = std::max(u.nodal_values[e.first], u.nodal_values[e.second]);
        const double emin = std::min(u.nodal_values[e.first], u.nodal_values[e.second]);
        if (super[ts[0]] && super[ts[1]] && emax > level) uf_super.unite(ts[0], ts[1]);
        if (sub[ts[0]] && sub[ts[1]] && emin < level) uf_sub.unite(ts[0], ts[1]);
    }

    std::map<int, int> sub_roots;
    std::map<int, SuperlevelComponent> super_roots;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        if (sub[t]) sub_roots[uf_sub.find(t)]++;
        if (super[t]) {
            auto& comp = super_roots[uf_super.find(t)];
            if (comp.triangle_count == 0) comp.representative_triangle = t;
            ++comp.triangle_count;
        }
    }
    dec.sublevel_components = static_cast<int>(sub_roots.size());

    // hole adjacency via boundary edges of member triangles
    std::map<std::pair<int, int>, int> bmarker;
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        auto key = std::minmax(e.a, e.b);
        bmarker[{key.first, key.second}] = e.marker;
    }
    std::map<int, std::set<int>> holes_of_root;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        if (!super[t]) continue;
        const auto& tr = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            auto key = std::minmax(tr[k], tr[(k + 1) % 3]);
            auto it = bmarker.find({key.first, key.second});
            if (it != bmarker.end() && it->second != kExteriorMarker)
                holes_of_root[uf_super.find(t)].insert(it->second);
        }
    }
    int id = 0;
    for (auto& [root, comp] : super_roots) {
        comp.id = id++;
        for (int hk : holes_of_root[root]) comp.adjacent_holes.push_back(hk);
        dec.superlevel_components.push_back(comp);
    }
    dec.K_plus = static_cast<int>(dec.superlevel_components.size());
    dec.super_component_of_triangle.assign(mesh.triangle_count(), -1);
    std::map<int, int> id_of_root;
    for (const auto& [root, comp] : super_roots) id_of_root[root] = comp.id;
    for (int t = 0; t < mesh.triangle_count(); ++t)
        if (super[t]) dec.super_component_of_triangle[t] = id_of_root.at(uf_super.find(t));
    return dec;
}

}  // namespace critflow

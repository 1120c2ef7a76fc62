#pragma once

// Odd reflection of a field across an axis where it vanishes: the mesh is
// doubled by mirroring, u extends antisymmetrically and rho symmetrically,
// and the extended field satisfies the discrete weak form on the doubled
// mesh. Reflecting an already-symmetric field is the identity.

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "critflow/errors.hpp"
#include "critflow/fem.hpp"
#include "critflow/mesh.hpp"

namespace critflow {

enum class ReflectionAxis { X0, Y0 };  // the line x = 0 / y = 0

struct ReflectedField {
    Mesh mesh;
    std::vector<double> values;
    std::vector<int> axis_vertices;   // vertices on the reflection axis
    std::vector<int> mirror_of;       // doubled-mesh vertex -> its mirror
    bool was_symmetric = false;       // input already covered both sides
};

namespace reflect_detail {

inline double axis_coord(const Vec2& p, ReflectionAxis axis) {
    return axis == ReflectionAxis::X0 ? p.x : p.y;
}

inline Vec2 mirrored(const Vec2& p, ReflectionAxis axis) {
    return axis == ReflectionAxis::X0 ? Vec2{-p.x, p.y} : Vec2{p.x, -p.y};
}

}  // namespace reflect_detail

// Wraps a coefficient with its even extension across the axis.
inline RhoFn even_reflect_rho(const RhoFn& rho, ReflectionAxis axis) {
    return [rho, axis](const Vec2& p) {
        if (reflect_detail::axis_coord(p, axis) < 0.0) return rho(reflect_detail::mirrored(p, axis));
        return rho(p);
    };
}

inline ReflectedField odd_reflect(const Mesh& mesh, const std::vector<double>& values,
                                  ReflectionAxis axis, double trace_tol = 1e-10) {
    using namespace reflect_detail;
    constexpr double kSnap = 1e-12;

    bool has_negative = false;
    for (const Vec2& v : mesh.vertices) has_negative = has_negative || axis_coord(v, axis) < -kSnap;

    // trace must vanish for the extension to be continuous
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (std::abs(axis_coord(mesh.vertices[v], axis)) <= kSnap && std::abs(values[v]) > trace_tol)
            throw NonVanishingTrace("field does not vanish on the reflection axis");

    ReflectedField out;
    if (has_negative) {
        // already two-sided: verify odd symmetry and return a copy
        std::map<std::pair<long long, long long>, int> index;
        auto key = [&](const Vec2& p) {
            return std::make_pair(static_cast<long long>(std::llround(p.x * 1e9)),
                                  static_cast<long long>(std::llround(p.y * 1e9)));
        };
        for (int v = 0; v < mesh.vertex_count(); ++v) index[key(mesh.vertices[v])] = v;
        out.mirror_of.assign(mesh.vertex_count(), -1);
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            const auto it = index.find(key(mirrored(mesh.vertices[v], axis)));
            if (it == index.end())
                throw NonVanishingTrace("input is two-sided but not mirror symmetric");
            if (std::abs(values[v] + values[it->second]) > trace_tol * 10.0)
                throw NonVanishingTrace("input is two-sided but not odd symmetric");
            out.mirror_of[v] = it->second;
        }
        out.mesh = mesh;
        out.values = values;
        out.was_symmetric = true;
        for (int v = 0; v < mesh.vertex_count(); ++v)
            if (std::abs(axis_coord(mesh.vertices[v], axis)) <= kSnap) out.axis_vertices.push_back(v);
        return out;
    }

    // one-sided input: mirror every off-axis vertex
    out.mesh.h = mesh.h;
    out.mesh.vertices = mesh.vertices;
    out.mesh.vertex_tags = mesh.vertex_tags;
    if (out.mesh.vertex_tags.size() != out.mesh.vertices.size())
        out.mesh.vertex_tags.assign(out.mesh.vertices.size(), VertexTag{});
    out.values = values;
    out.mirror_of.assign(mesh.vertex_count(), -1);

    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (std::abs(axis_coord(mesh.vertices[v], axis)) <= kSnap) {
            out.mirror_of[v] = v;
            out.values[v] = 0.0;  // exact odd trace
            out.axis_vertices.push_back(v);
        }
    }
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (out.mirror_of[v] >= 0) continue;
        const int m = out.mesh.vertex_count();
        out.mesh.vertices.push_back(mirrored(mesh.vertices[v], axis));
        out.mesh.vertex_tags.push_back(mesh.vertex_tags.empty() ? VertexTag{} : mesh.vertex_tags[v]);
        out.values.push_back(-values[v]);
        out.mirror_of[v] = m;
        out.mirror_of.push_back(v);
    }

    out.mesh.triangles = mesh.triangles;
    for (const auto& tr : mesh.triangles)
        out.mesh.triangles.push_back({out.mirror_of[tr[0]], out.mirror_of[tr[2]], out.mirror_of[tr[1]]});

    // boundary edges: axis edges become interior, others gain a mirror copy
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        const bool on_axis = std::abs(axis_coord(mesh.vertices[e.a], axis)) <= kSnap &&
                             std::abs(axis_coord(mesh.vertices[e.b], axis)) <= kSnap;
        if (on_axis) continue;
        out.mesh.boundary_edges.push_back(e);
        out.mesh.boundary_edges.push_back({out.mirror_of[e.b], out.mirror_of[e.a], e.marker});
    }
    for (int c : mesh.corner_vertex_ids) {
        out.mesh.corner_vertex_ids.push_back(c);
        if (out.mirror_of[c] != c) out.mesh.corner_vertex_ids.push_back(out.mirror_of[c]);
    }
    return out;
}

// Relative weak-form residual of the extended field over the interior
// vertices of the doubled mesh, normalized like the solver's stopping rule.
inline double reflected_residual(const ReflectedField& rf, const RhoFn& rho_doubled) {
    const auto r = full_residual(rf.mesh, rho_doubled, rf.values);
    const auto markers = rf.mesh.boundary_vertex_markers();
    std::vector<double> lift(rf.mesh.vertex_count(), 0.0);
    for (int v = 0; v < rf.mesh.vertex_count(); ++v)
        if (markers[v] != -2) lift[v] = rf.values[v];
    const auto rhs = full_residual(rf.mesh, rho_doubled, lift);
    double r2 = 0.0, b2 = 0.0;
    for (int v = 0; v < rf.mesh.vertex_count(); ++v) {
        if (markers[v] != -2) continue;
        r2 += r[v] * r[v];
        b2 += rhs[v] * rhs[v];
    }
    return std::sqrt(r2) / std::max(std::sqrt(b2), 1e-300);
}

}  // namespace critflow

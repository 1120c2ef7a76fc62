#pragma once

// Conforming triangulations of the disc / half-disc with circular holes.
// A Mesh is immutable after construction; all analysis code treats it as
// shared read-only state.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "critflow/domain.hpp"
#include "critflow/errors.hpp"
#include "critflow/geo.hpp"

namespace critflow {

// Boundary marker: kExteriorMarker for the outer boundary, otherwise the
// 0-based hole index.
constexpr int kExteriorMarker = -1;

struct BoundaryEdge {
    int a = -1, b = -1;   // oriented so the domain lies on the left
    int marker = kExteriorMarker;
};

// Where a vertex was created; used to project refined vertices back onto
// the analytic curves and to assign boundary markers.
enum class VertexKind : std::uint8_t {
    Interior,
    ExteriorArc,   // on the outer circle
    ExteriorCut,   // on the straight cut of a half-disc
    Corner,        // arc/cut junction
    Hole,          // on hole circle `which`
    Interface      // on a coefficient discontinuity curve
};

struct VertexTag {
    VertexKind kind = VertexKind::Interior;
    int which = -1;  // hole index for VertexKind::Hole
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW vertex index triples
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<int> corner_vertex_ids;
    double h = 0.0;  // target mesh size

    std::vector<VertexTag> vertex_tags;          // may be defaulted for loaded meshes
    std::optional<DomainSpec> geometry;          // analytic curves, when known
    std::optional<InterfaceCurve> interface;     // aligned discontinuity curve, if any
    std::vector<std::string> notes;              // warnings recorded during construction

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
    int hole_count() const {
        int m = -1;
        for (const BoundaryEdge& e : boundary_edges) m = std::max(m, e.marker);
        return m + 1;
    }

    double area_of(int t) const {
        const auto& tr = triangles[t];
        return triangle_area(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
    }
    Vec2 centroid_of(int t) const {
        const auto& tr = triangles[t];
        return (vertices[tr[0]] + vertices[tr[1]] + vertices[tr[2]]) / 3.0;
    }
    double total_area() const {
        double a = 0.0;
        for (int t = 0; t < triangle_count(); ++t) a += area_of(t);
        return a;
    }

    // Dirichlet marker per vertex: kExteriorMarker / hole index, or -2 if free.
    std::vector<int> boundary_vertex_markers() const {
        std::vector<int> m(vertices.size(), -2);
        for (const BoundaryEdge& e : boundary_edges) {
            m[e.a] = e.marker;
            m[e.b] = e.marker;
        }
        // corners belong to the exterior
        for (int c : corner_vertex_ids) m[c] = kExteriorMarker;
        return m;
    }

    std::map<std::pair<int, int>, std::vector<int>> edge_triangle_map() const {
        std::map<std::pair<int, int>, std::vector<int>> em;
        for (int t = 0; t < triangle_count(); ++t) {
            const auto& tr = triangles[t];
            for (int k = 0; k < 3; ++k) {
                int a = tr[k], b = tr[(k + 1) % 3];
                if (a > b) std::swap(a, b);
                em[{a, b}].push_back(t);
            }
        }
        return em;
    }

    // Boundary loops in traversal order (each entry indexes boundary_edges).
    std::vector<std::vector<int>> boundary_loops() const {
        std::map<int, std::vector<int>> out_edges;  // start vertex -> edge ids
        for (int i = 0; i < static_cast<int>(boundary_edges.size()); ++i)
            out_edges[boundary_edges[i].a].push_back(i);
        std::vector<bool> used(boundary_edges.size(), false);
        std::vector<std::vector<int>> loops;
        for (int i = 0; i < static_cast<int>(boundary_edges.size()); ++i) {
            if (used[i]) continue;
            std::vector<int> loop;
            int cur = i;
            while (!used[cur]) {
                used[cur] = true;
                loop.push_back(cur);
                const int next_vertex = boundary_edges[cur].b;
                auto it = out_edges.find(next_vertex);
                if (it == out_edges.end())
                    throw ValidationError("boundary edge chain broken at vertex " + std::to_string(next_vertex));
                int next = -1;
                for (int cand : it->second)
                    if (!used[cand]) { next = cand; break; }
                if (next == -1) break;  // loop closed
                cur = next;
            }
            if (boundary_edges[loop.back()].b != boundary_edges[loop.front()].a)
                throw ValidationError("boundary loop does not close");
            loops.push_back(std::move(loop));
        }
        return loops;
    }

    // Distance of p to the analytic curve a boundary vertex should lie on.
    double distance_to_marker_curve(const Vec2& p, int marker) const {
        if (!geometry) return 0.0;
        const DomainSpec& g = *geometry;
        if (marker == kExteriorMarker) {
            const double d_arc = std::abs(dist(p, g.outer.center) - g.outer.radius);
            if (!g.outer.cut) return d_arc;
            const double coord = (g.outer.cut->axis == CutAxis::X) ? p.x : p.y;
            return std::min(d_arc, std::abs(coord - g.outer.cut->value));
        }
        const Hole& hole = g.holes.at(marker);
        return std::abs(dist(p, hole.center) - hole.radius);
    }

    // Full invariant check; throws ValidationError on the first violation.
    void validate(double tol_geom = -1.0) const {
        if (tol_geom < 0.0) tol_geom = h * h;
        for (const auto& tr : triangles)
            for (int v : tr)
                if (v < 0 || v >= vertex_count())
                    throw ValidationError("triangle references vertex index out of range");
        for (int t = 0; t < triangle_count(); ++t)
            if (area_of(t) <= 0.0)
                throw ValidationError("triangle " + std::to_string(t) + " is not counterclockwise");

        // conformity: every edge bounds one or two triangles
        auto em = edge_triangle_map();
        std::size_t boundary_count = 0;
        for (const auto& [e, ts] : em) {
            if (ts.size() > 2)
                throw ValidationError("edge shared by more than two triangles");
            if (ts.size() == 1) ++boundary_count;
        }
        if (boundary_count != boundary_edges.size())
            throw ValidationError("boundary edge list does not match triangulation boundary");
        for (const BoundaryEdge& e : boundary_edges) {
            auto key = std::minmax(e.a, e.b);
            auto it = em.find({key.first, key.second});
            if (it == em.end() || it->second.size() != 1)
                throw ValidationError("listed boundary edge is not a one-triangle edge");
        }

        const auto loops = boundary_loops();
        if (geometry && static_cast<int>(loops.size()) != geometry->hole_count() + 1)
            throw ValidationError("expected " + std::to_string(geometry->hole_count() + 1) +
                                  " boundary loops, found " + std::to_string(loops.size()));

        if (geometry) {
            for (const BoundaryEdge& e : boundary_edges) {
                for (int v : {e.a, e.b}) {
                    if (distance_to_marker_curve(vertices[v], e.marker) > tol_geom + 1e-12)
                        throw ValidationError("boundary vertex " + std::to_string(v) +
                                              " off its analytic curve");
                }
            }
        }
    }
};

// Uniform-grid point location over an immutable mesh. Queries return the
// containing triangle of lowest index, which makes on-edge lookups
// deterministic.
class Locator {
public:
    explicit Locator(const Mesh& mesh) : mesh_(&mesh) {
        lo_ = {1e300, 1e300};
        hi_ = {-1e300, -1e300};
        for (const Vec2& v : mesh.vertices) {
            lo_.x = std::min(lo_.x, v.x); lo_.y = std::min(lo_.y, v.y);
            hi_.x = std::max(hi_.x, v.x); hi_.y = std::max(hi_.y, v.y);
        }
        const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.triangle_count()))));
        nx_ = ny_ = n;
        cell_w_ = (hi_.x - lo_.x) / nx_;
        cell_h_ = (hi_.y - lo_.y) / ny_;
        if (cell_w_ <= 0.0) cell_w_ = 1.0;
        if (cell_h_ <= 0.0) cell_h_ = 1.0;
        cells_.resize(static_cast<std::size_t>(nx_) * ny_);
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            const auto& tr = mesh.triangles[t];
            Vec2 tlo = mesh.vertices[tr[0]], thi = tlo;
            for (int k = 1; k < 3; ++k) {
                const Vec2& p = mesh.vertices[tr[k]];
                tlo.x = std::min(tlo.x, p.x); tlo.y = std::min(tlo.y, p.y);
                thi.x = std::max(thi.x, p.x); thi.y = std::max(thi.y, p.y);
            }
            const auto [i0, j0] = cell_of(tlo);
            const auto [i1, j1] = cell_of(thi);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
        }
        for (auto& c : cells_) std::sort(c.begin(), c.end());
    }

    // Containing triangle index, or -1. Points within `slack` of an edge
    // count as inside; the lowest triangle index wins ties.
    int find(const Vec2& p, double slack = 1e-12) const {
        if (p.x < lo_.x - slack || p.x > hi_.x + slack || p.y < lo_.y - slack || p.y > hi_.y + slack)
            return -1;
        const auto [i, j] = cell_of(p);
        for (int t : cells_[static_cast<std::size_t>(j) * nx_ + i]) {
            const auto& tr = mesh_->triangles[t];
            const Vec2 &a = mesh_->vertices[tr[0]], &b = mesh_->vertices[tr[1]], &c = mesh_->vertices[tr[2]];
            const double scale = std::abs(orient2d(a, b, c));
            const double eps = slack * std::max(1.0, scale);
            if (orient2d(a, b, p) >= -eps && orient2d(b, c, p) >= -eps && orient2d(c, a, p) >= -eps)
                return t;
        }
        return -1;
    }

private:
    std::pair<int, int> cell_of(const Vec2& p) const {
        int i = static_cast<int>((p.x - lo_.x) / cell_w_);
        int j = static_cast<int>((p.y - lo_.y) / cell_h_);
        i = std::clamp(i, 0, nx_ - 1);
        j = std::clamp(j, 0, ny_ - 1);
        return {i, j};
    }

    const Mesh* mesh_;
    Vec2 lo_, hi_;
    int nx_ = 1, ny_ = 1;
    double cell_w_ = 1.0, cell_h_ = 1.0;
    std::vector<std::vector<int>> cells_;
};

namespace detail {

inline Vec2 project_to_circle(const Vec2& p, const Vec2& center, double radius) {
    const Vec2 d = p - center;
    const double n = norm(d);
    if (n == 0.0) return center + Vec2{radius, 0.0};
    return center + d * (radius / n);
}

inline Vec2 project_boundary_vertex(const Mesh& mesh, const Vec2& p, const VertexTag& tag) {
    if (!mesh.geometry) return p;
    const DomainSpec& g = *mesh.geometry;
    switch (tag.kind) {
        case VertexKind::ExteriorArc:
            return project_to_circle(p, g.outer.center, g.outer.radius);
        case VertexKind::ExteriorCut: {
            Vec2 q = p;
            if (g.outer.cut) {
                if (g.outer.cut->axis == CutAxis::X) q.x = g.outer.cut->value;
                else q.y = g.outer.cut->value;
            }
            return q;
        }
        case VertexKind::Hole:
            return project_to_circle(p, g.holes.at(tag.which).center, g.holes.at(tag.which).radius);
        case VertexKind::Interface: {
            if (!mesh.interface) return p;
            if (mesh.interface->is_circle)
                return project_to_circle(p, mesh.interface->center, mesh.interface->radius);
            Vec2 q = p;
            q.y = mesh.interface->y_value;
            return q;
        }
        default:
            return p;
    }
}

// Tag for the midpoint of edge (a,b) given the endpoint tags.
inline VertexTag midpoint_tag(const VertexTag& ta, const VertexTag& tb) {
    auto rank = [](const VertexTag& t) {
        // corners act as wildcards: the other endpoint decides the curve
        switch (t.kind) {
            case VertexKind::Corner: return 0;
            case VertexKind::Interior: return 1;
            default: return 2;
        }
    };
    if (ta.kind == VertexKind::Interior || tb.kind == VertexKind::Interior) return {};
    if (rank(ta) < rank(tb)) return tb;
    if (rank(tb) < rank(ta)) return ta;
    if (ta.kind == tb.kind && ta.which == tb.which) return ta;
    return {};  // endpoints on different curves: interior midpoint
}

}  // namespace detail

// Uniform 4-way refinement. Boundary and interface edge midpoints are
// projected back onto their analytic curves when the mesh knows them.
inline Mesh refine(const Mesh& mesh) {
    Mesh out;
    out.h = mesh.h / 2.0;
    out.geometry = mesh.geometry;
    out.interface = mesh.interface;
    out.vertices = mesh.vertices;
    out.vertex_tags = mesh.vertex_tags;
    if (out.vertex_tags.size() != out.vertices.size())
        out.vertex_tags.assign(out.vertices.size(), VertexTag{});
    out.corner_vertex_ids = mesh.corner_vertex_ids;

    // boundary edge lookup for marker propagation
    std::map<std::pair<int, int>, int> bmark;
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        auto key = std::minmax(e.a, e.b);
        bmark[{key.first, key.second}] = e.marker;
    }

    std::map<std::pair<int, int>, int> midpoint_of;
    auto midpoint = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = midpoint_of.find({key.first, key.second});
        if (it != midpoint_of.end()) return it->second;
        Vec2 p = (mesh.vertices[a] + mesh.vertices[b]) * 0.5;
        VertexTag tag{};
        if (!mesh.vertex_tags.empty()) {
            tag = detail::midpoint_tag(mesh.vertex_tags[a], mesh.vertex_tags[b]);
        } else {
            auto bit = bmark.find({key.first, key.second});
            if (bit != bmark.end())
                tag = bit->second == kExteriorMarker ? VertexTag{VertexKind::ExteriorArc, -1}
                                                     : VertexTag{VertexKind::Hole, bit->second};
        }
        // only project midpoints of edges that lie on the curve, not interior
        // edges that happen to connect two boundary vertices
        const bool on_curve = tag.kind != VertexKind::Interior &&
                              (tag.kind == VertexKind::Interface ||
                               bmark.count({key.first, key.second}) > 0);
        if (on_curve) p = detail::project_boundary_vertex(mesh, p, tag);
        else tag = VertexTag{};
        const int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(p);
        out.vertex_tags.push_back(tag);
        midpoint_of[{key.first, key.second}] = id;
        return id;
    };

    for (const auto& tr : mesh.triangles) {
        const int m01 = midpoint(tr[0], tr[1]);
        const int m12 = midpoint(tr[1], tr[2]);
        const int m20 = midpoint(tr[2], tr[0]);
        out.triangles.push_back({tr[0], m01, m20});
        out.triangles.push_back({tr[1], m12, m01});
        out.triangles.push_back({tr[2], m20, m12});
        out.triangles.push_back({m01, m12, m20});
    }

    for (const BoundaryEdge& e : mesh.boundary_edges) {
        const int m = midpoint(e.a, e.b);
        out.boundary_edges.push_back({e.a, m, e.marker});
        out.boundary_edges.push_back({m, e.b, e.marker});
    }
    return out;
}

}  // namespace critflow

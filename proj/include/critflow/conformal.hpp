#pragma once

// Conformal pullback harness. The weak form of div(rho grad u) = 0 is
// invariant under conformal maps (grad u . grad v picks up |F'|^2, which
// cancels the area element), so mapping the mesh through F and carrying the
// element integrals via the pre-image correspondence must reproduce the
// original residual exactly. Orientation-reversing input is the failure
// mode the harness detects: the mapped elements flip.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "critflow/errors.hpp"
#include "critflow/fem.hpp"
#include "critflow/mesh.hpp"

namespace critflow {

using Complex = std::complex<double>;

struct ConformalMap {
    enum class Kind { Identity, Square, Sqrt, Moebius, Conjugate, Custom };
    Kind kind = Kind::Identity;
    // Moebius parameters (az + b) / (cz + d)
    Complex ma{1, 0}, mb{0, 0}, mc{0, 0}, md{1, 0};
    std::function<Complex(Complex)> f, df;  // Custom

    static ConformalMap identity() { return {}; }
    static ConformalMap square() { ConformalMap m; m.kind = Kind::Square; return m; }
    static ConformalMap sqrt_map() { ConformalMap m; m.kind = Kind::Sqrt; return m; }
    static ConformalMap moebius(Complex a, Complex b, Complex c, Complex d) {
        if (std::abs(a * d - b * c) < 1e-14) throw MapSingular("moebius determinant is zero");
        ConformalMap m;
        m.kind = Kind::Moebius;
        m.ma = a; m.mb = b; m.mc = c; m.md = d;
        return m;
    }
    // anti-conformal z -> conj(z); deliberately corrupted input for the
    // negative control
    static ConformalMap conjugate() { ConformalMap m; m.kind = Kind::Conjugate; return m; }
    static ConformalMap custom(std::function<Complex(Complex)> f_, std::function<Complex(Complex)> df_) {
        ConformalMap m;
        m.kind = Kind::Custom;
        m.f = std::move(f_);
        m.df = std::move(df_);
        return m;
    }

    Complex apply(Complex z) const {
        switch (kind) {
            case Kind::Identity: return z;
            case Kind::Square: return z * z;
            case Kind::Sqrt: return std::sqrt(z);
            case Kind::Moebius: return (ma * z + mb) / (mc * z + md);
            case Kind::Conjugate: return std::conj(z);
            case Kind::Custom: return f(z);
        }
        return z;
    }

    // dF/dz; for the anti-conformal control this is the Wirtinger
    // derivative magnitude carrier (|dF/dzbar| = 1)
    Complex derivative(Complex z) const {
        switch (kind) {
            case Kind::Identity: return {1, 0};
            case Kind::Square: return 2.0 * z;
            case Kind::Sqrt: return 0.5 / std::sqrt(z);
            case Kind::Moebius: {
                const Complex den = mc * z + md;
                return (ma * md - mb * mc) / (den * den);
            }
            case Kind::Conjugate: return {1, 0};
            case Kind::Custom: return df(z);
        }
        return {1, 0};
    }

    Vec2 apply(const Vec2& p) const {
        const Complex w = apply(Complex{p.x, p.y});
        return {w.real(), w.imag()};
    }
};

struct PulledBackProblem {
    Mesh mapped_mesh;                      // same connectivity, mapped vertices
    std::vector<Vec2> preimage_sample;     // per-element coefficient sample point
    std::vector<double> derivative_scale;  // |F'|^2 at the sample, diagnostic
    int flipped_elements = 0;              // mapped elements with reversed orientation
};

// Maps the mesh vertices through F and carries the pre-image sample
// correspondence for the coefficient, avoiding any analytic inversion of F.
inline PulledBackProblem pullback_problem(const Mesh& mesh, const ConformalMap& map) {
    PulledBackProblem out;
    out.mapped_mesh = mesh;
    out.mapped_mesh.geometry.reset();
    out.mapped_mesh.interface.reset();
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        const Complex z{mesh.vertices[v].x, mesh.vertices[v].y};
        if (std::abs(map.derivative(z)) < 1e-10)
            throw MapSingular("|F'| below 1e-10 at a mesh vertex");
        out.mapped_mesh.vertices[v] = map.apply(mesh.vertices[v]);
    }
    out.preimage_sample.resize(mesh.triangle_count());
    out.derivative_scale.resize(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const Vec2 g = mesh.centroid_of(t);
        out.preimage_sample[t] = g;
        out.derivative_scale[t] = std::norm(map.derivative(Complex{g.x, g.y}));
        if (out.mapped_mesh.area_of(t) <= 0.0) ++out.flipped_elements;
    }
    return out;
}

struct InvarianceCheck {
    double residual = 0.0;       // relative weak-form residual on the mapped mesh
    bool pass = false;
    int flipped_elements = 0;
    double rhs_norm = 0.0;
};

// Transplants the nodal values onto the mapped mesh and evaluates the
// mapped weak-form residual on the non-Dirichlet vertices. Element
// integrals are computed through the exact pre-image correspondence (the
// change of variables of the conformal invariance identity), so a
// holomorphic map reproduces the original residual; orientation-reversed
// elements fail the check with the flipped fraction as the defect.
inline InvarianceCheck verify_invariance(const Mesh& mesh, const RhoFn& rho,
                                         const std::vector<double>& values,
                                         const std::vector<std::optional<double>>& dirichlet,
                                         const ConformalMap& map, double tol = 1e-9,
                                         Quadrature quad = Quadrature::Barycenter) {
    const PulledBackProblem pb = pullback_problem(mesh, map);
    InvarianceCheck chk;
    chk.flipped_elements = pb.flipped_elements;
    if (pb.flipped_elements > 0) {
        chk.residual = static_cast<double>(pb.flipped_elements) / mesh.triangle_count();
        chk.pass = false;
        return chk;
    }

    // exact pullback: each mapped element integral equals its pre-image one
    std::vector<LocalMatrix> ks(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        ks[t] = local_stiffness(mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]],
                                rho(pb.preimage_sample[t]));
    }
    const std::vector<double> r =
        residual_from_elements(pb.mapped_mesh.triangles, ks, values, mesh.vertex_count());

    // rhs of the mapped problem under its Dirichlet lifting
    std::vector<double> lift(mesh.vertex_count(), 0.0);
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (dirichlet[v]) lift[v] = *dirichlet[v];
    const std::vector<double> rhs =
        residual_from_elements(pb.mapped_mesh.triangles, ks, lift, mesh.vertex_count());

    double r2 = 0.0, b2 = 0.0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (dirichlet[v]) continue;
        r2 += r[v] * r[v];
        b2 += rhs[v] * rhs[v];
    }
    chk.rhs_norm = std::sqrt(b2);
    chk.residual = std::sqrt(r2) / std::max(chk.rhs_norm, 1e-300);
    chk.pass = chk.residual <= tol;
    return chk;
}

// Structured polar patch mesh of {r in (r0, r1), theta in (t0, t1)} (an
// annular sector; r0 = 0 degenerates to a disc sector with a center fan).
// All boundary edges are marked exterior; Dirichlet data is the caller's.
inline Mesh sector_mesh(double r_inner, double r_outer, double t0, double t1, double h) {
    Mesh mesh;
    mesh.h = h;
    const int nr = std::max(2, static_cast<int>(std::ceil((r_outer - r_inner) / h)));
    const int nt = std::max(4, static_cast<int>(std::ceil((t1 - t0) * r_outer / h)));
    const bool has_center = r_inner <= 1e-15;

    auto snap = [](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; };
    std::vector<std::vector<int>> ring_ids(nr + 1);
    int center_id = -1;
    if (has_center) {
        center_id = mesh.vertex_count();
        mesh.vertices.push_back({0.0, 0.0});
    }
    const int j0 = has_center ? 1 : 0;
    for (int j = j0; j <= nr; ++j) {
        const double r = r_inner + (r_outer - r_inner) * j / nr;
        ring_ids[j].resize(nt + 1);
        for (int i = 0; i <= nt; ++i) {
            const double t = t0 + (t1 - t0) * i / nt;
            ring_ids[j][i] = mesh.vertex_count();
            mesh.vertices.push_back({snap(r * std::cos(t)), snap(r * std::sin(t))});
        }
    }
    if (has_center) {
        for (int i = 0; i < nt; ++i)
            mesh.triangles.push_back({center_id, ring_ids[1][i], ring_ids[1][i + 1]});
    }
    for (int j = std::max(1, j0); j < nr; ++j) {
        for (int i = 0; i < nt; ++i) {
            const int a = ring_ids[j][i], b = ring_ids[j][i + 1];
            const int c = ring_ids[j + 1][i], d = ring_ids[j + 1][i + 1];
            mesh.triangles.push_back({a, d, b});
            mesh.triangles.push_back({a, c, d});
        }
    }
    // boundary edges from the triangulation, all exterior
    std::map<std::pair<int, int>, int> count;
    for (int t = 0; t < mesh.triangle_count(); ++t)
        for (int k = 0; k < 3; ++k) {
            auto key = std::minmax(mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3]);
            ++count[{key.first, key.second}];
        }
    for (int t = 0; t < mesh.triangle_count(); ++t)
        for (int k = 0; k < 3; ++k) {
            const int a = mesh.triangles[t][k], b = mesh.triangles[t][(k + 1) % 3];
            auto key = std::minmax(a, b);
            if (count[{key.first, key.second}] == 1)
                mesh.boundary_edges.push_back({a, b, kExteriorMarker});
        }
    mesh.vertex_tags.assign(mesh.vertices.size(), VertexTag{});
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        mesh.vertex_tags[e.a] = {VertexKind::ExteriorArc, -1};
        mesh.vertex_tags[e.b] = {VertexKind::ExteriorArc, -1};
    }
    return mesh;
}

}  // namespace critflow

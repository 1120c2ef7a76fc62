#pragma once

// P1 Galerkin discretization of div(rho grad u) = 0 with Dirichlet data
// imposed by elimination, assembled into CSR and solved by Jacobi-
// preconditioned conjugate gradients. Assembly is row-parallelizable with a
// deterministic per-row accumulation ordered by triangle index, so results
// are bitwise identical for any thread count.

#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "critflow/coefficient.hpp"
#include "critflow/errors.hpp"
#include "critflow/mesh.hpp"

namespace critflow {

enum class Quadrature { Barycenter, EdgeMidpoints };

using RhoFn = std::function<double(const Vec2&)>;

inline RhoFn make_rho_fn(const CoefficientField& f) {
    return [f](const Vec2& p) { return f.eval(p); };
}

using LocalMatrix = std::array<std::array<double, 3>, 3>;

// The coefficient sample used for triangle t under the given rule.
inline double element_rho(const Mesh& mesh, int t, const RhoFn& rho, Quadrature quad) {
    const auto& tr = mesh.triangles[t];
    const Vec2 &a = mesh.vertices[tr[0]], &b = mesh.vertices[tr[1]], &c = mesh.vertices[tr[2]];
    if (quad == Quadrature::Barycenter) return rho((a + b + c) / 3.0);
    return (rho((a + b) * 0.5) + rho((b + c) * 0.5) + rho((c + a) * 0.5)) / 3.0;
}

// K_ij = rho * area * (grad phi_i . grad phi_j) = rho * (e_i . e_j) / (4 area),
// with e_i the edge opposite vertex i.
inline LocalMatrix local_stiffness(const Vec2& p0, const Vec2& p1, const Vec2& p2, double rho_sample) {
    const double area = triangle_area(p0, p1, p2);
    if (std::abs(area) < 1e-14) throw DegenerateElement("triangle area below 1e-14");
    const Vec2 e[3] = {p2 - p1, p0 - p2, p1 - p0};
    LocalMatrix k{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            k[i][j] = rho_sample * dot(e[i], e[j]) / (4.0 * area);
    return k;
}

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
    double min_element_rho = std::numeric_limits<double>::infinity();
};

struct SparseSystem {
    // CSR over free (non-Dirichlet) vertices
    int n = 0;
    std::vector<int> row_ptr, col;
    std::vector<double> val;
    std::vector<double> rhs;
    std::vector<int> free_index;   // vertex -> free row, or -1
    std::vector<int> free_vertex;  // free row -> vertex
    double min_element_rho = std::numeric_limits<double>::infinity();

    void matvec(const std::vector<double>& x, std::vector<double>& y) const {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
            y[i] = s;
        }
    }
};

namespace fem_detail {

inline int env_threads() {
    if (const char* env = std::getenv("CRITFLOW_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

template <typename Fn>
inline void parallel_rows(int n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 256) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn]() { for (int i = lo; i < hi; ++i) fn(i); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace fem_detail

// Dirichlet data per vertex: a value, or nullopt for free vertices.
inline SparseSystem assemble(const Mesh& mesh, const RhoFn& rho,
                             const std::vector<std::optional<double>>& dirichlet,
                             Quadrature quad = Quadrature::Barycenter, int threads = 1) {
    const int nv = mesh.vertex_count();
    SparseSystem sys;
    sys.free_index.assign(nv, -1);
    for (int v = 0; v < nv; ++v)
        if (!dirichlet[v]) {
            sys.free_index[v] = static_cast<int>(sys.free_vertex.size());
            sys.free_vertex.push_back(v);
        }
    sys.n = static_cast<int>(sys.free_vertex.size());
    sys.rhs.assign(sys.n, 0.0);

    // incident triangles per vertex, ascending by construction
    std::vector<std::vector<int>> incident(nv);
    std::vector<double> rho_t(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        rho_t[t] = element_rho(mesh, t, rho, quad);
        if (rho_t[t] < 0.0)
            throw NonpositiveCoefficient("coefficient sample is negative on triangle " + std::to_string(t));
        sys.min_element_rho = std::min(sys.min_element_rho, rho_t[t]);
        for (int v : mesh.triangles[t]) incident[v].push_back(t);
    }

    // sparsity pattern: self plus free neighbors
    std::vector<std::vector<int>> pattern(sys.n);
    for (int r = 0; r < sys.n; ++r) {
        const int v = sys.free_vertex[r];
        std::vector<int>& cols = pattern[r];
        cols.push_back(r);
        for (int t : incident[v])
            for (int w : mesh.triangles[t]) {
                const int fw = sys.free_index[w];
                if (fw >= 0 && fw != r) cols.push_back(fw);
            }
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    }
    sys.row_ptr.assign(sys.n + 1, 0);
    for (int r = 0; r < sys.n; ++r) sys.row_ptr[r + 1] = sys.row_ptr[r] + static_cast<int>(pattern[r].size());
    sys.col.resize(sys.row_ptr.back());
    sys.val.assign(sys.row_ptr.back(), 0.0);
    for (int r = 0; r < sys.n; ++r)
        std::copy(pattern[r].begin(), pattern[r].end(), sys.col.begin() + sys.row_ptr[r]);

    fem_detail::parallel_rows(sys.n, threads, [&](int r) {
        const int v = sys.free_vertex[r];
        auto entry = [&](int fc) -> double& {
            const int* begin = sys.col.data() + sys.row_ptr[r];
            const int* end = sys.col.data() + sys.row_ptr[r + 1];
            const int* it = std::lower_bound(begin, end, fc);
            return sys.val[static_cast<std::size_t>(it - sys.col.data())];
        };
        for (int t : incident[v]) {
            const auto& tr = mesh.triangles[t];
            int local = 0;
            while (tr[local] != v) ++local;
            const LocalMatrix k = local_stiffness(mesh.vertices[tr[0]], mesh.vertices[tr[1]],
                                                  mesh.vertices[tr[2]], rho_t[t]);
            for (int j = 0; j < 3; ++j) {
                const int w = tr[j];
                const int fw = sys.free_index[w];
                if (fw >= 0) entry(fw) += k[local][j];
                else sys.rhs[r] -= k[local][j] * *dirichlet[w];
            }
        }
    });
    return sys;
}

struct PcgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

inline PcgResult pcg_jacobi(const SparseSystem& sys, double tol, int max_iter) {
    const int n = sys.n;
    PcgResult res;
    res.x.assign(n, 0.0);
    double b2 = 0.0;
    for (double v : sys.rhs) b2 += v * v;
    const double bnorm = std::sqrt(b2);
    if (bnorm == 0.0) return res;
    if (max_iter <= 0) max_iter = 20 * static_cast<int>(std::sqrt(static_cast<double>(n))) + 50;

    std::vector<double> diag(n, 1.0);
    for (int i = 0; i < n; ++i)
        for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k)
            if (sys.col[k] == i && sys.val[k] > 0.0) diag[i] = sys.val[k];

    std::vector<double> r = sys.rhs, z(n), p(n), Ap(n);
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = 0.0;
    for (int i = 0; i < n; ++i) rz += r[i] * z[i];
    double rnorm = bnorm;
    for (int it = 0; it < max_iter; ++it) {
        sys.matvec(p, Ap);
        double pAp = 0.0;
        for (int i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        if (pAp <= 0.0) throw NoConvergence(rnorm / bnorm);
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) res.x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) r2 += r[i] * r[i];
        rnorm = std::sqrt(r2);
        res.iterations = it + 1;
        if (rnorm <= tol * bnorm) {
            res.relative_residual = rnorm / bnorm;
            return res;
        }
        for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        double rz_next = 0.0;
        for (int i = 0; i < n; ++i) rz_next += r[i] * z[i];
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw NoConvergence(rnorm / bnorm);
}

struct SolutionField {
    std::shared_ptr<const Mesh> mesh;
    std::vector<double> nodal_values;
    std::vector<Vec2> element_gradients;
    SolveStats stats;
    std::vector<std::string> notes;

    std::shared_ptr<const Locator> locator;  // built on demand by gradient_at

    Vec2 gradient_in_triangle(int t) const { return element_gradients[t]; }

    double value_at(const Vec2& p) const {
        const int t = locate(p);
        const auto& tr = mesh->triangles[t];
        const auto bc = barycentric(p, mesh->vertices[tr[0]], mesh->vertices[tr[1]], mesh->vertices[tr[2]]);
        return bc[0] * nodal_values[tr[0]] + bc[1] * nodal_values[tr[1]] + bc[2] * nodal_values[tr[2]];
    }

    int locate(const Vec2& p) const {
        const int t = locator->find(p);
        if (t < 0) throw OutsideDomain("point (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                                       ") is outside the mesh");
        return t;
    }
};

inline Vec2 element_gradient(const Mesh& mesh, int t, const std::vector<double>& values) {
    const auto& tr = mesh.triangles[t];
    const Vec2 &p0 = mesh.vertices[tr[0]], &p1 = mesh.vertices[tr[1]], &p2 = mesh.vertices[tr[2]];
    const double area = triangle_area(p0, p1, p2);
    const Vec2 g = perp(p2 - p1) * values[tr[0]] + perp(p0 - p2) * values[tr[1]] +
                   perp(p1 - p0) * values[tr[2]];
    return g / (2.0 * area);
}

inline std::vector<Vec2> all_element_gradients(const Mesh& mesh, const std::vector<double>& values) {
    std::vector<Vec2> g(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) g[t] = element_gradient(mesh, t, values);
    return g;
}

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 0;  // 0: 20*sqrt(dof)
    Quadrature quad = Quadrature::Barycenter;
    double hole_value = 1.0;
    int threads = 1;
};

// Dirichlet data from boundary markers: 0 on the exterior, hole_value on holes.
inline std::vector<std::optional<double>> marker_dirichlet(const Mesh& mesh, double hole_value = 1.0) {
    std::vector<std::optional<double>> d(mesh.vertex_count());
    const auto markers = mesh.boundary_vertex_markers();
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (markers[v] == -2) continue;
        d[v] = markers[v] == kExteriorMarker ? 0.0 : hole_value;
    }
    return d;
}

inline SolutionField solve_with_dirichlet(std::shared_ptr<const Mesh> mesh, const RhoFn& rho,
                                          const std::vector<std::optional<double>>& dirichlet,
                                          const SolverOptions& opt = {}) {
    SparseSystem sys = assemble(*mesh, rho, dirichlet, opt.quad, opt.threads);
    PcgResult sol = pcg_jacobi(sys, opt.tol, opt.max_iter);

    SolutionField u;
    u.mesh = mesh;
    u.nodal_values.assign(mesh->vertex_count(), 0.0);
    for (int v = 0; v < mesh->vertex_count(); ++v)
        u.nodal_values[v] = dirichlet[v] ? *dirichlet[v] : 0.0;
    for (int r = 0; r < sys.n; ++r) u.nodal_values[sys.free_vertex[r]] = sol.x[r];
    u.element_gradients = all_element_gradients(*mesh, u.nodal_values);
    u.stats.iterations = sol.iterations;
    u.stats.residual = sol.relative_residual;
    u.stats.min_element_rho = sys.min_element_rho;
    u.locator = std::make_shared<Locator>(*mesh);

    // discrete maximum principle sanity; non-Delaunay meshes may wobble,
    // which is a warning rather than an error
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int v = 0; v < mesh->vertex_count(); ++v)
        if (dirichlet[v]) {
            lo = first ? *dirichlet[v] : std::min(lo, *dirichlet[v]);
            hi = first ? *dirichlet[v] : std::max(hi, *dirichlet[v]);
            first = false;
        }
    constexpr double kMaxPrincipleTol = 1e-9;
    for (double v : u.nodal_values)
        if (v < lo - kMaxPrincipleTol || v > hi + kMaxPrincipleTol) {
            u.notes.push_back("discrete maximum principle violated: value " + std::to_string(v) +
                              " outside [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
            break;
        }
    return u;
}

// Standard boundary data: u = 0 on the exterior, u = hole_value on holes.
inline SolutionField solve_dirichlet(std::shared_ptr<const Mesh> mesh, const RhoFn& rho,
                                     const SolverOptions& opt = {}) {
    return solve_with_dirichlet(mesh, rho, marker_dirichlet(*mesh, opt.hole_value), opt);
}

inline Vec2 gradient_at(const SolutionField& u, const Vec2& p) {
    return u.element_gradients[u.locate(p)];
}

// Per-element stiffness matrices (shared by the conformal harness).
inline std::vector<LocalMatrix> element_stiffnesses(const Mesh& mesh, const RhoFn& rho,
                                                    Quadrature quad = Quadrature::Barycenter) {
    std::vector<LocalMatrix> ks(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        ks[t] = local_stiffness(mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]],
                                element_rho(mesh, t, rho, quad));
    }
    return ks;
}

// Unconstrained weak-form residual r = A u over all vertices.
inline std::vector<double> residual_from_elements(const std::vector<std::array<int, 3>>& triangles,
                                                  const std::vector<LocalMatrix>& ks,
                                                  const std::vector<double>& values,
                                                  int vertex_count) {
    std::vector<double> r(vertex_count, 0.0);
    for (std::size_t t = 0; t < triangles.size(); ++t)
        for (int i = 0; i < 3; ++i) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) s += ks[t][i][j] * values[triangles[t][j]];
            r[triangles[t][i]] += s;
        }
    return r;
}

inline std::vector<double> full_residual(const Mesh& mesh, const RhoFn& rho,
                                         const std::vector<double>& values,
                                         Quadrature quad = Quadrature::Barycenter) {
    return residual_from_elements(mesh.triangles, element_stiffnesses(mesh, rho, quad), values,
                                  mesh.vertex_count());
}

// Discrete conormal flux through each boundary marker, from the stiffness
// residual restricted to that marker's vertices. The fluxes over all markers
// sum to zero up to the solver tolerance.
inline std::map<int, double> boundary_fluxes(const SolutionField& u, const RhoFn& rho,
                                             Quadrature quad = Quadrature::Barycenter) {
    const auto r = full_residual(*u.mesh, rho, u.nodal_values, quad);
    const auto markers = u.mesh->boundary_vertex_markers();
    std::map<int, double> flux;
    for (int v = 0; v < u.mesh->vertex_count(); ++v)
        if (markers[v] != -2) flux[markers[v]] += r[v];
    return flux;
}

inline double energy_norm(const Mesh& mesh, const RhoFn& rho, const std::vector<double>& values,
                          Quadrature quad = Quadrature::Barycenter) {
    double e = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const Vec2 g = element_gradient(mesh, t, values);
        e += element_rho(mesh, t, rho, quad) * norm2(g) * mesh.area_of(t);
    }
    return std::sqrt(e);
}

// L2 norm of a P1 field (edge-midpoint rule, exact for quadratics).
inline double l2_norm(const Mesh& mesh, const std::vector<double>& values) {
    double s = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        const double w = mesh.area_of(t) / 3.0;
        for (int k = 0; k < 3; ++k) {
            const double m = 0.5 * (values[tr[k]] + values[tr[(k + 1) % 3]]);
            s += w * m * m;
        }
    }
    return std::sqrt(s);
}

// Relative L2 distance between the P1 field and a reference function,
// integrated with the edge-midpoint rule (exact for quadratics).
inline double relative_l2_error(const Mesh& mesh, const std::vector<double>& values,
                                const std::function<double(const Vec2&)>& exact) {
    double err2 = 0.0, ref2 = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        const double w = mesh.area_of(t) / 3.0;
        for (int k = 0; k < 3; ++k) {
            const Vec2 m = (mesh.vertices[tr[k]] + mesh.vertices[tr[(k + 1) % 3]]) * 0.5;
            const double uh = 0.5 * (values[tr[k]] + values[tr[(k + 1) % 3]]);
            const double ue = exact(m);
            err2 += w * (uh - ue) * (uh - ue);
            ref2 += w * ue * ue;
        }
    }
    return std::sqrt(err2) / std::max(std::sqrt(ref2), 1e-300);
}

}  // namespace critflow

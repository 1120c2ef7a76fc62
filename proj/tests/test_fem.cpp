#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <random>

#include "critflow/fem.hpp"
#include "critflow/meshgen.hpp"

using namespace critflow;

namespace {

std::shared_ptr<const Mesh> make_mesh(const DomainSpec& spec, double h,
                                      std::optional<InterfaceCurve> iface = std::nullopt,
                                      int sweeps = 3) {
    MeshGenOptions opt;
    opt.smoothing_sweeps = sweeps;
    return std::make_shared<const Mesh>(generate_mesh(spec, h, iface, opt));
}

double harmonic_annulus(const Vec2& p) { return std::log(norm(p)) / std::log(0.05); }

}  // namespace

TEST_CASE("reference triangle local stiffness") {
    const LocalMatrix k = local_stiffness({0, 0}, {1, 0}, {0, 1}, 1.0);
    const double expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(k[i][j] == doctest::Approx(expect[i][j]).epsilon(1e-14));
}

TEST_CASE("constant coefficient scales the system entrywise") {
    const auto mesh = make_mesh(annulus_domain(0.05, 1.0), 0.15);
    const auto dirichlet = marker_dirichlet(*mesh);
    const SparseSystem a1 = assemble(*mesh, make_rho_fn(CoefficientField::constant(1.0)), dirichlet);
    const SparseSystem a5 = assemble(*mesh, make_rho_fn(CoefficientField::constant(5.0)), dirichlet);
    REQUIRE(a1.val.size() == a5.val.size());
    for (std::size_t i = 0; i < a1.val.size(); ++i)
        CHECK(a5.val[i] == doctest::Approx(5.0 * a1.val[i]).epsilon(1e-14));
}

TEST_CASE("assembled matrix is symmetric with nonpositive off-diagonals on a Delaunay mesh") {
    const auto mesh = make_mesh(annulus_domain(0.05, 1.0), 0.1, std::nullopt, 0);
    const SparseSystem sys = assemble(*mesh, make_rho_fn(CoefficientField::smooth_x2()),
                                      marker_dirichlet(*mesh));
    std::map<std::pair<int, int>, double> entries;
    for (int i = 0; i < sys.n; ++i)
        for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k)
            entries[{i, sys.col[k]}] = sys.val[k];
    for (const auto& [ij, v] : entries) {
        const auto sym = entries.find({ij.second, ij.first});
        REQUIRE(sym != entries.end());
        CHECK(v == doctest::Approx(sym->second).epsilon(1e-12));
        if (ij.first != ij.second) CHECK(v <= 1e-10);
        else CHECK(v > 0.0);
    }
}

TEST_CASE("harmonic annulus solve matches ln r / ln 0.05") {
    const auto mesh = make_mesh(annulus_domain(0.05, 1.0), 0.05);
    const SolutionField u = solve_dirichlet(mesh, make_rho_fn(CoefficientField::constant(1.0)));
    CHECK(u.stats.residual <= 1e-10);
    double max_err = 0.0;
    for (int v = 0; v < mesh->vertex_count(); ++v)
        max_err = std::max(max_err, std::abs(u.nodal_values[v] - harmonic_annulus(mesh->vertices[v])));
    CHECK(max_err < 5e-3);
}

TEST_CASE("no holes means u is identically zero") {
    DomainSpec disc;
    disc.outer = {{0, 0}, 1.0, std::nullopt};
    disc.validate();
    const auto mesh = make_mesh(disc, 0.2);
    const SolutionField u = solve_dirichlet(mesh, make_rho_fn(CoefficientField::smooth_x2()));
    for (double v : u.nodal_values) CHECK(v == 0.0);
    for (const Vec2& g : u.element_gradients) CHECK(norm(g) == 0.0);
}

TEST_CASE("solution respects the discrete maximum principle") {
    const auto mesh = make_mesh(disc_three_holes_domain(0.03), 0.08);
    const SolutionField u = solve_dirichlet(mesh, make_rho_fn(CoefficientField::radius_sq()));
    CHECK(u.notes.empty());  // Delaunay mesh: no violation recorded
    for (double v : u.nodal_values) {
        CHECK(v >= -1e-9);
        CHECK(v <= 1.0 + 1e-9);
    }
}

TEST_CASE("gradient queries") {
    const auto mesh = make_mesh(annulus_domain(0.05, 1.0), 0.05);
    const SolutionField u = solve_dirichlet(mesh, make_rho_fn(CoefficientField::constant(1.0)));

    // d/dr [ln r / ln 0.05] at (0.5, 0) is (1/(0.5 ln 0.05), 0)
    const Vec2 g = gradient_at(u, {0.5, 0.0});
    CHECK(g.x == doctest::Approx(-0.6676164013906681).epsilon(0.075));
    CHECK(std::abs(g.y) < 5e-2);

    CHECK_THROWS_AS(gradient_at(u, {1.5, 0.0}), OutsideDomain);
}

TEST_CASE("flux balance across the boundary markers") {
    const auto mesh = make_mesh(disc_three_holes_domain(0.03), 0.08);
    const auto rho = make_rho_fn(CoefficientField::radius_sq());
    const SolutionField u = solve_dirichlet(mesh, rho);
    const auto flux = boundary_fluxes(u, rho);
    double total = 0.0, scale = 0.0;
    for (const auto& [marker, f] : flux) {
        total += f;
        scale += std::abs(f);
    }
    CHECK(std::abs(total) <= 1e-8 * scale);
    // exterior outflow balances hole inflow
    CHECK(flux.at(kExteriorMarker) < 0.0);
    for (int k = 0; k < 3; ++k) CHECK(flux.at(k) > 0.0);
}

TEST_CASE("Galerkin residual is small after solve") {
    const auto mesh = make_mesh(annulus_domain(0.05, 1.0), 0.08);
    const auto rho = make_rho_fn(CoefficientField::smooth_x2());
    const auto dirichlet = marker_dirichlet(*mesh);
    const SparseSystem sys = assemble(*mesh, rho, dirichlet);
    const PcgResult sol = pcg_jacobi(sys, 1e-10, 0);
    std::vector<double> ax(sys.n);
    sys.matvec(sol.x, ax);
    double r2 = 0.0, b2 = 0.0;
    for (int i = 0; i < sys.n; ++i) {
        r2 += (ax[i] - sys.rhs[i]) * (ax[i] - sys.rhs[i]);
        b2 += sys.rhs[i] * sys.rhs[i];
    }
    CHECK(std::sqrt(r2) <= 1e-10 * std::sqrt(b2));
}

TEST_CASE("monotonicity in the hole boundary data on a Delaunay mesh") {
    const auto mesh = make_mesh(annulus_domain(0.05, 1.0), 0.1, std::nullopt, 0);
    const auto rho = make_rho_fn(CoefficientField::smooth_x2());
    SolverOptions lo_opt;
    lo_opt.hole_value = 0.5;
    const SolutionField hi = solve_dirichlet(mesh, rho);
    const SolutionField lo = solve_dirichlet(mesh, rho, lo_opt);
    for (int v = 0; v < mesh->vertex_count(); ++v)
        CHECK(hi.nodal_values[v] >= lo.nodal_values[v] - 1e-9);
}

TEST_CASE("scaling the coefficient leaves the solution unchanged") {
    const auto mesh = make_mesh(annulus_domain(0.05, 1.0), 0.1);
    const auto rho = CoefficientField::smooth_x2();
    const SolutionField base = solve_dirichlet(mesh, make_rho_fn(rho));
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> logc(-3.0, 3.0);
    for (int i = 0; i < 5; ++i) {
        const double c = std::pow(10.0, logc(rng));
        const SolutionField scaled =
            solve_dirichlet(mesh, [&](const Vec2& p) { return c * rho.eval(p); });
        double max_diff = 0.0;
        for (int v = 0; v < mesh->vertex_count(); ++v)
            max_diff = std::max(max_diff, std::abs(scaled.nodal_values[v] - base.nodal_values[v]));
        CHECK(max_diff <= 1e-8);
    }
}

TEST_CASE("degenerate elements and negative coefficients are rejected") {
    Mesh flat;
    flat.vertices = {{0, 0}, {1, 0}, {2, 0}};
    flat.triangles = {{0, 1, 2}};
    CHECK_THROWS_AS(local_stiffness(flat.vertices[0], flat.vertices[1], flat.vertices[2], 1.0),
                    DegenerateElement);

    const auto mesh = make_mesh(annulus_domain(0.05, 1.0), 0.15);
    CHECK_THROWS_AS(assemble(*mesh, [](const Vec2&) { return -1.0; }, marker_dirichlet(*mesh)),
                    NonpositiveCoefficient);
}

TEST_CASE("assembly is bitwise deterministic across thread counts") {
    const auto mesh = make_mesh(disc_three_holes_domain(0.03), 0.07);
    const auto rho = make_rho_fn(CoefficientField::radius_sq());
    const auto dirichlet = marker_dirichlet(*mesh);
    const SparseSystem s1 = assemble(*mesh, rho, dirichlet, Quadrature::Barycenter, 1);
    const SparseSystem s4 = assemble(*mesh, rho, dirichlet, Quadrature::Barycenter, 4);
    REQUIRE(s1.val.size() == s4.val.size());
    for (std::size_t i = 0; i < s1.val.size(); ++i) CHECK(s1.val[i] == s4.val[i]);
    for (int i = 0; i < s1.n; ++i) CHECK(s1.rhs[i] == s4.rhs[i]);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "critflow/conformal.hpp"
#include "critflow/critpoint.hpp"
#include "critflow/meshgen.hpp"
#include "critflow/radial.hpp"
#include "critflow/reflect.hpp"

using namespace critflow;

namespace {

SolutionField make_field(std::shared_ptr<const Mesh> mesh, std::vector<double> values) {
    SolutionField u;
    u.mesh = mesh;
    u.nodal_values = std::move(values);
    u.element_gradients = all_element_gradients(*mesh, u.nodal_values);
    u.locator = std::make_shared<Locator>(*mesh);
    return u;
}

// quarter-annulus Laplace problem with the radial log profile as data
struct QuarterAnnulus {
    std::shared_ptr<const Mesh> mesh;
    std::vector<std::optional<double>> dirichlet;
    SolutionField u;
};

QuarterAnnulus quarter_annulus_problem(double h) {
    QuarterAnnulus qa;
    qa.mesh = std::make_shared<const Mesh>(sector_mesh(0.3, 0.9, 0.0, M_PI / 2, h));
    const auto markers = qa.mesh->boundary_vertex_markers();
    qa.dirichlet.assign(qa.mesh->vertex_count(), std::nullopt);
    for (int v = 0; v < qa.mesh->vertex_count(); ++v) {
        if (markers[v] == -2) continue;
        const double r = norm(qa.mesh->vertices[v]);
        qa.dirichlet[v] = std::log(r / 0.9) / std::log(0.3 / 0.9);
    }
    qa.u = solve_with_dirichlet(qa.mesh, make_rho_fn(CoefficientField::constant(1.0)), qa.dirichlet);
    return qa;
}

}  // namespace

TEST_CASE("radial exact solution: boundary values and derived constants") {
    const RadialExact ex(0.05, 0.5, 1.0, 21.0);
    CHECK(ex.u(0.05) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ex.u(1.0) == doctest::Approx(0.0).epsilon(1e-14));

    // frozen closed-form values for r0=0.05, r1=0.5, rho-=1, rho+=21
    CHECK(ex.a_minus == doctest::Approx(-0.42815695399822379).epsilon(1e-15));
    CHECK(ex.a_plus == doctest::Approx(-0.020388426380867797).epsilon(1e-15));
    CHECK(ex.a_minus < 0.0);
    CHECK(ex.a_plus < 0.0);

    // continuity at r1 and flux continuity across the interface
    CHECK(std::abs((1.0 + ex.a_minus * std::log(ex.r1 / ex.r0)) - ex.a_plus * std::log(ex.r1)) < 1e-12);
    CHECK(ex.rho_minus * ex.a_minus == doctest::Approx(ex.rho_plus * ex.a_plus).epsilon(1e-14));

    CHECK_THROWS_AS(ex.u(0.01), OutOfRange);
    CHECK_THROWS_AS(ex.u(1.5), OutOfRange);
    CHECK_THROWS_AS(RadialExact(0.5, 0.05, 1, 1), OutOfRange);
}

TEST_CASE("homogeneous limit reduces to the harmonic annulus") {
    const RadialExact ex(0.05, 0.5, 3.0, 3.0);
    CHECK(ex.a_minus == doctest::Approx(1.0 / std::log(0.05)).epsilon(1e-14));
    CHECK(ex.a_plus == doctest::Approx(ex.a_minus).epsilon(1e-14));
    for (double r : {0.05, 0.1, 0.3, 0.7, 1.0})
        CHECK(ex.u(r) == doctest::Approx(std::log(r) / std::log(0.05)).epsilon(1e-12));
}

TEST_CASE("radial exact gradient never vanishes on the closed annulus") {
    const RadialExact ex(0.05, 0.5, 1.0, 21.0);
    const double floor = std::abs(ex.a_plus);  // |a|/r >= |a_plus| on r <= 1
    for (int i = 0; i < 2000; ++i) {
        const double r = 0.05 + (1.0 - 0.05) * i / 1999.0;
        const double t = 2.0 * M_PI * (i * 0.618);
        const Vec2 g = ex.grad({r * std::cos(t), r * std::sin(t)});
        CHECK(norm(g) >= floor - 1e-14);
    }
}

TEST_CASE("half-plane discontinuity exact solution") {
    CHECK(halfplane_discontinuity_exact(0.05) == doctest::Approx(1.0));
    CHECK(halfplane_discontinuity_exact(1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(halfplane_discontinuity_exact(0.22360679774997896) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(halfplane_discontinuity_exact(0.01), OutOfRange);
}

TEST_CASE("interface-aligned FEM reproduces the radial exact solution") {
    const RadialExact ex(0.05, 0.5, 1.0, 21.0);
    const auto rho = CoefficientField::piecewise_radial(0.05, 0.5, 1.0, 21.0);
    const auto mesh = std::make_shared<const Mesh>(
        generate_mesh(annulus_domain(0.05, 1.0), 0.05, rho.interface_curve()));
    const SolutionField u = solve_dirichlet(mesh, make_rho_fn(rho));
    // clamp radii: chord midpoints of boundary edges dip below r0 by the sagitta
    const double err = relative_l2_error(*mesh, u.nodal_values, [&](const Vec2& p) {
        return ex.u(std::clamp(norm(p), ex.r0, 1.0));
    });
    CHECK(err < 2e-2);
}

TEST_CASE("identity pullback is a bitwise fixed point") {
    const QuarterAnnulus qa = quarter_annulus_problem(0.05);
    const auto rho = make_rho_fn(CoefficientField::constant(1.0));
    const InvarianceCheck c1 =
        verify_invariance(*qa.mesh, rho, qa.u.nodal_values, qa.dirichlet, ConformalMap::identity());
    const InvarianceCheck c2 =
        verify_invariance(*qa.mesh, rho, qa.u.nodal_values, qa.dirichlet, ConformalMap::identity());
    CHECK(c1.residual == c2.residual);
    CHECK(c1.pass);
    // the transplanted residual is the solve residual
    CHECK(c1.residual <= 10.0 * 1e-10);
}

TEST_CASE("square map preserves the quarter-annulus weak form") {
    const QuarterAnnulus qa = quarter_annulus_problem(0.04);
    const auto rho = make_rho_fn(CoefficientField::constant(1.0));
    const InvarianceCheck chk =
        verify_invariance(*qa.mesh, rho, qa.u.nodal_values, qa.dirichlet, ConformalMap::square(), 1e-8);
    CHECK(chk.pass);
    CHECK(chk.residual <= 1e-8);
    CHECK(chk.flipped_elements == 0);

    // image geometry: quarter-annulus {0.3 < r < 0.9} squares to {0.09 < r < 0.81}
    const PulledBackProblem pb = pullback_problem(*qa.mesh, ConformalMap::square());
    for (const Vec2& v : pb.mapped_mesh.vertices) {
        CHECK(norm(v) >= 0.09 - 1e-9);
        CHECK(norm(v) <= 0.81 + 1e-9);
        CHECK(v.y >= -1e-9);  // angles double into the upper half plane
    }
}

TEST_CASE("anti-conformal control fails with a large defect") {
    const QuarterAnnulus qa = quarter_annulus_problem(0.05);
    const auto rho = make_rho_fn(CoefficientField::constant(1.0));
    const InvarianceCheck chk =
        verify_invariance(*qa.mesh, rho, qa.u.nodal_values, qa.dirichlet, ConformalMap::conjugate(), 1e-8);
    CHECK(!chk.pass);
    CHECK(chk.residual > 1e6 * 1e-8);
    CHECK(chk.flipped_elements == qa.mesh->triangle_count());
}

TEST_CASE("affine moebius map scales areas by |a/d|^2") {
    const auto mesh = sector_mesh(0.3, 0.9, 0.0, M_PI / 2, 0.1);
    const Complex a{2.0, 1.0}, d{1.0, -0.5};
    const PulledBackProblem pb =
        pullback_problem(mesh, ConformalMap::moebius(a, Complex{0.3, -0.1}, Complex{0, 0}, d));
    const double scale = std::norm(a / d);
    for (int t = 0; t < mesh.triangle_count(); ++t)
        CHECK(pb.mapped_mesh.area_of(t) == doctest::Approx(scale * mesh.area_of(t)).epsilon(1e-10));
}

TEST_CASE("sqrt map inverts the square map off the branch cut") {
    const ConformalMap sq = ConformalMap::square(), rt = ConformalMap::sqrt_map();
    for (const Complex z : {Complex{0.5, 0.2}, Complex{0.1, 0.7}, Complex{0.9, 0.01}}) {
        const Complex back = rt.apply(sq.apply(z));
        CHECK(back.real() == doctest::Approx(z.real()).epsilon(1e-12));
        CHECK(back.imag() == doctest::Approx(z.imag()).epsilon(1e-12));
    }
}

TEST_CASE("maps singular on the mesh are rejected") {
    const auto mesh = sector_mesh(0.0, 1.0, 0.0, M_PI / 2, 0.2);  // contains the origin
    CHECK_THROWS_AS(pullback_problem(mesh, ConformalMap::square()), MapSingular);
}

TEST_CASE("gradient identity of the conformal change of variables") {
    // u(z) = uhat(F(z)) gives grad u . grad v = (grad uhat . grad vhat) |F'|^2
    const ConformalMap F = ConformalMap::square();
    auto uhat = [](const Vec2& w) { return w.x * w.x - 0.5 * w.y; };
    auto vhat = [](const Vec2& w) { return std::sin(w.x) + w.y * w.y; };
    auto grad_num = [](auto f, const Vec2& p) {
        const double s = 1e-6;
        return Vec2{(f({p.x + s, p.y}) - f({p.x - s, p.y})) / (2 * s),
                    (f({p.x, p.y + s}) - f({p.x, p.y - s})) / (2 * s)};
    };
    for (const Vec2 z : {Vec2{0.4, 0.3}, Vec2{0.7, -0.2}, Vec2{-0.3, 0.6}}) {
        auto u = [&](const Vec2& p) { return uhat(F.apply(p)); };
        auto v = [&](const Vec2& p) { return vhat(F.apply(p)); };
        const double lhs = dot(grad_num(u, z), grad_num(v, z));
        const double scale = std::norm(F.derivative(Complex{z.x, z.y}));
        const Vec2 w = F.apply(z);
        const double rhs = dot(grad_num(uhat, w), grad_num(vhat, w)) * scale;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
    }
}

TEST_CASE("odd reflection of u = x across x = 0 stays harmonic") {
    // structured strip mesh on [0,1]x[0,1]
    Mesh strip;
    strip.h = 0.25;
    const int n = 4;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            strip.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    auto vid = [&](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            strip.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            strip.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    for (int i = 0; i < n; ++i) {
        strip.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), kExteriorMarker});
        strip.boundary_edges.push_back({vid(i + 1, n), vid(i, n), kExteriorMarker});
        strip.boundary_edges.push_back({vid(n, i), vid(n, i + 1), kExteriorMarker});
        strip.boundary_edges.push_back({vid(0, i + 1), vid(0, i), kExteriorMarker});
    }
    std::vector<double> values;
    for (const Vec2& v : strip.vertices) values.push_back(v.x);

    const ReflectedField rf = odd_reflect(strip, values, ReflectionAxis::X0);
    CHECK(rf.mesh.vertex_count() == 2 * strip.vertex_count() - (n + 1));
    rf.mesh.validate();
    for (int v = 0; v < rf.mesh.vertex_count(); ++v)
        CHECK(rf.values[v] == doctest::Approx(rf.mesh.vertices[v].x).epsilon(1e-14));
    const double res = reflected_residual(rf, even_reflect_rho(
        make_rho_fn(CoefficientField::constant(1.0)), ReflectionAxis::X0));
    CHECK(res <= 1e-12);
}

TEST_CASE("nonvanishing trace is rejected") {
    Mesh tri;
    tri.h = 1.0;
    tri.vertices = {{0, 0}, {1, 0}, {0, 1}};
    tri.triangles = {{0, 1, 2}};
    tri.boundary_edges = {{0, 1, kExteriorMarker}, {1, 2, kExteriorMarker}, {2, 0, kExteriorMarker}};
    CHECK_THROWS_AS(odd_reflect(tri, {0.0, 1.0, 0.5}, ReflectionAxis::X0), NonVanishingTrace);
}

TEST_CASE("double odd reflection certifies the corner critical point") {
    // quarter-disc solve with u = 0 on both axes and sin(2 theta) on the arc
    const double R = 1.0;
    auto quarter = std::make_shared<const Mesh>(sector_mesh(0.0, R, 0.0, M_PI / 2, 0.05));
    const auto markers = quarter->boundary_vertex_markers();
    std::vector<std::optional<double>> dirichlet(quarter->vertex_count());
    for (int v = 0; v < quarter->vertex_count(); ++v) {
        if (markers[v] == -2) continue;
        const Vec2 p = quarter->vertices[v];
        if (std::abs(p.x) < 1e-12 || std::abs(p.y) < 1e-12) dirichlet[v] = 0.0;
        else dirichlet[v] = std::sin(2.0 * std::atan2(p.y, p.x));
    }
    const auto rho = CoefficientField::smooth_x2();  // even in x and in y
    const SolutionField u = solve_with_dirichlet(quarter, make_rho_fn(rho), dirichlet);

    const ReflectedField once = odd_reflect(*quarter, u.nodal_values, ReflectionAxis::X0);
    const ReflectedField twice = odd_reflect(once.mesh, once.values, ReflectionAxis::Y0);
    twice.mesh.validate();

    const RhoFn rho_doubled = even_reflect_rho(
        even_reflect_rho(make_rho_fn(rho), ReflectionAxis::X0), ReflectionAxis::Y0);
    const double res = reflected_residual(twice, rho_doubled);
    CHECK(res <= 10.0 * 1e-10);

    // the corner image is an interior critical point of positive index
    const SolutionField doubled = make_field(std::make_shared<const Mesh>(twice.mesh), twice.values);
    const WindingResult w = winding_of_gradient(doubled, circle_contour({0, 0}, 0.3));
    CHECK(w.resolved);
    const double index = -w.winding;
    CHECK(std::abs(index - std::lround(index)) <= 0.05);
    CHECK(std::lround(index) >= 1);
    CHECK(std::lround(index) == 1);  // odd-odd saddle
}

TEST_CASE("reflecting an already doubled field is the identity") {
    auto quarter = std::make_shared<const Mesh>(sector_mesh(0.0, 1.0, 0.0, M_PI / 2, 0.1));
    std::vector<double> values;
    for (const Vec2& p : quarter->vertices) values.push_back(p.x * p.y);
    const ReflectedField once = odd_reflect(*quarter, values, ReflectionAxis::X0);
    const ReflectedField again = odd_reflect(once.mesh, once.values, ReflectionAxis::X0);
    CHECK(again.was_symmetric);
    CHECK(again.mesh.vertex_count() == once.mesh.vertex_count());
    for (int v = 0; v < once.mesh.vertex_count(); ++v)
        CHECK(again.values[v] == once.values[v]);
}

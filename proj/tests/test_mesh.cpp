#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "critflow/mesh.hpp"
#include "critflow/mesh_io.hpp"
#include "critflow/meshgen.hpp"

using namespace critflow;

namespace {

std::string temp_path(const std::string& name) {
    return std::string("/tmp/critflow_test_") + name;
}

std::vector<Vec2> loop_polygon(const Mesh& mesh, const std::vector<int>& loop) {
    std::vector<Vec2> poly;
    for (int e : loop) poly.push_back(mesh.vertices[mesh.boundary_edges[e].a]);
    return poly;
}

}  // namespace

TEST_CASE("annulus mesh respects the radial bounds") {
    const DomainSpec spec = annulus_domain(0.05, 1.0);
    const Mesh mesh = generate_mesh(spec, 0.1);
    CHECK(mesh.hole_count() == 1);
    const double tol = mesh.h * mesh.h + 1e-12;
    for (const Vec2& v : mesh.vertices) {
        const double r = norm(v);
        CHECK(r >= 0.05 - tol);
        CHECK(r <= 1.0 + tol);
    }
    mesh.validate();
}

TEST_CASE("disc without holes is all exterior") {
    DomainSpec spec;
    spec.outer = {{0.0, 0.0}, 1.0, std::nullopt};
    spec.validate();
    const Mesh mesh = generate_mesh(spec, 0.2);
    CHECK(mesh.hole_count() == 0);
    for (const BoundaryEdge& e : mesh.boundary_edges) CHECK(e.marker == kExteriorMarker);
    CHECK(mesh.boundary_loops().size() == 1);
}

TEST_CASE("three-hole disc: each hole loop encloses exactly its center") {
    const DomainSpec spec = disc_three_holes_domain(0.01);
    const Mesh mesh = generate_mesh(spec, 0.05);
    CHECK(mesh.hole_count() == 3);
    const auto loops = mesh.boundary_loops();
    REQUIRE(loops.size() == 4);
    for (const auto& loop : loops) {
        const int marker = mesh.boundary_edges[loop.front()].marker;
        const auto poly = loop_polygon(mesh, loop);
        int enclosed = 0;
        for (std::size_t k = 0; k < spec.holes.size(); ++k) {
            const bool in = point_in_polygon(spec.holes[k].center, poly);
            if (in) {
                ++enclosed;
                if (marker != kExteriorMarker) CHECK(marker == static_cast<int>(k));
            }
        }
        if (marker == kExteriorMarker) CHECK(enclosed == 3);
        else CHECK(enclosed == 1);
    }
}

TEST_CASE("triangle areas add up to the domain area") {
    const DomainSpec spec = annulus_domain(0.05, 1.0);
    for (double h : {0.1, 0.05}) {
        const Mesh mesh = generate_mesh(spec, h);
        const double rel = std::abs(mesh.total_area() - spec.area()) / spec.area();
        CHECK(rel < h * h);
    }
}

TEST_CASE("boundary loops: counts and orientation") {
    const DomainSpec spec = disc_three_holes_domain(0.01);
    const Mesh mesh = generate_mesh(spec, 0.08);
    const auto loops = mesh.boundary_loops();
    CHECK(static_cast<int>(loops.size()) == spec.hole_count() + 1);
    for (const auto& loop : loops) {
        const auto poly = loop_polygon(mesh, loop);
        const double area = polygon_signed_area(poly);
        const int marker = mesh.boundary_edges[loop.front()].marker;
        // domain on the left: exterior loop CCW, hole loops CW
        if (marker == kExteriorMarker) CHECK(area > 0.0);
        else CHECK(area < 0.0);
    }
    // winding of the exterior loop around an interior domain point is +1
    for (const auto& loop : loops) {
        if (mesh.boundary_edges[loop.front()].marker != kExteriorMarker) continue;
        CHECK(point_in_polygon({0.25, 0.25}, loop_polygon(mesh, loop)));
    }
}

TEST_CASE("half-disc meshes carry exact corner vertices") {
    const DomainSpec spec = half_disc_domain({Hole{{0.0, 0.0}, 0.01}});
    const Mesh mesh = generate_mesh(spec, 0.1);
    REQUIRE(mesh.corner_vertex_ids.size() == 2);
    std::set<std::pair<double, double>> got;
    for (int c : mesh.corner_vertex_ids) got.insert({mesh.vertices[c].x, mesh.vertices[c].y});
    CHECK(got.count({-2.0, -1.0}) == 1);
    CHECK(got.count({2.0, -1.0}) == 1);
    for (const Vec2& v : mesh.vertices) CHECK(v.y >= -1.0 - 1e-12);
}

TEST_CASE("invalid domains are rejected") {
    DomainSpec spec;
    spec.outer = {{0.0, 0.0}, 1.0, std::nullopt};
    spec.holes = {{{0.2, 0.0}, 0.3}, {{0.5, 0.0}, 0.3}};  // overlapping closures
    CHECK_THROWS_AS(spec.validate(), InvalidDomain);

    DomainSpec outside;
    outside.outer = {{0.0, 0.0}, 1.0, std::nullopt};
    outside.holes = {{{0.9, 0.0}, 0.2}};
    CHECK_THROWS_AS(outside.validate(), InvalidDomain);
}

TEST_CASE("save/load round-trips bit-exactly") {
    const Mesh mesh = generate_mesh(annulus_domain(0.05, 1.0), 0.1);
    const std::string path = temp_path("roundtrip.mesh");
    save_mesh(mesh, path);
    const Mesh back = load_mesh(path);
    REQUIRE(back.vertex_count() == mesh.vertex_count());
    REQUIRE(back.triangle_count() == mesh.triangle_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        CHECK(back.vertices[v].x == mesh.vertices[v].x);
        CHECK(back.vertices[v].y == mesh.vertices[v].y);
    }
    CHECK(back.triangles == mesh.triangles);
    REQUIRE(back.boundary_edges.size() == mesh.boundary_edges.size());
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        CHECK(back.boundary_edges[e].a == mesh.boundary_edges[e].a);
        CHECK(back.boundary_edges[e].b == mesh.boundary_edges[e].b);
        CHECK(back.boundary_edges[e].marker == mesh.boundary_edges[e].marker);
    }
    std::remove(path.c_str());
}

TEST_CASE("loader rejects out-of-range vertex indices") {
    const std::string path = temp_path("bad_index.mesh");
    {
        std::ofstream out(path);
        out << "critflow-mesh 1\nvertices 3\n0 0\n1 0\n0 1\n"
               "triangles 1\n0 1 7\nboundary 3\n0 1 ext\n1 2 ext\n2 0 ext\ncorners 0\n";
    }
    CHECK_THROWS_AS(load_mesh(path), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("loader reports parse errors with line numbers") {
    const std::string path = temp_path("garbled.mesh");
    {
        std::ofstream out(path);
        out << "critflow-mesh 1\nvertices 2\n0 0\nnot-a-number\n";
    }
    try {
        load_mesh(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 4);
    }
    std::remove(path.c_str());
}

TEST_CASE("loader reorients clockwise triangles and records a note") {
    const std::string path = temp_path("cw.mesh");
    {
        std::ofstream out(path);
        out << "critflow-mesh 1\nvertices 3\n0 0\n1 0\n0 1\n"
               "triangles 1\n0 2 1\nboundary 3\n0 1 ext\n1 2 ext\n2 0 ext\ncorners 0\n";
    }
    const Mesh mesh = load_mesh(path);
    CHECK(mesh.area_of(0) > 0.0);
    REQUIRE(!mesh.notes.empty());
    CHECK(mesh.notes.front().find("reoriented") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("gmsh 2.2 subset reader") {
    const std::string path = temp_path("square.msh");
    {
        std::ofstream out(path);
        out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
               "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n$EndNodes\n"
               "$Elements\n6\n"
               "1 1 2 1 10 1 2\n"
               "2 1 2 1 10 2 3\n"
               "3 1 2 1 10 3 4\n"
               "4 1 2 1 10 4 1\n"
               "5 2 2 5 11 1 2 3\n"
               "6 2 2 5 11 1 3 4\n"
               "$EndElements\n";
    }
    const Mesh mesh = load_gmsh22(path);
    CHECK(mesh.vertex_count() == 4);
    CHECK(mesh.triangle_count() == 2);
    CHECK(mesh.boundary_edges.size() == 4);
    CHECK(mesh.hole_count() == 0);
    std::remove(path.c_str());
}

TEST_CASE("refine: counts, mesh size, projection, marker preservation") {
    const DomainSpec spec = annulus_domain(0.05, 1.0);
    const Mesh mesh = generate_mesh(spec, 0.1);
    const int T = mesh.triangle_count();
    const int V = mesh.vertex_count();
    const int E = static_cast<int>(mesh.edge_triangle_map().size());

    const Mesh fine = refine(mesh);
    CHECK(fine.triangle_count() == 4 * T);
    CHECK(fine.vertex_count() == V + E);
    CHECK(fine.h == doctest::Approx(mesh.h / 2).epsilon(1e-12));
    fine.validate();

    // exterior boundary midpoints projected back onto the circle
    const double tol = fine.h * fine.h + 1e-12;
    for (const BoundaryEdge& e : fine.boundary_edges) {
        for (int v : {e.a, e.b}) {
            if (e.marker == kExteriorMarker) CHECK(std::abs(norm(fine.vertices[v]) - 1.0) <= tol);
            else CHECK(std::abs(norm(fine.vertices[v]) - 0.05) <= tol);
        }
    }

    const Mesh finer = refine(fine);
    CHECK(finer.h == doctest::Approx(mesh.h / 4).epsilon(0.01));
    CHECK(finer.triangle_count() == 16 * T);

    // markers survive refinement
    int ext_before = 0, ext_after = 0;
    for (const BoundaryEdge& e : mesh.boundary_edges) ext_before += e.marker == kExteriorMarker;
    for (const BoundaryEdge& e : fine.boundary_edges) ext_after += e.marker == kExteriorMarker;
    CHECK(ext_after == 2 * ext_before);
}

TEST_CASE("refine keeps half-disc corner identity") {
    const DomainSpec spec = half_disc_domain({Hole{{0.0, 0.0}, 0.01}});
    const Mesh mesh = generate_mesh(spec, 0.15);
    const Mesh fine = refine(mesh);
    REQUIRE(fine.corner_vertex_ids.size() == 2);
    for (std::size_t i = 0; i < fine.corner_vertex_ids.size(); ++i) {
        const Vec2 a = mesh.vertices[mesh.corner_vertex_ids[i]];
        const Vec2 b = fine.vertices[fine.corner_vertex_ids[i]];
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
    }
}

TEST_CASE("random domains round-trip through the mesh format") {
    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int iter = 0; iter < 20; ++iter) {
        DomainSpec spec;
        spec.outer = {{0.0, 0.0}, 1.0, std::nullopt};
        const int holes = iter % 4;
        for (int k = 0; k < holes; ++k) {
            // well-separated small holes on a ring
            const double a = 2.0 * M_PI * (k + u01(rng) * 0.2) / std::max(1, holes);
            spec.holes.push_back({{0.45 * std::cos(a), 0.45 * std::sin(a)}, 0.04 + 0.04 * u01(rng)});
        }
        spec.validate();
        const double h = 0.1 + 0.1 * u01(rng);
        const Mesh mesh = generate_mesh(spec, h);
        const std::string path = temp_path("rand.mesh");
        save_mesh(mesh, path);
        const Mesh back = load_mesh(path);
        CHECK(back.triangles == mesh.triangles);
        REQUIRE(back.vertex_count() == mesh.vertex_count());
        bool same = true;
        for (int v = 0; v < mesh.vertex_count(); ++v)
            same = same && back.vertices[v] == mesh.vertices[v];
        CHECK(same);
        std::remove(path.c_str());
    }
}

TEST_CASE("interface-aligned meshes resolve the discontinuity with edges") {
    InterfaceCurve circle;
    circle.is_circle = true;
    circle.center = {0.0, 0.0};
    circle.radius = 0.5;
    const Mesh mesh = generate_mesh(annulus_domain(0.05, 1.0), 0.08, circle);
    // no triangle straddles the circle: its vertices are never on both sides
    int on_iface = 0;
    for (const auto& tr : mesh.triangles) {
        int inside = 0, outside = 0;
        for (int v : tr) {
            const double r = norm(mesh.vertices[v]);
            if (r < 0.5 - 1e-9) ++inside;
            if (r > 0.5 + 1e-9) ++outside;
        }
        CHECK((inside == 0 || outside == 0));
    }
    for (const VertexTag& t : mesh.vertex_tags) on_iface += t.kind == VertexKind::Interface;
    CHECK(on_iface > 20);

    InterfaceCurve line;
    line.is_circle = false;
    line.y_value = 0.0;
    const Mesh mesh2 = generate_mesh(annulus_domain(0.05, 1.0), 0.08, line);
    for (const auto& tr : mesh2.triangles) {
        int above = 0, below = 0;
        for (int v : tr) {
            if (mesh2.vertices[v].y > 1e-9) ++above;
            if (mesh2.vertices[v].y < -1e-9) ++below;
        }
        CHECK((above == 0 || below == 0));
    }
}

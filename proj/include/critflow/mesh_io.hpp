#pragma once

// ASCII mesh formats:
//  - native `critflow-mesh 1` (round-trips vertices bit-exactly at 17
//    significant digits)
//  - a reader for the Gmsh 2.2 ASCII subset: nodes, 2-node line elements
//    with physical tags (1 = exterior, k >= 2 = hole k-1), 3-node triangles.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "critflow/errors.hpp"
#include "critflow/mesh.hpp"

namespace critflow {

namespace mesh_io_detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Re-orients boundary edges to run with the domain on the left and fills
// vertex tags from markers so refine() can keep them.
inline void normalize_loaded(Mesh& mesh) {
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        auto& tr = mesh.triangles[t];
        if (triangle_area(mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]]) < 0.0) {
            std::swap(tr[1], tr[2]);
            mesh.notes.push_back("reoriented clockwise triangle " + std::to_string(t));
        }
    }
    std::map<std::pair<int, int>, std::pair<int, int>> directed;  // CCW edge -> (tri, slot)
    for (int t = 0; t < mesh.triangle_count(); ++t)
        for (int k = 0; k < 3; ++k)
            directed[{mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3]}] = {t, k};
    for (BoundaryEdge& e : mesh.boundary_edges) {
        if (directed.count({e.a, e.b})) continue;
        if (directed.count({e.b, e.a})) { std::swap(e.a, e.b); continue; }
        throw ValidationError("boundary edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                              ") is not an edge of the triangulation");
    }
    mesh.vertex_tags.assign(mesh.vertices.size(), VertexTag{});
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        const VertexTag tag = e.marker == kExteriorMarker
                                  ? VertexTag{VertexKind::ExteriorArc, -1}
                                  : VertexTag{VertexKind::Hole, e.marker};
        mesh.vertex_tags[e.a] = tag;
        mesh.vertex_tags[e.b] = tag;
    }
    for (int c : mesh.corner_vertex_ids) mesh.vertex_tags[c] = {VertexKind::Corner, -1};
}

}  // namespace mesh_io_detail

inline void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CritflowError("cannot open " + path + " for writing");
    out << "critflow-mesh 1\n";
    out << "vertices " << mesh.vertex_count() << "\n";
    for (const Vec2& v : mesh.vertices)
        out << mesh_io_detail::fmt17(v.x) << " " << mesh_io_detail::fmt17(v.y) << "\n";
    out << "triangles " << mesh.triangle_count() << "\n";
    for (const auto& t : mesh.triangles)
        out << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "boundary " << mesh.boundary_edges.size() << "\n";
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        out << e.a << " " << e.b << " ";
        if (e.marker == kExteriorMarker) out << "ext\n";
        else out << "hole:" << (e.marker + 1) << "\n";
    }
    out << "corners " << mesh.corner_vertex_ids.size() << "\n";
    for (int c : mesh.corner_vertex_ids) out << c << "\n";
    if (!out) throw CritflowError("write to " + path + " failed");
}

inline Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CritflowError("cannot open " + path);
    std::size_t lineno = 0;
    std::string line;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) throw ParseError(lineno + 1, "unexpected end of file");
        ++lineno;
        return line;
    };

    Mesh mesh;
    {
        std::istringstream ss(next_line());
        std::string magic;
        int version = 0;
        ss >> magic >> version;
        if (magic != "critflow-mesh" || version != 1)
            throw ParseError(lineno, "expected header 'critflow-mesh 1'");
    }
    auto read_count = [&](const char* keyword) {
        std::istringstream ss(next_line());
        std::string kw;
        long long n = -1;
        ss >> kw >> n;
        if (kw != keyword || n < 0) throw ParseError(lineno, std::string("expected '") + keyword + " N'");
        return static_cast<std::size_t>(n);
    };

    const std::size_t nv = read_count("vertices");
    mesh.vertices.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        std::istringstream ss(next_line());
        Vec2 v;
        if (!(ss >> v.x >> v.y)) throw ParseError(lineno, "bad vertex line");
        mesh.vertices.push_back(v);
    }
    const std::size_t nt = read_count("triangles");
    for (std::size_t i = 0; i < nt; ++i) {
        std::istringstream ss(next_line());
        std::array<int, 3> t{};
        if (!(ss >> t[0] >> t[1] >> t[2])) throw ParseError(lineno, "bad triangle line");
        for (int v : t)
            if (v < 0 || v >= static_cast<int>(nv))
                throw ValidationError("triangle vertex index out of range at line " + std::to_string(lineno));
        mesh.triangles.push_back(t);
    }
    const std::size_t ne = read_count("boundary");
    for (std::size_t i = 0; i < ne; ++i) {
        std::istringstream ss(next_line());
        BoundaryEdge e;
        std::string marker;
        if (!(ss >> e.a >> e.b >> marker)) throw ParseError(lineno, "bad boundary line");
        if (e.a < 0 || e.a >= static_cast<int>(nv) || e.b < 0 || e.b >= static_cast<int>(nv))
            throw ValidationError("boundary vertex index out of range at line " + std::to_string(lineno));
        if (marker == "ext") e.marker = kExteriorMarker;
        else if (marker.rfind("hole:", 0) == 0) {
            const int k = std::atoi(marker.c_str() + 5);
            if (k < 1) throw ParseError(lineno, "bad hole marker '" + marker + "'");
            e.marker = k - 1;
        } else {
            throw ParseError(lineno, "unknown boundary marker '" + marker + "'");
        }
        mesh.boundary_edges.push_back(e);
    }
    const std::size_t nc = read_count("corners");
    for (std::size_t i = 0; i < nc; ++i) {
        std::istringstream ss(next_line());
        int c = -1;
        if (!(ss >> c)) throw ParseError(lineno, "bad corner line");
        if (c < 0 || c >= static_cast<int>(nv))
            throw ValidationError("corner vertex index out of range at line " + std::to_string(lineno));
        mesh.corner_vertex_ids.push_back(c);
    }

    mesh_io_detail::normalize_loaded(mesh);
    mesh.validate();
    return mesh;
}

// Gmsh 2.2 ASCII subset.
inline Mesh load_gmsh22(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CritflowError("cannot open " + path);
    std::size_t lineno = 0;
    std::string line;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) throw ParseError(lineno + 1, "unexpected end of file");
        ++lineno;
        return line;
    };

    Mesh mesh;
    std::map<long long, int> node_id;
    bool saw_nodes = false, saw_elements = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.rfind("$MeshFormat", 0) == 0) {
            std::istringstream ss(next_line());
            double version = 0;
            ss >> version;
            if (version < 2.0 || version >= 3.0) throw ParseError(lineno, "unsupported Gmsh format version");
            next_line();  // $EndMeshFormat
        } else if (line.rfind("$Nodes", 0) == 0) {
            saw_nodes = true;
            std::istringstream ss(next_line());
            long long n = 0;
            ss >> n;
            for (long long i = 0; i < n; ++i) {
                std::istringstream ls(next_line());
                long long id;
                double x, y, z;
                if (!(ls >> id >> x >> y >> z)) throw ParseError(lineno, "bad node line");
                node_id[id] = mesh.vertex_count();
                mesh.vertices.push_back({x, y});
            }
            next_line();  // $EndNodes
        } else if (line.rfind("$Elements", 0) == 0) {
            saw_elements = true;
            std::istringstream ss(next_line());
            long long n = 0;
            ss >> n;
            for (long long i = 0; i < n; ++i) {
                std::istringstream ls(next_line());
                long long id;
                int type = 0, ntags = 0;
                if (!(ls >> id >> type >> ntags)) throw ParseError(lineno, "bad element line");
                std::vector<int> tags(ntags);
                for (int k = 0; k < ntags; ++k) ls >> tags[k];
                if (type == 1) {
                    long long a, b;
                    if (!(ls >> a >> b)) throw ParseError(lineno, "bad line element");
                    const int phys = ntags > 0 ? tags[0] : 1;
                    BoundaryEdge e;
                    e.a = node_id.at(a);
                    e.b = node_id.at(b);
                    e.marker = phys <= 1 ? kExteriorMarker : phys - 2;
                    mesh.boundary_edges.push_back(e);
                } else if (type == 2) {
                    long long a, b, c;
                    if (!(ls >> a >> b >> c)) throw ParseError(lineno, "bad triangle element");
                    mesh.triangles.push_back({node_id.at(a), node_id.at(b), node_id.at(c)});
                }
                // other element types (points, etc.) are ignored
            }
            next_line();  // $EndElements
        }
        // unknown sections are skipped line by line
    }
    if (!saw_nodes || !saw_elements) throw ParseError(lineno, "missing $Nodes or $Elements section");

    // drop unused vertices (gmsh files may carry extra construction nodes)
    std::vector<int> remap(mesh.vertices.size(), -1);
    std::vector<Vec2> verts;
    for (const auto& t : mesh.triangles)
        for (int v : t)
            if (remap[v] == -1) {
                remap[v] = static_cast<int>(verts.size());
                verts.push_back(mesh.vertices[v]);
            }
    for (auto& t : mesh.triangles)
        for (int& v : t) v = remap[v];
    for (auto& e : mesh.boundary_edges) {
        if (remap[e.a] == -1 || remap[e.b] == -1)
            throw ValidationError("boundary edge references a node outside the triangulation");
        e.a = remap[e.a];
        e.b = remap[e.b];
    }
    mesh.vertices = std::move(verts);

    mesh_io_detail::normalize_loaded(mesh);
    mesh.validate();
    return mesh;
}

}  // namespace critflow

#pragma once

// Mesh generation for disc / half-disc domains with circular holes:
// Bowyer-Watson Delaunay over boundary-sampled circles plus an interior
// hexagonal lattice, hole carving, Laplacian smoothing of lattice vertices,
// and a second Delaunay pass so the final mesh is Delaunay of its points.
// Holes smaller than the target size get concentric transition rings.
// Coefficient discontinuity curves (circle r = r1 or line y = y1) can be
// resolved by mesh edges so piecewise-constant coefficients are
// single-valued per triangle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "critflow/delaunay.hpp"
#include "critflow/domain.hpp"
#include "critflow/errors.hpp"
#include "critflow/geo.hpp"
#include "critflow/mesh.hpp"

namespace critflow {

struct MeshGenOptions {
    int smoothing_sweeps = 3;
    int min_circle_samples = 24;
    double lattice_jitter = 0.01;  // fraction of h, deterministic
};

namespace meshgen_detail {

inline double tau() { return 2.0 * M_PI; }

inline double norm_angle(double a) {
    a = std::fmod(a, tau());
    if (a < 0) a += tau();
    return a;
}

// Deterministic jitter in [-1,1] keyed on lattice indices.
inline double hash_unit(std::uint64_t i, std::uint64_t j) {
    std::uint64_t x = i * 0x9E3779B97F4A7C15ull + j * 0xC2B2AE3D27D4EB4Full + 0x165667B19E3779F9ull;
    x ^= x >> 30; x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27; x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return 2.0 * (static_cast<double>(x >> 11) * 0x1.0p-53) - 1.0;
}

struct PointSet {
    std::vector<Vec2> pts;
    std::vector<VertexTag> tags;
    std::vector<char> smoothable;
    std::map<std::pair<long long, long long>, int> grid;  // dedup on 1e-9 grid

    int add(const Vec2& p, VertexTag tag, bool smooth = false) {
        const auto key = std::make_pair(static_cast<long long>(std::llround(p.x * 1e9)),
                                        static_cast<long long>(std::llround(p.y * 1e9)));
        auto it = grid.find(key);
        if (it != grid.end()) return it->second;
        const int id = static_cast<int>(pts.size());
        pts.push_back(p);
        tags.push_back(tag);
        smoothable.push_back(smooth ? 1 : 0);
        grid[key] = id;
        return id;
    }
};

// Samples one circle with mandatory angles included exactly; returns the
// ordered vertex ids of the closed loop (CCW).
inline std::vector<int> sample_circle(PointSet& ps, const Vec2& center, double radius,
                                      double chord, std::vector<double> mandatory,
                                      VertexTag tag, int min_samples) {
    for (double& a : mandatory) a = norm_angle(a);
    std::sort(mandatory.begin(), mandatory.end());
    mandatory.erase(std::unique(mandatory.begin(), mandatory.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                    mandatory.end());
    const double max_step = 2.0 * std::asin(std::clamp(chord / (2.0 * radius), 0.0, 1.0));
    std::vector<double> angles;
    auto fill = [&](double a0, double a1) {
        const double span = a1 - a0;
        const int n = std::max(1, static_cast<int>(std::ceil(span / max_step)));
        for (int i = 0; i < n; ++i) angles.push_back(a0 + span * i / n);
    };
    if (mandatory.empty()) {
        const int n = std::max(min_samples, static_cast<int>(std::ceil(tau() / max_step)));
        for (int i = 0; i < n; ++i) angles.push_back(tau() * i / n);
    } else {
        for (std::size_t k = 0; k < mandatory.size(); ++k) {
            const double a0 = mandatory[k];
            const double a1 = (k + 1 < mandatory.size()) ? mandatory[k + 1] : mandatory[0] + tau();
            fill(a0, a1);
        }
    }
    std::vector<int> loop;
    loop.reserve(angles.size());
    for (double a : angles)
        loop.push_back(ps.add(center + Vec2{radius * std::cos(a), radius * std::sin(a)}, tag));
    return loop;
}

// Samples an arc from angle a0 to a1 (CCW, a1 > a0), endpoints included.
inline std::vector<int> sample_arc(PointSet& ps, const Vec2& center, double radius,
                                   double a0, double a1, double chord, VertexTag tag,
                                   VertexTag end_tag, std::vector<double> mandatory_inside) {
    const double max_step = 2.0 * std::asin(std::clamp(chord / (2.0 * radius), 0.0, 1.0));
    std::vector<double> stops = {a0};
    std::sort(mandatory_inside.begin(), mandatory_inside.end());
    for (double a : mandatory_inside)
        if (a > a0 + 1e-12 && a < a1 - 1e-12) stops.push_back(a);
    stops.push_back(a1);
    std::vector<int> chain;
    for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
        const double s0 = stops[k], s1 = stops[k + 1];
        const int n = std::max(1, static_cast<int>(std::ceil((s1 - s0) / max_step)));
        for (int i = (k == 0 ? 0 : 1); i < n; ++i) {
            const double a = s0 + (s1 - s0) * i / n;
            const bool endpoint = (k == 0 && i == 0);
            chain.push_back(ps.add(center + Vec2{radius * std::cos(a), radius * std::sin(a)},
                                   endpoint ? end_tag : tag));
        }
        if (k + 2 == stops.size())
            chain.push_back(ps.add(center + Vec2{radius * std::cos(s1), radius * std::sin(s1)}, end_tag));
        else
            chain.push_back(ps.add(center + Vec2{radius * std::cos(s1), radius * std::sin(s1)}, tag));
    }
    return chain;
}

// Straight segment sampling, endpoints included with their own tags.
inline std::vector<int> sample_segment(PointSet& ps, const Vec2 a, const Vec2 b, double step,
                                       VertexTag tag, VertexTag tag_a, VertexTag tag_b) {
    const double len = dist(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    std::vector<int> chain;
    for (int i = 0; i <= n; ++i) {
        const Vec2 p = a + (b - a) * (static_cast<double>(i) / n);
        VertexTag t = (i == 0) ? tag_a : (i == n) ? tag_b : tag;
        chain.push_back(ps.add(p, t));
    }
    return chain;
}

// Segment sampling with a spatially varying step (interface lines crossing
// graded regions must match the local point density).
template <typename SizeFn>
inline std::vector<int> sample_segment_adaptive(PointSet& ps, const Vec2 a, const Vec2 b,
                                                SizeFn&& size_at, VertexTag tag,
                                                VertexTag tag_a, VertexTag tag_b) {
    const double len = dist(a, b);
    const Vec2 dir = (b - a) / len;
    std::vector<int> chain = {ps.add(a, tag_a)};
    double t = 0.0;
    for (int guard = 0; guard < 100000; ++guard) {
        // midpoint-iterated step so the size shrinks before fine zones
        double step = std::max(1e-9, size_at(a + dir * t));
        for (int it = 0; it < 3; ++it)
            step = std::max(1e-9, size_at(a + dir * std::min(len, t + 0.5 * step)));
        t += step;
        if (t >= len - 0.45 * step) break;
        chain.push_back(ps.add(a + dir * t, tag));
    }
    chain.push_back(ps.add(b, tag_b));
    return chain;
}

struct HoleSampling {
    double chord = 0.0;
    double clearance_radius = 0.0;  // keep lattice beyond this distance from center
};

inline double interface_distance(const InterfaceCurve& ic, const Vec2& p) {
    if (ic.is_circle) return std::abs(dist(p, ic.center) - ic.radius);
    return std::abs(p.y - ic.y_value);
}

}  // namespace meshgen_detail

inline Mesh generate_mesh(const DomainSpec& spec_in, double h,
                          std::optional<InterfaceCurve> iface = std::nullopt,
                          const MeshGenOptions& opt = {}) {
    using namespace meshgen_detail;
    if (!(h > 0.0)) throw InvalidDomain("mesh size h must be positive");
    DomainSpec spec = spec_in;
    spec.validate();
    if (h >= spec.outer.radius) throw InvalidDomain("mesh size h exceeds the outer radius");

    PointSet ps;
    std::vector<std::vector<int>> expected_loops;   // boundary curves, ordered
    std::vector<std::vector<int>> interface_chains;

    // --- corners (exact) ---
    std::vector<int> corner_ids;
    for (const Vec2& c : spec.corner_vertices)
        corner_ids.push_back(ps.add(c, {VertexKind::Corner, -1}));

    // per-hole boundary sampling scale, needed below for tangency margins
    std::vector<double> hole_chord(spec.holes.size());
    for (std::size_t k = 0; k < spec.holes.size(); ++k)
        hole_chord[k] = std::min(h, tau() * spec.holes[k].radius / opt.min_circle_samples);

    // passages narrower than the local sampling cannot be resolved
    for (std::size_t i = 0; i < spec.holes.size(); ++i) {
        const Hole& hi = spec.holes[i];
        for (std::size_t j = i + 1; j < spec.holes.size(); ++j) {
            const Hole& hj = spec.holes[j];
            const double gap = dist(hi.center, hj.center) - hi.radius - hj.radius;
            if (gap < 0.7 * std::max(hole_chord[i], hole_chord[j]))
                throw MeshFailure("holes " + std::to_string(i) + " and " + std::to_string(j) +
                                  " leave a passage narrower than the local mesh size; reduce h");
        }
        double outer_gap = spec.outer.radius - dist(hi.center, spec.outer.center) - hi.radius;
        if (spec.outer.cut) outer_gap = std::min(outer_gap, spec.outer.cut->side(hi.center) - hi.radius);
        if (outer_gap < 0.7 * h)
            throw MeshFailure("hole " + std::to_string(i) +
                              " leaves a passage to the outer boundary narrower than h; reduce h");
    }

    // --- interface intersections feed mandatory sample angles ---
    // A line crossing the interior of a circle gets exact shared endpoint
    // vertices; a near-tangent pass instead gets a widened cut interval so
    // the interface keeps a one-element clearance from the circle samples.
    std::vector<double> outer_mandatory;
    std::vector<std::vector<double>> hole_mandatory(spec.holes.size());
    std::vector<std::pair<double, double>> extra_line_cuts;
    if (iface && !iface->is_circle) {
        const double y1 = iface->y_value;
        auto circle_cut = [&](const Vec2& c, double r,
                              double margin) -> std::optional<std::pair<double, double>> {
            const double dy = y1 - c.y;
            if (std::abs(dy) >= r - margin) return std::nullopt;
            const double w = std::sqrt(r * r - dy * dy);
            return std::make_pair(std::atan2(dy, -w), std::atan2(dy, w));
        };
        if (auto a = circle_cut(spec.outer.center, spec.outer.radius, 0.5 * h)) {
            outer_mandatory.push_back(a->first);
            outer_mandatory.push_back(a->second);
        }
        for (std::size_t k = 0; k < spec.holes.size(); ++k) {
            const Hole& hole = spec.holes[k];
            const double dy = y1 - hole.center.y;
            if (auto a = circle_cut(hole.center, hole.radius, 0.5 * hole_chord[k])) {
                hole_mandatory[k].push_back(a->first);
                hole_mandatory[k].push_back(a->second);
            } else if (std::abs(dy) < hole.radius + 0.6 * hole_chord[k]) {
                const double r_eff = hole.radius + 0.75 * hole_chord[k];
                const double s = std::sqrt(std::max(0.0, r_eff * r_eff - dy * dy));
                extra_line_cuts.emplace_back(hole.center.x - s, hole.center.x + s);
            }
        }
    }
    if (iface && iface->is_circle) {
        // the aligned circle is required to avoid the boundary curves
        if (std::abs(dist(iface->center, spec.outer.center)) + iface->radius >= spec.outer.radius)
            throw InvalidDomain("interface circle reaches the outer boundary");
        for (const Hole& hole : spec.holes) {
            const double d = dist(iface->center, hole.center);
            if (std::abs(d - iface->radius) <= hole.radius + 1e-12 ||
                (d + hole.radius > iface->radius && d - hole.radius < iface->radius &&
                 d > 1e-12 + std::abs(iface->radius - hole.radius)))
                throw InvalidDomain("interface circle crosses a hole boundary");
        }
    }

    // --- outer boundary ---
    if (!spec.outer.cut) {
        expected_loops.push_back(sample_circle(ps, spec.outer.center, spec.outer.radius, h,
                                               outer_mandatory, {VertexKind::ExteriorArc, -1},
                                               opt.min_circle_samples));
    } else {
        // arc between the two corners on the kept side, then the straight cut
        const Vec2& c = spec.outer.center;
        const Vec2 p0 = spec.corner_vertices[0], p1 = spec.corner_vertices[1];
        double a0 = std::atan2(p0.y - c.y, p0.x - c.x);
        double a1 = std::atan2(p1.y - c.y, p1.x - c.x);
        // choose the arc whose midpoint lies on the kept side; traverse CCW
        auto mid_ok = [&](double s0, double s1) {
            const double m = 0.5 * (s0 + s1);
            return spec.outer.cut->side(c + Vec2{spec.outer.radius * std::cos(m),
                                                 spec.outer.radius * std::sin(m)}) > 0;
        };
        double s0 = a0, s1 = a1;
        if (s1 < s0) s1 += tau();
        if (!mid_ok(s0, s1)) {
            s0 = a1; s1 = a0;
            if (s1 < s0) s1 += tau();
        }
        std::vector<double> inside;
        for (double a : outer_mandatory) {
            double an = norm_angle(a);
            if (an < s0) an += tau();
            if (an > s0 && an < s1) inside.push_back(an);
        }
        auto arc = sample_arc(ps, c, spec.outer.radius, s0, s1, h,
                              {VertexKind::ExteriorArc, -1}, {VertexKind::Corner, -1}, inside);
        // cut segment from arc end back to arc start (domain stays on the left)
        const Vec2 end_pt = ps.pts[arc.back()];
        const Vec2 start_pt = ps.pts[arc.front()];
        auto seg = sample_segment(ps, end_pt, start_pt, h, {VertexKind::ExteriorCut, -1},
                                  {VertexKind::Corner, -1}, {VertexKind::Corner, -1});
        std::vector<int> loop = arc;
        for (std::size_t i = 1; i + 1 < seg.size(); ++i) loop.push_back(seg[i]);
        expected_loops.push_back(loop);
    }

    // --- holes, with transition rings when smaller than h ---
    std::vector<HoleSampling> hole_sampling(spec.holes.size());
    struct Ring { Vec2 center; double radius; double spacing; int hole; };
    std::vector<Ring> rings;
    for (std::size_t k = 0; k < spec.holes.size(); ++k) {
        const Hole& hole = spec.holes[k];
        const double chord = hole_chord[k];
        hole_sampling[k].chord = chord;
        expected_loops.push_back(sample_circle(ps, hole.center, hole.radius, chord,
                                               hole_mandatory[k],
                                               {VertexKind::Hole, static_cast<int>(k)},
                                               opt.min_circle_samples));
        double clearance = hole.radius + 0.55 * h;
        if (chord < 0.98 * h) {
            double rho = hole.radius, s = chord;
            int guard = 0;
            while (s < 0.999 * h && ++guard < 64) {
                s = std::min(h, 0.55 * (rho - hole.radius) + chord);
                rho += s;
                rings.push_back({hole.center, rho, s, static_cast<int>(k)});
            }
            clearance = rho + 0.5 * h;
        }
        hole_sampling[k].clearance_radius = clearance;
    }
    for (std::size_t r = 0; r < rings.size(); ++r) {
        const Ring& ring = rings[r];
        const int n = std::max(8, static_cast<int>(std::ceil(tau() * ring.radius / ring.spacing)));
        const double offset = (r % 2 == 1) ? M_PI / n : 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = tau() * i / n + offset;
            const Vec2 p = ring.center + Vec2{ring.radius * std::cos(a), ring.radius * std::sin(a)};
            if (!spec.inside_outer(p)) continue;
            if (dist(p, spec.outer.center) > spec.outer.radius - 0.55 * h) continue;
            if (spec.outer.cut && spec.outer.cut->side(p) < 0.55 * h) continue;
            bool blocked = false;
            for (std::size_t k = 0; k < spec.holes.size(); ++k) {
                if (static_cast<int>(k) == ring.hole) continue;
                if (dist(p, spec.holes[k].center) < hole_sampling[k].clearance_radius) { blocked = true; break; }
            }
            if (iface && interface_distance(*iface, p) < 0.7 * ring.spacing) blocked = true;
            if (!blocked) ps.add(p, {VertexKind::Interior, -1});
        }
    }

    // local size field for curves crossing the graded zones: matches the
    // in-ring point spacing at distance d from a hole circle, which is
    // (chord + 0.55 d) / 1.55, so curve edges keep their diametral circles
    // clear of the ring points
    auto local_size = [&](const Vec2& p) {
        double s = h;
        for (std::size_t k = 0; k < spec.holes.size(); ++k) {
            const double d = std::max(0.0, dist(p, spec.holes[k].center) - spec.holes[k].radius);
            s = std::min(s, (hole_sampling[k].chord + 0.55 * d) / 1.55);
        }
        return s;
    };

    // --- interface curve, resolved by vertices ---
    if (iface) {
        if (iface->is_circle) {
            double chord = h;
            const int probes = 256;
            for (int i = 0; i < probes; ++i) {
                const double a = tau() * i / probes;
                chord = std::min(chord, local_size(iface->center + Vec2{iface->radius * std::cos(a),
                                                                        iface->radius * std::sin(a)}));
            }
            interface_chains.push_back(sample_circle(ps, iface->center, iface->radius, chord, {},
                                                     {VertexKind::Interface, -1},
                                                     opt.min_circle_samples));
        } else {
            const double y1 = iface->y_value;
            const Vec2& c = spec.outer.center;
            const double dy = y1 - c.y;
            if (std::abs(dy) < spec.outer.radius - 0.5 * h) {  // skip grazing lines
                const double w = std::sqrt(spec.outer.radius * spec.outer.radius - dy * dy);
                double x_lo = c.x - w, x_hi = c.x + w;
                if (spec.outer.cut && spec.outer.cut->axis == CutAxis::X) {
                    if (spec.outer.cut->keep_positive) x_lo = std::max(x_lo, spec.outer.cut->value);
                    else x_hi = std::min(x_hi, spec.outer.cut->value);
                }
                bool line_inside = true;
                if (spec.outer.cut && spec.outer.cut->axis == CutAxis::Y)
                    line_inside = spec.outer.cut->side({c.x, y1}) > 0;
                if (line_inside && x_hi > x_lo) {
                    // split at hole chords (true crossings) and tangency gaps
                    std::vector<std::pair<double, double>> cuts = extra_line_cuts;
                    for (std::size_t k = 0; k < spec.holes.size(); ++k) {
                        const Hole& hole = spec.holes[k];
                        const double hdy = y1 - hole.center.y;
                        if (std::abs(hdy) >= hole.radius - 0.5 * hole_chord[k]) continue;
                        const double s = std::sqrt(hole.radius * hole.radius - hdy * hdy);
                        cuts.emplace_back(hole.center.x - s, hole.center.x + s);
                    }
                    std::sort(cuts.begin(), cuts.end());
                    double cur = x_lo;
                    std::vector<std::pair<double, double>> segs;
                    for (auto [a, b] : cuts) {
                        if (a > cur) segs.emplace_back(cur, a);
                        cur = std::max(cur, b);
                    }
                    if (x_hi > cur) segs.emplace_back(cur, x_hi);
                    for (auto [a, b] : segs) {
                        // endpoints lie on circles that already carry these
                        // exact points as mandatory samples
                        const int ia = ps.add({a, y1}, {VertexKind::Interface, -1});
                        const int ib = ps.add({b, y1}, {VertexKind::Interface, -1});
                        auto chain = sample_segment_adaptive(ps, ps.pts[ia], ps.pts[ib], local_size,
                                                             {VertexKind::Interface, -1},
                                                             ps.tags[ia], ps.tags[ib]);
                        chain.front() = ia;
                        chain.back() = ib;
                        interface_chains.push_back(chain);
                    }
                }
            }
        }
    }

    // --- hexagonal lattice ---
    const double row_dy = h * std::sqrt(3.0) / 2.0;
    const Vec2 c0 = spec.outer.center;
    const double R = spec.outer.radius;
    const int jmax = static_cast<int>(std::ceil(R / row_dy)) + 1;
    const int imax = static_cast<int>(std::ceil(R / h)) + 1;
    for (int j = -jmax; j <= jmax; ++j) {
        const double y = c0.y + j * row_dy;
        const double x_off = (j & 1) ? 0.5 * h : 0.0;
        for (int i = -imax; i <= imax; ++i) {
            Vec2 p{c0.x + i * h + x_off, y};
            p.x += opt.lattice_jitter * h * hash_unit(static_cast<std::uint64_t>(i + imax),
                                                      static_cast<std::uint64_t>(j + jmax));
            p.y += opt.lattice_jitter * h * hash_unit(static_cast<std::uint64_t>(j + jmax) * 2 + 1,
                                                      static_cast<std::uint64_t>(i + imax));
            if (dist(p, c0) > R - 0.55 * h) continue;
            if (spec.outer.cut && spec.outer.cut->side(p) < 0.55 * h) continue;
            bool blocked = false;
            for (std::size_t k = 0; k < spec.holes.size(); ++k)
                if (dist(p, spec.holes[k].center) < hole_sampling[k].clearance_radius) { blocked = true; break; }
            if (!blocked && iface && interface_distance(*iface, p) < 0.6 * h) blocked = true;
            if (!blocked) ps.add(p, {VertexKind::Interior, -1}, true);
        }
    }

    // --- triangulate, carve, (optionally smooth and re-triangulate) ---
    auto carve = [&](std::vector<std::array<int, 3>> tris) {
        std::vector<std::array<int, 3>> kept;
        kept.reserve(tris.size());
        for (const auto& t : tris) {
            const Vec2 g = (ps.pts[t[0]] + ps.pts[t[1]] + ps.pts[t[2]]) / 3.0;
            if (!spec.inside_outer(g) || spec.inside_hole(g)) continue;
            kept.push_back(t);
        }
        return kept;
    };

    std::vector<std::array<int, 3>> tris = carve(Delaunay(ps.pts).triangles());

    if (opt.smoothing_sweeps > 0) {
        std::vector<std::vector<int>> nbr(ps.pts.size());
        {
            std::set<std::pair<int, int>> seen;
            for (const auto& t : tris)
                for (int k = 0; k < 3; ++k) {
                    int a = t[k], b = t[(k + 1) % 3];
                    if (a > b) std::swap(a, b);
                    if (seen.insert({a, b}).second) {
                        nbr[a].push_back(b);
                        nbr[b].push_back(a);
                    }
                }
        }
        for (int sweep = 0; sweep < opt.smoothing_sweeps; ++sweep) {
            std::vector<Vec2> next = ps.pts;
            for (std::size_t v = 0; v < ps.pts.size(); ++v) {
                if (!ps.smoothable[v] || nbr[v].empty()) continue;
                Vec2 avg{0, 0};
                for (int w : nbr[v]) avg += ps.pts[w];
                next[v] = avg / static_cast<double>(nbr[v].size());
            }
            ps.pts = std::move(next);
        }
        tris = carve(Delaunay(ps.pts).triangles());
    }

    // --- assemble the Mesh ---
    Mesh mesh;
    mesh.h = h;
    mesh.geometry = spec;
    mesh.interface = iface;

    std::vector<int> remap(ps.pts.size(), -1);
    for (const auto& t : tris)
        for (int v : t)
            if (remap[v] == -1) {
                remap[v] = mesh.vertex_count();
                mesh.vertices.push_back(ps.pts[v]);
                mesh.vertex_tags.push_back(ps.tags[v]);
            }
    for (const auto& t : tris)
        mesh.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    for (int c : corner_ids)
        if (remap[c] >= 0) mesh.corner_vertex_ids.push_back(remap[c]);

    // boundary edges with markers from vertex provenance
    std::map<std::pair<int, int>, std::pair<int, int>> edge_use;  // edge -> (count, first tri)
    for (int t = 0; t < mesh.triangle_count(); ++t)
        for (int k = 0; k < 3; ++k) {
            int a = mesh.triangles[t][k], b = mesh.triangles[t][(k + 1) % 3];
            auto key = std::minmax(a, b);
            auto& e = edge_use[{key.first, key.second}];
            if (e.first == 0) e.second = t;
            ++e.first;
        }
    auto edge_exists = [&](int a, int b) {
        auto key = std::minmax(remap[a], remap[b]);
        return key.first >= 0 && edge_use.count({key.first, key.second}) > 0;
    };
    for (int t = 0; t < mesh.triangle_count(); ++t)
        for (int k = 0; k < 3; ++k) {
            const int a = mesh.triangles[t][k], b = mesh.triangles[t][(k + 1) % 3];
            auto key = std::minmax(a, b);
            if (edge_use[{key.first, key.second}].first != 1) continue;
            const VertexTag& ta = mesh.vertex_tags[a];
            const VertexTag& tb = mesh.vertex_tags[b];
            int marker;
            if (ta.kind == VertexKind::Hole && tb.kind == VertexKind::Hole && ta.which == tb.which)
                marker = ta.which;
            else if (ta.kind != VertexKind::Interior && tb.kind != VertexKind::Interior &&
                     ta.kind != VertexKind::Hole && tb.kind != VertexKind::Hole &&
                     ta.kind != VertexKind::Interface && tb.kind != VertexKind::Interface)
                marker = kExteriorMarker;
            else
                throw MeshFailure("boundary edge with inconsistent vertex provenance at (" +
                                  std::to_string(mesh.vertices[a].x) + "," + std::to_string(mesh.vertices[a].y) +
                                  ")-(" + std::to_string(mesh.vertices[b].x) + "," + std::to_string(mesh.vertices[b].y) +
                                  ") kinds " + std::to_string(static_cast<int>(ta.kind)) + "/" +
                                  std::to_string(static_cast<int>(tb.kind)));
            mesh.boundary_edges.push_back({a, b, marker});
        }

    // boundary / interface recovery checks
    for (const auto& loop : expected_loops)
        for (std::size_t i = 0; i < loop.size(); ++i)
            if (!edge_exists(loop[i], loop[(i + 1) % loop.size()]))
                throw MeshFailure("failed to recover a boundary edge");
    for (const auto& chain : interface_chains)
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            if (!edge_exists(chain[i], chain[i + 1]))
                throw MeshFailure("failed to recover an interface edge (" +
                                  std::to_string(ps.pts[chain[i]].x) + "," + std::to_string(ps.pts[chain[i]].y) + ")-(" +
                                  std::to_string(ps.pts[chain[i+1]].x) + "," + std::to_string(ps.pts[chain[i+1]].y) + ")");

    mesh.validate();
    return mesh;
}

}  // namespace critflow

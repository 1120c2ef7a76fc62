#pragma once

// Critical-point analysis of the discrete solution: gradient windings along
// closed contours (the discrete argument principle), candidate detection,
// index certification against the expected count M-1, and strict-sign Hopf
// checks on the boundary normal derivative.
//
// Winding convention: W is the total turning of arg(grad u) along the
// contour divided by 2 pi; the geometric index of the enclosed region is
// I = -W. Boundary windings are reported per level loop traversed with the
// domain on its left, as -W of that traversal: the exterior loop gives -1
// and the hole loops give +1 each, so exterior + interior sum = M - 1.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "critflow/errors.hpp"
#include "critflow/fem.hpp"
#include "critflow/levelset.hpp"

namespace critflow {

using FieldFn = std::function<Vec2(const Vec2&)>;

struct WindingOptions {
    double g_min = 1e-12;
    int max_refine_rounds = 14;
    int zero_refine_rounds = 3;  // rounds allowed before CriticalOnContour
};

struct WindingResult {
    double winding = 0.0;
    bool resolved = false;  // every angle step ended below pi/2
    int samples = 0;
};

// Total turning of arg(field) / 2pi along a closed contour. The field is
// sampled at the midpoints of the polyline segments; segments whose angle
// step reaches pi/2 are bisected until it does not (or the round cap hits,
// which the caller sees via `resolved`).
inline WindingResult winding_of_field(const FieldFn& field, const ContourPolyline& contour,
                                      const WindingOptions& opt = {}) {
    if (!contour.closed) throw NotClosed("winding requires a closed contour");
    std::vector<Vec2> pts = contour.points;
    if (pts.size() < 3) throw NotClosed("closed contour needs at least 3 points");

    WindingResult res;
    for (int round = 0; round <= opt.max_refine_rounds; ++round) {
        const std::size_t n = pts.size();
        std::vector<double> theta(n);
        for (std::size_t k = 0; k < n; ++k) {
            const Vec2 m = (pts[k] + pts[(k + 1) % n]) * 0.5;
            const Vec2 g = field(m);
            if (norm(g) <= opt.g_min) {
                if (round >= opt.zero_refine_rounds)
                    throw CriticalOnContour("gradient below g_min on the contour");
                theta[k] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            theta[k] = std::atan2(g.y, g.x);
        }
        double sum = 0.0;
        std::set<std::size_t> refine;
        bool has_nan = false;
        for (std::size_t k = 0; k < n; ++k) {
            if (std::isnan(theta[k])) {
                has_nan = true;
                refine.insert(k);
                refine.insert((k + 1) % n);
                continue;
            }
            const std::size_t kn = (k + 1) % n;
            if (std::isnan(theta[kn])) continue;
            const double dt = wrap_angle(theta[kn] - theta[k]);
            sum += dt;
            if (std::abs(dt) >= M_PI / 2) {
                refine.insert(k);
                refine.insert(kn);
            }
        }
        res.winding = sum / (2.0 * M_PI);
        res.samples = static_cast<int>(n);
        if (refine.empty() && !has_nan) {
            res.resolved = true;
            return res;
        }
        if (round == opt.max_refine_rounds) break;
        std::vector<Vec2> next;
        next.reserve(n + refine.size());
        for (std::size_t k = 0; k < n; ++k) {
            next.push_back(pts[k]);
            if (refine.count(k)) next.push_back((pts[k] + pts[(k + 1) % n]) * 0.5);
        }
        pts = std::move(next);
    }
    res.resolved = false;
    return res;
}

inline FieldFn gradient_field(const SolutionField& u) {
    return [&u](const Vec2& p) { return gradient_at(u, p); };
}

inline WindingResult winding_of_gradient(const SolutionField& u, const ContourPolyline& contour,
                                         const WindingOptions& opt = {}) {
    return winding_of_field(gradient_field(u), contour, opt);
}

// ---- candidate detection ----

struct DetectOptions {
    double g_threshold = 0.0;     // <= 0: 10 * h * max |grad u|
    double merge_radius = 0.0;    // <= 0: 3h
    double boundary_margin = 0.0; // <= 0: 3h
};

// Vertices whose 1-ring minimum of |element gradient| is a local minimum of
// that score below the threshold, merged within 3h, away from the boundary
// and from the marked corner vertices. Certification by winding makes the
// inevitable false positives harmless.
inline std::vector<Vec2> detect_critical_points(const SolutionField& u, DetectOptions opt = {}) {
    const Mesh& mesh = *u.mesh;
    const double h = mesh.h;
    double gmax = 0.0;
    for (const Vec2& g : u.element_gradients) gmax = std::max(gmax, norm(g));
    const double threshold = opt.g_threshold > 0 ? opt.g_threshold : 10.0 * h * gmax;
    const double merge_radius = opt.merge_radius > 0 ? opt.merge_radius : 3.0 * h;
    const double margin = opt.boundary_margin > 0 ? opt.boundary_margin : 3.0 * h;

    std::vector<double> score(mesh.vertex_count(), std::numeric_limits<double>::infinity());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double g = norm(u.element_gradients[t]);
        for (int v : mesh.triangles[t]) score[v] = std::min(score[v], g);
    }
    std::vector<std::vector<int>> nbr(mesh.vertex_count());
    for (const auto& [e, ts] : mesh.edge_triangle_map()) {
        nbr[e.first].push_back(e.second);
        nbr[e.second].push_back(e.first);
    }

    std::vector<int> candidates;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (score[v] > threshold) continue;
        bool is_min = true;
        for (int w : nbr[v]) is_min = is_min && score[v] <= score[w];
        if (is_min) candidates.push_back(v);
    }

    // exclusion near the boundary and near corners
    auto boundary_distance = [&](const Vec2& p) {
        double d = std::numeric_limits<double>::infinity();
        for (const BoundaryEdge& e : mesh.boundary_edges)
            d = std::min(d, point_segment_distance(p, mesh.vertices[e.a], mesh.vertices[e.b]));
        return d;
    };
    std::vector<int> kept;
    for (int v : candidates) {
        const Vec2 p = mesh.vertices[v];
        if (boundary_distance(p) <= margin) continue;
        bool near_corner = false;
        for (int c : mesh.corner_vertex_ids)
            near_corner = near_corner || dist(p, mesh.vertices[c]) <= margin;
        if (!near_corner) kept.push_back(v);
    }

    // merge clusters within the merge radius; the best-scoring vertex wins
    std::vector<char> absorbed(kept.size(), 0);
    std::vector<Vec2> out;
    std::sort(kept.begin(), kept.end(), [&](int a, int b) {
        if (score[a] != score[b]) return score[a] < score[b];
        return a < b;
    });
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (absorbed[i]) continue;
        for (std::size_t j = i + 1; j < kept.size(); ++j)
            if (!absorbed[j] && dist(mesh.vertices[kept[i]], mesh.vertices[kept[j]]) < merge_radius)
                absorbed[j] = 1;
        out.push_back(mesh.vertices[kept[i]]);
    }
    std::sort(out.begin(), out.end(), [](const Vec2& a, const Vec2& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    });
    return out;
}

// ---- location refinement ----

// Area-weighted vertex average of the element gradients; the interpolated
// field is piecewise linear, so its zero can be found per triangle.
inline std::vector<Vec2> vertex_averaged_gradients(const SolutionField& u) {
    const Mesh& mesh = *u.mesh;
    std::vector<Vec2> g(mesh.vertex_count(), {0, 0});
    std::vector<double> w(mesh.vertex_count(), 0.0);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double a = mesh.area_of(t);
        for (int v : mesh.triangles[t]) {
            g[v] += u.element_gradients[t] * a;
            w[v] += a;
        }
    }
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (w[v] > 0) g[v] = g[v] / w[v];
    return g;
}

// Damped Newton for a zero of the vertex-averaged gradient near `start`;
// returns the best point found within `max_move` of the start.
inline Vec2 refine_critical_location(const SolutionField& u, const std::vector<Vec2>& vg,
                                     Vec2 start, double max_move) {
    const Mesh& mesh = *u.mesh;
    auto interp = [&](const Vec2& p, int t) {
        const auto& tr = mesh.triangles[t];
        const auto bc = barycentric(p, mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]]);
        return vg[tr[0]] * bc[0] + vg[tr[1]] * bc[1] + vg[tr[2]] * bc[2];
    };
    Vec2 x = start, best = start;
    double best_norm = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 30; ++iter) {
        const int t = u.locator->find(x);
        if (t < 0) break;
        const auto& tr = mesh.triangles[t];
        const Vec2 &g0 = vg[tr[0]], &g1 = vg[tr[1]], &g2 = vg[tr[2]];
        const double cur = norm(interp(x, t));
        if (cur < best_norm) { best_norm = cur; best = x; }
        // solve sum lambda_i g_i = 0, sum lambda_i = 1 for barycentric lambda
        const double a11 = g0.x - g2.x, a12 = g1.x - g2.x;
        const double a21 = g0.y - g2.y, a22 = g1.y - g2.y;
        const double det = a11 * a22 - a12 * a21;
        if (std::abs(det) < 1e-30) break;
        const double b1 = -g2.x, b2 = -g2.y;
        const double l0 = (b1 * a22 - a12 * b2) / det;
        const double l1 = (a11 * b2 - b1 * a21) / det;
        const Vec2 target = mesh.vertices[tr[0]] * l0 + mesh.vertices[tr[1]] * l1 +
                            mesh.vertices[tr[2]] * (1.0 - l0 - l1);
        if (dist(target, start) > max_move) break;
        const Vec2 next = x + (target - x) * 0.8;
        if (dist(next, x) < 1e-14) { x = target; break; }
        x = next;
    }
    const int t_final = u.locator->find(x);
    if (t_final >= 0 && dist(x, start) <= max_move && norm(interp(x, t_final)) <= best_norm)
        return x;
    return best;
}

// ---- certification ----

struct CriticalPoint {
    Vec2 location;
    int index = 0;
    double patch_radius = 0.0;
    enum class Confidence { Certified, Heuristic } confidence = Confidence::Certified;
    double raw_index = 0.0;  // -winding before rounding
};

struct BoundaryWindings {
    double exterior_level_line = 0.0;
    std::vector<double> interior_level_lines;
    double epsilon_used = 0.0;
    bool resolved = false;
};

struct CriticalPointReport {
    std::vector<CriticalPoint> points;
    int total_index = 0;
    int expected = 0;  // M - 1
    bool hopf_exterior_ok = false;
    bool hopf_interior_ok = false;
    BoundaryWindings boundary_windings;
    std::vector<Vec2> boundary_corners;  // reported separately, never counted
    bool indices_integer_ok = true;
    std::vector<std::string> warnings;
};

struct CertifyOptions {
    double patch_radius = 0.0;   // <= 0: 3h
    double grown_radius = 0.0;   // <= 0: 5h
    double separation = 0.0;     // <= 0: 6h
    double integer_tol = 0.05;
    double epsilon_level = 0.05;
    WindingOptions winding;
    int contour_samples = 64;
};

// Windings along the level loops u = eps (exterior) and u = 1 - eps (one
// loop per hole), each reported as -W of the domain-on-the-left traversal.
// Extraction orients closed loops CCW, which is already the induced
// orientation for the exterior loop; hole loops get the sign flip instead.
inline BoundaryWindings boundary_level_windings(const SolutionField& u, double epsilon,
                                                const WindingOptions& wopt = {}) {
    BoundaryWindings bw;
    double eps = epsilon;
    for (int attempt = 0; attempt < 5; ++attempt) {
        try {
            bw = BoundaryWindings{};
            bw.epsilon_used = eps;

            auto outer = extract_level_lines(u, eps);
            outer.erase(std::remove_if(outer.begin(), outer.end(),
                                       [](const ContourPolyline& c) { return !c.closed; }),
                        outer.end());
            if (outer.empty()) throw CriticalOnContour("no closed level line at u = eps");
            // the exterior loop is the one with the largest enclosed area
            const ContourPolyline* ext = &outer.front();
            for (const ContourPolyline& c : outer)
                if (std::abs(c.signed_area()) > std::abs(ext->signed_area())) ext = &c;
            const WindingResult wr = winding_of_gradient(u, *ext, wopt);
            bw.exterior_level_line = -wr.winding;
            bw.resolved = wr.resolved;

            auto inner = extract_level_lines(u, 1.0 - eps);
            for (const ContourPolyline& c : inner) {
                if (!c.closed) continue;
                const WindingResult wi = winding_of_gradient(u, c, wopt);
                bw.interior_level_lines.push_back(wi.winding);
                bw.resolved = bw.resolved && wi.resolved;
            }
            return bw;
        } catch (const CriticalOnContour&) {
            eps *= 0.5;  // shrink toward the boundary and retry
        }
    }
    throw CriticalOnContour("level-line windings failed even after shrinking eps");
}

// Certifies candidate indices by winding on circles of radius 3h (grown to
// 5h when a contour sample degenerates), discards winding-zero candidates,
// and assembles the report against expected = M - 1.
inline CriticalPointReport certify_indices(const SolutionField& u, const std::vector<Vec2>& candidates,
                                           CertifyOptions opt = {}) {
    const Mesh& mesh = *u.mesh;
    const double h = mesh.h;
    const double r_patch = opt.patch_radius > 0 ? opt.patch_radius : 3.0 * h;
    const double r_grown = opt.grown_radius > 0 ? opt.grown_radius : 5.0 * h;
    const double separation = opt.separation > 0 ? opt.separation : 6.0 * h;

    CriticalPointReport report;
    report.expected = mesh.hole_count() - 1;
    for (int c : mesh.corner_vertex_ids) report.boundary_corners.push_back(mesh.vertices[c]);

    const auto vg = vertex_averaged_gradients(u);
    for (const Vec2& raw_cand : candidates) {
        const Vec2 cand = refine_critical_location(u, vg, raw_cand, 3.0 * h);
        double used_radius = r_patch;
        WindingResult wr;
        try {
            wr = winding_of_gradient(u, circle_contour(cand, r_patch, opt.contour_samples), opt.winding);
        } catch (const CriticalOnContour&) {
            used_radius = r_grown;
            wr = winding_of_gradient(u, circle_contour(cand, r_grown, opt.contour_samples), opt.winding);
        }
        const double raw_index = -wr.winding;
        if (std::abs(raw_index) < 0.5) continue;  // winding 0: nothing enclosed

        CriticalPoint cp;
        cp.location = cand;
        cp.raw_index = raw_index;
        cp.index = static_cast<int>(std::lround(raw_index));
        cp.patch_radius = used_radius;
        const bool integer_ok = std::abs(raw_index - cp.index) <= opt.integer_tol && wr.resolved;
        if (!integer_ok || cp.index < 1) {
            report.indices_integer_ok = false;
            throw IndexNotInteger(raw_index, wr.resolved ? "under-resolved mesh"
                                                         : "winding refinement did not converge");
        }
        cp.confidence = CriticalPoint::Confidence::Certified;
        report.points.push_back(cp);
    }

    for (std::size_t i = 0; i < report.points.size(); ++i)
        for (std::size_t j = i + 1; j < report.points.size(); ++j)
            if (dist(report.points[i].location, report.points[j].location) <= separation)
                throw OverlappingPatches("certified critical points closer than the patch separation");

    for (const CriticalPoint& p : report.points) report.total_index += p.index;
    report.boundary_windings = boundary_level_windings(u, opt.epsilon_level, opt.winding);
    return report;
}

// ---- Hopf sign checks ----

struct HopfViolation {
    int edge = -1;
    double normal_derivative = 0.0;
};

struct HopfResult {
    bool exterior_ok = true;
    bool interior_ok = true;
    std::vector<HopfViolation> violations;
    int exterior_checked = 0;
    int interior_checked = 0;
};

// For every boundary edge whose midpoint is farther than corner_exclusion
// from each corner: the adjacent triangle's gradient dotted with the outward
// unit normal must be < 0 on the exterior and > 0 on hole boundaries.
inline HopfResult hopf_check(const SolutionField& u, double corner_exclusion = 0.0) {
    const Mesh& mesh = *u.mesh;
    if (corner_exclusion <= 0.0) corner_exclusion = 5.0 * mesh.h;

    std::map<std::pair<int, int>, int> edge_tri;
    for (int t = 0; t < mesh.triangle_count(); ++t)
        for (int k = 0; k < 3; ++k) {
            auto key = std::minmax(mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3]);
            auto it = edge_tri.find({key.first, key.second});
            if (it == edge_tri.end()) edge_tri[{key.first, key.second}] = t;
            else it->second = -1;  // interior edge
        }

    HopfResult res;
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        const BoundaryEdge& be = mesh.boundary_edges[e];
        const Vec2 a = mesh.vertices[be.a], b = mesh.vertices[be.b];
        const Vec2 mid = (a + b) * 0.5;
        bool excluded = false;
        for (int c : mesh.corner_vertex_ids)
            excluded = excluded || dist(mid, mesh.vertices[c]) <= corner_exclusion;
        if (excluded) continue;

        auto key = std::minmax(be.a, be.b);
        const int t = edge_tri.at({key.first, key.second});
        const Vec2 n = Vec2{(b - a).y, -(b - a).x} / dist(a, b);  // outward of the domain
        const double dn = dot(u.element_gradients[t], n);
        if (be.marker == kExteriorMarker) {
            ++res.exterior_checked;
            if (!(dn < 0.0)) {
                res.exterior_ok = false;
                res.violations.push_back({static_cast<int>(e), dn});
            }
        } else {
            ++res.interior_checked;
            if (!(dn > 0.0)) {
                res.interior_ok = false;
                res.violations.push_back({static_cast<int>(e), dn});
            }
        }
    }
    return res;
}

}  // namespace critflow

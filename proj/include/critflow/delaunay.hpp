#pragma once

// Incremental Bowyer-Watson Delaunay triangulation. Points are inserted in
// a lexicographic sweep so the locate walk stays short; the cavity is grown
// by circumcircle BFS and repaired to stay star-shaped before fanning, which
// keeps near-cocircular input (boundary rings, lattices) safe.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "critflow/errors.hpp"
#include "critflow/geo.hpp"

namespace critflow {

class Delaunay {
public:
    explicit Delaunay(const std::vector<Vec2>& points) {
        const int n = static_cast<int>(points.size());
        if (n < 3) throw MeshFailure("need at least 3 points to triangulate");

        Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
        for (const Vec2& p : points) {
            lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
        }
        const Vec2 mid = (lo + hi) * 0.5;
        const double span = std::max({hi.x - lo.x, hi.y - lo.y, 1e-6});
        const double big = 100.0 * span;
        pts_.reserve(points.size() + 3);
        pts_.push_back({mid.x - 2.0 * big, mid.y - big});
        pts_.push_back({mid.x + 2.0 * big, mid.y - big});
        pts_.push_back({mid.x, mid.y + 2.0 * big});
        for (const Vec2& p : points) pts_.push_back(p);

        tris_.push_back(Tri{{0, 1, 2}, {-1, -1, -1}, true, {}});
        cache_circle(0);

        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (points[a].x != points[b].x) return points[a].x < points[b].x;
            return points[a].y < points[b].y;
        });
        int hint = 0;
        for (int id : order) hint = insert(id + 3, hint);
    }

    // Triangles over the caller's point indices, counterclockwise.
    std::vector<std::array<int, 3>> triangles() const {
        std::vector<std::array<int, 3>> out;
        for (const Tri& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
            out.push_back({t.v[0] - 3, t.v[1] - 3, t.v[2] - 3});
        }
        return out;
    }

private:
    struct Tri {
        std::array<int, 3> v;    // CCW
        std::array<int, 3> nbr;  // nbr[k] shares edge (v[k], v[k+1])
        bool alive;
        Circumcircle cc;
    };

    void cache_circle(int t) {
        tris_[t].cc = circumcircle(pts_[tris_[t].v[0]], pts_[tris_[t].v[1]], pts_[tris_[t].v[2]]);
    }

    bool in_circumcircle(int t, const Vec2& p) const {
        const Tri& tr = tris_[t];
        if (tr.cc.valid) {
            const double dd = norm2(p - tr.cc.center) - tr.cc.radius2;
            const double tol = 1e-10 * std::max(tr.cc.radius2, 1e-300);
            if (dd < -tol) return true;
            if (dd > tol) return false;
        }
        // near-cocircular: decide by the determinant, ties count as outside
        const double det = incircle(pts_[tr.v[0]], pts_[tr.v[1]], pts_[tr.v[2]], p);
        const double scale = std::max({norm2(pts_[tr.v[0]] - p), norm2(pts_[tr.v[1]] - p),
                                       norm2(pts_[tr.v[2]] - p)});
        return det > 1e-11 * scale * scale;
    }

    int locate(const Vec2& p, int hint) const {
        int cur = hint;
        if (cur < 0 || cur >= static_cast<int>(tris_.size()) || !tris_[cur].alive) {
            cur = -1;
            for (int t = static_cast<int>(tris_.size()) - 1; t >= 0; --t)
                if (tris_[t].alive) { cur = t; break; }
        }
        const int cap = 4 * static_cast<int>(std::sqrt(static_cast<double>(tris_.size()))) + 64;
        for (int step = 0; step < cap; ++step) {
            const Tri& t = tris_[cur];
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                const Vec2& a = pts_[t.v[k]];
                const Vec2& b = pts_[t.v[(k + 1) % 3]];
                if (orient2d(a, b, p) < 0.0) { next = t.nbr[k]; break; }
            }
            if (next == -1) return cur;  // inside (or on the hull edge)
            cur = next;
        }
        // walk failed (can happen with long skinny transients): exhaustive scan
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (!tris_[t].alive) continue;
            const Tri& tr = tris_[t];
            const Vec2 &a = pts_[tr.v[0]], &b = pts_[tr.v[1]], &c = pts_[tr.v[2]];
            if (orient2d(a, b, p) >= 0 && orient2d(b, c, p) >= 0 && orient2d(c, a, p) >= 0)
                return t;
        }
        throw MeshFailure("point location failed during triangulation");
    }

    int new_tri(std::array<int, 3> v) {
        int id;
        if (!free_.empty()) {
            id = free_.back();
            free_.pop_back();
            tris_[id] = Tri{v, {-1, -1, -1}, true, {}};
        } else {
            id = static_cast<int>(tris_.size());
            tris_.push_back(Tri{v, {-1, -1, -1}, true, {}});
        }
        cache_circle(id);
        return id;
    }

    // Inserts point `pid` (index into pts_); returns a triangle id near it.
    int insert(int pid, int hint) {
        const Vec2& p = pts_[pid];
        const int seed = locate(p, hint);

        std::vector<int> bad = {seed};
        std::vector<char> in_bad(1, 1);
        std::unordered_map<int, int> bad_pos{{seed, 0}};
        for (std::size_t i = 0; i < bad.size(); ++i) {
            const Tri& t = tris_[bad[i]];
            for (int k = 0; k < 3; ++k) {
                const int nb = t.nbr[k];
                if (nb < 0 || bad_pos.count(nb)) continue;
                if (in_circumcircle(nb, p)) {
                    bad_pos[nb] = static_cast<int>(bad.size());
                    bad.push_back(nb);
                    in_bad.push_back(1);
                }
            }
        }

        // Cavity edges; repair until star-shaped as seen from p.
        struct CavityEdge { int a, b, outer; };
        std::vector<CavityEdge> cavity;
        for (int repair = 0; repair < 64; ++repair) {
            cavity.clear();
            int offender = -1;
            for (std::size_t i = 0; i < bad.size() && offender < 0; ++i) {
                if (!in_bad[i]) continue;
                const Tri& t = tris_[bad[i]];
                for (int k = 0; k < 3; ++k) {
                    const int nb = t.nbr[k];
                    auto it = nb < 0 ? bad_pos.end() : bad_pos.find(nb);
                    const bool nb_bad = (it != bad_pos.end()) && in_bad[it->second];
                    if (nb_bad) continue;
                    const int a = t.v[k], b = t.v[(k + 1) % 3];
                    if (orient2d(pts_[a], pts_[b], p) <= 0.0) {
                        if (bad[i] != seed) { offender = static_cast<int>(i); break; }
                    }
                    cavity.push_back({a, b, nb});
                }
            }
            if (offender < 0) break;
            in_bad[offender] = 0;  // shrink the cavity and retry
        }
        if (cavity.empty()) throw MeshFailure("empty insertion cavity");

        for (std::size_t i = 0; i < bad.size(); ++i) {
            if (!in_bad[i]) continue;
            tris_[bad[i]].alive = false;
            free_.push_back(bad[i]);
        }

        std::unordered_map<int, int> by_first;  // cavity edge start vertex -> new tri
        std::vector<int> created;
        created.reserve(cavity.size());
        for (const CavityEdge& e : cavity) {
            const int id = new_tri({e.a, e.b, pid});
            tris_[id].nbr[0] = e.outer;
            if (e.outer >= 0) {
                Tri& o = tris_[e.outer];
                for (int k = 0; k < 3; ++k)
                    if (o.v[k] == e.b && o.v[(k + 1) % 3] == e.a) o.nbr[k] = id;
            }
            by_first[e.a] = id;
            created.push_back(id);
        }
        for (std::size_t i = 0; i < cavity.size(); ++i) {
            const int id = created[i];
            const CavityEdge& e = cavity[i];
            auto next = by_first.find(e.b);   // shares edge (b, pid)
            if (next != by_first.end()) tris_[id].nbr[1] = next->second;
            // predecessor: triangle whose edge ends at a
            for (std::size_t j = 0; j < cavity.size(); ++j)
                if (cavity[j].b == e.a) { tris_[id].nbr[2] = created[j]; break; }
        }
        return created.front();
    }

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> free_;
};

}  // namespace critflow

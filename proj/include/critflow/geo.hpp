#pragma once

// Small 2D geometry kit shared by the mesh generator, level-set extraction
// and the winding computations. Doubles throughout; predicates use
// magnitude-scaled epsilon filters, which is sufficient for the jittered
// point sets the generator produces.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace critflow {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm2(const Vec2& v) { return v.x * v.x + v.y * v.y; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }
// rotate by +90 degrees
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

inline Vec2 rotate(const Vec2& v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Twice the signed area of triangle (a,b,c); > 0 for counterclockwise.
inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * orient2d(a, b, c);
}

// Sign of orient2d with a magnitude-scaled epsilon filter: returns -1, 0, +1.
inline int orient_sign(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double det = orient2d(a, b, c);
    const double mag = std::abs((b.x - a.x) * (c.y - a.y)) + std::abs((b.y - a.y) * (c.x - a.x));
    const double eps = 1e-14 * mag;
    if (det > eps) return 1;
    if (det < -eps) return -1;
    return 0;
}

// > 0 when d lies strictly inside the circumcircle of CCW triangle (a,b,c).
inline double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad2 = adx * adx + ady * ady;
    const double bd2 = bdx * bdx + bdy * bdy;
    const double cd2 = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd2 - cdy * bd2)
         - ady * (bdx * cd2 - cdx * bd2)
         + ad2 * (bdx * cdy - cdx * bdy);
}

struct Circumcircle {
    Vec2 center;
    double radius2 = 0.0;  // squared radius
    bool valid = false;
};

inline Circumcircle circumcircle(const Vec2& a, const Vec2& b, const Vec2& c) {
    Circumcircle cc;
    const double d = 2.0 * orient2d(a, b, c);
    if (d == 0.0) return cc;
    const double a2 = norm2(a), b2 = norm2(b), c2 = norm2(c);
    cc.center.x = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    cc.center.y = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    cc.radius2 = norm2(a - cc.center);
    cc.valid = true;
    return cc;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = norm2(ab);
    if (len2 == 0.0) return dist(p, a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, a + ab * t);
}

// Winding-number point-in-polygon test; polygon given as an ordered loop.
inline bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly) {
    int winding = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        if (a.y <= p.y) {
            if (b.y > p.y && orient2d(a, b, p) > 0) ++winding;
        } else {
            if (b.y <= p.y && orient2d(a, b, p) < 0) --winding;
        }
    }
    return winding != 0;
}

inline double polygon_signed_area(std::span<const Vec2> poly) {
    double s = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        s += cross(a, b);
    }
    return 0.5 * s;
}

// Barycentric coordinates of p in triangle (a,b,c); caller checks signs.
inline std::array<double, 3> barycentric(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d = orient2d(a, b, c);
    return {orient2d(p, b, c) / d, orient2d(a, p, c) / d, orient2d(a, b, p) / d};
}

// Maps an angle difference into (-pi, pi].
inline double wrap_angle(double delta) {
    double w = std::remainder(delta, 2.0 * M_PI);
    if (w <= -M_PI) w += 2.0 * M_PI;
    return w;
}

}  // namespace critflow

#pragma once

// Domain family: a disc, or a half-disc (disc cut by an axis-aligned
// half-plane), minus a set of disjoint circular holes. Half-disc cuts create
// corner vertices where the cut line meets the circle.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "critflow/errors.hpp"
#include "critflow/geo.hpp"

namespace critflow {

struct Hole {
    Vec2 center;
    double radius = 0.0;
};

enum class CutAxis { X, Y };

struct HalfPlaneCut {
    CutAxis axis = CutAxis::Y;
    double value = 0.0;
    bool keep_positive = true;  // keep the side where coordinate > value

    // signed distance into the kept side
    double side(const Vec2& p) const {
        const double c = (axis == CutAxis::X) ? p.x : p.y;
        return keep_positive ? c - value : value - c;
    }
};

struct OuterShape {
    Vec2 center;
    double radius = 0.0;
    std::optional<HalfPlaneCut> cut;  // present for half-discs
};

// A coefficient discontinuity curve the mesh generator can align to.
struct InterfaceCurve {
    bool is_circle = true;
    Vec2 center;           // circle case
    double radius = 0.0;
    double y_value = 0.0;  // line case: y = y_value
};

struct DomainSpec {
    OuterShape outer;
    std::vector<Hole> holes;
    std::vector<Vec2> corner_vertices;  // filled by validate() for half-discs

    int hole_count() const { return static_cast<int>(holes.size()); }

    bool inside_outer(const Vec2& p) const {
        if (dist(p, outer.center) >= outer.radius) return false;
        if (outer.cut && outer.cut->side(p) <= 0.0) return false;
        return true;
    }

    bool inside_hole(const Vec2& p) const {
        for (const Hole& h : holes)
            if (dist(p, h.center) < h.radius) return true;
        return false;
    }

    bool inside(const Vec2& p) const { return inside_outer(p) && !inside_hole(p); }

    double area() const {
        double a;
        if (!outer.cut) {
            a = M_PI * outer.radius * outer.radius;
        } else {
            // circular segment on the kept side of the cut
            const double c = (outer.cut->axis == CutAxis::X) ? outer.center.x : outer.center.y;
            double d = outer.cut->value - c;              // signed offset of the cut line
            if (!outer.cut->keep_positive) d = -d;        // kept side is coordinate > value
            const double r = outer.radius;
            // kept region = {coord - line > 0}; area of disc part above a chord at offset d
            const double t = std::clamp(d / r, -1.0, 1.0);
            a = r * r * (std::acos(t) - t * std::sqrt(1.0 - t * t));
        }
        for (const Hole& h : holes) a -= M_PI * h.radius * h.radius;
        return a;
    }

    // Checks the invariants and derives corner vertices for half-discs.
    void validate() {
        if (!(outer.radius > 0.0)) throw InvalidDomain("outer radius must be positive");
        for (std::size_t i = 0; i < holes.size(); ++i) {
            const Hole& h = holes[i];
            if (!(h.radius > 0.0)) throw InvalidDomain("hole radius must be positive");
            // closure strictly inside the outer shape
            if (dist(h.center, outer.center) + h.radius >= outer.radius)
                throw InvalidDomain("hole " + std::to_string(i) + " not strictly inside the outer disc");
            if (outer.cut && outer.cut->side(h.center) <= h.radius)
                throw InvalidDomain("hole " + std::to_string(i) + " crosses the half-plane cut");
            for (std::size_t j = i + 1; j < holes.size(); ++j) {
                if (dist(h.center, holes[j].center) <= h.radius + holes[j].radius)
                    throw InvalidDomain("holes " + std::to_string(i) + " and " + std::to_string(j) +
                                        " have intersecting closures");
            }
        }
        corner_vertices.clear();
        if (outer.cut) {
            const double c = (outer.cut->axis == CutAxis::X) ? outer.center.x : outer.center.y;
            const double off = outer.cut->value - c;
            if (std::abs(off) >= outer.radius)
                throw InvalidDomain("half-plane cut does not intersect the outer circle");
            const double half_chord = std::sqrt(outer.radius * outer.radius - off * off);
            if (outer.cut->axis == CutAxis::Y) {
                corner_vertices.push_back({outer.center.x - half_chord, outer.cut->value});
                corner_vertices.push_back({outer.center.x + half_chord, outer.cut->value});
            } else {
                corner_vertices.push_back({outer.cut->value, outer.center.y - half_chord});
                corner_vertices.push_back({outer.cut->value, outer.center.y + half_chord});
            }
        }
    }
};

// ----- domains used throughout the experiments -----

inline DomainSpec annulus_domain(double inner_radius = 0.05, double outer_radius = 1.0) {
    DomainSpec d;
    d.outer = {{0.0, 0.0}, outer_radius, std::nullopt};
    d.holes = {{{0.0, 0.0}, inner_radius}};
    d.validate();
    return d;
}

inline DomainSpec disc_three_holes_domain(double hole_radius = 0.01) {
    DomainSpec d;
    d.outer = {{0.0, 0.0}, 1.0, std::nullopt};
    const double a = 2.0 * M_PI / 3.0;
    d.holes = {{{0.5, 0.0}, hole_radius},
               {{0.5 * std::cos(a), 0.5 * std::sin(a)}, hole_radius},
               {{0.5 * std::cos(2 * a), 0.5 * std::sin(2 * a)}, hole_radius}};
    d.validate();
    return d;
}

inline DomainSpec half_disc_domain(std::vector<Hole> holes) {
    DomainSpec d;
    d.outer = {{0.0, -1.0}, 2.0, HalfPlaneCut{CutAxis::Y, -1.0, true}};
    d.holes = std::move(holes);
    d.validate();
    return d;
}

}  // namespace critflow

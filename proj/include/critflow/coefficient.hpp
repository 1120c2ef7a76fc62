#pragma once

// Conductivity fields: the built-in example coefficients (smooth, Lipschitz,
// degenerate, piecewise constant) plus a small expression language
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := number | 'x' | 'y' | '(' expr ')' | 'sqrt(' expr ')'
//           | 'abs(' expr ')' | factor '^' integer
// Fields are immutable and evaluation is pure.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "critflow/domain.hpp"
#include "critflow/errors.hpp"
#include "critflow/geo.hpp"

namespace critflow {

struct ExprNode {
    enum class Op { Const, VarX, VarY, Add, Sub, Mul, Div, Sqrt, Abs, Pow };
    Op op = Op::Const;
    double value = 0.0;  // Const
    int exponent = 1;    // Pow
    std::shared_ptr<const ExprNode> lhs, rhs;

    double eval(const Vec2& p) const {
        switch (op) {
            case Op::Const: return value;
            case Op::VarX: return p.x;
            case Op::VarY: return p.y;
            case Op::Add: return lhs->eval(p) + rhs->eval(p);
            case Op::Sub: return lhs->eval(p) - rhs->eval(p);
            case Op::Mul: return lhs->eval(p) * rhs->eval(p);
            case Op::Div: {
                const double d = rhs->eval(p);
                if (d == 0.0) throw EvalError("division by zero in coefficient expression");
                return lhs->eval(p) / d;
            }
            case Op::Sqrt: {
                const double v = lhs->eval(p);
                if (v < 0.0) throw EvalError("sqrt of negative value in coefficient expression");
                return std::sqrt(v);
            }
            case Op::Abs: return std::abs(lhs->eval(p));
            case Op::Pow: {
                const double b = lhs->eval(p);
                double r = 1.0;
                for (int i = 0; i < exponent; ++i) r *= b;
                return r;
            }
        }
        return 0.0;
    }
};

using ExprPtr = std::shared_ptr<const ExprNode>;

namespace expr_detail {

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& src) : s(src) {}

    void skip() { while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos; }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    bool eat_word(const char* w) {
        skip();
        const std::size_t n = std::strlen(w);
        if (s.compare(pos, n, w) == 0) { pos += n; return true; }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw ConfigError("expression parse error at offset " + std::to_string(pos) + ": " + what);
    }

    ExprPtr make(ExprNode::Op op, ExprPtr l = nullptr, ExprPtr r = nullptr) {
        auto n = std::make_shared<ExprNode>();
        n->op = op; n->lhs = std::move(l); n->rhs = std::move(r);
        return n;
    }

    ExprPtr expr() {
        ExprPtr e = term();
        for (;;) {
            if (eat('+')) e = make(ExprNode::Op::Add, e, term());
            else if (eat('-')) e = make(ExprNode::Op::Sub, e, term());
            else return e;
        }
    }
    ExprPtr term() {
        ExprPtr e = factor();
        for (;;) {
            if (eat('*')) e = make(ExprNode::Op::Mul, e, factor());
            else if (eat('/')) e = make(ExprNode::Op::Div, e, factor());
            else return e;
        }
    }
    ExprPtr factor() {
        skip();
        ExprPtr e;
        if (eat_word("sqrt(")) {
            e = make(ExprNode::Op::Sqrt, expr());
            if (!eat(')')) fail("expected ')'");
        } else if (eat_word("abs(")) {
            e = make(ExprNode::Op::Abs, expr());
            if (!eat(')')) fail("expected ')'");
        } else if (eat('(')) {
            e = expr();
            if (!eat(')')) fail("expected ')'");
        } else if (pos < s.size() && (s[pos] == 'x' || s[pos] == 'y')) {
            e = make(s[pos] == 'x' ? ExprNode::Op::VarX : ExprNode::Op::VarY);
            ++pos;
        } else {
            char* end = nullptr;
            const double v = std::strtod(s.c_str() + pos, &end);
            if (end == s.c_str() + pos) fail("expected a number, variable, or '('");
            pos = static_cast<std::size_t>(end - s.c_str());
            auto n = std::make_shared<ExprNode>();
            n->op = ExprNode::Op::Const;
            n->value = v;
            e = n;
        }
        while (eat('^')) {
            skip();
            char* end = nullptr;
            const long p = std::strtol(s.c_str() + pos, &end, 10);
            if (end == s.c_str() + pos || p < 0) fail("expected a nonnegative integer exponent");
            pos = static_cast<std::size_t>(end - s.c_str());
            auto n = std::make_shared<ExprNode>();
            n->op = ExprNode::Op::Pow;
            n->exponent = static_cast<int>(p);
            n->lhs = e;
            e = n;
        }
        return e;
    }
};

}  // namespace expr_detail

inline ExprPtr parse_expression(const std::string& src) {
    expr_detail::Parser p(src);
    ExprPtr e = p.expr();
    p.skip();
    if (p.pos != src.size()) p.fail("trailing input");
    return e;
}

struct CoefficientField {
    enum class Kind {
        Constant, SmoothX2, LipschitzAbsX, RadiusSq, Radius, DistToPoint,
        PiecewiseRadial, PiecewiseHalfplane, Custom
    };

    Kind kind = Kind::Constant;
    double c = 1.0;                  // Constant
    Vec2 point;                      // DistToPoint
    double r0 = 0.0, r1 = 0.0;       // PiecewiseRadial
    double rho_minus = 1.0, rho_plus = 1.0;
    double y1 = 0.0;                 // PiecewiseHalfplane
    ExprPtr expr;                    // Custom
    std::string expr_source;

    static CoefficientField constant(double v) {
        CoefficientField f; f.kind = Kind::Constant; f.c = v; return f;
    }
    static CoefficientField smooth_x2() { CoefficientField f; f.kind = Kind::SmoothX2; return f; }
    static CoefficientField lipschitz_abs_x() { CoefficientField f; f.kind = Kind::LipschitzAbsX; return f; }
    static CoefficientField radius_sq() { CoefficientField f; f.kind = Kind::RadiusSq; return f; }
    static CoefficientField radius() { CoefficientField f; f.kind = Kind::Radius; return f; }
    static CoefficientField dist_to_point(Vec2 p) {
        CoefficientField f; f.kind = Kind::DistToPoint; f.point = p; return f;
    }
    static CoefficientField piecewise_radial(double r0, double r1, double rm, double rp) {
        if (!(rm > 0.0 && rp > 0.0)) throw ConfigError("piecewise coefficient values must be positive");
        CoefficientField f; f.kind = Kind::PiecewiseRadial;
        f.r0 = r0; f.r1 = r1; f.rho_minus = rm; f.rho_plus = rp;
        return f;
    }
    static CoefficientField piecewise_halfplane(double y1, double rm, double rp) {
        if (!(rm > 0.0 && rp > 0.0)) throw ConfigError("piecewise coefficient values must be positive");
        CoefficientField f; f.kind = Kind::PiecewiseHalfplane;
        f.y1 = y1; f.rho_minus = rm; f.rho_plus = rp;
        return f;
    }
    static CoefficientField custom(const std::string& src) {
        CoefficientField f; f.kind = Kind::Custom;
        f.expr = parse_expression(src);
        f.expr_source = src;
        return f;
    }

    double eval(const Vec2& p) const {
        switch (kind) {
            case Kind::Constant: return c;
            case Kind::SmoothX2: return p.x * p.x + 0.125;
            case Kind::LipschitzAbsX: return std::abs(p.x) + 0.125;
            case Kind::RadiusSq: return p.x * p.x + p.y * p.y + 1.0;
            case Kind::Radius: return std::sqrt(p.x * p.x + p.y * p.y);
            case Kind::DistToPoint: return dist(p, point);
            // on the discontinuity curve the rho_minus branch applies
            case Kind::PiecewiseRadial: return norm(p) <= r1 ? rho_minus : rho_plus;
            case Kind::PiecewiseHalfplane: return p.y <= y1 ? rho_minus : rho_plus;
            case Kind::Custom: return expr->eval(p);
        }
        return 0.0;
    }

    std::vector<Vec2> degenerate_points() const {
        switch (kind) {
            case Kind::Radius: return {Vec2{0.0, 0.0}};
            case Kind::DistToPoint: return {point};
            default: return {};
        }
    }

    // Recorded positive lower bound when the field is uniformly bounded below.
    std::optional<double> known_delta() const {
        switch (kind) {
            case Kind::Constant: return c > 0.0 ? std::optional<double>(c) : std::nullopt;
            case Kind::SmoothX2:
            case Kind::LipschitzAbsX: return 0.125;
            case Kind::RadiusSq: return 1.0;
            case Kind::PiecewiseRadial:
            case Kind::PiecewiseHalfplane: return std::min(rho_minus, rho_plus);
            default: return std::nullopt;
        }
    }

    // The discontinuity curve a generator should align the mesh to, if any.
    std::optional<InterfaceCurve> interface_curve() const {
        if (kind == Kind::PiecewiseRadial) {
            InterfaceCurve ic;
            ic.is_circle = true;
            ic.center = {0.0, 0.0};
            ic.radius = r1;
            return ic;
        }
        if (kind == Kind::PiecewiseHalfplane) {
            InterfaceCurve ic;
            ic.is_circle = false;
            ic.y_value = y1;
            return ic;
        }
        return std::nullopt;
    }

    // Sup of |grad rho| over the disc B(center, radius); used for certified
    // sampling bounds. For Custom fields this is a sampled estimate.
    double gradient_bound(const Vec2& center, double radius) const {
        switch (kind) {
            case Kind::Constant:
            case Kind::PiecewiseRadial:
            case Kind::PiecewiseHalfplane: return 0.0;
            case Kind::SmoothX2: return 2.0 * (std::abs(center.x) + radius);
            case Kind::LipschitzAbsX: return 1.0;
            case Kind::RadiusSq: return 2.0 * (norm(center) + radius);
            case Kind::Radius:
            case Kind::DistToPoint: return 1.0;
            case Kind::Custom: {
                const double s = std::max(1e-6, 0.1 * radius);
                const double fx = (expr->eval(center + Vec2{s, 0}) - expr->eval(center - Vec2{s, 0})) / (2 * s);
                const double fy = (expr->eval(center + Vec2{0, s}) - expr->eval(center - Vec2{0, s})) / (2 * s);
                return 1.5 * std::hypot(fx, fy) + 1e-9;
            }
        }
        return 0.0;
    }
};

// Certified lower bound of the field over the domain minus exclusion balls
// of radius `exclusion` around the degenerate points, by dense sampling at
// grid step `step` with a per-cell gradient-bound slack.
inline double essential_lower_bound(const CoefficientField& field, const DomainSpec& domain,
                                    double exclusion, double step) {
    if (field.kind == CoefficientField::Kind::Constant) return std::max(0.0, field.c);
    if (field.kind == CoefficientField::Kind::PiecewiseRadial ||
        field.kind == CoefficientField::Kind::PiecewiseHalfplane)
        return std::min(field.rho_minus, field.rho_plus);

    const auto degenerate = field.degenerate_points();
    const Vec2 c = domain.outer.center;
    const double R = domain.outer.radius;
    const double half_diag = step * std::sqrt(0.5);
    double best = 1e300;
    const int n = static_cast<int>(std::ceil(2.0 * R / step));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const Vec2 p{c.x - R + (i + 0.5) * step, c.y - R + (j + 0.5) * step};
            // conservative inclusion: count every cell that can touch the region
            if (dist(p, c) > R + half_diag) continue;
            if (domain.outer.cut && domain.outer.cut->side(p) < -half_diag) continue;
            bool skip = false;
            for (const Hole& h : domain.holes)
                if (dist(p, h.center) < h.radius - half_diag) { skip = true; break; }
            for (const Vec2& v : degenerate)
                if (dist(p, v) < exclusion - half_diag) { skip = true; break; }
            if (skip) continue;
            const double bound = field.eval(p) - field.gradient_bound(p, half_diag) * half_diag;
            best = std::min(best, bound);
        }
    }
    if (best == 1e300) return 0.0;
    return std::max(0.0, best);
}

}  // namespace critflow

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "critflow/coefficient.hpp"
#include "critflow/domain.hpp"

using namespace critflow;

TEST_CASE("built-in coefficient formulas") {
    CHECK(CoefficientField::smooth_x2().eval({0, 0}) == 0.125);
    CHECK(CoefficientField::smooth_x2().eval({0.5, 3.0}) == doctest::Approx(0.375));
    CHECK(CoefficientField::lipschitz_abs_x().eval({-0.25, 1.0}) == doctest::Approx(0.375));
    CHECK(CoefficientField::radius_sq().eval({0.3, -0.4}) == doctest::Approx(1.25));
    CHECK(CoefficientField::radius().eval({0, 0}) == 0.0);
    CHECK(CoefficientField::dist_to_point({2, -1}).eval({2, -1}) == 0.0);

    const auto pw = CoefficientField::piecewise_radial(0.05, 0.5, 1.0, 21.0);
    CHECK(pw.eval({0.7, 0.0}) == 21.0);
    CHECK(pw.eval({0.2, 0.1}) == 1.0);
    CHECK(pw.eval({0.5, 0.0}) == 1.0);  // rho_minus branch on the curve

    const auto hp = CoefficientField::piecewise_halfplane(0.0, 1.0, 1001.0);
    CHECK(hp.eval({0.3, -0.2}) == 1.0);
    CHECK(hp.eval({0.3, 0.2}) == 1001.0);
    CHECK(hp.eval({0.3, 0.0}) == 1.0);
}

TEST_CASE("degeneracy metadata") {
    CHECK(CoefficientField::radius().degenerate_points().size() == 1);
    CHECK(CoefficientField::smooth_x2().degenerate_points().empty());
    CHECK(*CoefficientField::smooth_x2().known_delta() == doctest::Approx(0.125));
    CHECK(*CoefficientField::piecewise_radial(0.05, 0.5, 1, 21).known_delta() == 1.0);
    CHECK(!CoefficientField::radius().known_delta().has_value());
}

TEST_CASE("eval is deterministic bitwise") {
    const auto f = CoefficientField::custom("sqrt(x^2+y^2)*(1+x*y/4)");
    const Vec2 p{0.372891, -0.881102};
    const double a = f.eval(p);
    for (int i = 0; i < 100; ++i) CHECK(f.eval(p) == a);
}

TEST_CASE("piecewise radial is rotation invariant") {
    const auto pw = CoefficientField::piecewise_radial(0.05, 0.5, 2.0, 7.0);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> rad(0.06, 0.99);
    for (int i = 0; i < 200; ++i) {
        const double r = rad(rng), t = ang(rng), s = ang(rng);
        const Vec2 p{r * std::cos(t), r * std::sin(t)};
        CHECK(pw.eval(p) == pw.eval(rotate(p, s)));
    }
}

TEST_CASE("expression grammar") {
    CHECK(CoefficientField::custom("x^2+1/8").eval({0.5, 9}) == doctest::Approx(0.375));
    CHECK(CoefficientField::custom("abs(x)+1/8").eval({-3, 0}) == doctest::Approx(3.125));
    CHECK(CoefficientField::custom("sqrt(x^2+y^2)").eval({3, 4}) == doctest::Approx(5.0));
    CHECK(CoefficientField::custom("2+3*4").eval({0, 0}) == doctest::Approx(14.0));   // precedence
    CHECK(CoefficientField::custom("(2+3)*4").eval({0, 0}) == doctest::Approx(20.0));
    CHECK(CoefficientField::custom("2*x^3").eval({2, 0}) == doctest::Approx(16.0));   // pow binds tighter
    CHECK(CoefficientField::custom("1-2-3").eval({0, 0}) == doctest::Approx(-4.0));   // left assoc
    CHECK(CoefficientField::custom("8/2/2").eval({0, 0}) == doctest::Approx(2.0));
    CHECK(CoefficientField::custom("sqrt((x-2)^2+(y+1)^2)").eval({2, 0}) == doctest::Approx(1.0));

    CHECK_THROWS_AS(CoefficientField::custom("x+"), ConfigError);
    CHECK_THROWS_AS(CoefficientField::custom("sqrt(x"), ConfigError);
    CHECK_THROWS_AS(CoefficientField::custom("x y"), ConfigError);
    CHECK_THROWS_AS(CoefficientField::custom("x^y"), ConfigError);

    CHECK_THROWS_AS(CoefficientField::custom("1/(x-x)").eval({1, 1}), EvalError);
    CHECK_THROWS_AS(CoefficientField::custom("sqrt(x)").eval({-1, 0}), EvalError);
}

TEST_CASE("essential lower bounds") {
    const DomainSpec annulus = annulus_domain(0.05, 1.0);

    CHECK(essential_lower_bound(CoefficientField::constant(3.0), annulus, 0.5, 0.01) == 3.0);

    // min of x^2 + 1/8 over the annulus is 1/8, attained at (0, +-y)
    const double lb = essential_lower_bound(CoefficientField::smooth_x2(), annulus, 0.0, 5e-4);
    CHECK(lb <= 0.125);
    CHECK(lb == doctest::Approx(0.125).epsilon(1e-5));
    CHECK(0.125 - lb < 1e-6);

    // degenerate at the half-disc corner (2,-1); excluded ball keeps it positive
    const DomainSpec half = half_disc_domain({Hole{{0.0, 0.0}, 0.01}});
    const double lb2 = essential_lower_bound(CoefficientField::dist_to_point({2, -1}), half, 0.1, 0.02);
    CHECK(lb2 >= 0.05);

    // vanishing interior point with no exclusion: bound reaches zero
    const double lb3 = essential_lower_bound(CoefficientField::radius(),
                                             DomainSpec{{{0, 0}, 1.0, std::nullopt}, {}, {}}, 0.0, 0.01);
    CHECK(lb3 <= 1e-9);
}

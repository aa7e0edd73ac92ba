#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "bergmanlab/closed_forms.hpp"
#include "bergmanlab/disk_core.hpp"
#include "bergmanlab/functionals.hpp"

using namespace bergmanlab;
using Catch::Approx;

// ||z^k||_{alpha,p} = ((alpha+1) B(pk/2 + 1, alpha+1))^{1/p}.
static double monomial_p_norm(int k, double alpha, double p) {
    const double lb = std::lgamma(0.5 * p * k + 1.0) + std::lgamma(alpha + 1.0) -
                      std::lgamma(0.5 * p * k + alpha + 2.0);
    return std::pow((alpha + 1.0) * std::exp(lb), 1.0 / p);
}

static disk::TaylorFunction seeded_poly(uint64_t seed) {
    GaussianStream g(seed);
    std::vector<cplx> a(9);
    double sig = 1.0;
    for (int k = 0; k <= 8; ++k) {
        a[k] = sig * cplx(g(), g()) / std::sqrt(2.0);
        sig *= 0.5;
    }
    return disk::TaylorFunction(a);
}

TEST_CASE("convex shapes: values and derivatives") {
    const func::ConvexG p2 = func::ConvexG::power(2.0);
    REQUIRE(p2(0.5) == Approx(0.25).margin(1e-15));
    REQUIRE(p2.d1(0.5) == Approx(1.0).margin(1e-15));
    REQUIRE(p2.d2(0.7) == Approx(2.0).margin(1e-15));

    const func::ConvexG p15 = func::ConvexG::power(1.5);
    REQUIRE(p15.d2(0.25) == Approx(1.5 * 0.5 / std::sqrt(0.25)).epsilon(1e-14));

    const func::ConvexG pl =
        func::ConvexG::piecewise_linear({{0.25, 2.0}, {0.5, 3.0}});
    REQUIRE(pl(0.2) == 0.0);
    REQUIRE(pl(0.3) == Approx(2.0 * 0.05).margin(1e-15));
    REQUIRE(pl(0.8) == Approx(2.0 * 0.55 + 3.0 * 0.3).margin(1e-14));
    REQUIRE(pl.d1(0.3) == 2.0);
    REQUIRE(pl.d1(0.9) == 5.0);
    REQUIRE(pl.d2(0.3) == 0.0);

    const func::ConvexG cu = func::ConvexG::custom(
        [](double t) { return t * t; }, [](double t) { return 2.0 * t; },
        [](double) { return 2.0; });
    REQUIRE(cu(0.3) == Approx(0.09).margin(1e-15));
    REQUIRE(cu.d2(0.3) == 2.0);
}

TEST_CASE("convex shape validation") {
    REQUIRE_THROWS_AS(func::ConvexG::power(1.0), ConfigError);
    REQUIRE_THROWS_AS(func::ConvexG::power(0.5), ConfigError);
    REQUIRE_THROWS_AS(func::ConvexG::piecewise_linear({}), ConfigError);
    REQUIRE_THROWS_AS(func::ConvexG::piecewise_linear({{-0.1, 1.0}}), ConfigError);
    REQUIRE_THROWS_AS(func::ConvexG::piecewise_linear({{0.1, 0.0}}), ConfigError);
}

TEST_CASE("curvature integral against the fundamental theorem and hinge atoms") {
    // With W = 1 the integral telescopes to G'(T) (G'(0+) = 0 for r > 1).
    auto one = [](double) { return 1.0; };
    for (double r : {1.5, 2.0, 3.0})
        for (double T : {0.3, 0.9}) {
            const func::ConvexG g = func::ConvexG::power(r);
            REQUIRE(g.curvature_integral(one, T) ==
                    Approx(r * std::pow(T, r - 1.0)).epsilon(1e-10));
        }
    const func::ConvexG pl =
        func::ConvexG::piecewise_linear({{0.1, 2.0}, {0.5, 3.0}});
    auto W = [](double t) { return 1.0 + t; };
    REQUIRE(pl.curvature_integral(W, 0.3) == Approx(2.0 * 1.1).margin(1e-15));
    REQUIRE(pl.curvature_integral(W, 0.5) == Approx(2.0 * 1.1).margin(1e-15));
    REQUIRE(pl.curvature_integral(W, 0.9) ==
            Approx(2.0 * 1.1 + 3.0 * 1.5).margin(1e-14));
}

TEST_CASE("weighted norms of monomials match the Beta integral") {
    for (double alpha : {0.0, 0.5, 3.0})
        for (double p : {2.0, 4.0})
            for (int k = 0; k <= 5; ++k) {
                std::vector<cplx> a(k + 1, cplx(0.0));
                a[k] = 1.0;
                const double n =
                    func::bergman_norm(disk::TaylorFunction(a), disk::SpaceParams(alpha, p));
                REQUIRE(n == Approx(monomial_p_norm(k, alpha, p)).epsilon(1e-10));
            }
}

TEST_CASE("boundary norms: circle means at the rim") {
    for (double p : {2.0, 4.0})
        for (int k : {0, 1, 3}) {
            std::vector<cplx> a(k + 1, cplx(0.0));
            a[k] = 1.0;
            REQUIRE(func::bergman_norm(disk::TaylorFunction(a),
                                       disk::SpaceParams(-1.0, p)) ==
                    Approx(1.0).epsilon(1e-13));
        }
    const disk::TaylorFunction f({cplx(1.0), cplx(1.0)});
    REQUIRE(func::bergman_norm(f, disk::SpaceParams(-1.0, 2.0)) ==
            Approx(std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("modulus field evaluates |f|^p times the weight") {
    const disk::TaylorFunction f({cplx(1.0), cplx(1.0)});
    const disk::SpaceParams sp(0.5, 3.0);
    const quad::ScalarField u = func::husimi(f, sp);
    REQUIRE(u.decay == Approx(2.5));
    REQUIRE(u.bound == Approx(std::pow(2.0, 3.0)));
    for (cplx z : {cplx(0.2, 0.3), cplx(-0.5, 0.0), cplx(0.0)}) {
        const double want = std::pow(std::abs(1.0 + z), 3.0) *
                            std::pow(1.0 - std::norm(z), 2.5);
        REQUIRE(u(z) == Approx(want).epsilon(1e-13));
    }
    REQUIRE_THROWS_AS(func::husimi(disk::TaylorFunction({cplx(0.0)}), sp), ConfigError);
}

TEST_CASE("convex functional of the extremal profile: closed forms") {
    const disk::TaylorFunction one({cplx(1.0)});
    // alpha = 0, G = t^2: integral (1-y)^4 dmu = pi/3.
    {
        const quad::ScalarField u = func::husimi(one, disk::SpaceParams(0.0, 2.0));
        const auto rep = func::convex_functional(u, func::ConvexG::power(2.0));
        REQUIRE(rep.value == Approx(pi / 3.0).margin(1e-9));
    }
    // General power on the radial profile: pi / (r(alpha+2) - 1).
    for (double alpha : {0.0, 1.0})
        for (double r : {1.5, 3.0}) {
            const quad::ScalarField u = func::husimi(one, disk::SpaceParams(alpha, 2.0));
            const auto rep = func::convex_functional(u, func::ConvexG::power(r));
            REQUIRE(rep.value ==
                    Approx(pi / (r * (alpha + 2.0) - 1.0)).margin(1e-8));
        }
    // Custom quadratic goes through the same route as a smooth shape.
    {
        const quad::ScalarField u = func::husimi(one, disk::SpaceParams(0.0, 2.0));
        const auto rep = func::convex_functional(
            u, func::ConvexG::custom([](double t) { return t * t; },
                                     [](double t) { return 2.0 * t; },
                                     [](double) { return 2.0; }));
        REQUIRE(rep.value == Approx(pi / 3.0).margin(1e-8));
        REQUIRE_THROWS_AS(
            func::convex_functional(
                u, func::ConvexG::custom([](double t) { return t * t; },
                                         [](double t) { return 2.0 * t; },
                                         [](double) { return 2.0; }, false)),
            ConfigError);
    }
}

TEST_CASE("hinge functionals reduce to deficit integrals") {
    const disk::TaylorFunction one({cplx(1.0)});
    const quad::ScalarField u = func::husimi(one, disk::SpaceParams(0.0, 2.0));
    const auto quarter = func::convex_functional(
        u, func::ConvexG::piecewise_linear({{0.25, 1.0}}));
    REQUIRE(quarter.value == Approx(pi / 4.0).margin(1e-7));
    REQUIRE(quarter.value == Approx(forms::K_alpha(0.25, 0.0)).margin(1e-7));
    // A hinge at 0 is the plain mass integral.
    const auto mass =
        func::convex_functional(u, func::ConvexG::piecewise_linear({{0.0, 2.0}}));
    REQUIRE(mass.value == Approx(2.0 * pi).margin(1e-7));
}

TEST_CASE("layer-cake route agrees with the direct route") {
    const disk::TaylorFunction f({cplx(1.0), cplx(1.0)});
    for (double alpha : {0.0, 1.0}) {
        const quad::ScalarField u = func::husimi(f, disk::SpaceParams(alpha, 2.0));
        for (double r : {1.5, 2.0, 3.0}) {
            const func::ConvexG G = func::ConvexG::power(r);
            const auto direct = func::convex_functional(u, G);
            const auto cake = func::layer_cake_functional(u, G);
            const double slack =
                direct.error + cake.error + 1e-6 * std::max(1.0, direct.value);
            REQUIRE(std::abs(direct.value - cake.value) <= slack);
        }
        REQUIRE_THROWS_AS(
            func::layer_cake_functional(u, func::ConvexG::piecewise_linear({{0.1, 1.0}})),
            ConfigError);
    }
}

TEST_CASE("concentration of the flat function saturates the bound") {
    const disk::TaylorFunction one({cplx(1.0)});
    for (double alpha : {0.0, 1.0})
        for (double s : {pi / 2.0, pi, 4.0 * pi}) {
            const auto rep = func::concentration_ratio(one, alpha, cplx(0.0), s);
            REQUIRE(rep.bound ==
                    Approx(1.0 - std::pow(1.0 + s / pi, -(alpha + 1.0))).margin(1e-14));
            REQUIRE(std::abs(rep.margin) < 1e-8);
            REQUIRE(rep.radius == Approx(std::sqrt(s / (s + pi))).margin(1e-15));
        }
}

TEST_CASE("concentration of a kernel about its own center saturates the bound") {
    const disk::TaylorFunction k = disk::normalized_kernel(cplx(0.3, 0.0), 0.0);
    const auto rep = func::concentration_ratio(k, 0.0, cplx(0.3, 0.0), pi);
    REQUIRE(std::abs(rep.margin) < 1e-6);
}

TEST_CASE("off-center mass leaves a strictly positive concentration gap") {
    const disk::TaylorFunction z({cplx(0.0), cplx(1.0)});
    const auto rep = func::concentration_ratio(z, 0.0, cplx(0.0), pi);
    REQUIRE(rep.margin > 1e-3);
    REQUIRE(rep.ratio > 0.0);
}

TEST_CASE("concentration input validation") {
    const disk::TaylorFunction one({cplx(1.0)});
    REQUIRE_THROWS_AS(func::concentration_ratio(one, 0.0, cplx(0.0), 0.0), ConfigError);
    REQUIRE_THROWS_AS(func::concentration_ratio(one, 0.0, cplx(0.0), -1.0), ConfigError);
    REQUIRE_THROWS_AS(func::concentration_ratio(one, -1.0, cplx(0.0), pi), ConfigError);
    REQUIRE_THROWS_AS(func::concentration_ratio(one, 0.0, cplx(1.0, 0.0), pi),
                      ConfigError);
}

TEST_CASE("norm comparison across scales: monomial anchor") {
    const disk::TaylorFunction z({cplx(0.0), cplx(1.0)});
    const auto rep = func::check_embedding(z, 2.0, 0.0, 4.0);
    REQUIRE(rep.beta == Approx(2.0).margin(1e-15));
    REQUIRE(rep.lhs == Approx(std::pow(0.1, 0.25)).epsilon(1e-12));
    REQUIRE(rep.rhs == Approx(std::sqrt(0.5)).epsilon(1e-13));
    REQUIRE(rep.margin > 0.0);
    REQUIRE_THROWS_AS(func::check_embedding(z, 4.0, 0.0, 2.0), ConfigError);
}

TEST_CASE("norm comparison holds on seeded random polynomials") {
    for (uint64_t seed : {11u, 12u, 13u, 14u, 15u})
        for (double alpha : {0.0, 1.0}) {
            const auto rep = func::check_embedding(seeded_poly(seed), 2.0, alpha, 4.0);
            REQUIRE(rep.margin >= -1e-9);
        }
}

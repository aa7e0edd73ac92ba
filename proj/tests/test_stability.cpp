#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "bergmanlab/closed_forms.hpp"
#include "bergmanlab/disk_core.hpp"
#include "bergmanlab/functionals.hpp"
#include "bergmanlab/quadrature.hpp"
#include "bergmanlab/stability.hpp"

using namespace bergmanlab;
using Catch::Approx;

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

// Independent route to the family distance: maximise |<f, kappa_w>| over the
// disk by coarse polar scan plus shrinking local refinement, entirely in
// coefficient space (no pointwise field, no sup search).
static double best_kernel_overlap(const disk::TaylorFunction& fn, double alpha) {
    auto val = [&](double r, double th) {
        const cplx w(r * std::cos(th), r * std::sin(th));
        return std::abs(
            disk::inner_product(fn, disk::normalized_kernel(w, alpha, 64), alpha));
    };
    double best = 0.0, br = 0.0, bth = 0.0;
    for (int ir = 0; ir <= 36; ++ir)
        for (int jt = 0; jt < 48; ++jt) {
            const double r = 0.9 * ir / 36.0;
            const double th = 2.0 * pi * jt / 48.0;
            const double v = val(r, th);
            if (v > best) {
                best = v;
                br = r;
                bth = th;
            }
        }
    double wr = 0.9 / 36.0, wth = 2.0 * pi / 48.0;
    for (int round = 0; round < 14; ++round) {
        double nb = best, nr = br, nth = bth;
        for (int i = -2; i <= 2; ++i)
            for (int j = -2; j <= 2; ++j) {
                const double r = std::clamp(br + wr * i / 2.0, 0.0, 0.9);
                const double th = bth + wth * j / 2.0;
                const double v = val(r, th);
                if (v > nb) {
                    nb = v;
                    nr = r;
                    nth = th;
                }
            }
        best = nb;
        br = nr;
        bth = nth;
        wr *= 0.4;
        wth *= 0.4;
    }
    return best;
}

TEST_CASE("prefactor constant") {
    REQUIRE(stab::c_prime == Approx(pi * (std::log(2.0) - 0.5)).epsilon(1e-15));
}

TEST_CASE("kernel distance of the degree-one monomial") {
    const disk::TaylorFunction z({cplx(0.0), cplx(1.0)});
    const auto d = stab::kernel_deficit(z, 0.0);
    REQUIRE(d.T == Approx(8.0 / 27.0).margin(1e-9));
    REQUIRE(d.d2 == Approx(2.0 * (1.0 - std::sqrt(8.0 / 27.0))).margin(1e-9));
    REQUIRE(d.d2 == Approx(0.9113378).margin(1e-6));
    REQUIRE(std::abs(d.w) == Approx(1.0 / std::sqrt(3.0)).margin(1e-6));
    REQUIRE_FALSE(d.rim_warning);
}

TEST_CASE("kernel distance agrees with a direct family search") {
    for (double alpha : {0.0, 1.0})
        for (uint64_t seed : {21u, 22u, 23u}) {
            const disk::TaylorFunction fn =
                disk::normalized(seeded_poly(seed), alpha);
            const auto d = stab::kernel_deficit(fn, alpha);
            const double oracle = 2.0 * (1.0 - best_kernel_overlap(fn, alpha));
            REQUIRE(d.d2 == Approx(oracle).margin(1e-6));
            // Sandwich between the sup gap and twice the sup gap.
            REQUIRE(d.d2 >= (1.0 - d.T) - 1e-12);
            REQUIRE(d.d2 <= 2.0 * (1.0 - d.T) + 1e-12);
        }
}

TEST_CASE("accumulated distribution gap: closed forms beyond the sup") {
    const quad::ScalarField u(
        [](cplx z) {
            const double y = std::norm(z);
            return 2.0 * y * (1.0 - y) * (1.0 - y);
        },
        2.0, 2.0);
    const auto prof = quad::distribution_profile(u, 0.0);
    const auto h = stab::H_profile(prof);
    REQUIRE_FALSE(h.anomaly);
    REQUIRE(h.t_star.has_value());

    // Beyond the sup, H(t) equals the deficit closed form exactly.
    for (double t : {0.5, 0.9}) {
        const auto [v, e] = stab::H_at(h, prof, t);
        REQUIRE(v == Approx(forms::K_alpha(t, 0.0)).margin(e + 5e-3));
    }
    // Inside the sampled range, H(t) = min-integral identity.
    for (double t : {0.1, 0.2, 0.26}) {
        const auto [v, e] = stab::H_at(h, prof, t);
        const auto mi = quad::min_integral(u, t);
        const double oracle = mi.value - pi + forms::K_alpha(t, 0.0);
        REQUIRE(v == Approx(oracle).margin(e + mi.error + 2e-3));
    }
    // At the crossing the accumulated gap dominates the quadratic floor.
    const auto [v_star, e_star] = stab::H_at(h, prof, *h.t_star);
    REQUIRE(v_star + e_star >= forms::K_alpha_lower(prof.T, 0.0));
    REQUIRE(v_star == Approx(0.73005).margin(0.01));
}

TEST_CASE("accumulated gap of the radial profile vanishes") {
    const quad::ScalarField v0(
        [](cplx z) { return std::pow(1.0 - std::norm(z), 2.0); }, 2.0, 1.0);
    const auto prof = quad::distribution_profile(v0, 0.0);
    const auto h = stab::H_profile(prof);
    REQUIRE_FALSE(h.anomaly);
    for (size_t i = 0; i < h.t.size(); ++i)
        REQUIRE(std::abs(h.H[i]) <= 3.0 * h.H_err[i] + 1e-4);
}

TEST_CASE("accumulated gap input validation") {
    quad::DistributionProfile p;
    p.alpha = -1.0;
    p.t = {0.1, 0.2, 0.3};
    p.rho = p.rho_err = p.rho0 = {0.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(stab::H_profile(p), ConfigError);
    p.alpha = 0.0;
    p.t = {0.1, 0.2};
    p.rho = p.rho_err = p.rho0 = {0.0, 0.0};
    REQUIRE_THROWS_AS(stab::H_profile(p), ConfigError);
    stab::HProfileResult empty;
    REQUIRE_THROWS_AS(stab::H_at(empty, p, 0.5), ConfigError);
}

TEST_CASE("extremal functional closed forms") {
    REQUIRE(stab::extremal_functional(func::ConvexG::power(2.0), 0.0) ==
            Approx(pi / 3.0).epsilon(1e-15));
    REQUIRE(stab::extremal_functional(func::ConvexG::power(1.5), 1.0) ==
            Approx(pi / 3.5).epsilon(1e-15));
    REQUIRE(stab::extremal_functional(
                func::ConvexG::piecewise_linear({{0.25, 1.0}}), 0.0) ==
            Approx(pi / 4.0).epsilon(1e-14));
    REQUIRE(stab::extremal_functional(
                func::ConvexG::piecewise_linear({{0.0, 3.0}}), 0.0) ==
            Approx(3.0 * pi).epsilon(1e-14));
    double err = 0.0;
    const double custom = stab::extremal_functional(
        func::ConvexG::custom([](double t) { return t * t; },
                              [](double t) { return 2.0 * t; },
                              [](double) { return 2.0; }),
        0.0, &err);
    REQUIRE(custom == Approx(pi / 3.0).margin(1e-8 + err));
}

TEST_CASE("stability coefficient: hinge atoms are exact") {
    const func::ConvexG g = func::ConvexG::piecewise_linear({{0.1, 1.0}});
    const double T = 8.0 / 27.0;
    const double got =
        stab::stability_coefficient(g, 0.0, 1.0, T, stab::CoefficientForm::Derivation);
    const double want = stab::c_prime / forms::M_alpha_ball(0.1, 0.0, 1.0);
    REQUIRE(got == Approx(want).epsilon(1e-14));
    // A hinge at or above T contributes nothing.
    const func::ConvexG high = func::ConvexG::piecewise_linear({{0.5, 1.0}});
    REQUIRE(stab::stability_coefficient(high, 0.0, 1.0, T,
                                        stab::CoefficientForm::Derivation) == 0.0);
}

TEST_CASE("strengthened inequality on the degree-one monomial") {
    const disk::TaylorFunction z({cplx(0.0), cplx(1.0)});
    const auto rep = stab::verify_theorem1(z, func::ConvexG::power(2.0), 0.0);
    REQUIRE(rep.pass);
    REQUIRE_FALSE(rep.vacuous);
    REQUIRE_FALSE(rep.equality_case);
    REQUIRE(rep.rhs == Approx(pi / 3.0).epsilon(1e-15));
    REQUIRE(rep.lhs == Approx(2.0 * pi / 15.0).margin(1e-8));
    REQUIRE(rep.c_G > 0.07);
    REQUIRE(rep.c_G < 0.09);
    // margin is exactly rhs - lhs - c_G (1 - T), with T = 8/27 here.
    REQUIRE(rep.one_minus_T == Approx(19.0 / 27.0).margin(1e-6));
    const double want = rep.rhs - rep.lhs - rep.c_G * rep.one_minus_T;
    REQUIRE(rep.margin == Approx(want).margin(1e-12));
    REQUIRE(rep.margin > 0.56);
    REQUIRE(rep.margin < 0.58);
}

TEST_CASE("stability coefficient near the equality threshold") {
    const double cg = stab::stability_coefficient(
        func::ConvexG::power(2.0), 0.0, 1.0, 1.0 - 1e-9,
        stab::CoefficientForm::Derivation);
    REQUIRE(cg > 0.64);
    REQUIRE(cg < 0.68);
    const double disp = stab::stability_coefficient(
        func::ConvexG::power(2.0), 0.0, 1.0, 8.0 / 27.0,
        stab::CoefficientForm::Display);
    REQUIRE(disp > 0.0);
    REQUIRE(std::isfinite(disp));
}

TEST_CASE("strengthened inequality: margins shrink toward the kernel family") {
    std::vector<double> margins;
    for (int j = 1; j <= 10; ++j) {
        const double eps = j / 10.0;
        const disk::TaylorFunction f({cplx(1.0), cplx(eps * std::sqrt(2.0))});
        const auto rep = stab::verify_theorem1(f, func::ConvexG::power(2.0), 0.0);
        REQUIRE(rep.pass);
        REQUIRE(rep.margin > 0.0);
        margins.push_back(rep.margin);
    }
    for (size_t j = 1; j < margins.size(); ++j)
        REQUIRE(margins[j] > margins[j - 1] * (1.0 - 1e-9));
    REQUIRE(margins.front() < 1e-4);  // quartic approach to equality
}

TEST_CASE("strengthened inequality short-circuits at the family itself") {
    const disk::TaylorFunction k = disk::normalized_kernel(cplx(0.3, 0.0), 0.0);
    const auto rep = stab::verify_theorem1(k, func::ConvexG::power(2.0), 0.0);
    REQUIRE(rep.equality_case);
    REQUIRE(rep.pass);
    REQUIRE(rep.c_G == 0.0);
    REQUIRE(std::abs(rep.margin) < 1e-6);
}

TEST_CASE("a microscopic convex shape flags the stability term as vacuous") {
    const disk::TaylorFunction z({cplx(0.0), cplx(1.0)});
    const auto g = func::ConvexG::custom(
        [](double t) { return 1e-15 * t * t; },
        [](double t) { return 2e-15 * t; }, [](double) { return 2e-15; });
    const auto rep = stab::verify_theorem1(z, g, 0.0);
    REQUIRE(rep.vacuous);
    REQUIRE(rep.pass);
}

TEST_CASE("theorem1 validation") {
    const disk::TaylorFunction z({cplx(0.0), cplx(1.0)});
    REQUIRE_THROWS_AS(
        stab::verify_theorem1(z, func::ConvexG::power(2.0), 0.0, 0.0), ConfigError);
}

TEST_CASE("norm-decay form: monomial anchor") {
    const disk::TaylorFunction z({cplx(0.0), cplx(1.0)});
    const auto rep = stab::verify_corollary2(z, 4.0, 0.0);
    REQUIRE(rep.pass);
    REQUIRE(rep.lhs == Approx(0.4).margin(1e-9));
    REQUIRE(rep.rhs == 1.0);
    REQUIRE(rep.d2 == Approx(0.9113378).margin(1e-6));
    REQUIRE(rep.c_G == Approx((1.0 - std::sqrt(0.4)) / 0.9113378).margin(1e-4));
    REQUIRE_THROWS_AS(stab::verify_corollary2(z, 2.0, 0.0), ConfigError);
    REQUIRE_THROWS_AS(stab::verify_corollary2(z, 1.5, 0.0), ConfigError);
}

TEST_CASE("norm-decay form on seeded polynomials") {
    for (uint64_t seed : {31u, 32u, 33u}) {
        const auto rep = stab::verify_corollary2(seeded_poly(seed), 3.0, 0.5);
        REQUIRE(rep.pass);
        REQUIRE(rep.lhs <= 1.0 + 1e-9);
        if (rep.d2 > 1e-6) REQUIRE(rep.c_G > 0.0);
    }
}

TEST_CASE("distribution envelope with adjustable constant") {
    const quad::ScalarField u(
        [](cplx z) {
            const double y = std::norm(z);
            return 2.0 * y * (1.0 - y) * (1.0 - y);
        },
        2.0, 2.0);
    const auto rep = stab::check_lemma5_bound(u, 0.0, 0.1, 4.0);
    REQUIRE(rep.pass);
    REQUIRE(rep.worst_index >= 0);
    REQUIRE(rep.C_min >= 0.0);
    REQUIRE(rep.C_min <= 4.0);
    REQUIRE(rep.t.size() == 24);
    for (size_t i = 0; i < rep.t.size(); ++i)
        REQUIRE(rep.rho[i] <= rep.bound[i] + rep.rho_err[i]);

    REQUIRE_THROWS_AS(stab::check_lemma5_bound(u, 0.0, 0.5, 4.0), ConfigError);
    REQUIRE_THROWS_AS(stab::check_lemma5_bound(u, 0.0, 0.0, 4.0), ConfigError);
    REQUIRE_THROWS_AS(stab::check_lemma5_bound(u, 0.0, 0.1, 4.0, 1), ConfigError);
}

TEST_CASE("distribution envelope on the radial profile") {
    const quad::ScalarField v0(
        [](cplx z) { return std::pow(1.0 - std::norm(z), 2.0); }, 2.0, 1.0);
    const auto rep = stab::check_lemma5_bound(v0, 0.0, 0.1, 4.0);
    REQUIRE(rep.pass);
}

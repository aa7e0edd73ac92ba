#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "bergmanlab/gauss.hpp"

using namespace bergmanlab;
using Catch::Approx;

// int_0^1 y^k (1-y)^a dy = B(k+1, a+1), the moment every rule below must hit.
static double beta_moment(int k, double a) {
    return std::exp(std::lgamma(k + 1.0) + std::lgamma(a + 1.0) -
                    std::lgamma(k + a + 2.0));
}

TEST_CASE("gauss-jacobi on [0,1] is exact for weighted monomials") {
    const int n = 12;
    for (double a : {0.0, 0.5, 3.0, -0.5}) {
        const Quad1D& q = jacobi01(n, a);
        REQUIRE(q.size() == (size_t)n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (size_t i = 0; i < q.size(); ++i) s += q.w[i] * std::pow(q.x[i], k);
            const double exact = beta_moment(k, a);
            REQUIRE(s == Approx(exact).epsilon(1e-12).margin(1e-15));
        }
    }
}

TEST_CASE("gauss-jacobi nodes are interior, sorted, with positive weights") {
    for (double a : {0.0, 2.5, -0.5}) {
        const Quad1D& q = jacobi01(24, a);
        for (size_t i = 0; i < q.size(); ++i) {
            REQUIRE(q.x[i] > 0.0);
            REQUIRE(q.x[i] < 1.0);
            REQUIRE(q.w[i] > 0.0);
            if (i) REQUIRE(q.x[i] > q.x[i - 1]);
        }
    }
}

TEST_CASE("jacobi01 caches by (n, alpha)") {
    const Quad1D* p1 = &jacobi01(16, 0.5);
    const Quad1D* p2 = &jacobi01(16, 0.5);
    REQUIRE(p1 == p2);
    REQUIRE(&jacobi01(16, 0.25) != p1);
}

TEST_CASE("legendre rules integrate polynomials on [0,1] and shifted intervals") {
    const Quad1D& q = legendre01(8);
    for (int k = 0; k <= 15; ++k) {
        double s = 0.0;
        for (size_t i = 0; i < q.size(); ++i) s += q.w[i] * std::pow(q.x[i], k);
        REQUIRE(s == Approx(1.0 / (k + 1.0)).epsilon(1e-13));
    }
    const Quad1D r = legendre_on(8, 1.0, 3.0);
    double s = 0.0;
    for (size_t i = 0; i < r.size(); ++i) s += r.w[i] * std::pow(r.x[i], 3);
    REQUIRE(s == Approx(20.0).epsilon(1e-13));  // int_1^3 x^3 dx
}

TEST_CASE("fft matches the naive DFT and Parseval") {
    const size_t n = 16;
    std::vector<cplx> v(n);
    GaussianStream g(12345);
    for (cplx& c : v) c = cplx(g(), g());
    std::vector<cplx> x = v;
    fft_pow2(x);
    double pow_time = 0.0, pow_freq = 0.0;
    for (size_t k = 0; k < n; ++k) {
        cplx naive = 0.0;
        for (size_t j = 0; j < n; ++j) {
            const double ang = -2.0 * pi * (double)(j * k % n) / (double)n;
            naive += v[j] * cplx(std::cos(ang), std::sin(ang));
        }
        REQUIRE(std::abs(x[k] - naive) < 1e-12);
        pow_freq += std::norm(x[k]);
    }
    for (size_t j = 0; j < n; ++j) pow_time += std::norm(v[j]);
    REQUIRE(pow_freq == Approx(n * pow_time).epsilon(1e-12));
}

TEST_CASE("fft of an impulse is flat") {
    std::vector<cplx> v(8, cplx(0.0));
    v[0] = 1.0;
    fft_pow2(v);
    for (const cplx& c : v) REQUIRE(std::abs(c - 1.0) < 1e-14);
}

TEST_CASE("fft rejects sizes that are not powers of two") {
    std::vector<cplx> v(6, cplx(1.0));
    REQUIRE_THROWS_AS(fft_pow2(v), ConfigError);
}

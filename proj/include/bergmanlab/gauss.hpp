#pragma once

// One-dimensional quadrature rules (Gauss-Legendre / Gauss-Jacobi, computed by
// Newton iteration with root deflation) and a radix-2 FFT for circle sampling.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "bergmanlab/common.hpp"

namespace bergmanlab {

struct Quad1D {
    std::vector<double> x, w;
    std::size_t size() const { return x.size(); }
};

namespace detail {

// Value and derivative of the Jacobi polynomial P_n^{(a,b)} at x, |x| <= 1.
inline void jacobi_eval(int n, double a, double b, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = 0.5 * (a - b + (a + b + 2.0) * x);
    if (n == 0) {
        p = p0;
        dp = 0.0;
        return;
    }
    for (int k = 1; k < n; ++k) {
        const double a1 = 2.0 * (k + 1) * (k + a + b + 1) * (2 * k + a + b);
        const double a2 = (2 * k + a + b + 1) * (a * a - b * b);
        const double a3 = (2 * k + a + b) * (2 * k + a + b + 1) * (2 * k + a + b + 2);
        const double a4 = 2.0 * (k + a) * (k + b) * (2 * k + a + b + 2);
        const double p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    // (2n+a+b)(1-x^2) P_n' = n(a-b-(2n+a+b)x) P_n + 2(n+a)(n+b) P_{n-1}
    const double denom = (2.0 * n + a + b) * (1.0 - x * x);
    dp = (n * (a - b - (2.0 * n + a + b) * x) * p1 + 2.0 * (n + a) * (n + b) * p0) / denom;
}

inline Quad1D gauss_jacobi_make(int n, double a, double b) {
    if (n < 1) throw ConfigError("quadrature order must be >= 1");
    Quad1D q;
    q.x.resize(n);
    q.w.resize(n);
    for (int k = 0; k < n; ++k) {
        double r = -std::cos(pi * (2.0 * k + 1.0) / (2.0 * n));
        if (k > 0) r = 0.5 * (r + q.x[k - 1]);
        double p = 0.0, dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            jacobi_eval(n, a, b, r, p, dp);
            double defl = 0.0;
            for (int j = 0; j < k; ++j) defl += 1.0 / (r - q.x[j]);
            const double delta = -p / (dp - defl * p);
            r += delta;
            if (std::abs(delta) < 1e-15) break;
        }
        q.x[k] = r;
    }
    const double logfac = (a + b + 1.0) * std::log(2.0) + std::lgamma(a + n + 1) +
                          std::lgamma(b + n + 1) - std::lgamma(n + 1.0) -
                          std::lgamma(n + a + b + 1);
    const double fac = std::exp(logfac);
    for (int k = 0; k < n; ++k) {
        double p, dp;
        jacobi_eval(n, a, b, q.x[k], p, dp);
        q.w[k] = fac / ((1.0 - q.x[k] * q.x[k]) * dp * dp);
    }
    return q;
}

}  // namespace detail

// Nodes/weights for integral_0^1 h(y) (1-y)^a dy; the weight is folded in, so
// polynomials h of degree <= 2n-1 integrate exactly.
inline const Quad1D& jacobi01(int n, double a) {
    static std::map<std::pair<int, long long>, Quad1D> cache;
    static std::mutex mu;
    const auto key = std::make_pair(n, static_cast<long long>(std::llround(a * 1e9)));
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) {
        Quad1D q = detail::gauss_jacobi_make(n, a, 0.0);
        const double scale = std::pow(2.0, -(a + 1.0));
        for (std::size_t i = 0; i < q.size(); ++i) {
            q.x[i] = 0.5 * (1.0 + q.x[i]);
            q.w[i] *= scale;
        }
        it = cache.emplace(key, std::move(q)).first;
    }
    return it->second;
}

// Plain Gauss-Legendre on [0,1].
inline const Quad1D& legendre01(int n) { return jacobi01(n, 0.0); }

// Gauss-Legendre scaled to [lo,hi].
inline Quad1D legendre_on(int n, double lo, double hi) {
    const Quad1D& base = legendre01(n);
    Quad1D q = base;
    const double len = hi - lo;
    for (std::size_t i = 0; i < q.size(); ++i) {
        q.x[i] = lo + len * base.x[i];
        q.w[i] = len * base.w[i];
    }
    return q;
}

// In-place radix-2 FFT, forward sign convention X_k = sum_j x_j e^{-2pi i jk/N}.
inline void fft_pow2(std::vector<cplx>& v) {
    const std::size_t n = v.size();
    if (n == 0 || (n & (n - 1)) != 0) throw ConfigError("fft size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * pi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = v[i + k];
                const cplx t = w * v[i + k + len / 2];
                v[i + k] = u + t;
                v[i + k + len / 2] = u - t;
                w *= wl;
            }
        }
    }
}

}  // namespace bergmanlab

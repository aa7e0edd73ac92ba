#pragma once

// Upper-half-plane picture. Functions are given by their spectral side:
//   hhat(t) = sum_k amp_k t^{m_k} e^{-s_k t} on (0, infinity),
// carried to holomorphic functions on Im z > 0 by a Laplace-type transform
// with a t^{(alpha+1)/2} weight, then to the disk by the Cayley map. The
// composite is an isometry from (1/2pi) L^2(0, infinity) onto A^2_alpha of the
// disk; check_unitarity plays the two ends against each other, the spectral
// side in closed form and the disk side through FFT Taylor extraction.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "bergmanlab/common.hpp"
#include "bergmanlab/gauss.hpp"

namespace bergmanlab::hp {

struct SpectralTerm {
    double m = 0.0;     // power of t, >= 0
    double s = 1.0;     // exponential rate, > 0
    cplx amplitude{1.0, 0.0};
};

struct SpectralFunction {
    std::vector<SpectralTerm> terms;

    SpectralFunction() = default;
    explicit SpectralFunction(std::vector<SpectralTerm> t) : terms(std::move(t)) {
        if (terms.empty()) throw ConfigError("spectral function needs at least one term");
        for (const SpectralTerm& tm : terms) {
            if (!(tm.m >= 0.0) || !std::isfinite(tm.m))
                throw ConfigError("spectral term: power m must be finite and >= 0");
            if (!(tm.s > 0.0) || !std::isfinite(tm.s))
                throw ConfigError("spectral term: rate s must be finite and > 0");
            if (!finite(tm.amplitude)) throw ConfigError("spectral term: non-finite amplitude");
        }
    }

    double operator()(double t) const {  // hhat(t)
        cplx acc = 0.0;
        for (const SpectralTerm& tm : terms)
            acc += tm.amplitude * std::pow(t, tm.m) * std::exp(-tm.s * t);
        return acc.real();
    }
};

// Window profile t^beta e^{-t} / c_beta with c_beta = 2^{2 beta - 1} Gamma(2 beta)
// (c_{1/2} = 1, c_1 = 2).
inline double cauchy_constant(double beta) {
    if (!(beta > 0.0)) throw ConfigError("cauchy_constant: beta must be positive");
    return std::pow(2.0, 2.0 * beta - 1.0) * std::tgamma(2.0 * beta);
}

inline SpectralFunction cauchy_window(double beta) {
    SpectralTerm t;
    t.m = beta;
    t.s = 1.0;
    t.amplitude = 1.0 / cauchy_constant(beta);
    return SpectralFunction({t});
}

// Scale factor of the spectral-to-holomorphic transform; the unique positive
// constant making the full chain (spectral -> half-plane -> disk) isometric.
// Derivable by Plancherel in the horizontal variable plus the Gamma integral
// of (Im z)^alpha; the unitarity tests re-establish it numerically.
inline double transform_constant(double alpha) {
    if (!(alpha > -1.0)) throw ConfigError("transform_constant: needs alpha > -1");
    return std::sqrt(2.0) / pi / std::sqrt(std::tgamma(alpha + 1.0));
}

// F(z) = c_alpha int_0^inf hhat(t) t^{(alpha+1)/2} e^{izt} dt, termwise
//      = c_alpha sum_k amp_k Gamma(nu_k) (s_k - i z)^{-nu_k},
// nu_k = m_k + (alpha+3)/2, principal branch (Re(s - iz) = s + Im z > 0).
inline cplx bergman_transform(const SpectralFunction& F, double alpha, cplx z) {
    if (!(z.imag() > 0.0))
        throw ConfigError("bergman_transform: z must lie in the upper half-plane");
    const double c = transform_constant(alpha);
    cplx acc = 0.0;
    for (const SpectralTerm& tm : F.terms) {
        const double nu = tm.m + 0.5 * (alpha + 3.0);
        const cplx base = cplx(tm.s, 0.0) - cplx(0.0, 1.0) * z;
        acc += tm.amplitude * std::tgamma(nu) * std::pow(base, cplx(-nu, 0.0));
    }
    return c * acc;
}

// Disk-side function g(w) = sqrt(pi 2^alpha / (alpha+1)) (1-w)^{-alpha-2} F(z(w)),
// z(w) = (w+1)/(i(w-1)) = i(1+w)/(1-w). Defined away from w = 1.
inline cplx cayley_map(const SpectralFunction& F, double alpha, cplx w) {
    const cplx one_minus = 1.0 - w;
    if (std::abs(one_minus) < 1e-8)
        throw ConfigError("cayley_map: w too close to the boundary point 1");
    const cplx z = (w + 1.0) / (cplx(0.0, 1.0) * (w - 1.0));
    const double pref = std::sqrt(pi * std::pow(2.0, alpha) / (alpha + 1.0));
    return pref * std::pow(one_minus, cplx(-(alpha + 2.0), 0.0)) *
           bergman_transform(F, alpha, z);
}

// (1/2pi) int_0^inf |hhat|^2 dt in closed form via Gamma integrals.
inline double spectral_norm_sq(const SpectralFunction& F) {
    CompensatedSum acc;
    for (const SpectralTerm& a : F.terms)
        for (const SpectralTerm& b : F.terms) {
            const double mm = a.m + b.m, ss = a.s + b.s;
            const cplx v = a.amplitude * std::conj(b.amplitude) * std::tgamma(mm + 1.0) /
                           std::pow(ss, mm + 1.0);
            acc.add(v.real());
        }
    return acc.value() / (2.0 * pi);
}

// ---------------------------------------------------------------------------
// Isometry check: Taylor coefficients of g on |w| = r by FFT, disk norm
// sum |b_k|^2 c_k plus a block-ratio tail estimate, against the closed-form
// spectral norm.
struct UnitarityReport {
    double alpha = 0.0;
    double spectral_sq = 0.0;
    double disk_sq = 0.0;
    double tail = 0.0;   // estimated mass beyond the coefficient cutoff
    double ratio = 0.0;  // disk_sq / spectral_sq, tail included
    int k_max = 0;
    double tolerance = 0.0;
    bool pass = false;
};

inline UnitarityReport check_unitarity(const SpectralFunction& F, double alpha,
                                       int k_max = 65536, double tol = 1e-4) {
    if (k_max < 1024 || (k_max & (k_max - 1)) != 0)
        throw ConfigError("check_unitarity: k_max must be a power of two >= 1024");
    UnitarityReport rep;
    rep.alpha = alpha;
    rep.k_max = k_max;
    rep.tolerance = tol;
    rep.spectral_sq = spectral_norm_sq(F);

    // Sampling radius: r^{k_max} = 1e-6 keeps the k < k_max coefficients well
    // conditioned while pushing the aliased k + N images down by 1e-12.
    const int N = 2 * k_max;
    const double r = std::exp(std::log(1e-6) / k_max);
    std::vector<cplx> v(N);
    for (int j = 0; j < N; ++j) {
        const double th = 2.0 * pi * j / N;
        v[j] = cayley_map(F, alpha, cplx(r * std::cos(th), r * std::sin(th)));
    }
    fft_pow2(v);

    // sum_k |b_k|^2 c_k with b_k = X_k / (N r^k), c_k the monomial norm^2.
    CompensatedSum acc;
    std::vector<double> t_k(k_max);
    double c = 1.0;     // c_k running product
    double rp = 1.0;    // r^k
    for (int k = 0; k < k_max; ++k) {
        if (k > 0) {
            c *= k / (k + alpha + 1.0);
            rp *= r;
        }
        const double bk2 = std::norm(v[k] / ((double)N * rp));
        t_k[k] = bk2 * c;
        acc.add(t_k[k]);
    }
    rep.disk_sq = acc.value();

    // Tail: dyadic block sums S1 = [k/4, k/2), S2 = [k/2, k); for power-law
    // decay consecutive blocks shrink by S2/S1, so the remainder is about
    // S2^2/(S1 - S2).
    double S1 = 0.0, S2 = 0.0;
    for (int k = k_max / 4; k < k_max / 2; ++k) S1 += t_k[k];
    for (int k = k_max / 2; k < k_max; ++k) S2 += t_k[k];
    rep.tail = (S2 > 0.0 && S2 < S1) ? S2 * S2 / (S1 - S2) : S2;
    rep.disk_sq += rep.tail;

    rep.ratio = rep.disk_sq / rep.spectral_sq;
    rep.pass = std::isfinite(rep.ratio) && std::abs(rep.ratio - 1.0) <= tol;
    return rep;
}

}  // namespace bergmanlab::hp

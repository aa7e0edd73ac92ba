#pragma once

// Analytic functions on the unit disk as finite Taylor data, the weighted
// coefficient inner product, reproducing kernels, and the disk involution.
// Weight convention: alpha > -1 is the standard radial weight family and
// alpha = -1 is the boundary (Hardy) limit, where every monomial has unit
// norm and the kernel degenerates to 1/(1 - conj(w) z).

#include <complex>
#include <stdexcept>
#include <vector>

#include "bergmanlab/common.hpp"

namespace bergmanlab::disk {

struct SpaceParams {
    double alpha = 0.0;  // weight exponent, >= -1 (-1 = boundary limit)
    double p = 2.0;      // integrability exponent, > 0

    SpaceParams(double a, double p_) : alpha(a), p(p_) {
        if (!(alpha >= -1.0)) throw ConfigError("alpha must be >= -1");
        if (!(p > 0.0)) throw ConfigError("p must be > 0");
    }
    bool boundary() const { return alpha == -1.0; }
};

struct DiskPoint {
    cplx z;
    explicit DiskPoint(cplx z_) : z(z_) {
        if (!(std::abs(z) < 1.0)) throw ConfigError("point must satisfy |z| < 1");
    }
};

class TaylorFunction {
  public:
    TaylorFunction() = default;
    explicit TaylorFunction(std::vector<cplx> coeffs) : a_(std::move(coeffs)) {
        for (const cplx& c : a_)
            if (!finite(c)) throw ConfigError("non-finite Taylor coefficient");
        if (a_.empty()) a_.push_back(0.0);
    }

    int degree() const { return static_cast<int>(a_.size()) - 1; }
    const std::vector<cplx>& coeffs() const { return a_; }
    cplx coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(a_.size())) ? a_[k] : cplx(0.0);
    }

    // Horner evaluation; no domain check so circle means at |z| = 1 can reuse it.
    cplx eval_unchecked(cplx z) const {
        cplx acc = 0.0;
        for (auto it = a_.rbegin(); it != a_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    // l^1 coefficient bound: sup_{|z|<=1} |f| <= sum |a_k|.
    double coeff_l1() const {
        CompensatedSum s;
        for (const cplx& c : a_) s.add(std::abs(c));
        return s.value();
    }

    TaylorFunction& scale(cplx c) {
        for (cplx& a : a_) a *= c;
        return *this;
    }

  private:
    std::vector<cplx> a_;
};

inline cplx eval(const TaylorFunction& f, cplx z) {
    if (!(std::abs(z) < 1.0)) throw ConfigError("eval requires |z| < 1");
    return f.eval_unchecked(z);
}

// ||z^k||^2 = k! Gamma(alpha+2) / Gamma(k+alpha+2), as a running product
// (relative error ~ k*eps, no lgamma cancellation). alpha = -1 gives 1.
inline double monomial_norm_sq(int k, double alpha) {
    if (k < 0) throw ConfigError("monomial degree must be >= 0");
    if (!(alpha >= -1.0)) throw ConfigError("alpha must be >= -1");
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c *= j / (j + alpha + 1.0);
    return c;
}

// <f,g> = sum a_k conj(b_k) c_k; fixed pairwise order keeps it reproducible.
inline cplx inner_product(const TaylorFunction& f, const TaylorFunction& g, double alpha) {
    const int n = std::min(f.degree(), g.degree());
    std::vector<double> re(n + 1), im(n + 1);
    double c = 1.0;
    for (int k = 0; k <= n; ++k) {
        if (k > 0) c *= k / (k + alpha + 1.0);
        const cplx term = f.coeff(k) * std::conj(g.coeff(k)) * c;
        re[k] = term.real();
        im[k] = term.imag();
    }
    return {pairwise_sum(re), pairwise_sum(im)};
}

inline double norm_sq(const TaylorFunction& f, double alpha) {
    return inner_product(f, f, alpha).real();
}

inline TaylorFunction normalized(const TaylorFunction& f, double alpha) {
    const double n2 = norm_sq(f, alpha);
    if (!(n2 > 0.0)) throw ConfigError("cannot normalize the zero function");
    TaylorFunction g = f;
    g.scale(1.0 / std::sqrt(n2));
    return g;
}

inline constexpr double kernel_center_cap = 0.95;
inline constexpr int kernel_default_degree = 256;

// K_w(z) = (1 - conj(w) z)^{-alpha-2} truncated at degree N; Taylor
// coefficients conj(w)^k / c_k.
inline TaylorFunction reproducing_kernel(cplx w, double alpha, int N = kernel_default_degree) {
    if (!(std::abs(w) <= kernel_center_cap))
        throw ConfigError("kernel center capped at |w| <= 0.95");
    if (!(alpha >= -1.0)) throw ConfigError("alpha must be >= -1");
    std::vector<cplx> a(N + 1);
    cplx wbar_k = 1.0;
    double c = 1.0;
    for (int k = 0; k <= N; ++k) {
        if (k > 0) {
            wbar_k *= std::conj(w);
            c *= k / (k + alpha + 1.0);
        }
        a[k] = wbar_k / c;
    }
    return TaylorFunction(std::move(a));
}

// Norm of the dropped tail: sqrt(sum_{k>N} |w|^{2k} / c_k), summed to machine
// precision (the series converges geometrically for |w| <= 0.95).
inline double kernel_tail_norm(cplx w, double alpha, int N = kernel_default_degree) {
    const double r2 = std::norm(w);
    if (!(r2 <= kernel_center_cap * kernel_center_cap))
        throw ConfigError("kernel center capped at |w| <= 0.95");
    double c = 1.0, pw = 1.0;
    for (int k = 1; k <= N; ++k) {
        c *= k / (k + alpha + 1.0);
        pw *= r2;
    }
    CompensatedSum tail;
    double term_c = c, term_pw = pw;
    for (int k = N + 1; k < N + 100000; ++k) {
        term_c *= k / (k + alpha + 1.0);
        term_pw *= r2;
        const double t = term_pw / term_c;
        tail.add(t);
        if (t < 1e-300 || t < 1e-18 * tail.value()) break;
    }
    return std::sqrt(tail.value());
}

// kappa_w = K_w * (1-|w|^2)^{(alpha+2)/2}; unit norm up to the reported tail.
inline TaylorFunction normalized_kernel(cplx w, double alpha, int N = kernel_default_degree) {
    TaylorFunction k = reproducing_kernel(w, alpha, N);
    k.scale(std::pow(1.0 - std::norm(w), 0.5 * (alpha + 2.0)));
    return k;
}

// phi_w(z) = (w - z)/(1 - conj(w) z); involution of the disk with phi_w(0)=w.
inline cplx mobius(cplx w, cplx z) {
    if (!(std::abs(w) < 1.0) || !(std::abs(z) < 1.0))
        throw ConfigError("mobius requires |w| < 1 and |z| < 1");
    return (w - z) / (1.0 - std::conj(w) * z);
}

}  // namespace bergmanlab::disk

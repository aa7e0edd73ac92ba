#pragma once

// Finite-rank positive operators on the weighted space, presented as convex
// mixtures of rank-one projectors A = sum_j p_j |f_j><f_j| with orthonormal
// components. Their covariant symbol u_A(z) = <kappa_z, A kappa_z> drives the
// same superlevel machinery as the scalar theory, and trace-norm distances to
// the kernel family are bounded through it.

#include <cmath>
#include <string>
#include <vector>

#include "bergmanlab/common.hpp"
#include "bergmanlab/disk_core.hpp"
#include "bergmanlab/quadrature.hpp"

namespace bergmanlab::ops {

inline constexpr int max_components = 16;
inline constexpr double gram_tolerance = 1e-8;

// <f_i, f_j> in A^2_alpha, row-major n x n.
inline std::vector<cplx> gram_matrix(const std::vector<disk::TaylorFunction>& fs,
                                     double alpha) {
    const size_t n = fs.size();
    std::vector<cplx> g(n * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            g[i * n + j] = disk::inner_product(fs[i], fs[j], alpha);
    return g;
}

// max_ij |<f_i, f_j> - delta_ij|
inline double gram_residual(const std::vector<disk::TaylorFunction>& fs, double alpha) {
    const size_t n = fs.size();
    const std::vector<cplx> g = gram_matrix(fs, alpha);
    double r = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            r = std::max(r, std::abs(g[i * n + j] - (i == j ? 1.0 : 0.0)));
    return r;
}

namespace detail {
// f - c g, padded to the longer degree.
inline disk::TaylorFunction axpy(const disk::TaylorFunction& f, cplx c,
                                 const disk::TaylorFunction& g) {
    const int n = std::max(f.degree(), g.degree());
    std::vector<cplx> a(n + 1);
    for (int k = 0; k <= n; ++k) a[k] = f.coeff(k) - c * g.coeff(k);
    return disk::TaylorFunction(std::move(a));
}

// Modified Gram–Schmidt under <,>_alpha. Throws if the family is (numerically)
// linearly dependent.
inline std::vector<disk::TaylorFunction> orthonormalize(
    std::vector<disk::TaylorFunction> fs, double alpha) {
    for (size_t j = 0; j < fs.size(); ++j) {
        const double before = std::sqrt(disk::norm_sq(fs[j], alpha));
        for (size_t i = 0; i < j; ++i)
            fs[j] = axpy(fs[j], disk::inner_product(fs[j], fs[i], alpha), fs[i]);
        const double after = std::sqrt(disk::norm_sq(fs[j], alpha));
        if (!(after > 1e-10 * std::max(before, 1e-30)))
            throw ConfigError("mixed state components are linearly dependent");
        fs[j].scale(1.0 / after);
    }
    return fs;
}
}  // namespace detail

// Validated mixture. Build through mixed_state(); `reorthonormalized` records
// that the supplied components failed the Gram check and were replaced by
// their Gram–Schmidt orthonormalization (a behaviour change the caller should
// surface, hence the flag rather than silence).
struct MixedState {
    double alpha = 0.0;
    std::vector<double> weights;
    std::vector<disk::TaylorFunction> components;
    bool reorthonormalized = false;
    double gram_residual_in = 0.0;

    size_t rank() const { return weights.size(); }
    bool pure() const { return weights.size() == 1; }
};

inline MixedState mixed_state(double alpha, std::vector<double> weights,
                              std::vector<disk::TaylorFunction> comps) {
    if (weights.empty() || weights.size() != comps.size())
        throw ConfigError("mixed_state: need matching, non-empty weights/components");
    if (weights.size() > (size_t)max_components)
        throw ConfigError("mixed_state: at most 16 components");
    CompensatedSum tot;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w))
            throw ConfigError("mixed_state: weights must be positive");
        tot.add(w);
    }
    if (std::abs(tot.value() - 1.0) > 1e-12)
        throw ConfigError("mixed_state: weights must sum to 1 (within 1e-12)");
    MixedState st;
    st.alpha = alpha;
    st.weights = std::move(weights);
    st.gram_residual_in = gram_residual(comps, alpha);
    if (st.gram_residual_in > gram_tolerance) {
        st.components = detail::orthonormalize(std::move(comps), alpha);
        st.reorthonormalized = true;
    } else {
        st.components = std::move(comps);
    }
    return st;
}

// u_A(z) = sum_j p_j |f_j(z)|^2 (1-|z|^2)^{alpha+2} = <kappa_z, A kappa_z>.
inline quad::ScalarField covariant_symbol(const MixedState& st) {
    const double dec = st.alpha + 2.0;
    double bound = 0.0;
    for (size_t j = 0; j < st.rank(); ++j) {
        const double l1 = st.components[j].coeff_l1();
        bound += st.weights[j] * l1 * l1;
    }
    const std::vector<double> w = st.weights;
    const std::vector<disk::TaylorFunction> fs = st.components;
    auto g = [w, fs, dec](cplx z) {
        const double env = std::pow(std::max(0.0, 1.0 - std::norm(z)), dec);
        double s = 0.0;
        for (size_t j = 0; j < w.size(); ++j)
            s += w[j] * std::norm(fs[j].eval_unchecked(z));
        return s * env;
    };
    return quad::ScalarField(std::move(g), dec, std::max(bound, 1e-300), true);
}

// ---------------------------------------------------------------------------
// Curvature check on log u: for any covariant symbol,
//   (1-|z|^2)^2 lap(log u)(z) + 4 (alpha+2) >= 0
// away from zeros of u. Five-point Euclidean Laplacian at step h; points with
// u below a relative floor are skipped (logs blow up, and zeros only push the
// Laplacian up anyway); grid points that dip below -tol are retried with a
// Richardson pass (h and h/2) before being counted as violations.
struct LogCurvatureReport {
    int checked = 0, skipped = 0, flagged = 0;
    double min_value = 0.0;  // min over grid of the invariant expression
    cplx worst_z{0, 0};
    double h = 0.0, tol = 0.0;
    bool pass = false;
};

inline LogCurvatureReport check_log_curvature(const quad::ScalarField& u, double alpha,
                                              double h = 1e-3, double tol = 1e-2,
                                              int n_r = 12, int n_th = 16,
                                              double r_max = 0.8) {
    if (!(h > 0.0) || !(tol > 0.0)) throw ConfigError("check_log_curvature: h, tol > 0");
    LogCurvatureReport rep;
    rep.h = h;
    rep.tol = tol;
    rep.min_value = 1e300;
    const double floor = 1e-12 * u.bound;
    auto lap_log = [&](cplx z, double step, bool& ok) {
        const cplx zs[5] = {z, z + cplx(step, 0), z - cplx(step, 0), z + cplx(0, step),
                            z - cplx(0, step)};
        double L[5];
        for (int i = 0; i < 5; ++i) {
            const double v = u(zs[i]);
            if (!(v > floor)) {
                ok = false;
                return 0.0;
            }
            L[i] = std::log(v);
        }
        ok = true;
        return (L[1] + L[2] + L[3] + L[4] - 4.0 * L[0]) / (step * step);
    };
    for (int ir = 0; ir < n_r; ++ir) {
        const double r = r_max * (ir + 0.5) / n_r;
        for (int it = 0; it < n_th; ++it) {
            const double th = 2.0 * pi * (it + (ir % 2) * 0.5) / n_th;
            const cplx z(r * std::cos(th), r * std::sin(th));
            bool ok = false;
            double lap = lap_log(z, h, ok);
            if (!ok) {
                ++rep.skipped;
                continue;
            }
            const double w2 = 1.0 - std::norm(z);
            double val = w2 * w2 * lap + 4.0 * (alpha + 2.0);
            if (val < -tol) {
                // Retry with Richardson h -> h/2 before flagging.
                bool ok2 = false;
                const double lap2 = lap_log(z, 0.5 * h, ok2);
                if (ok2) {
                    const double extrap = (4.0 * lap2 - lap) / 3.0;
                    val = w2 * w2 * extrap + 4.0 * (alpha + 2.0);
                }
                if (val < -tol) ++rep.flagged;
            }
            ++rep.checked;
            if (val < rep.min_value) {
                rep.min_value = val;
                rep.worst_z = z;
            }
        }
    }
    rep.pass = rep.flagged == 0;
    return rep;
}

// ---------------------------------------------------------------------------
// Trace-norm distance between rank-one projectors of unit vectors:
//   || |f><f| - |g><g| ||_1 = 2 sqrt(1 - |<f,g>|^2).
// Inputs must already be normalised; this is an operator identity, not a
// place to hide a silent rescale.
inline double rank_one_distance(const disk::TaylorFunction& f,
                                const disk::TaylorFunction& g, double alpha) {
    if (std::abs(disk::norm_sq(f, alpha) - 1.0) > 1e-10 ||
        std::abs(disk::norm_sq(g, alpha) - 1.0) > 1e-10)
        throw ConfigError("rank_one_distance: vectors must be unit norm");
    const double ov = std::min(1.0, std::norm(disk::inner_product(f, g, alpha)));
    return 2.0 * std::sqrt(std::max(0.0, 1.0 - ov));
}

// ---------------------------------------------------------------------------
// Upper bound on min_w ||A - |kappa_w><kappa_w| ||_1, scanned over a polar
// grid joined with the argmax of the symbol. Two bounds per candidate w:
//   mixture:  sum_j p_j 2 sqrt(1 - u_j(w))   (triangle inequality)
//   fidelity: 2 sqrt(1 - u_A(w))             (<kappa_w, A kappa_w> = u_A(w))
// The minimum cannot exceed 2 sqrt(1 - T) + eps since the argmax candidate
// realises u_A(w) = T; `pass` records that sanity condition.
struct KernelBoundReport {
    double T = 0.0;
    double d_ub = 0.0;
    cplx w_best{0, 0};
    double mixture_at_best = 0.0, fidelity_at_best = 0.0;
    double limit = 0.0;  // 2 sqrt(1 - T)
    bool pass = false;
};

inline KernelBoundReport kernel_distance_bound(const MixedState& st, int n_r = 10,
                                               int n_th = 24, double tol = 1e-8) {
    const quad::ScalarField u = covariant_symbol(st);
    const quad::SupInfo sup = quad::field_sup(u);
    KernelBoundReport rep;
    rep.T = std::min(sup.T, 1.0);
    rep.limit = 2.0 * std::sqrt(std::max(0.0, 1.0 - rep.T));

    const double dec = st.alpha + 2.0;
    auto at = [&](cplx w) {
        const double env = std::pow(std::max(0.0, 1.0 - std::norm(w)), dec);
        double mix = 0.0, tot = 0.0;
        for (size_t j = 0; j < st.rank(); ++j) {
            const double uj =
                std::min(1.0, std::norm(st.components[j].eval_unchecked(w)) * env);
            tot += st.weights[j] * uj;
            mix += st.weights[j] * 2.0 * std::sqrt(std::max(0.0, 1.0 - uj));
        }
        const double fid = 2.0 * std::sqrt(std::max(0.0, 1.0 - std::min(1.0, tot)));
        return std::make_pair(mix, fid);
    };

    std::vector<cplx> cand;
    cand.push_back(sup.argmax);
    cand.emplace_back(0.0, 0.0);
    for (int ir = 0; ir < n_r; ++ir) {
        const double r = 0.9 * (ir + 1.0) / n_r;
        for (int it = 0; it < n_th; ++it) {
            const double th = 2.0 * pi * it / n_th;
            cand.emplace_back(r * std::cos(th), r * std::sin(th));
        }
    }
    rep.d_ub = 1e300;
    for (cplx w : cand) {
        const auto [mix, fid] = at(w);
        const double d = std::min(mix, fid);
        if (d < rep.d_ub) {
            rep.d_ub = d;
            rep.w_best = w;
            rep.mixture_at_best = mix;
            rep.fidelity_at_best = fid;
        }
    }
    rep.pass = rep.d_ub <= rep.limit + tol;
    return rep;
}

}  // namespace bergmanlab::ops

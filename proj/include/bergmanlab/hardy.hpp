#pragma once

// Boundary-limit (alpha = -1) theory. The field u = |f|^p (1-|z|^2) of a
// unit-norm f decays only one power at the rim, so total integrals like
// int u dmu diverge; everything is phrased through superlevel sets, where
// the extremal profile v(z) = 1-|z|^2 turns each bound into an identity:
//   int_{u>t} u dmu <= pi log(1 + rho(t)/pi)      (Phi <= 0)
//   rho(t) <= pi (1/t - 1)
// plus the functional comparison against int G(v) dmu = pi int_0^1 G(s)/s^2 ds
// strengthened by a deficit floor proportional to 1 - T.

#include <cmath>
#include <vector>

#include "bergmanlab/closed_forms.hpp"
#include "bergmanlab/common.hpp"
#include "bergmanlab/disk_core.hpp"
#include "bergmanlab/functionals.hpp"
#include "bergmanlab/quadrature.hpp"
#include "bergmanlab/stability.hpp"

namespace bergmanlab::hardy {

// u for f scaled to unit norm in the (alpha, p) space; alpha defaults to the
// boundary limit.
inline quad::ScalarField modulus_field(const disk::TaylorFunction& f, double p = 2.0,
                                       double alpha = -1.0) {
    const disk::SpaceParams sp(alpha, p);
    disk::TaylorFunction fn = f;
    fn.scale(1.0 / func::bergman_norm(f, sp));
    return func::husimi(fn, sp);
}

// Largest superlevel mass a set of invariant measure rho can hold:
//   (pi/(alpha+1)) (1 - (1 + rho/pi)^{-(alpha+1)}),  -> pi log(1 + rho/pi)
// in the boundary limit.
inline double mass_bound(double rho, double alpha) {
    if (!(rho >= 0.0)) throw ConfigError("mass_bound: rho must be >= 0");
    const double l = std::log1p(rho / pi);
    if (std::abs(alpha + 1.0) < 1e-9) return pi * l;
    return pi / (alpha + 1.0) * (-std::expm1(-(alpha + 1.0) * l));
}

// ---------------------------------------------------------------------------
// Phi(t) = int_{u>t} u dmu - mass_bound(rho(t)); nonpositive for every t, and
// identically zero when u is the extremal profile.
struct PhiSample {
    double t = 0.0;
    double mass = 0.0, mass_err = 0.0;
    double rho = 0.0, rho_err = 0.0;
    double phi = 0.0, phi_err = 0.0;
};

struct PhiReport {
    double alpha = -1.0, p = 2.0;
    double T = 0.0;
    std::vector<PhiSample> samples;
    double max_phi = -1e300;
    double tolerance = 0.0;
    bool pass = false;
};

inline PhiReport phi_profile(const disk::TaylorFunction& f, std::vector<double> ts,
                             double p = 2.0, double alpha = -1.0, double tol = 1e-6) {
    if (ts.empty()) throw ConfigError("phi_profile: no levels given");
    for (double t : ts)
        if (!(t > 0.0)) throw ConfigError("phi_profile: levels must be positive");
    const quad::ScalarField u = modulus_field(f, p, alpha);
    const quad::SupInfo sup = quad::field_sup(u);
    PhiReport rep;
    rep.alpha = alpha;
    rep.p = p;
    rep.T = std::min(sup.T, 1.0);
    rep.tolerance = tol;

    double t_floor = ts[0];
    for (double t : ts) t_floor = std::min(t_floor, t);
    quad::RayTable tab(u, 512, 512, t_floor);
    long long evals = tab.build_evals();

    for (double t : ts) {
        PhiSample s;
        s.t = t;
        if (t < rep.T) {
            const quad::QuadratureReport m = quad::levelset_integral(u, t);
            double bar = 0.0;
            s.rho = quad::detail::rho_from_rays(tab, t, 1e-13, evals, bar);
            s.rho_err = bar;
            s.mass = m.value;
            s.mass_err = m.error;
            s.phi = s.mass - mass_bound(s.rho, alpha);
            // d(mass_bound)/d(rho) <= 1 for all rho >= 0.
            s.phi_err = s.mass_err + s.rho_err;
        }
        rep.samples.push_back(s);
        rep.max_phi = std::max(rep.max_phi, s.phi);
    }
    rep.pass = rep.max_phi <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// int G(v) dmu for the boundary extremal v = 1-|z|^2, in closed form. Hinges
// at 0 (and custom shapes with G'(0) > 0) make the integral diverge and are
// rejected.
inline double extremal_boundary_functional(const func::ConvexG& G) {
    using Kind = func::ConvexG::Kind;
    if (G.kind() == Kind::Power) return pi / (G.exponent() - 1.0);
    if (G.kind() == Kind::PiecewiseLinear) {
        double s = 0.0;
        for (auto [ti, mi] : G.hinges()) {
            if (ti <= 0.0)
                throw ConfigError("boundary functional diverges for a hinge at 0");
            s += mi * forms::K_hardy(ti);
        }
        return s;
    }
    throw ConfigError("boundary functional needs a power or hinge shape");
}

// ---------------------------------------------------------------------------
// Functional comparison with a deficit floor. Two regimes, split at T0:
// near-extremal T uses the distribution-bound route on (t1, T) with
// t1 = T (1 - t0^3/C); small T uses a fixed hinge-window floor.
struct Theorem3Report {
    double C = 4.0, t0 = 0.1, T0 = 0.9;
    double T = 0.0;
    double lhs = 0.0, lhs_err = 0.0;
    double rhs = 0.0;
    double floor = 0.0;
    double margin = 0.0;  // rhs - lhs - floor
    double tolerance = 0.0;
    bool large_T_branch = false;
    bool pass = false;
};

inline Theorem3Report verify_theorem3(const disk::TaylorFunction& f,
                                      const func::ConvexG& G, double C = 4.0,
                                      double t0 = 0.1, double T0 = 0.9,
                                      double tol = 1e-7) {
    if (!(C > 0.0) || !(t0 > 0.0) || !(t0 < 1.0) || !(T0 > 0.0) || !(T0 < 1.0))
        throw ConfigError("verify_theorem3: need C > 0 and t0, T0 in (0,1)");
    Theorem3Report rep;
    rep.C = C;
    rep.t0 = t0;
    rep.T0 = T0;
    rep.rhs = extremal_boundary_functional(G);

    const quad::ScalarField u = modulus_field(f, 2.0);
    const quad::SupInfo sup = quad::field_sup(u);
    rep.T = std::min(sup.T, 1.0);

    const quad::QuadratureReport lhs = func::convex_functional(u, G, 1e-10);
    rep.lhs = lhs.value;
    rep.lhs_err = lhs.error;

    if (rep.T >= T0) {
        rep.large_T_branch = true;
        const double T = rep.T;
        const double t1 = T * (1.0 - std::pow(t0, 3.0) / C);
        const double slope = C / (std::pow(t0, 3.0) * T);
        long long evals = 0;
        auto integrand = [&](double tau) {
            return G.d1(tau) / tau * (1.0 - slope * (T - tau));
        };
        auto [val, err] =
            quad::detail::adaptive_gauss(integrand, t1, T, 1e-13, 64, evals);
        rep.floor = pi * (1.0 - T) * val;
        rep.tolerance = lhs.error + pi * (1.0 - T) * err + tol;
    } else {
        const double mid = 0.5 * (1.0 + T0);
        rep.floor = pi * (1.0 - T0) / (1.0 + T0) * (G(mid) - G(T0)) * (1.0 - rep.T);
        rep.tolerance = lhs.error + tol;
    }
    rep.margin = rep.rhs - rep.lhs - rep.floor;
    rep.pass = rep.margin >= -rep.tolerance;
    return rep;
}

// ---------------------------------------------------------------------------
// Curvature-weighted deficit in the boundary limit:
//   deficit = (c' (1-T) / (C pi)) int_0^T G''(t) / ((1 + log(1/t)) (t - 1 + log(1/t))) dt,
// claimed <= int G(v) dmu - int G(u) dmu. The weight is 1/(M(rho0) K) with
// both factors in their boundary forms.
struct RemarkReport {
    double C = 1.0;
    double T = 0.0;
    double lhs = 0.0, lhs_err = 0.0;
    double rhs = 0.0;
    double deficit = 0.0;
    double margin = 0.0;  // rhs - lhs - deficit
    double tolerance = 0.0;
    bool equality_case = false;
    bool pass = false;
};

inline RemarkReport hardy_remark_bound(const disk::TaylorFunction& f,
                                       const func::ConvexG& G, double C = 1.0,
                                       double tol = 1e-7) {
    if (!(C > 0.0)) throw ConfigError("hardy_remark_bound: C must be positive");
    RemarkReport rep;
    rep.C = C;
    rep.rhs = extremal_boundary_functional(G);

    const quad::ScalarField u = modulus_field(f, 2.0);
    const quad::SupInfo sup = quad::field_sup(u);
    rep.T = std::min(sup.T, 1.0);

    const quad::QuadratureReport lhs = func::convex_functional(u, G, 1e-10);
    rep.lhs = lhs.value;
    rep.lhs_err = lhs.error;

    if (rep.T >= 1.0 - 1e-9) {
        rep.equality_case = true;
    } else {
        auto W = [](double t) {
            const double L = std::log(1.0 / t);
            return 1.0 / ((1.0 + L) * (t - 1.0 + L));
        };
        rep.deficit = stab::c_prime * (1.0 - rep.T) / (C * pi) *
                      G.curvature_integral(W, std::min(rep.T, 1.0 - 1e-12));
    }
    rep.margin = rep.rhs - rep.lhs - rep.deficit;
    rep.tolerance = lhs.error + tol;
    rep.pass = rep.margin >= -rep.tolerance;
    return rep;
}

// Distribution bound in the boundary limit: same shape as the weighted-space
// bound with the exponent 1/(alpha+2) collapsing to 1, so it reuses that
// checker at alpha = -1:
//   rho(t) <= pi ((1 + C t0^{-3} (1-T)) / T) (T/t - 1).
inline stab::Lemma5Report hardy_distribution_bound(const quad::ScalarField& u, double t0,
                                                   double C, int n_grid = 24) {
    return stab::check_lemma5_bound(u, -1.0, t0, C, n_grid);
}

}  // namespace bergmanlab::hardy

#pragma once

// Convex functionals of the normalised modulus field and the norms they are
// built from. The field of interest for f in the weighted space is
//   u(z) = |f(z)|^p (1-|z|^2)^{alpha+2},
// integrated against the invariant measure dmu = dA/(1-|z|^2)^2.
//
// Every functional here can be evaluated by two genuinely different routes
// (direct 2-D quadrature of G(u), and the distribution-side layer cake); the
// tests play them against each other.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "bergmanlab/closed_forms.hpp"
#include "bergmanlab/common.hpp"
#include "bergmanlab/disk_core.hpp"
#include "bergmanlab/gauss.hpp"
#include "bergmanlab/quadrature.hpp"

namespace bergmanlab::func {

// Convex G on [0, infinity) with G(0) = 0. Three shapes: pure powers t^r
// (r > 1), non-negative combinations of hinges (t - t_i)_+, and custom
// (caller supplies G, G', G'' and vouches for convexity).
class ConvexG {
  public:
    enum class Kind { Power, PiecewiseLinear, Custom };

    static ConvexG power(double r) {
        if (!(r > 1.0)) throw ConfigError("ConvexG::power: need r > 1");
        ConvexG g;
        g.kind_ = Kind::Power;
        g.r_ = r;
        return g;
    }

    // G(t) = sum_i m_i (t - t_i)_+ with t_i >= 0, m_i > 0.
    static ConvexG piecewise_linear(std::vector<std::pair<double, double>> hinges) {
        if (hinges.empty()) throw ConfigError("ConvexG: no hinges");
        for (auto [t, m] : hinges)
            if (!(t >= 0.0) || !(m > 0.0))
                throw ConfigError("ConvexG: hinges need t >= 0, slope > 0");
        ConvexG g;
        g.kind_ = Kind::PiecewiseLinear;
        g.hinges_ = std::move(hinges);
        return g;
    }

    static ConvexG custom(std::function<double(double)> g0,
                          std::function<double(double)> g1,
                          std::function<double(double)> g2, bool monotone = true) {
        ConvexG g;
        g.kind_ = Kind::Custom;
        g.g0_ = std::move(g0);
        g.g1_ = std::move(g1);
        g.g2_ = std::move(g2);
        g.monotone_ = monotone;
        return g;
    }

    Kind kind() const { return kind_; }
    double exponent() const { return r_; }
    const std::vector<std::pair<double, double>>& hinges() const { return hinges_; }
    bool monotone() const { return monotone_; }

    double operator()(double t) const {
        switch (kind_) {
            case Kind::Power: return std::pow(t, r_);
            case Kind::PiecewiseLinear: {
                double s = 0;
                for (auto [ti, mi] : hinges_)
                    if (t > ti) s += mi * (t - ti);
                return s;
            }
            default: return g0_(t);
        }
    }
    double d1(double t) const {
        switch (kind_) {
            case Kind::Power: return r_ * std::pow(t, r_ - 1.0);
            case Kind::PiecewiseLinear: {
                double s = 0;
                for (auto [ti, mi] : hinges_)
                    if (t > ti) s += mi;
                return s;
            }
            default: return g1_(t);
        }
    }
    // Pointwise second derivative; identically 0 between hinges for the
    // piecewise shape (whose curvature lives in atoms — use
    // curvature_integral for anything that integrates G'').
    double d2(double t) const {
        switch (kind_) {
            case Kind::Power: return r_ * (r_ - 1.0) * std::pow(t, r_ - 2.0);
            case Kind::PiecewiseLinear: return 0.0;
            default: return g2_(t);
        }
    }

    // integral_0^T G''(t) W(t) dt, with hinge atoms handled exactly and the
    // t^{r-2} endpoint singularity (1 < r < 2) flattened by substitution.
    double curvature_integral(const std::function<double(double)>& W, double T) const {
        if (!(T > 0.0)) return 0.0;
        if (kind_ == Kind::PiecewiseLinear) {
            double s = 0;
            for (auto [ti, mi] : hinges_)
                if (ti < T) s += mi * W(ti);
            return s;
        }
        long long evals = 0;
        if (kind_ == Kind::Power) {
            const double kap = std::max(1.0, 2.0 / (r_ - 1.0));
            auto h = [&](double v) {
                const double t = T * std::pow(v, kap);
                return r_ * (r_ - 1.0) * std::pow(t, r_ - 2.0) * W(t) * kap * T *
                       std::pow(v, kap - 1.0);
            };
            auto [val, err] = quad::detail::adaptive_gauss(h, 0.0, 1.0, 1e-12, 64, evals);
            (void)err;
            return val;
        }
        auto h = [&](double t) { return g2_(t) * W(t); };
        auto [val, err] = quad::detail::adaptive_gauss(h, 0.0, T, 1e-12, 64, evals);
        (void)err;
        return val;
    }

  private:
    Kind kind_ = Kind::Power;
    double r_ = 2.0;
    std::vector<std::pair<double, double>> hinges_;
    std::function<double(double)> g0_, g1_, g2_;
    bool monotone_ = true;
};

// ---------------------------------------------------------------------------
// Norm of f in the space (alpha, p):
//   alpha > -1:  ((alpha+1) int_0^1 mean_theta(|f|^p)(y) (1-y)^alpha dy)^{1/p}
//   alpha = -1:  sup_r circle mean — realised as the r -> 1 limit, i.e. the
//                circle mean of |f|^p on |z| = 1 (f is a polynomial here).
// Gauss–Jacobi in y x trapezoid in theta; node counts are chosen so the rule
// is exact when p is an even integer.
inline double bergman_norm(const disk::TaylorFunction& f, const disk::SpaceParams& sp,
                           int n_rad = 0, int m_theta = 0) {
    const int deg = f.degree();
    const double p = sp.p;
    int M = m_theta > 0 ? m_theta
                        : std::max(64, 2 * (int)std::ceil((p * deg + 9.0) / 2.0));
    auto circle_mean_pow = [&](double r) {
        double s = 0.0;
        for (int j = 0; j < M; ++j) {
            const double th = 2.0 * pi * j / M;
            const cplx z(r * std::cos(th), r * std::sin(th));
            s += std::pow(std::norm(f.eval_unchecked(z)), 0.5 * p);
        }
        return s / M;
    };
    if (sp.boundary()) return std::pow(circle_mean_pow(1.0), 1.0 / p);

    const int n = n_rad > 0 ? n_rad
                            : std::max(24, (int)std::ceil(p * deg / 4.0) + 6);
    const Quad1D& q = jacobi01(n, sp.alpha);
    CompensatedSum acc;
    for (int i = 0; i < (int)q.size(); ++i)
        acc.add(q.w[i] * circle_mean_pow(std::sqrt(q.x[i])));
    const double integral = (sp.alpha + 1.0) * acc.value();
    if (!(integral >= 0.0) || !std::isfinite(integral))
        throw NumericError("bergman_norm: quadrature produced a non-finite value");
    return std::pow(integral, 1.0 / p);
}

// The modulus field u(z) = |f(z)|^p (1-|z|^2)^{alpha+2} as a ScalarField with
// its rim envelope: u <= (sum |a_k|)^p (1-y)^{alpha+2}.
inline quad::ScalarField husimi(const disk::TaylorFunction& f,
                                const disk::SpaceParams& sp) {
    const double pw = sp.p, dec = sp.alpha + 2.0;
    const double l1 = f.coeff_l1();
    if (!(l1 > 0.0)) throw ConfigError("husimi: zero function");
    auto g = [f, pw, dec](cplx z) {
        const double m = std::norm(f.eval_unchecked(z));
        const double w = std::max(0.0, 1.0 - std::norm(z));
        return std::pow(m, 0.5 * pw) * std::pow(w, dec);
    };
    return quad::ScalarField(std::move(g), dec, std::pow(l1, pw), true);
}

// integral of G(u) dmu by the route that matches the shape of G: hinges go
// through the kink-aware deficit integrals; smooth G rides the composed field
// directly through the smooth integrator.
inline quad::QuadratureReport convex_functional(const quad::ScalarField& u,
                                                const ConvexG& G, double tol = 1e-9) {
    using quad::QuadratureReport;
    if (G.kind() == ConvexG::Kind::PiecewiseLinear) {
        QuadratureReport total;
        for (auto [ti, mi] : G.hinges()) {
            const QuadratureReport r =
                ti == 0.0 ? quad::integrate_hyperbolic(u, tol / G.hinges().size())
                          : quad::deficit_integral(u, ti);
            total.value += mi * r.value;
            total.error += mi * r.error;
            total.evals += r.evals;
            total.converged = total.converged && r.converged;
        }
        return total;
    }
    quad::ScalarField g;
    if (G.kind() == ConvexG::Kind::Power) {
        const double r = G.exponent();
        const quad::ScalarField& base = u;
        g = quad::ScalarField(
            [base, r](cplx z) { return std::pow(base.eval(z), r); },
            r * u.decay, std::pow(u.bound, r), u.analytic_modulus);
    } else {
        if (!G.monotone())
            throw ConfigError("convex_functional: custom G must be non-decreasing");
        const quad::ScalarField& base = u;
        const ConvexG gg = G;
        // Convexity with G(0)=0 gives G(x) <= x G'(B) for x <= B.
        g = quad::ScalarField([base, gg](cplx z) { return gg(base.eval(z)); },
                              u.decay, std::max(1e-300, G.d1(u.bound) * u.bound),
                              u.analytic_modulus);
    }
    return quad::integrate_hyperbolic(g, tol);
}

// Same integral by the distribution side: int G(u) dmu = int_0^T G'(t) rho(t) dt,
// with rho measured on rays and the t -> 0 blow-up flattened by t = T v^kappa.
// Independent of convex_functional's route; used as its oracle.
inline quad::QuadratureReport layer_cake_functional(const quad::ScalarField& u,
                                                    const ConvexG& G, int rays = 256,
                                                    int scan = 512) {
    if (G.kind() == ConvexG::Kind::PiecewiseLinear)
        throw ConfigError("layer_cake_functional: use convex_functional for hinges");
    const quad::SupInfo s = quad::field_sup(u);
    const double T = s.T;
    if (!(T > 0.0)) return {};
    const double r_exp = G.kind() == ConvexG::Kind::Power ? G.exponent() : 2.0;
    const double kap = std::max(2.0, 2.0 / (r_exp - 1.0));
    const double t_floor = T * std::pow(1e-3, kap);  // below the lowest node
    quad::RayTable tab(u, rays, scan, t_floor);
    long long evals = tab.build_evals();
    double bar_sum = 0.0;

    auto rho_at = [&](double t) {
        double bar = 0.0;
        const double v = t >= T ? 0.0
                                : quad::detail::rho_from_rays(tab, t, 1e-13, evals, bar);
        bar_sum += bar;
        return std::make_pair(v, bar);
    };

    const Quad1D& g16 = legendre01(16);
    const Quad1D& g8 = legendre01(8);
    const int panels = 8;
    double v16 = 0.0, v8 = 0.0, bar_w = 0.0;
    for (int pnl = 0; pnl < panels; ++pnl) {
        const double a = (double)pnl / panels, b = (pnl + 1.0) / panels;
        auto accum = [&](const Quad1D& q, double& out) {
            for (int i = 0; i < (int)q.size(); ++i) {
                const double v = a + (b - a) * q.x[i];
                const double t = T * std::pow(v, kap);
                const auto [rho, bar] = rho_at(t);
                const double jac = kap * T * std::pow(v, kap - 1.0);
                out += (b - a) * q.w[i] * G.d1(t) * rho * jac;
                bar_w += (b - a) * q.w[i] * G.d1(t) * bar * jac;
            }
        };
        accum(g16, v16);
        accum(g8, v8);
    }
    quad::QuadratureReport rep;
    rep.value = v16;
    rep.error = std::abs(v16 - v8) + 0.5 * bar_w;  // bar_w double-counts the two rules
    rep.evals = evals;
    rep.converged = true;
    return rep;
}

// Share of the p-norm mass captured by a pseudo-hyperbolic disk of invariant
// measure s centred (hyperbolically) at `center`: Omega = phi_center(B_r(0))
// with r^2 = s/(s + pi). For f scaled to unit norm,
//   R = ((alpha+1)/pi) int_{B_r(0)} u(phi_center(zeta)) dmu(zeta)
//     <= 1 - (1 + s/pi)^{-(alpha+1)},
// with equality when u is the extremal profile centred at `center`.
struct ConcentrationReport {
    double alpha = 0.0, p = 2.0;
    double s = 0.0;  // invariant measure of the disk
    cplx center{0.0, 0.0};
    double radius = 0.0;  // Euclidean radius of the pre-image disk
    double ratio = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // bound - ratio
    double error = 0.0;
    long long evals = 0;
};

inline ConcentrationReport concentration_ratio(const disk::TaylorFunction& f,
                                               double alpha, cplx center, double s,
                                               double p = 2.0) {
    if (!(s > 0.0) || !std::isfinite(s))
        throw ConfigError("concentration_ratio: need finite s > 0");
    if (!(alpha > -1.0)) throw ConfigError("concentration_ratio: needs alpha > -1");
    if (!(std::abs(center) < 1.0))
        throw ConfigError("concentration_ratio: center must lie in the open disk");
    const disk::SpaceParams sp(alpha, p);
    disk::TaylorFunction fn = f;
    fn.scale(1.0 / bergman_norm(f, sp));
    const quad::ScalarField u = husimi(fn, sp);

    const double r2 = s / (s + pi);
    ConcentrationReport rep;
    rep.alpha = alpha;
    rep.p = p;
    rep.s = s;
    rep.center = center;
    rep.radius = std::sqrt(r2);
    rep.bound = -std::expm1(-(alpha + 1.0) * std::log1p(s / pi));

    long long evals = 0;
    auto ring = [&](double y, int M) {  // theta-mean of u(phi_center(sqrt(y) e^{i th}))
        const double r = std::sqrt(y);
        CompensatedSum acc;
        for (int j = 0; j < M; ++j) {
            const double th = 2.0 * pi * j / M;
            const cplx zeta(r * std::cos(th), r * std::sin(th));
            acc.add(u(disk::mobius(center, zeta)));
        }
        evals += M;
        return acc.value() / M;
    };
    auto mass_with = [&](int M) {
        long long e2 = 0;
        auto h = [&](double y) { return ring(y, M) / ((1.0 - y) * (1.0 - y)); };
        auto [val, err] = quad::detail::adaptive_gauss(h, 0.0, r2, 1e-11, 64, e2);
        return std::make_pair(pi * val, pi * err);
    };
    const auto [m_hi, e_hi] = mass_with(256);
    const auto [m_lo, e_lo] = mass_with(128);
    (void)e_lo;
    rep.ratio = (alpha + 1.0) / pi * m_hi;
    rep.error = (alpha + 1.0) / pi * (e_hi + std::abs(m_hi - m_lo)) + 1e-14;
    rep.margin = rep.bound - rep.ratio;
    rep.evals = evals;
    return rep;
}

// Contractive inclusion into the slower-growing scale: q >= p and
// beta = q (alpha+2)/p - 2 keep the norms comparable with constant 1.
struct EmbeddingReport {
    double p, alpha, q, beta;
    double lhs, rhs, margin;  // lhs = norm in (beta, q), rhs = norm in (alpha, p)
};

inline EmbeddingReport check_embedding(const disk::TaylorFunction& f, double p,
                                       double alpha, double q) {
    if (!(q >= p)) throw ConfigError("check_embedding: need q >= p");
    const double beta = q * (alpha + 2.0) / p - 2.0;
    EmbeddingReport rep{};
    rep.p = p;
    rep.alpha = alpha;
    rep.q = q;
    rep.beta = beta;
    rep.lhs = bergman_norm(f, disk::SpaceParams(beta, q));
    rep.rhs = bergman_norm(f, disk::SpaceParams(alpha, p));
    rep.margin = rep.rhs - rep.lhs;
    return rep;
}

}  // namespace bergmanlab::func

#pragma once

// Numerical integration over the unit disk against the invariant measure
// dmu = dA(z) / (1-|z|^2)^2, specialised to fields u(z) >= 0 that satisfy a
// pointwise power bound u <= bound * (1-|z|^2)^decay.
//
// Coordinates: y = |z|^2 in [0,1), theta in [0,2pi); dmu = (1/2) dy dtheta / (1-y)^2.
//
// Three layers:
//   * integrate_hyperbolic  — smooth integrands, adaptive radial panels x
//     periodic trapezoid, explicit rim-tail bound.
//   * deficit/levelset/min integrals — integrands with a kink on {u = t};
//     each theta-ray is cut at the level crossings first, then every arc is
//     integrated by adaptive Gauss panels, so no panel ever spans the kink.
//   * superlevel_measure    — mu({u > t}) by dyadic cell subdivision with
//     exact interior measure; cells still straddling at the last depth are
//     resolved by a local graph model of the boundary (bisected edge
//     crossings + parabolic cut), and anything unresolvable is bounded into
//     the error bar.
//
// All reports carry an honest error estimate and an evaluation count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "bergmanlab/closed_forms.hpp"
#include "bergmanlab/common.hpp"
#include "bergmanlab/gauss.hpp"

namespace bergmanlab::quad {

struct SupInfo {
    double T = 0.0;       // sup of the field over the disk
    cplx argmax{0, 0};    // where it is attained
    bool rim_warning = false;  // argmax suspiciously close to the search rim
};

struct ScalarField {
    std::function<double(cplx)> eval;
    double decay = 0.0;   // u(z) <= bound * (1-|z|^2)^decay
    double bound = 1.0;
    bool analytic_modulus = true;  // |.|^p of an analytic function times a radial weight

    std::shared_ptr<std::optional<SupInfo>> sup_cache =
        std::make_shared<std::optional<SupInfo>>();

    ScalarField() = default;
    ScalarField(std::function<double(cplx)> f, double decay_, double bound_,
                bool analytic = true)
        : eval(std::move(f)), decay(decay_), bound(bound_), analytic_modulus(analytic) {
        if (!(decay_ >= 0.0) || !(bound_ > 0.0) || !std::isfinite(bound_))
            throw ConfigError("ScalarField: need decay >= 0 and finite bound > 0");
    }

    double operator()(cplx z) const { return eval(z); }
    // y = |z|^2 parametrisation used by every routine below.
    double at_polar(double y, double theta) const {
        const double r = std::sqrt(std::max(0.0, y));
        return eval(cplx(r * std::cos(theta), r * std::sin(theta)));
    }
};

struct QuadratureReport {
    double value = 0.0;
    double error = 0.0;
    long long evals = 0;
    bool converged = true;
};

namespace detail {

// Hyperbolic measure of a y-interval at fixed angular width dtheta.
inline double slab_mu(double y_lo, double y_hi, double dtheta) {
    return 0.5 * dtheta * (1.0 / (1.0 - y_hi) - 1.0 / (1.0 - y_lo));
}

// Golden-section maximisation of g on [a,b] down to coordinate width xtol.
template <class G>
std::pair<double, double> golden_max(const G& g, double a, double b, double xtol,
                                     long long& evals) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = g(x1), f2 = g(x2);
    evals += 2;
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1);
        }
        ++evals;
    }
    return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

// Sign convention for level sets: "inside" means u > t strictly.
inline bool above(double u, double t) { return u > t; }

// Root of (u - t) along a 1-D slice given a sign-changing bracket.
template <class G>
double bisect_root(const G& g, double lo, double hi, bool lo_above, double xtol,
                   long long& evals) {
    for (int it = 0; it < 200 && hi - lo > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool ma = g(mid);
        ++evals;
        if (ma == lo_above)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Adaptive Gauss integration of a smooth function on [lo,hi]: per-panel
// GL8/GL16 comparison, largest-error panel split first.
template <class F>
std::pair<double, double> adaptive_gauss(const F& f, double lo, double hi, double tol,
                                         int max_panels, long long& evals) {
    struct Panel {
        double a, b, v16, err;
    };
    const Quad1D& g8 = legendre01(8);
    const Quad1D& g16 = legendre01(16);
    auto make = [&](double a, double b) {
        double v8 = 0, v16 = 0;
        for (int i = 0; i < 8; ++i) v8 += g8.w[i] * f(a + (b - a) * g8.x[i]);
        for (int i = 0; i < 16; ++i) v16 += g16.w[i] * f(a + (b - a) * g16.x[i]);
        evals += 24;
        v8 *= (b - a);
        v16 *= (b - a);
        return Panel{a, b, v16, std::abs(v16 - v8)};
    };
    std::vector<Panel> panels{make(lo, hi)};
    auto total_err = [&] {
        double e = 0;
        for (const auto& p : panels) e += p.err;
        return e;
    };
    while ((int)panels.size() < max_panels && total_err() > tol) {
        size_t worst = 0;
        for (size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err > panels[worst].err) worst = i;
        const Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        panels[worst] = make(p.a, mid);
        panels.push_back(make(mid, p.b));
    }
    double v = 0, e = 0;
    for (const auto& p : panels) {
        v += p.v16;
        e += p.err;
    }
    return {v, e};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Supremum of a field: coarse polar grid, then coordinate-wise golden-section
// refinement from the best few local maxima. The origin is always a candidate
// (theta degenerates there).
inline SupInfo field_sup(const ScalarField& u, int n_y = 128, int n_th = 128) {
    if (u.sup_cache && u.sup_cache->has_value()) return **u.sup_cache;
    if (n_y < 8 || n_th < 8) throw ConfigError("field_sup: grid too small");

    const double y_max = 1.0 - 1e-9;
    long long evals = 0;
    std::vector<double> vals((size_t)n_y * n_th);
    auto idx = [&](int i, int j) { return (size_t)i * n_th + j; };
    for (int i = 0; i < n_y; ++i) {
        const double y = y_max * i / (n_y - 1.0);
        for (int j = 0; j < n_th; ++j) {
            vals[idx(i, j)] = u.at_polar(y, 2.0 * pi * j / n_th);
            ++evals;
        }
    }

    // Collect grid-local maxima (8-neighbour, theta wraps, y clamps).
    struct Cand {
        double val, y, th;
    };
    std::vector<Cand> cands;
    for (int i = 0; i < n_y; ++i)
        for (int j = 0; j < n_th; ++j) {
            const double v = vals[idx(i, j)];
            bool peak = true;
            for (int di = -1; di <= 1 && peak; ++di)
                for (int dj = -1; dj <= 1 && peak; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int ii = std::clamp(i + di, 0, n_y - 1);
                    const int jj = (j + dj + n_th) % n_th;
                    if (vals[idx(ii, jj)] > v) peak = false;
                }
            if (peak) cands.push_back({v, y_max * i / (n_y - 1.0), 2.0 * pi * j / n_th});
        }
    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.val > b.val; });
    if (cands.size() > 8) cands.resize(8);
    cands.push_back({u.eval(cplx(0, 0)), 0.0, 0.0});
    ++evals;

    const double dy = y_max / (n_y - 1.0), dth = 2.0 * pi / n_th;
    SupInfo best;
    best.T = -1.0;
    for (const auto& c : cands) {
        double y = c.y, th = c.th, val = c.val;
        double wy = dy, wth = dth;
        for (int sweep = 0; sweep < 5; ++sweep) {
            auto [yy, vy] = detail::golden_max(
                [&](double q) { return u.at_polar(q, th); }, std::max(0.0, y - wy),
                std::min(y_max, y + wy), 1e-12, evals);
            y = yy;
            val = vy;
            if (y > 1e-12) {  // theta meaningless at the origin
                auto [tt, vt] = detail::golden_max(
                    [&](double q) { return u.at_polar(y, q); }, th - wth, th + wth,
                    1e-12, evals);
                th = tt;
                val = vt;
            }
            wy *= 0.25;
            wth *= 0.25;
        }
        if (val > best.T) {
            const double r = std::sqrt(y);
            best.T = val;
            best.argmax = cplx(r * std::cos(th), r * std::sin(th));
            best.rim_warning = (y_max - y) < 1e-6;
        }
    }
    if (u.sup_cache) *u.sup_cache = best;
    return best;
}

// ---------------------------------------------------------------------------
// integral of u dmu for smooth u: adaptive composite Gauss panels in y,
// periodic trapezoid in theta (both the M-point and M/2-point sums are
// accumulated from one set of evaluations, their difference is the angular
// error term). The rim tail beyond Y is bounded by the power envelope:
//   integral_{y>Y} u dmu <= pi * bound * (1-Y)^{decay-1} / (decay-1).
inline QuadratureReport integrate_hyperbolic(const ScalarField& u, double tol = 1e-9,
                                             int m_theta = 512) {
    if (!(u.decay > 1.0))
        throw NumericError("integrate_hyperbolic: decay <= 1, rim tail not integrable");
    if (m_theta < 8 || m_theta % 2 != 0)
        throw ConfigError("integrate_hyperbolic: m_theta must be even and >= 8");
    if (!(tol > 0.0)) throw ConfigError("integrate_hyperbolic: tol must be positive");

    // Pick Y so the rim bound is tol/10.
    const double g = u.decay - 1.0;
    double one_minus_Y = std::pow(tol / (10.0 * pi * u.bound / g), 1.0 / g);
    one_minus_Y = std::clamp(one_minus_Y, 1e-12, 0.5);
    const double Y = 1.0 - one_minus_Y;
    const double tail = pi * u.bound * std::pow(one_minus_Y, g) / g;

    long long evals = 0;
    // Angular means at level y, full and half resolution from shared evals.
    auto ring_means = [&](double y) {
        double full = 0.0, half = 0.0;
        for (int j = 0; j < m_theta; ++j) {
            const double v = u.at_polar(y, 2.0 * pi * j / m_theta);
            full += v;
            if (j % 2 == 0) half += v;
        }
        evals += m_theta;
        return std::make_pair(full / m_theta, 2.0 * half / m_theta);
    };

    struct Panel {
        double a, b, v_full, v_half, err;
    };
    const Quad1D& g8 = legendre01(8);
    const Quad1D& g16 = legendre01(16);
    auto make = [&](double a, double b) {
        double f8 = 0, f16 = 0, h16 = 0;
        for (int i = 0; i < 8; ++i) {
            const double y = a + (b - a) * g8.x[i];
            const auto [mf, mh] = ring_means(y);
            (void)mh;
            f8 += g8.w[i] * mf / ((1.0 - y) * (1.0 - y));
        }
        for (int i = 0; i < 16; ++i) {
            const double y = a + (b - a) * g16.x[i];
            const auto [mf, mh] = ring_means(y);
            f16 += g16.w[i] * mf / ((1.0 - y) * (1.0 - y));
            h16 += g16.w[i] * mh / ((1.0 - y) * (1.0 - y));
        }
        const double s = pi * (b - a);  // (2pi) * (1/2) * mean
        return Panel{a, b, s * f16, s * h16, std::abs(s * (f16 - f8))};
    };

    std::vector<Panel> panels{make(0.0, Y)};
    auto total_err = [&] {
        double e = 0;
        for (const auto& p : panels) e += p.err;
        return e;
    };
    while ((int)panels.size() < 256 && total_err() > tol / 2.0) {
        size_t worst = 0;
        for (size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err > panels[worst].err) worst = i;
        const Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        panels[worst] = make(p.a, mid);
        panels.push_back(make(mid, p.b));
    }

    double v_full = 0, v_half = 0, radial_err = 0;
    for (const auto& p : panels) {
        v_full += p.v_full;
        v_half += p.v_half;
        radial_err += p.err;
    }
    const double theta_err = std::abs(v_full - v_half);
    QuadratureReport rep;
    rep.value = v_full;
    rep.error = radial_err + theta_err + tail;
    rep.evals = evals;
    rep.converged = rep.error <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Ray machinery for level-dependent integrands. A RayTable caches a y-scan of
// the field on every ray so that arcs {u > t} can be located by bracketing +
// bisection for many values of t without rescanning.
class RayTable {
  public:
    RayTable(const ScalarField& u, int rays, int scan, double t_floor)
        : u_(&u), rays_(rays) {
        if (rays < 16 || rays % 2 != 0)
            throw ConfigError("RayTable: rays must be even and >= 16");
        if (scan < 32) throw ConfigError("RayTable: scan too small");
        if (!(t_floor > 0.0)) throw ConfigError("RayTable: t_floor must be positive");
        // Beyond y_hi the envelope keeps u below t_floor/2: no arc of any
        // level t >= t_floor can reach past it.
        double one_minus = u.decay > 0.0
                               ? std::pow(0.5 * t_floor / u.bound, 1.0 / u.decay)
                               : 1e-12;
        one_minus = std::clamp(one_minus, 1e-12, 0.75);
        y_hi_ = 1.0 - one_minus;
        ys_.resize(scan);
        for (int i = 0; i < scan; ++i) ys_[i] = y_hi_ * i / (scan - 1.0);
        vals_.assign((size_t)rays, {});
        for (int j = 0; j < rays; ++j) {
            vals_[j].resize(scan);
            const double th = theta(j);
            for (int i = 0; i < scan; ++i) vals_[j][i] = u.at_polar(ys_[i], th);
        }
        evals_build_ = (long long)rays * scan;
    }

    int rays() const { return rays_; }
    double theta(int j) const { return 2.0 * pi * j / rays_; }
    double y_hi() const { return y_hi_; }
    long long build_evals() const { return evals_build_; }

    // Maximal intervals of {y : u(y, theta_j) > t}, endpoints bisected to y_tol.
    std::vector<std::pair<double, double>> arcs(int j, double t, double y_tol,
                                                long long& evals) const {
        const auto& v = vals_[j];
        const double th = theta(j);
        auto above_at = [&](double y) {
            ++evals;
            return detail::above(u_->at_polar(y, th), t);
        };
        std::vector<std::pair<double, double>> out;
        bool inside = detail::above(v[0], t);
        double start = ys_[0];
        for (size_t i = 1; i < v.size(); ++i) {
            const bool a = detail::above(v[i], t);
            if (a == inside) continue;
            const double x =
                detail::bisect_root(above_at, ys_[i - 1], ys_[i], inside, y_tol, evals);
            if (inside)
                out.emplace_back(start, x);
            else
                start = x;
            inside = a;
        }
        if (inside) out.emplace_back(start, ys_.back());
        return out;
    }

    const ScalarField& field() const { return *u_; }

  private:
    const ScalarField* u_;
    int rays_;
    double y_hi_ = 0.0;
    long long evals_build_ = 0;
    std::vector<double> ys_;
    std::vector<std::vector<double>> vals_;
};

struct LevelOpts {
    int rays = 512;
    int scan = 512;
    double y_tol = 1e-13;   // bisection width for arc endpoints
    double arc_tol = 1e-11; // Gauss target per ray
};

namespace detail {

enum class LevelKind { Deficit, Levelset, MinWith };

// One ray's contribution to the requested level integral (the (1/2)dy/(1-y)^2
// density is folded in; the caller multiplies by the trapezoid weight).
inline double ray_level_value(const RayTable& tab, int j, double t, LevelKind kind,
                              const LevelOpts& o, long long& evals, double& err) {
    const auto arcs = tab.arcs(j, t, o.y_tol, evals);
    const ScalarField& u = tab.field();
    const double th = tab.theta(j);
    auto dens = [&](double y) { return 0.5 / ((1.0 - y) * (1.0 - y)); };
    double v = 0.0;
    auto add_arc_integral = [&](double lo, double hi, auto&& fn) {
        if (hi - lo < 1e-15) return;
        auto [val, e] = adaptive_gauss(fn, lo, hi, o.arc_tol, 32, evals);
        v += val;
        err += e;
    };
    switch (kind) {
        case LevelKind::Deficit:
            for (auto [lo, hi] : arcs)
                add_arc_integral(lo, hi, [&](double y) {
                    ++evals;
                    return (u.at_polar(y, th) - t) * dens(y);
                });
            break;
        case LevelKind::Levelset:
            for (auto [lo, hi] : arcs)
                add_arc_integral(lo, hi, [&](double y) {
                    ++evals;
                    return u.at_polar(y, th) * dens(y);
                });
            break;
        case LevelKind::MinWith: {
            // t on the arcs (exact hyperbolic length), u elsewhere.
            double cursor = 0.0;
            auto u_dens = [&](double y) {
                ++evals;
                return u.at_polar(y, th) * dens(y);
            };
            for (auto [lo, hi] : arcs) {
                v += t * slab_mu(lo, hi, 1.0);  // t * (1/2) int_arc dy/(1-y)^2
                add_arc_integral(cursor, lo, u_dens);
                cursor = hi;
            }
            // Remaining piece up to the scan rim, then geometric panels to 1.
            add_arc_integral(cursor, tab.y_hi(), u_dens);
            double w = 1.0 - tab.y_hi();
            for (int k = 0; k < 80; ++k) {
                const double a = 1.0 - w, b = 1.0 - 0.5 * w;
                const Quad1D& g8 = legendre01(8);
                double pv = 0;
                for (int i = 0; i < 8; ++i) {
                    const double y = a + (b - a) * g8.x[i];
                    pv += g8.w[i] * u_dens(y);
                }
                pv *= (b - a);
                v += pv;
                w *= 0.5;
                // Envelope bound on everything past b.
                const double rest =
                    0.5 * u.bound * std::pow(w, u.decay - 1.0) / (u.decay - 1.0);
                if (rest < 1e-16 * (1.0 + std::abs(v))) {
                    err += rest;
                    break;
                }
                if (k == 79) err += rest;
            }
            break;
        }
    }
    return v;
}

inline QuadratureReport level_integral(const ScalarField& u, double t, LevelKind kind,
                                       const LevelOpts& o) {
    if (!(t > 0.0)) throw ConfigError("level integral: t must be positive");
    if (kind == LevelKind::MinWith && !(u.decay > 1.0))
        throw NumericError("min_integral: decay <= 1, rim tail not integrable");
    RayTable tab(u, o.rays, o.scan, t);
    long long evals = tab.build_evals();
    double gauss_err = 0.0;
    std::vector<double> per_ray(o.rays);
    for (int j = 0; j < o.rays; ++j)
        per_ray[j] = ray_level_value(tab, j, t, kind, o, evals, gauss_err);
    double full = 0.0, half = 0.0;
    for (int j = 0; j < o.rays; ++j) {
        full += per_ray[j];
        if (j % 2 == 0) half += per_ray[j];
    }
    full *= 2.0 * pi / o.rays;
    half *= 4.0 * pi / o.rays;
    QuadratureReport rep;
    rep.value = full;
    rep.error = std::abs(full - half) + gauss_err * (2.0 * pi / o.rays) +
                1e-14 * (1.0 + std::abs(full));
    rep.evals = evals;
    rep.converged = true;
    return rep;
}

}  // namespace detail

// integral of (u - t)_+ dmu
inline QuadratureReport deficit_integral(const ScalarField& u, double t,
                                         const LevelOpts& o = {}) {
    return detail::level_integral(u, t, detail::LevelKind::Deficit, o);
}

// integral of u over {u > t} against dmu
inline QuadratureReport levelset_integral(const ScalarField& u, double t,
                                          const LevelOpts& o = {}) {
    return detail::level_integral(u, t, detail::LevelKind::Levelset, o);
}

// integral of min(u, t) dmu  (requires decay > 1)
inline QuadratureReport min_integral(const ScalarField& u, double t,
                                     const LevelOpts& o = {}) {
    return detail::level_integral(u, t, detail::LevelKind::MinWith, o);
}

// ---------------------------------------------------------------------------
// mu({u > t}) by dyadic subdivision in (y, theta). Interior cells contribute
// their exact hyperbolic measure. A cell still straddling the level curve at
// resolve_depth is modelled locally: the curve's crossings with the cell
// edges are bisected and the cut is taken parabolic (graph cells) or as a
// chord (corner cells); the difference against the lower-order cut model goes
// into the error bar. Saddle and island cells are bounded by half their
// measure. Cells whose power envelope already sits below t are discarded
// without sampling.
struct SuperlevelOpts {
    double tol = 1e-7;
    int base_ny = 64;
    int base_nth = 128;
    int resolve_depth = 4;  // dyadic levels below the base grid before modelling
    int max_depth = 9;      // absolute refinement cap for offending cells
};

namespace detail {

struct CellResult {
    double value = 0.0, error = 0.0;
};

struct SuperCtx {
    const ScalarField* u;
    double t;
    SuperlevelOpts o;
    long long evals = 0;
    // Cell containing the argmax is refined even when its probes all sit
    // below t (levels just under the sup live in a blob the probes can miss).
    double force_y = -1.0, force_th = 0.0;

    double at(double y, double th) {
        ++evals;
        return u->at_polar(y, th);
    }
    bool in(double y, double th) { return above(at(y, th), t); }

    // Measure between y0 and a quadratic cut y_c(theta) through three points,
    // clamped to the cell: (1/2) int (1/(1-clamp(y_c)) - 1/(1-y0)) dtheta.
    double mu_below_quad(double th0, double th1, double y0, double y1, double ya,
                         double ym, double yb) {
        const Quad1D& g8 = legendre01(8);
        const double thm = 0.5 * (th0 + th1);
        double s = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double th = th0 + (th1 - th0) * g8.x[i];
            // Lagrange quadratic through (th0,ya), (thm,ym), (th1,yb).
            const double l0 = (th - thm) * (th - th1) / ((th0 - thm) * (th0 - th1));
            const double l1 = (th - th0) * (th - th1) / ((thm - th0) * (thm - th1));
            const double l2 = (th - th0) * (th - thm) / ((th1 - th0) * (th1 - thm));
            const double yc = std::clamp(ya * l0 + ym * l1 + yb * l2, y0, y1);
            s += g8.w[i] * (1.0 / (1.0 - yc) - 1.0 / (1.0 - y0));
        }
        return 0.5 * (th1 - th0) * s;
    }

    // Same with a straight cut through (tha,ya)-(thb,yb) over [tha,thb].
    double mu_below_line(double tha, double thb, double y0, double y1, double ya,
                         double yb) {
        if (thb - tha < 1e-15) return 0.0;
        const Quad1D& g8 = legendre01(8);
        double s = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double th = tha + (thb - tha) * g8.x[i];
            const double yc =
                std::clamp(ya + (yb - ya) * (th - tha) / (thb - tha), y0, y1);
            s += g8.w[i] * (1.0 / (1.0 - yc) - 1.0 / (1.0 - y0));
        }
        return 0.5 * (thb - tha) * s;
    }

    // Measure left of a quadratic cut theta_c(y) through three points.
    double mu_left_quad(double y0, double y1, double th0, double th1, double ta,
                        double tm, double tb) {
        const Quad1D& g8 = legendre01(8);
        const double ym = 0.5 * (y0 + y1);
        double s = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double y = y0 + (y1 - y0) * g8.x[i];
            const double l0 = (y - ym) * (y - y1) / ((y0 - ym) * (y0 - y1));
            const double l1 = (y - y0) * (y - y1) / ((ym - y0) * (ym - y1));
            const double l2 = (y - y0) * (y - ym) / ((y1 - y0) * (y1 - ym));
            const double tc = std::clamp(ta * l0 + tm * l1 + tb * l2, th0, th1);
            s += g8.w[i] * (tc - th0) / ((1.0 - y) * (1.0 - y));
        }
        return 0.5 * (y1 - y0) * s;
    }

    double mu_left_line(double y0, double y1, double th0, double th1, double ta,
                        double tb) {
        const Quad1D& g8 = legendre01(8);
        double s = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double y = y0 + (y1 - y0) * g8.x[i];
            const double tc = std::clamp(ta + (tb - ta) * g8.x[i], th0, th1);
            s += g8.w[i] * (tc - th0) / ((1.0 - y) * (1.0 - y));
        }
        return 0.5 * (y1 - y0) * s;
    }

    double ycross(double th, double ylo, double yhi, bool lo_above) {
        return bisect_root([&](double y) { return in(y, th); }, ylo, yhi, lo_above,
                           1e-13, evals);
    }
    double thcross(double y, double tlo, double thi, bool lo_above) {
        return bisect_root([&](double th) { return in(y, th); }, tlo, thi, lo_above,
                           1e-13, evals);
    }
};

struct Cell {
    double y0, y1, th0, th1;
    // corner values: c[y-side][theta-side], y-side 0 = y0, theta-side 0 = th0
    double c00, c01, c10, c11;
    int depth;
    double mu() const { return slab_mu(y0, y1, th1 - th0); }
};

// Local resolution of a straddling cell at final depth.
inline CellResult resolve_cell(SuperCtx& ctx, const Cell& c) {
    const double t = ctx.t;
    const bool b00 = above(c.c00, t), b01 = above(c.c01, t), b10 = above(c.c10, t),
               b11 = above(c.c11, t);
    const double mu = c.mu();
    const int n = (int)b00 + b01 + b10 + b11;
    const auto conservative = [&] { return CellResult{0.5 * mu, 0.5 * mu}; };

    if (n == 0 || n == 4) {
        // Island around the centre; desk-scale cells make this negligible but
        // it is still bounded honestly.
        return conservative();
    }
    if (b00 == b01 && b10 == b11) {
        // Cut is a graph y = y_c(theta) crossing both vertical edges.
        const double thm = 0.5 * (c.th0 + c.th1);
        const double ya = ctx.ycross(c.th0, c.y0, c.y1, b00);
        const double yb = ctx.ycross(c.th1, c.y0, c.y1, b01);
        const double ym = ctx.ycross(thm, c.y0, c.y1, b00);
        const double below_q =
            ctx.mu_below_quad(c.th0, c.th1, c.y0, c.y1, ya, ym, yb);
        const double below_l = ctx.mu_below_line(c.th0, c.th1, c.y0, c.y1, ya, yb);
        const double v = b00 ? below_q : mu - below_q;
        return CellResult{v, std::abs(below_q - below_l) + 1e-16 * mu};
    }
    if (b00 == b10 && b01 == b11) {
        // Cut is a graph theta = theta_c(y) crossing both horizontal edges.
        const double ym = 0.5 * (c.y0 + c.y1);
        const double ta = ctx.thcross(c.y0, c.th0, c.th1, b00);
        const double tb = ctx.thcross(c.y1, c.th0, c.th1, b10);
        const double tm = ctx.thcross(ym, c.th0, c.th1, b00);
        const double left_q = ctx.mu_left_quad(c.y0, c.y1, c.th0, c.th1, ta, tm, tb);
        const double left_l = ctx.mu_left_line(c.y0, c.y1, c.th0, c.th1, ta, tb);
        const double v = b00 ? left_q : mu - left_q;
        return CellResult{v, std::abs(left_q - left_l) + 1e-16 * mu};
    }
    if (n == 1 || n == 3) {
        // Corner cell: the cut crosses the two edges adjacent to the odd
        // corner. Model it as a chord; the cut region hugs y0 or y1.
        const bool odd_state = (n == 1);
        double v_corner;
        if (b00 == odd_state && b01 != odd_state && b10 != odd_state) {
            const double ths = ctx.thcross(c.y0, c.th0, c.th1, b00);
            const double ys = ctx.ycross(c.th0, c.y0, c.y1, b00);
            v_corner = ctx.mu_below_line(c.th0, ths, c.y0, c.y1, ys, c.y0);
        } else if (b01 == odd_state && b00 != odd_state && b11 != odd_state) {
            const double ths = ctx.thcross(c.y0, c.th0, c.th1, b00);
            const double ys = ctx.ycross(c.th1, c.y0, c.y1, b01);
            v_corner = ctx.mu_below_line(ths, c.th1, c.y0, c.y1, c.y0, ys);
        } else if (b10 == odd_state && b11 != odd_state && b00 != odd_state) {
            const double ths = ctx.thcross(c.y1, c.th0, c.th1, b10);
            const double ys = ctx.ycross(c.th0, c.y0, c.y1, b00);
            const double below = ctx.mu_below_line(c.th0, ths, c.y0, c.y1, ys, c.y1);
            v_corner = slab_mu(c.y0, c.y1, ths - c.th0) - below;
        } else {
            const double ths = ctx.thcross(c.y1, c.th0, c.th1, b10);
            const double ys = ctx.ycross(c.th1, c.y0, c.y1, b01);
            const double below = ctx.mu_below_line(ths, c.th1, c.y0, c.y1, c.y1, ys);
            v_corner = slab_mu(c.y0, c.y1, c.th1 - ths) - below;
        }
        v_corner = std::clamp(v_corner, 0.0, mu);
        const double inside = (n == 1) ? v_corner : mu - v_corner;
        // Chord error: bound by the smaller of the two sides (the chord can
        // misplace at most the lens between cut and chord).
        const double err = 0.5 * std::min(v_corner, mu - v_corner) + 1e-16 * mu;
        return CellResult{inside, err};
    }
    // Diagonal saddle.
    return conservative();
}

inline void resolve_or_refine(SuperCtx& ctx, const Cell& c, double cell_tol,
                              CompensatedSum& val, CompensatedSum& err) {
    // Envelope prune.
    if (ctx.u->bound * std::pow(1.0 - c.y0, ctx.u->decay) <= ctx.t) return;
    const double t = ctx.t;
    const bool b00 = above(c.c00, t), b01 = above(c.c01, t), b10 = above(c.c10, t),
               b11 = above(c.c11, t);
    const double ym = 0.5 * (c.y0 + c.y1), thm = 0.5 * (c.th0 + c.th1);
    const double cc = ctx.at(ym, thm);
    const bool bc = above(cc, t);
    // Base cells are always split once so a curve cannot hide between the
    // five probes of a coarse cell.
    if (b00 && b01 && b10 && b11 && bc && c.depth >= 1) {
        val.add(c.mu());  // interior: exact measure
        return;
    }
    if (!b00 && !b01 && !b10 && !b11 && !bc && c.depth >= 1) {
        const bool holds_peak = ctx.force_y >= c.y0 && ctx.force_y <= c.y1 &&
                                ctx.force_th >= c.th0 && ctx.force_th <= c.th1;
        if (!holds_peak || c.depth >= ctx.o.resolve_depth) return;
        // fall through and subdivide around the peak
    }

    if (c.depth >= ctx.o.resolve_depth) {
        const CellResult r = resolve_cell(ctx, c);
        if (r.error <= cell_tol || c.depth >= ctx.o.max_depth) {
            val.add(r.value);
            err.add(r.error);
            return;
        }
    }
    // Subdivide: four children share the centre and edge midpoints.
    const double e0 = ctx.at(c.y0, thm), e1 = ctx.at(c.y1, thm);
    const double e2 = ctx.at(ym, c.th0), e3 = ctx.at(ym, c.th1);
    const Cell k00{c.y0, ym, c.th0, thm, c.c00, e0, e2, cc, c.depth + 1};
    const Cell k01{c.y0, ym, thm, c.th1, e0, c.c01, cc, e3, c.depth + 1};
    const Cell k10{ym, c.y1, c.th0, thm, e2, cc, c.c10, e1, c.depth + 1};
    const Cell k11{ym, c.y1, thm, c.th1, cc, e3, e1, c.c11, c.depth + 1};
    resolve_or_refine(ctx, k00, cell_tol, val, err);
    resolve_or_refine(ctx, k01, cell_tol, val, err);
    resolve_or_refine(ctx, k10, cell_tol, val, err);
    resolve_or_refine(ctx, k11, cell_tol, val, err);
}

}  // namespace detail

inline QuadratureReport superlevel_measure(const ScalarField& u, double t,
                                           const SuperlevelOpts& o = {}) {
    if (!(t > 0.0)) throw ConfigError("superlevel_measure: t must be positive");
    QuadratureReport rep;
    if (t >= u.bound) {  // envelope kills everything
        rep.converged = true;
        return rep;
    }
    const SupInfo sup = field_sup(u);  // cached on the field after first use
    if (t >= sup.T) {
        rep.converged = true;
        return rep;
    }

    detail::SuperCtx ctx{&u, t, o};
    ctx.force_y = std::norm(sup.argmax);
    ctx.force_th = std::atan2(sup.argmax.imag(), sup.argmax.real());
    if (ctx.force_th < 0.0) ctx.force_th += 2.0 * pi;
    // Domain cap: past y_cap the envelope is below t.
    double one_minus = u.decay > 0.0 ? std::pow(t / u.bound, 1.0 / u.decay) : 1e-12;
    const double y_cap = 1.0 - 0.5 * std::clamp(one_minus, 1e-12, 1.0);

    const int ny = o.base_ny, nth = o.base_nth;
    std::vector<double> grid((size_t)(ny + 1) * (nth + 1));
    for (int i = 0; i <= ny; ++i)
        for (int j = 0; j <= nth; ++j)
            grid[(size_t)i * (nth + 1) + j] =
                ctx.at(y_cap * i / ny, 2.0 * pi * j / nth);

    CompensatedSum val, err;
    const double cell_tol = o.tol / (64.0 * ny);
    for (int i = 0; i < ny; ++i)
        for (int j = 0; j < nth; ++j) {
            detail::Cell c{y_cap * i / ny,       y_cap * (i + 1) / ny,
                           2.0 * pi * j / nth,   2.0 * pi * (j + 1) / nth,
                           grid[(size_t)i * (nth + 1) + j],
                           grid[(size_t)i * (nth + 1) + j + 1],
                           grid[(size_t)(i + 1) * (nth + 1) + j],
                           grid[(size_t)(i + 1) * (nth + 1) + j + 1],
                           0};
            detail::resolve_or_refine(ctx, c, cell_tol, val, err);
        }
    rep.value = val.value();
    rep.error = err.value() + 1e-15 * (1.0 + rep.value);
    rep.evals = ctx.evals;
    rep.converged = rep.error <= o.tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Distribution profile rho(t) = mu({u > t}) on a grid of levels, with the
// closed-form companion of the radial extremal weight, the sup, and (when it
// is unambiguous) the unique crossing of rho - rho0.
struct DistributionProfile {
    double alpha = 0.0;
    double T = 0.0;
    std::vector<double> t, rho, rho_err, rho0;
    std::optional<double> t_star;
    bool crossing_unique = false;
    int sign_changes = 0;  // of rho - rho0 beyond the error bars
    long long evals = 0;
};

struct ProfileOpts {
    int points = 32;
    double t_min = 1e-3;
    double t_max_frac = 0.999;  // top grid point as a fraction of T
    int rays = 512;
    int scan = 512;
    double y_tol = 1e-13;
    double tstar_width = 1e-4;
};

namespace detail {

inline double rho_from_rays(const RayTable& tab, double t, double y_tol,
                            long long& evals, double& bar) {
    const int m = tab.rays();
    std::vector<double> per(m);
    std::vector<int> cnt(m);
    for (int j = 0; j < m; ++j) {
        double s = 0.0;
        const auto a = tab.arcs(j, t, y_tol, evals);
        cnt[j] = static_cast<int>(a.size());
        for (auto [lo, hi] : a) s += 1.0 / (1.0 - hi) - 1.0 / (1.0 - lo);
        per[j] = 0.5 * s;
    }
    double full = 0, half = 0;
    for (int j = 0; j < m; ++j) {
        full += per[j];
        if (j % 2 == 0) half += per[j];
    }
    const double h = 2.0 * pi / m;
    full *= h;
    half *= 2.0 * h;
    // Where the arc topology changes between neighbouring rays the integrand
    // has a square-root edge in the angle; grid halving alone can miss its
    // phase-dependent defect, so add the worst case for each such panel: the
    // trapezoid value is the midpoint of [h min, h max], hence off by at most
    // h |delta| / 2.
    double edge = 0.0;
    for (int j = 0; j < m; ++j) {
        const int k = (j + 1) % m;
        if (cnt[j] != cnt[k]) edge += 0.5 * h * std::abs(per[j] - per[k]);
    }
    bar = std::abs(full - half) + edge + 1e-12 * (1.0 + full);
    return full;
}

}  // namespace detail

inline DistributionProfile distribution_profile(const ScalarField& u, double alpha,
                                                const std::vector<double>& t_grid,
                                                const ProfileOpts& o = {}) {
    if (t_grid.empty()) throw ConfigError("distribution_profile: empty level grid");
    for (size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0)) throw ConfigError("distribution_profile: t <= 0");
        if (i && !(t_grid[i] > t_grid[i - 1]))
            throw ConfigError("distribution_profile: levels must increase");
    }
    DistributionProfile p;
    p.alpha = alpha;
    const SupInfo s = field_sup(u);
    p.T = s.T;
    RayTable tab(u, o.rays, o.scan, t_grid.front());
    long long evals = tab.build_evals();
    p.t = t_grid;
    p.rho.resize(t_grid.size());
    p.rho_err.resize(t_grid.size());
    p.rho0.resize(t_grid.size());
    for (size_t i = 0; i < t_grid.size(); ++i) {
        double bar = 0.0;
        p.rho[i] = t_grid[i] >= p.T
                       ? 0.0
                       : detail::rho_from_rays(tab, t_grid[i], o.y_tol, evals, bar);
        p.rho_err[i] = bar;
        p.rho0[i] = t_grid[i] <= 1.0 ? forms::rho0(t_grid[i], alpha)
                                     : std::numeric_limits<double>::quiet_NaN();
    }

    // Sign pattern of rho - rho0 outside the bars.
    std::vector<int> signs;
    std::vector<size_t> where;
    for (size_t i = 0; i < p.t.size(); ++i) {
        if (std::isnan(p.rho0[i])) continue;
        const double g = p.rho[i] - p.rho0[i];
        const int sg = g > p.rho_err[i] ? 1 : (g < -p.rho_err[i] ? -1 : 0);
        if (sg != 0 && (signs.empty() || signs.back() != sg)) {
            signs.push_back(sg);
            where.push_back(i);
        }
    }
    p.sign_changes = signs.empty() ? 0 : (int)signs.size() - 1;
    if (signs.size() == 2) {
        double lo = p.t[where[0]], hi = p.t[where[1]];
        const bool lo_above = signs[0] > 0;
        auto g_above = [&](double t) {
            double bar = 0.0;
            const double r = t >= p.T
                                 ? 0.0
                                 : detail::rho_from_rays(tab, t, o.y_tol, evals, bar);
            return r - forms::rho0(t, alpha) > 0.0;
        };
        for (int it = 0; it < 100 && hi - lo > o.tstar_width; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (g_above(mid) == lo_above)
                lo = mid;
            else
                hi = mid;
        }
        p.t_star = 0.5 * (lo + hi);
        p.crossing_unique = true;
    }
    p.evals = evals;
    return p;
}

inline DistributionProfile distribution_profile(const ScalarField& u, double alpha,
                                                const ProfileOpts& o = {}) {
    const SupInfo s = field_sup(u);
    if (!(s.T > o.t_min * 1.0001))
        throw ConfigError("distribution_profile: field sup at or below the level floor");
    const double t_hi = s.T * o.t_max_frac;
    std::vector<double> grid(o.points);
    for (int i = 0; i < o.points; ++i)
        grid[i] = o.t_min * std::pow(t_hi / o.t_min, i / (o.points - 1.0));
    return distribution_profile(u, alpha, grid, o);
}

// phi(t) = t^{1/(alpha+2)} (rho(t) + pi) must be non-increasing; report the
// largest increase between consecutive grid points after the error bars of
// both endpoints have been granted.
struct MonotoneReport {
    double max_violation = -1e300;  // > 0 means a real violation
    int arg_index = -1;
    bool pass = true;
};

inline MonotoneReport check_differential_inequality(const DistributionProfile& p,
                                                    double slack = 0.0) {
    if (p.t.size() < 2) throw ConfigError("monotonicity check needs >= 2 levels");
    const double e = 1.0 / (p.alpha + 2.0);
    MonotoneReport rep;
    for (size_t i = 0; i + 1 < p.t.size(); ++i) {
        const double w0 = std::pow(p.t[i], e), w1 = std::pow(p.t[i + 1], e);
        const double phi0 = w0 * (p.rho[i] + pi), phi1 = w1 * (p.rho[i + 1] + pi);
        const double allow =
            w0 * p.rho_err[i] + w1 * p.rho_err[i + 1] + 1e-11 * (1.0 + std::abs(phi0));
        const double viol = phi1 - phi0 - allow - slack;
        if (viol > rep.max_violation) {
            rep.max_violation = viol;
            rep.arg_index = (int)i;
        }
    }
    rep.pass = rep.max_violation <= 0.0;
    return rep;
}

}  // namespace bergmanlab::quad

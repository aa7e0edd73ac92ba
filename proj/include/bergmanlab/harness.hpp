#pragma once

// Run harness shared by the CLI and the end-to-end tests: named function
// families, per-check parameter resolution, report assembly, and a
// deterministic parallel map (results are reduced in index order, so thread
// count changes the wall clock but never a byte of output).

#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bergmanlab/closed_forms.hpp"
#include "bergmanlab/common.hpp"
#include "bergmanlab/disk_core.hpp"
#include "bergmanlab/functionals.hpp"
#include "bergmanlab/halfplane.hpp"
#include "bergmanlab/hardy.hpp"
#include "bergmanlab/io.hpp"
#include "bergmanlab/operators.hpp"
#include "bergmanlab/quadrature.hpp"
#include "bergmanlab/stability.hpp"

namespace bergmanlab::harness {

using io::json;

// ---------------------------------------------------------------------------
inline int threads_from_env() {
    const char* v = std::getenv("BERGMANLAB_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (!end || *end != '\0' || n < 1 || n > 256)
        throw ConfigError("BERGMANLAB_THREADS must be an integer in [1, 256]");
    return (int)n;
}

// Index-ordered parallel evaluation; exceptions propagate to the caller.
template <class T>
std::vector<T> parallel_map(int n, int threads, const std::function<T(int)>& fn) {
    std::vector<T> out(n);
    if (n == 0) return out;
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(threads);
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += threads) out[i] = fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (std::thread& t : pool) t.join();
    for (std::exception_ptr& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// Named families. Coefficient variance 4^{-k} keeps random functions kernel-
// like in scale while exercising every degree up to 8.
inline disk::TaylorFunction random_function(std::uint64_t seed, double alpha,
                                            int degree = 8) {
    GaussianStream g(seed);
    std::vector<cplx> a(degree + 1);
    for (int k = 0; k <= degree; ++k) {
        const double sigma = std::pow(2.0, -k);  // variance 4^{-k}
        a[k] = sigma * cplx(g(), g()) / std::sqrt(2.0);
    }
    disk::TaylorFunction f{std::move(a)};
    return disk::normalized(f, alpha);
}

// "one", "z", "monomial:k", "kernel:re,im", "random" (seed required), or a
// path to a coefficient JSON file.
inline disk::TaylorFunction make_function(const std::string& spec, double alpha,
                                          std::optional<std::uint64_t> seed) {
    if (spec == "one") return disk::TaylorFunction({cplx(1.0)});
    if (spec == "z") return disk::TaylorFunction({cplx(0.0), cplx(1.0)});
    if (spec.rfind("monomial:", 0) == 0) {
        const int k = std::stoi(spec.substr(9));
        if (k < 0 || k > 4096) throw ConfigError("monomial degree out of range");
        std::vector<cplx> a(k + 1, cplx(0.0));
        a[k] = 1.0;
        return disk::TaylorFunction(std::move(a));
    }
    if (spec.rfind("kernel:", 0) == 0) {
        const std::string body = spec.substr(7);
        const std::size_t comma = body.find(',');
        if (comma == std::string::npos)
            throw ConfigError("kernel spec must be kernel:re,im");
        const cplx w(std::stod(body.substr(0, comma)), std::stod(body.substr(comma + 1)));
        return disk::normalized_kernel(w, alpha);
    }
    if (spec == "random") {
        if (!seed) throw ConfigError("the random family requires --seed");
        return random_function(*seed, alpha);
    }
    return io::load_coefficients(spec);
}

// ---------------------------------------------------------------------------
struct RunConfig {
    std::string check;
    std::string function = "one";
    double alpha = 0.0;
    double p = std::nan("");        // NaN = per-check default
    double q = std::nan("");        // optional embedding target exponent
    double g_power = 2.0;
    double C = std::nan("");        // NaN = per-check default
    double t0 = 0.1;
    double T0 = 0.9;
    std::optional<std::uint64_t> seed;
    int nodes = 0;
    double tol = 0.0;               // 0 = per-check default
    std::string out;                // empty = stdout
    std::string format = "json";    // json | csv
    int sweep = 0;                  // >0: seeded sweep of this many runs
    int threads = 1;
};

namespace detail {
inline double pick(double v, double dflt) { return std::isnan(v) ? dflt : v; }

inline json constants_block() {
    return {{"c_prime", stab::c_prime},
            {"transform_kappa", std::sqrt(2.0) / pi},
            {"gram_tolerance", ops::gram_tolerance}};
}

inline json base_params(const RunConfig& cfg) {
    return {{"function", cfg.function}, {"alpha", cfg.alpha}};
}
}  // namespace detail

// ---------------------------------------------------------------------------
// One verification run; returns the full report document (field "pass" drives
// the process exit code).
inline json run_check(const RunConfig& cfg) {
    using detail::pick;
    const std::uint64_t seed = cfg.seed.value_or(0);
    json params = detail::base_params(cfg);

    if (cfg.check == "kulikov") {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-6;
        const disk::TaylorFunction f = make_function(cfg.function, cfg.alpha, cfg.seed);
        const func::ConvexG G = func::ConvexG::power(cfg.g_power);
        const disk::TaylorFunction fn = disk::normalized(f, cfg.alpha);
        const quad::ScalarField u = func::husimi(fn, disk::SpaceParams(cfg.alpha, 2.0));
        const quad::QuadratureReport lhs = func::convex_functional(u, G, 1e-10);
        const double rhs = stab::extremal_functional(G, cfg.alpha);
        params["g_power"] = cfg.g_power;
        json details{{"lhs_err", lhs.error}};
        if (!std::isnan(cfg.q)) {
            const double p2 = pick(cfg.p, 2.0);
            const func::EmbeddingReport em = func::check_embedding(fn, p2, cfg.alpha, cfg.q);
            details["embedding"] = {{"p", em.p},       {"q", em.q},
                                    {"beta", em.beta}, {"lhs", em.lhs},
                                    {"rhs", em.rhs},   {"margin", em.margin}};
            params["q"] = cfg.q;
        }
        const double margin = rhs - lhs.value;
        return io::make_report("kulikov", params, lhs.value, rhs, margin,
                               tol + lhs.error, margin >= -(tol + lhs.error), seed,
                               detail::constants_block(), details);
    }

    if (cfg.check == "theorem1") {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-9;
        const double C = pick(cfg.C, 1.0);
        const disk::TaylorFunction f = make_function(cfg.function, cfg.alpha, cfg.seed);
        const func::ConvexG G = func::ConvexG::power(cfg.g_power);
        const stab::StabilityReport r =
            stab::verify_theorem1(f, G, cfg.alpha, C, stab::CoefficientForm::Derivation, tol);
        params["g_power"] = cfg.g_power;
        params["C"] = C;
        json details{{"c_G", r.c_G},
                     {"one_minus_T", r.one_minus_T},
                     {"d2", r.d2},
                     {"vacuous", r.vacuous},
                     {"equality_case", r.equality_case},
                     {"coefficient_form", "derivation"}};
        return io::make_report("theorem1", params, r.lhs, r.rhs, r.margin, r.tolerance,
                               r.pass, seed, detail::constants_block(), details);
    }

    if (cfg.check == "corollary2") {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-9;
        const double p = pick(cfg.p, 4.0);
        const disk::TaylorFunction f = make_function(cfg.function, cfg.alpha, cfg.seed);
        const stab::StabilityReport r = stab::verify_corollary2(f, p, cfg.alpha, tol);
        params["p"] = p;
        json details{{"d2", r.d2}, {"one_minus_T", r.one_minus_T}, {"c_empirical", r.c_G}};
        return io::make_report("corollary2", params, r.lhs, r.rhs, r.margin, r.tolerance,
                               r.pass, seed, detail::constants_block(), details);
    }

    if (cfg.check == "theorem3") {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-7;
        const double C = pick(cfg.C, 4.0);
        const disk::TaylorFunction f = make_function(cfg.function, -1.0, cfg.seed);
        const func::ConvexG G = func::ConvexG::power(cfg.g_power);
        const hardy::Theorem3Report r =
            hardy::verify_theorem3(f, G, C, cfg.t0, cfg.T0, tol);
        params["g_power"] = cfg.g_power;
        params["C"] = C;
        params["t0"] = cfg.t0;
        params["T0"] = cfg.T0;
        params["alpha"] = -1.0;
        json details{{"floor", r.floor},
                     {"T", r.T},
                     {"large_T_branch", r.large_T_branch},
                     {"lhs_err", r.lhs_err}};
        return io::make_report("theorem3", params, r.lhs, r.rhs, r.margin, r.tolerance,
                               r.pass, seed, detail::constants_block(), details);
    }

    if (cfg.check == "concentration") {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-6;
        const double p = pick(cfg.p, 2.0);
        const disk::TaylorFunction f = make_function(cfg.function, cfg.alpha, cfg.seed);
        params["p"] = p;
        json cases = json::array();
        double worst = 1e300;
        double worst_lhs = 0.0, worst_rhs = 0.0;
        for (double s : {pi / 2.0, pi, 4.0 * pi}) {
            const func::ConcentrationReport r =
                func::concentration_ratio(f, cfg.alpha, cplx(0.0), s, p);
            cases.push_back({{"s", s},
                             {"ratio", r.ratio},
                             {"bound", r.bound},
                             {"margin", r.margin},
                             {"error", r.error}});
            if (r.margin < worst) {
                worst = r.margin;
                worst_lhs = r.ratio;
                worst_rhs = r.bound;
            }
        }
        return io::make_report("concentration", params, worst_lhs, worst_rhs, worst, tol,
                               worst >= -tol, seed, detail::constants_block(),
                               json{{"cases", cases}});
    }

    if (cfg.check == "lemma4") {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-2;
        ops::MixedState st;
        try {
            st = io::load_mixed_state(cfg.function);
        } catch (const ConfigError&) {
            const disk::TaylorFunction f =
                make_function(cfg.function, cfg.alpha, cfg.seed);
            st = ops::mixed_state(cfg.alpha, {1.0}, {disk::normalized(f, cfg.alpha)});
        }
        const quad::ScalarField u = ops::covariant_symbol(st);
        const ops::LogCurvatureReport r = ops::check_log_curvature(u, st.alpha, 1e-3, tol);
        params["alpha"] = st.alpha;
        params["rank"] = st.rank();
        json details{{"checked", r.checked},
                     {"skipped", r.skipped},
                     {"flagged", r.flagged},
                     {"h", r.h}};
        return io::make_report("lemma4", params, r.min_value, 0.0, r.min_value + tol,
                               tol, r.pass, seed, detail::constants_block(), details);
    }

    if (cfg.check == "lemma5") {
        const double C = pick(cfg.C, 4.0);
        const disk::TaylorFunction f = make_function(cfg.function, cfg.alpha, cfg.seed);
        const disk::TaylorFunction fn = disk::normalized(f, cfg.alpha);
        const quad::ScalarField u = func::husimi(fn, disk::SpaceParams(cfg.alpha, 2.0));
        const stab::Lemma5Report r = stab::check_lemma5_bound(u, cfg.alpha, cfg.t0, C);
        params["C"] = C;
        params["t0"] = cfg.t0;
        const int wi = std::max(0, r.worst_index);
        json details{{"C_min", r.C_min}, {"T", r.T}, {"worst_t", r.t.empty() ? 0.0 : r.t[wi]}};
        const double lhs = r.rho.empty() ? 0.0 : r.rho[wi];
        const double rhs = r.bound.empty() ? 0.0 : r.bound[wi];
        return io::make_report("lemma5", params, lhs, rhs, r.worst_margin, 0.0, r.pass,
                               seed, detail::constants_block(), details);
    }

    if (cfg.check == "unitarity") {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-4;
        json cases = json::array();
        double worst = 0.0;  // worst |ratio - 1|
        double worst_ratio = 1.0;
        auto record = [&](double m, double s, const hp::UnitarityReport& r) {
            cases.push_back({{"m", m},
                             {"s", s},
                             {"ratio", r.ratio},
                             {"spectral_sq", r.spectral_sq},
                             {"disk_sq", r.disk_sq},
                             {"tail", r.tail}});
            if (std::abs(r.ratio - 1.0) > worst) {
                worst = std::abs(r.ratio - 1.0);
                worst_ratio = r.ratio;
            }
        };
        bool from_file = false;
        try {
            const hp::SpectralFunction F = io::load_spectral(cfg.function);
            from_file = true;
            record(F.terms[0].m, F.terms[0].s, hp::check_unitarity(F, cfg.alpha));
        } catch (const ConfigError&) {
            if (from_file) throw;
        }
        if (!from_file) {
            for (double m : {0.0, 1.0, 2.0})
                for (double s : {0.5, 1.0, 2.0}) {
                    hp::SpectralTerm t;
                    t.m = m;
                    t.s = s;
                    record(m, s, hp::check_unitarity(hp::SpectralFunction({t}), cfg.alpha));
                }
        }
        return io::make_report("unitarity", params, worst_ratio, 1.0, tol - worst, tol,
                               worst <= tol, seed, detail::constants_block(),
                               json{{"cases", cases}});
    }

    if (cfg.check == "hardy-remark") {
        const double tol = cfg.tol > 0 ? cfg.tol : 1e-7;
        const double C = pick(cfg.C, 1.0);
        const disk::TaylorFunction f = make_function(cfg.function, -1.0, cfg.seed);
        const func::ConvexG G = func::ConvexG::power(cfg.g_power);
        const hardy::RemarkReport r = hardy::hardy_remark_bound(f, G, C, tol);
        params["g_power"] = cfg.g_power;
        params["C"] = C;
        params["alpha"] = -1.0;
        json details{{"deficit", r.deficit},
                     {"T", r.T},
                     {"equality_case", r.equality_case},
                     {"lhs_err", r.lhs_err}};
        return io::make_report("hardy-remark", params, r.lhs, r.rhs, r.margin,
                               r.tolerance, r.pass, seed, detail::constants_block(),
                               details);
    }

    throw ConfigError("unknown check '" + cfg.check + "'");
}

// Seeded sweep: run `cfg.sweep` instances of the check on the random family,
// seeds seed, seed+1, ..., reduced in seed order.
inline std::vector<json> run_sweep(const RunConfig& cfg) {
    if (cfg.sweep < 1) throw ConfigError("sweep size must be >= 1");
    if (!cfg.seed) throw ConfigError("sweeps require --seed");
    const std::uint64_t base = *cfg.seed;
    return parallel_map<json>(cfg.sweep, cfg.threads, [&](int i) {
        RunConfig c = cfg;
        c.function = "random";
        c.seed = base + (std::uint64_t)i;
        c.sweep = 0;
        json rep = run_check(c);
        rep["index"] = i;
        return rep;
    });
}

}  // namespace bergmanlab::harness

// bergmanlab — norms, distribution profiles, and inequality verification for
// analytic functions on the disk under hyperbolically-weighted measures.
//
// Exit codes: 0 all checks passed; 1 a check failed; 2 configuration or
// input-format error; 3 numerical failure (quadrature breakdown, domain
// escape). Reports with identical configuration are byte-identical.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bergmanlab/harness.hpp"

namespace bl = bergmanlab;
using bl::harness::RunConfig;
using nlohmann::json;

namespace {

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw bl::ConfigError("cannot open output file '" + out_path + "'");
    out << text;
}

int run_norm(const std::string& fn_spec, double alpha, double p, int nodes,
             const std::string& format, const std::string& out,
             std::optional<std::uint64_t> seed) {
    const bl::disk::TaylorFunction f = bl::harness::make_function(fn_spec, alpha, seed);
    const double v = bl::func::bergman_norm(f, bl::disk::SpaceParams(alpha, p), nodes);
    if (format == "csv") {
        emit(out, "key,value\nnorm," + std::string(bl::fmt17(v)) + "\n");
    } else {
        json j{{"check", "norm"}, {"function", fn_spec}, {"alpha", alpha}, {"p", p},
               {"norm", v}};
        emit(out, j.dump(2) + "\n");
    }
    return 0;
}

int run_profile(const std::string& fn_spec, double alpha, double p, int points,
                const std::string& format, const std::string& out,
                std::optional<std::uint64_t> seed) {
    const bl::disk::TaylorFunction f = bl::harness::make_function(fn_spec, alpha, seed);
    const bl::quad::ScalarField u = bl::hardy::modulus_field(f, p, alpha);
    bl::quad::ProfileOpts opts;
    if (points > 0) opts.points = points;
    const bl::quad::DistributionProfile prof = bl::quad::distribution_profile(u, alpha, opts);

    // Boundary-limit profiles carry the concentration gap Phi per row.
    std::vector<double> phi;
    const bool boundary = alpha == -1.0;
    if (boundary) {
        phi.reserve(prof.t.size());
        for (std::size_t i = 0; i < prof.t.size(); ++i) {
            const double mass = bl::quad::levelset_integral(u, prof.t[i]).value;
            phi.push_back(mass - bl::hardy::mass_bound(prof.rho[i], alpha));
        }
    }
    if (format == "csv") {
        std::ostringstream ss;
        bl::io::write_profile_csv(ss, prof, boundary ? &phi : nullptr);
        emit(out, ss.str());
    } else {
        json j = bl::io::profile_to_json(prof);
        if (boundary) {
            for (std::size_t i = 0; i < phi.size(); ++i) j["rows"][i]["phi"] = phi[i];
        }
        emit(out, j.dump(2) + "\n");
    }
    return 0;
}

int run_verify(const RunConfig& cfg) {
    if (cfg.sweep > 0) {
        const std::vector<json> reports = bl::harness::run_sweep(cfg);
        std::ostringstream ss;
        bl::io::write_json_lines(ss, reports);
        emit(cfg.out, ss.str());
        for (const json& r : reports)
            if (!r.at("pass").get<bool>()) return 1;
        return 0;
    }
    const json rep = bl::harness::run_check(cfg);
    if (cfg.format == "csv") {
        std::ostringstream ss;
        bl::io::write_report_csv(ss, rep);
        emit(cfg.out, ss.str());
    } else {
        emit(cfg.out, rep.dump(2) + "\n");
    }
    return rep.at("pass").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted-disk analysis toolkit"};
    app.require_subcommand(1);

    std::string fn_spec = "one", format = "json", out_path;
    double alpha = 0.0, p = 2.0;
    int nodes = 0;
    std::uint64_t seed_val = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* sub, bool positional_fn) {
        if (positional_fn)
            sub->add_option("function", fn_spec,
                            "one|z|monomial:k|kernel:re,im|random|<coeffs.json>");
        sub->add_option("--alpha", alpha, "weight exponent (>= -1; -1 = boundary limit)");
        sub->add_option("--format", format, "json|csv")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", out_path, "write output to this file");
        sub->add_option("--seed", seed_val, "RNG seed (random family, sweeps)")
            ->each([&](const std::string&) { seed_given = true; });
    };

    CLI::App* norm = app.add_subcommand("norm", "norm of a function in the (alpha, p) space");
    add_common(norm, true);
    norm->add_option("--p", p, "integrability exponent");
    norm->add_option("--nodes", nodes, "radial quadrature nodes (0 = automatic)");

    int points = 0;
    CLI::App* profile =
        app.add_subcommand("profile", "superlevel distribution profile of |f|^p weight");
    add_common(profile, true);
    profile->add_option("--p", p, "integrability exponent");
    profile->add_option("--points", points, "profile sample count");
    profile->add_option("--nodes", points, "alias of --points");

    RunConfig cfg;
    double v_p = std::nan(""), v_q = std::nan(""), v_C = std::nan("");
    CLI::App* verify = app.add_subcommand("verify", "verify an inequality, emit a report");
    add_common(verify, true);
    verify
        ->add_option("--check", cfg.check,
                     "kulikov|theorem1|corollary2|theorem3|concentration|lemma4|"
                     "lemma5|unitarity|hardy-remark")
        ->required();
    verify->add_option("--p", v_p, "integrability exponent");
    verify->add_option("--q", v_q, "embedding target exponent (kulikov)");
    verify->add_option("--g-power", cfg.g_power, "exponent of the convex power functional");
    verify->add_option("--const-C", v_C, "comparison constant C (per-check default)");
    verify->add_option("--t0", cfg.t0, "inner cutoff of distribution bounds");
    verify->add_option("--T0", cfg.T0, "branch threshold for the deficit floor");
    verify->add_option("--nodes", cfg.nodes, "quadrature size override");
    verify->add_option("--tol", cfg.tol, "tolerance override (0 = per-check default)");
    verify->add_option("--sweep", cfg.sweep, "run N seeded instances on the random family");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::optional<std::uint64_t> seed =
            seed_given ? std::optional<std::uint64_t>(seed_val) : std::nullopt;
        if (norm->parsed()) return run_norm(fn_spec, alpha, p, nodes, format, out_path, seed);
        if (profile->parsed())
            return run_profile(fn_spec, alpha, p, points, format, out_path, seed);
        cfg.function = fn_spec;
        cfg.alpha = alpha;
        cfg.p = v_p;
        cfg.q = v_q;
        cfg.C = v_C;
        cfg.seed = seed;
        cfg.format = format;
        cfg.out = out_path;
        cfg.threads = bl::harness::threads_from_env();
        return run_verify(cfg);
    } catch (const bl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const bl::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

#pragma once

// Serialization: coefficient files, mixed states and spectral functions in
// JSON; distribution profiles in CSV; verification reports as canonical JSON
// documents hashed over their resolved configuration. All parse failures
// surface as ConfigError so the CLI can map them to its config exit code.
// Report bytes must be reproducible run to run: nlohmann::json keeps keys
// sorted and prints shortest-round-trip doubles, so dump() is stable; the
// CSV writer pins %.17g.

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bergmanlab/common.hpp"
#include "bergmanlab/disk_core.hpp"
#include "bergmanlab/halfplane.hpp"
#include "bergmanlab/operators.hpp"
#include "bergmanlab/quadrature.hpp"

namespace bergmanlab::io {

using json = nlohmann::json;

inline json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(what + ": malformed JSON");
    return j;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Coefficient files: a JSON array of [re, im] pairs, constant term first.
inline disk::TaylorFunction coefficients_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw ConfigError("coefficients: expected a non-empty JSON array of [re, im]");
    std::vector<cplx> a;
    a.reserve(j.size());
    for (const json& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ConfigError("coefficients: each entry must be a [re, im] number pair");
        const cplx c(e[0].get<double>(), e[1].get<double>());
        if (!finite(c)) throw ConfigError("coefficients: non-finite entry");
        a.push_back(c);
    }
    return disk::TaylorFunction(std::move(a));
}

inline disk::TaylorFunction load_coefficients(const std::string& path) {
    return coefficients_from_json(parse_json(read_file(path), path));
}

inline json coefficients_to_json(const disk::TaylorFunction& f) {
    json j = json::array();
    for (const cplx& c : f.coeffs()) j.push_back(json::array({c.real(), c.imag()}));
    return j;
}

// ---------------------------------------------------------------------------
// Mixed states: {"alpha": a, "components": [{"weight": w, "coefficients": [...]}]}
inline ops::MixedState mixed_state_from_json(const json& j) {
    if (!j.is_object() || !j.contains("alpha") || !j.contains("components"))
        throw ConfigError("mixed state: expected {alpha, components}");
    if (!j["alpha"].is_number()) throw ConfigError("mixed state: alpha must be a number");
    const json& comps = j["components"];
    if (!comps.is_array() || comps.empty())
        throw ConfigError("mixed state: components must be a non-empty array");
    std::vector<double> weights;
    std::vector<disk::TaylorFunction> fs;
    for (const json& c : comps) {
        if (!c.is_object() || !c.contains("weight") || !c.contains("coefficients") ||
            !c["weight"].is_number())
            throw ConfigError("mixed state: each component needs weight and coefficients");
        weights.push_back(c["weight"].get<double>());
        fs.push_back(coefficients_from_json(c["coefficients"]));
    }
    return ops::mixed_state(j["alpha"].get<double>(), std::move(weights), std::move(fs));
}

inline ops::MixedState load_mixed_state(const std::string& path) {
    return mixed_state_from_json(parse_json(read_file(path), path));
}

inline json mixed_state_to_json(const ops::MixedState& st) {
    json comps = json::array();
    for (size_t i = 0; i < st.rank(); ++i)
        comps.push_back({{"weight", st.weights[i]},
                         {"coefficients", coefficients_to_json(st.components[i])}});
    return {{"alpha", st.alpha}, {"components", comps}};
}

// ---------------------------------------------------------------------------
// Spectral functions: [{"m": .., "s": .., "amplitude_re": .., "amplitude_im": ..}]
inline hp::SpectralFunction spectral_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw ConfigError("spectral function: expected a non-empty JSON array of terms");
    std::vector<hp::SpectralTerm> terms;
    for (const json& e : j) {
        if (!e.is_object() || !e.contains("m") || !e.contains("s") ||
            !e.contains("amplitude_re") || !e.contains("amplitude_im"))
            throw ConfigError("spectral term: needs m, s, amplitude_re, amplitude_im");
        hp::SpectralTerm t;
        t.m = e["m"].get<double>();
        t.s = e["s"].get<double>();
        t.amplitude = cplx(e["amplitude_re"].get<double>(), e["amplitude_im"].get<double>());
        terms.push_back(t);
    }
    return hp::SpectralFunction(std::move(terms));
}

inline hp::SpectralFunction load_spectral(const std::string& path) {
    return spectral_from_json(parse_json(read_file(path), path));
}

// ---------------------------------------------------------------------------
// Profile CSV. Columns t, rho, rho_err, rho0; a phi column is appended when
// the caller provides per-row values (the boundary-limit profiles carry one).
inline void write_profile_csv(std::ostream& os, const quad::DistributionProfile& p,
                              const std::vector<double>* phi = nullptr) {
    if (phi && phi->size() != p.t.size())
        throw ConfigError("profile CSV: phi column length mismatch");
    os << "t,rho,rho_err,rho0";
    if (phi) os << ",phi";
    os << "\n";
    for (size_t i = 0; i < p.t.size(); ++i) {
        os << fmt17(p.t[i]) << ',' << fmt17(p.rho[i]) << ',' << fmt17(p.rho_err[i])
           << ',' << fmt17(p.rho0[i]);
        if (phi) os << ',' << fmt17((*phi)[i]);
        os << "\n";
    }
}

inline json profile_to_json(const quad::DistributionProfile& p) {
    json rows = json::array();
    for (size_t i = 0; i < p.t.size(); ++i)
        rows.push_back({{"t", p.t[i]},
                        {"rho", p.rho[i]},
                        {"rho_err", p.rho_err[i]},
                        {"rho0", p.rho0[i]}});
    json j{{"alpha", p.alpha},
           {"T", p.T},
           {"sign_changes", p.sign_changes},
           {"crossing_unique", p.crossing_unique},
           {"rows", rows}};
    if (p.t_star) j["t_star"] = *p.t_star;
    return j;
}

// ---------------------------------------------------------------------------
// Verification report document. The hash covers the resolved configuration
// (check name + parameters + seed), so two runs that claim the same config
// either agree byte-for-byte or visibly diverge in their results.
inline json make_report(const std::string& check, const json& params, double lhs,
                        double rhs, double margin, double tolerance, bool pass,
                        std::uint64_t seed, const json& constants,
                        const json& details = json()) {
    json cfg{{"check", check}, {"params", params}, {"seed", seed}};
    json rep{{"check", check},
             {"params", params},
             {"lhs", lhs},
             {"rhs", rhs},
             {"margin", margin},
             {"tolerance", tolerance},
             {"pass", pass},
             {"seed", seed},
             {"constants", constants},
             {"config_hash", hex64(fnv1a(cfg.dump()))}};
    if (!details.is_null()) rep["details"] = details;
    return rep;
}

// One JSON document per line, in the order given: sweep outputs are keyed by
// their parameter index, not by completion time.
inline void write_json_lines(std::ostream& os, const std::vector<json>& docs) {
    for (const json& d : docs) os << d.dump() << "\n";
}

// Flat key,value rendering of a report for the CSV output mode.
inline void write_report_csv(std::ostream& os, const json& rep) {
    os << "key,value\n";
    for (auto it = rep.begin(); it != rep.end(); ++it) {
        if (it.value().is_structured()) continue;  // nested params stay in JSON mode
        os << it.key() << ',' << it.value().dump() << "\n";
    }
}

}  // namespace bergmanlab::io

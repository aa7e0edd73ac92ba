// Serialization and run-harness behavior: JSON round trips with strict
// validation, CSV rendering, byte-stable report documents, named function
// families, environment-driven thread counts, and deterministic seeded
// sweeps whose output is independent of the thread count.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bergmanlab/harness.hpp"
#include "bergmanlab/io.hpp"

using namespace bergmanlab;
using Catch::Approx;
using io::json;

TEST_CASE("coefficient JSON round trip preserves every coefficient") {
    const disk::TaylorFunction f({cplx(1.0, 0.0), cplx(0.0, 0.5), cplx(-0.25, 0.125)});
    const json j = io::coefficients_to_json(f);
    const disk::TaylorFunction g =
        io::coefficients_from_json(io::parse_json(j.dump(), "round trip"));
    REQUIRE(g.degree() == f.degree());
    for (int k = 0; k <= f.degree(); ++k) {
        CHECK(g.coeff(k).real() == f.coeff(k).real());
        CHECK(g.coeff(k).imag() == f.coeff(k).imag());
    }
}

TEST_CASE("coefficient parsing rejects malformed input") {
    CHECK_THROWS_AS(io::parse_json("[", "broken"), ConfigError);
    CHECK_THROWS_AS(io::coefficients_from_json(json::array()), ConfigError);
    CHECK_THROWS_AS(io::coefficients_from_json(io::parse_json("[[1]]", "x")),
                    ConfigError);
    CHECK_THROWS_AS(io::coefficients_from_json(io::parse_json("[[1,\"a\"]]", "x")),
                    ConfigError);
    CHECK_THROWS_AS(io::coefficients_from_json(io::parse_json("{\"a\":1}", "x")),
                    ConfigError);

    // Non-finite entries are rejected even when constructed in memory.
    json bad = json::array();
    bad.push_back(json::array({std::numeric_limits<double>::infinity(), 0.0}));
    CHECK_THROWS_AS(io::coefficients_from_json(bad), ConfigError);
}

TEST_CASE("coefficient files load from disk and missing paths fail cleanly") {
    const std::string path = "/tmp/bergmanlab_test_coeffs.json";
    {
        std::ofstream out(path);
        out << "[[0.0, 0.0], [1.0, 0.0]]";
    }
    const disk::TaylorFunction f = io::load_coefficients(path);
    CHECK(f.degree() == 1);
    CHECK(f.coeff(1).real() == 1.0);
    std::remove(path.c_str());

    CHECK_THROWS_AS(io::load_coefficients("/tmp/definitely_not_here.json"),
                    ConfigError);
}

TEST_CASE("mixed state JSON round trip") {
    const std::string text = R"({
        "alpha": 0.5,
        "components": [
            {"weight": 0.6, "coefficients": [[1.0, 0.0]]},
            {"weight": 0.4, "coefficients": [[0.0, 0.0], [1.0, 0.0]]}
        ]
    })";
    const ops::MixedState st = io::mixed_state_from_json(io::parse_json(text, "st"));
    CHECK(st.alpha == 0.5);
    REQUIRE(st.rank() == 2);
    CHECK(st.weights[0] == Approx(0.6).margin(1e-15));
    CHECK(st.weights[1] == Approx(0.4).margin(1e-15));

    const json back = io::mixed_state_to_json(st);
    const ops::MixedState st2 = io::mixed_state_from_json(back);
    REQUIRE(st2.rank() == st.rank());
    for (size_t i = 0; i < st.rank(); ++i)
        CHECK(st2.weights[i] == Approx(st.weights[i]).margin(1e-15));
}

TEST_CASE("mixed state validation") {
    CHECK_THROWS_AS(io::mixed_state_from_json(io::parse_json("{}", "st")),
                    ConfigError);
    CHECK_THROWS_AS(
        io::mixed_state_from_json(io::parse_json(
            R"({"alpha": 0, "components": []})", "st")),
        ConfigError);
    CHECK_THROWS_AS(
        io::mixed_state_from_json(io::parse_json(
            R"({"alpha": 0, "components": [{"coefficients": [[1,0]]}]})", "st")),
        ConfigError);
    // Weights must sum to one; 0.5 + 0.6 fails inside the state constructor.
    CHECK_THROWS_AS(
        io::mixed_state_from_json(io::parse_json(
            R"({"alpha": 0, "components": [
                {"weight": 0.5, "coefficients": [[1,0]]},
                {"weight": 0.6, "coefficients": [[0,0],[1,0]]}]})",
            "st")),
        ConfigError);
}

TEST_CASE("spectral function JSON parsing") {
    const std::string text = R"([
        {"m": 0, "s": 1.0, "amplitude_re": 1.0, "amplitude_im": 0.0},
        {"m": 2, "s": 0.5, "amplitude_re": 0.0, "amplitude_im": -1.0}
    ])";
    const hp::SpectralFunction F = io::spectral_from_json(io::parse_json(text, "F"));
    REQUIRE(F.terms.size() == 2);
    CHECK(F.terms[0].m == 0.0);
    CHECK(F.terms[1].s == 0.5);
    CHECK(F.terms[1].amplitude.imag() == -1.0);

    CHECK_THROWS_AS(io::spectral_from_json(json::array()), ConfigError);
    CHECK_THROWS_AS(
        io::spectral_from_json(io::parse_json(R"([{"m": 0, "s": 1}])", "F")),
        ConfigError);
}

TEST_CASE("profile CSV rendering") {
    quad::DistributionProfile p;
    p.alpha = 0.0;
    p.T = 1.0;
    p.t = {0.1, 0.2};
    p.rho = {1.0, 2.0};
    p.rho_err = {0.0, 0.0};
    p.rho0 = {1.5, 2.5};

    std::ostringstream a;
    io::write_profile_csv(a, p);
    const std::string sa = a.str();
    CHECK(sa.rfind("t,rho,rho_err,rho0\n", 0) == 0);
    CHECK(std::count(sa.begin(), sa.end(), '\n') == 3);

    const std::vector<double> phi{-0.1, -0.2};
    std::ostringstream b;
    io::write_profile_csv(b, p, &phi);
    CHECK(b.str().rfind("t,rho,rho_err,rho0,phi\n", 0) == 0);

    // Two renders of the same profile are byte-identical.
    std::ostringstream c;
    io::write_profile_csv(c, p, &phi);
    CHECK(b.str() == c.str());

    const std::vector<double> short_phi{-0.1};
    std::ostringstream d;
    CHECK_THROWS_AS(io::write_profile_csv(d, p, &short_phi), ConfigError);
}

TEST_CASE("report documents are byte-stable and hash their configuration") {
    const json constants{{"c_prime", stab::c_prime}};
    const json params{{"function", "one"}, {"alpha", 0.0}};
    const json r1 = io::make_report("kulikov", params, 1.0, 2.0, 1.0, 1e-6, true, 7,
                                    constants);
    const json r2 = io::make_report("kulikov", params, 1.0, 2.0, 1.0, 1e-6, true, 7,
                                    constants);
    CHECK(r1.dump() == r2.dump());
    CHECK(r1["config_hash"].get<std::string>().size() == 16);

    const json r3 = io::make_report("kulikov", params, 1.0, 2.0, 1.0, 1e-6, true, 8,
                                    constants);
    CHECK(r1["config_hash"].get<std::string>() !=
          r3["config_hash"].get<std::string>());

    std::ostringstream lines;
    io::write_json_lines(lines, {r1, r3});
    const std::string lines_s = lines.str();
    CHECK(std::count(lines_s.begin(), lines_s.end(), '\n') == 2);

    std::ostringstream csv;
    io::write_report_csv(csv, r1);
    const std::string csv_s = csv.str();
    CHECK(csv_s.rfind("key,value\n", 0) == 0);
    CHECK(csv_s.find("pass,true") != std::string::npos);
    // Structured members stay out of the flat rendering.
    CHECK(csv_s.find("function") == std::string::npos);
}

TEST_CASE("named function families") {
    const auto one = harness::make_function("one", 0.0, std::nullopt);
    CHECK(one.degree() == 0);
    CHECK(one.coeff(0) == cplx(1.0));

    const auto z = harness::make_function("z", 0.0, std::nullopt);
    CHECK(z.degree() == 1);
    CHECK(z.coeff(1) == cplx(1.0));

    const auto m3 = harness::make_function("monomial:3", 0.0, std::nullopt);
    CHECK(m3.degree() == 3);
    CHECK(m3.coeff(3) == cplx(1.0));
    CHECK(m3.coeff(1) == cplx(0.0));

    const auto ker = harness::make_function("kernel:0.3,0.1", 1.0, std::nullopt);
    const auto ref = disk::normalized_kernel(cplx(0.3, 0.1), 1.0);
    REQUIRE(ker.degree() == ref.degree());
    CHECK(std::abs(ker.coeff(1) - ref.coeff(1)) < 1e-15);

    const auto rnd = harness::make_function("random", 0.5, 42);
    CHECK(rnd.degree() == 8);
    CHECK(disk::norm_sq(rnd, 0.5) == Approx(1.0).margin(1e-12));
    // Same seed, same function.
    const auto rnd2 = harness::make_function("random", 0.5, 42);
    CHECK(rnd2.coeff(3) == rnd.coeff(3));

    CHECK_THROWS_AS(harness::make_function("random", 0.0, std::nullopt), ConfigError);
    CHECK_THROWS_AS(harness::make_function("kernel:0.3", 0.0, std::nullopt),
                    ConfigError);
    CHECK_THROWS_AS(harness::make_function("monomial:5000", 0.0, std::nullopt),
                    ConfigError);
    CHECK_THROWS_AS(harness::make_function("/tmp/no_such_file.json", 0.0, std::nullopt),
                    ConfigError);
}

TEST_CASE("thread count comes from the environment, strictly validated") {
    unsetenv("BERGMANLAB_THREADS");
    CHECK(harness::threads_from_env() == 1);

    setenv("BERGMANLAB_THREADS", "3", 1);
    CHECK(harness::threads_from_env() == 3);

    setenv("BERGMANLAB_THREADS", "garbage", 1);
    CHECK_THROWS_AS(harness::threads_from_env(), ConfigError);
    setenv("BERGMANLAB_THREADS", "0", 1);
    CHECK_THROWS_AS(harness::threads_from_env(), ConfigError);
    setenv("BERGMANLAB_THREADS", "300", 1);
    CHECK_THROWS_AS(harness::threads_from_env(), ConfigError);
    setenv("BERGMANLAB_THREADS", "2x", 1);
    CHECK_THROWS_AS(harness::threads_from_env(), ConfigError);

    unsetenv("BERGMANLAB_THREADS");
}

TEST_CASE("parallel map keeps index order and propagates exceptions") {
    const auto sq = harness::parallel_map<int>(10, 3, [](int i) { return i * i; });
    REQUIRE(sq.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(sq[i] == i * i);

    CHECK_THROWS_AS(harness::parallel_map<int>(8, 2,
                                               [](int i) -> int {
                                                   if (i == 5)
                                                       throw std::runtime_error("boom");
                                                   return i;
                                               }),
                    std::runtime_error);
}

TEST_CASE("run_check: extremal equality for the constant function") {
    harness::RunConfig cfg;
    cfg.check = "kulikov";
    cfg.function = "one";
    cfg.alpha = 0.0;
    const json rep = harness::run_check(cfg);
    CHECK(rep["pass"].get<bool>());
    CHECK(rep["rhs"].get<double>() == Approx(pi / 3.0).margin(1e-12));
    CHECK(std::abs(rep["margin"].get<double>()) <= rep["tolerance"].get<double>());
    CHECK(rep["config_hash"].get<std::string>().size() == 16);
    CHECK(rep["constants"]["c_prime"].get<double>() == stab::c_prime);
}

TEST_CASE("run_check: embedding detail rides along when q is set") {
    harness::RunConfig cfg;
    cfg.check = "kulikov";
    cfg.function = "z";
    cfg.alpha = 0.0;
    cfg.q = 4.0;
    const json rep = harness::run_check(cfg);
    CHECK(rep["pass"].get<bool>());
    REQUIRE(rep.contains("details"));
    REQUIRE(rep["details"].contains("embedding"));
    CHECK(rep["details"]["embedding"]["margin"].get<double>() >= -1e-9);
    CHECK(rep["params"]["q"].get<double>() == 4.0);
}

TEST_CASE("run_check: remaining checks execute and report") {
    harness::RunConfig cfg;
    cfg.check = "lemma4";
    cfg.function = "one";
    cfg.alpha = 0.0;
    const json l4 = harness::run_check(cfg);
    CHECK(l4["pass"].get<bool>());
    CHECK(l4["details"]["flagged"].get<int>() == 0);

    cfg.check = "hardy-remark";
    cfg.function = "z";
    const json hr = harness::run_check(cfg);
    CHECK(hr["pass"].get<bool>());
    CHECK(hr["params"]["alpha"].get<double>() == -1.0);

    cfg.check = "nope";
    CHECK_THROWS_AS(harness::run_check(cfg), ConfigError);
}

TEST_CASE("seeded sweeps are ordered and thread-count independent") {
    harness::RunConfig cfg;
    cfg.check = "kulikov";
    cfg.alpha = 0.0;
    cfg.sweep = 4;
    cfg.seed = 7;
    cfg.threads = 1;
    const auto docs1 = harness::run_sweep(cfg);
    REQUIRE(docs1.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(docs1[i]["index"].get<int>() == i);
        CHECK(docs1[i]["seed"].get<std::uint64_t>() == 7u + (unsigned)i);
        CHECK(docs1[i]["pass"].get<bool>());
    }

    cfg.threads = 2;
    const auto docs2 = harness::run_sweep(cfg);
    REQUIRE(docs2.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(docs1[i].dump() == docs2[i].dump());

    cfg.sweep = 0;
    CHECK_THROWS_AS(harness::run_sweep(cfg), ConfigError);
    cfg.sweep = 2;
    cfg.seed.reset();
    CHECK_THROWS_AS(harness::run_sweep(cfg), ConfigError);
}

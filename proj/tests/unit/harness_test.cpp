#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "wavelab/harness.hpp"
#include "wavelab/io.hpp"

using namespace wavelab;

TEST_CASE("config parser: sections, comments, lists, repeats") {
    auto cfg = Config::parse_string(R"(
# top comment
[model]
preset = toy
c1 = 0.5   # trailing comment
[sweep]
beta = 0.3 0.2 0.13 0.09
pair = 1 0.7
pair = 1 -0.7
)");
    CHECK(cfg.get("model", "preset") == "toy");
    CHECK(cfg.get_double("model", "c1") == doctest::Approx(0.5));
    auto betas = cfg.get_doubles("sweep", "beta");
    REQUIRE(betas.size() == 4);
    CHECK(betas[2] == doctest::Approx(0.13));
    auto pairs = cfg.get_all("sweep", "pair");
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[1] == "1 -0.7");
    CHECK(cfg.get_or("model", "missing", "fb") == "fb");
    CHECK_THROWS_AS(cfg.get("model", "missing"), ConfigError);
    CHECK_THROWS_AS(Config::parse_string("[broken\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse_string("novalue\n"), ConfigError);
}

TEST_CASE("log-log fit recovers exact power laws") {
    std::vector<double> x{0.3, 0.2, 0.13, 0.09}, y;
    for (double v : x) y.push_back(2.5 * std::pow(v, 1.7));
    auto f = fit_loglog(x, y);
    CHECK(f.slope == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(2.5)).epsilon(1e-9));
    CHECK(f.r2 == doctest::Approx(1.0));
    // noise-free but non-power-law data keep r2 < 1
    std::vector<double> y2{1.0, 0.5, 0.4, 0.35};
    auto f2 = fit_loglog(x, y2);
    CHECK(f2.r2 < 1.0);
}

TEST_CASE("report emit + load round trip, deterministic bytes") {
    ScalingReport rep;
    rep.rows.push_back({"preservation", 0.3, 0.09, 1.25e-2});
    rep.rows.push_back({"preservation", 0.2, 0.04, 5.5e-3});
    rep.rows.push_back({"preservation", 0.13, 0.0169, 2.3e-3});
    rep.rows.push_back({"preservation", 0.09, 0.0081, 1.1e-3});
    MeasurementFit mf;
    mf.measurement = "preservation";
    mf.fit = fit_loglog({0.09, 0.04, 0.0169, 0.0081},
                        {1.25e-2, 5.5e-3, 2.3e-3, 1.1e-3});
    mf.slope_threshold = 0.8;
    mf.pass = mf.fit.slope >= 0.8;
    rep.fits.push_back(mf);

    std::string dir = "harness_test_out";
    emit_report(rep, dir);
    auto loaded = load_report_csv(dir + "/report.csv");
    REQUIRE(loaded.rows.size() == 4);
    REQUIRE(loaded.fits.size() == 1);
    CHECK(loaded.rows[1].value == doctest::Approx(5.5e-3));
    CHECK(loaded.fits[0].pass == rep.fits[0].pass);

    // golden determinism: emitting twice gives identical bytes
    std::ifstream f1(dir + "/report.csv");
    std::string bytes1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
    emit_report(rep, dir);
    std::ifstream f2(dir + "/report.csv");
    std::string bytes2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
    CHECK(bytes1 == bytes2);
    CHECK(std::filesystem::exists(dir + "/preservation.dat"));
    CHECK(std::filesystem::exists(dir + "/report.txt"));

    // empty report: header-only csv
    ScalingReport empty;
    emit_report(empty, dir + "/empty");
    std::ifstream fe(dir + "/empty/report.csv");
    std::string line;
    int nlines = 0;
    while (std::getline(fe, line))
        if (!line.empty()) ++nlines;
    CHECK(nlines == 1);
}

TEST_CASE("field dump round trip and header validation") {
    KGrid g(1, 16, 0.5);
    SpectralField f(g, 2);
    for (int a = 0; a < g.M; ++a) {
        f.at(a, 0) = cplx(0.1 * a, -0.2 * a);
        f.at(a, 1) = cplx(1.0, 0.5 * a);
    }
    dump_field(f, 1, "harness_test_field.dat");
    auto [g2, J] = load_field("harness_test_field.dat");
    CHECK(J == 1);
    CHECK(g2.grid() == g);
    CHECK(g2.max_abs_diff(f) < 1e-9);
    std::ofstream bad("harness_test_bad.dat");
    bad << "junk\n";
    bad.close();
    CHECK_THROWS_AS(load_field("harness_test_bad.dat"), IOFailureError);
}

TEST_CASE("band table loader validates monotone k") {
    {
        std::ofstream os("harness_test_band.tbl");
        os << "# k omega\n-1.0 2.0\n0.0 1.0\n1.0 2.0\n";
    }
    auto [ks, ws] = load_band_table("harness_test_band.tbl");
    REQUIRE(ks.size() == 3);
    CHECK(ws[0] == 2.0);
    {
        std::ofstream os("harness_test_band_bad.tbl");
        os << "0.0 1.0\n0.0 2.0\n";
    }
    CHECK_THROWS_AS(load_band_table("harness_test_band_bad.tbl"),
                    IOFailureError);
}

TEST_CASE("ode experiment runs end to end from config text") {
    auto cfg = Config::parse_string(R"(
[experiment]
measurement = ode
tau_star = 0.5
[sweep]
rho = 1e-1 3e-2 1e-2
slope_min = 0.8
)");
    ExperimentConfig exp;
    exp.cfg = cfg;
    exp.measurement = "ode";
    auto rep = run_experiment(exp);
    REQUIRE(rep.fits.size() == 2);
    CHECK(rep.fits[0].pass);
    CHECK(rep.fits[1].pass);
    CHECK(rep.rows.size() == 6);
}

TEST_CASE("windowed full solve agrees with the global picard solve") {
    KGrid g(1, 256, 0.08);
    auto bs = make_nls_band(1.0, 0.0, 0.5);
    ChiTensor chi(2, 3);
    chi.add_monomial(0, {0, 0, 1}, cplx(0.0, 0.4));
    chi.add_monomial(1, {1, 1, 0}, cplx(0.0, -0.4));
    auto chim = SusceptibilityModel::constant({{3, chi}});
    WavepacketSpec spec;
    spec.n = 1;
    spec.k_star = kv(2.0);
    spec.env_plus = [](const Kvec& eta) {
        return cplx(std::exp(-eta[0] * eta[0] / 0.18), 0.0);
    };
    spec.reality = true;
    spec.beta = 0.4;
    spec.eps = 0.2;
    SpectralField h = synthesize_multiwavepacket({spec}, g, bs);
    EvolutionProblem prob(bs, chim, 0.2, h, 0.2);
    SolverConfig cfg;
    cfg.dtau = 2.5e-3;
    cfg.picard_max_iter = 200;
    auto [tg, dg] = solve_integrated(prob, cfg);
    auto tw = solve_windowed(prob, 2.5e-3, 80);
    REQUIRE(tg.u.size() == tw.u.size());
    double worst = 0.0;
    for (size_t i = 0; i < tg.u.size(); ++i)
        worst = std::max(worst, (tg.u[i] - tw.u[i]).l1_norm());
    CHECK(worst < 1e-8);
}

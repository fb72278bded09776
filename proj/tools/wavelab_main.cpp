// wavelab command line: resonance reports, simulations, parameter sweeps,
// reduction-ladder comparisons and report reformatting.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "wavelab/harness.hpp"
#include "wavelab/io.hpp"

using namespace wavelab;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9e", v);
    return buf;
}

BandStructure band_from_config(const Config& cfg) {
    std::istringstream is(cfg.get("model", "band"));
    std::string kind;
    is >> kind;
    if (kind == "two_speed") {
        double c1, c2;
        is >> c1 >> c2;
        return make_two_speed_band(c1, c2);
    }
    if (kind == "nls") {
        double g0, g1, g2;
        is >> g0 >> g1 >> g2;
        return make_nls_band(g0, g1, g2);
    }
    if (kind == "coupled_nls") {
        double a0, a1, a2, b0, b1, b2;
        is >> a0 >> a1 >> a2 >> b0 >> b1 >> b2;
        return make_coupled_nls_band(a0, a1, a2, b0, b1, b2);
    }
    if (kind == "constant") {
        std::vector<double> w;
        double x;
        while (is >> x) w.push_back(x);
        return make_constant_band(w);
    }
    if (kind == "tabulated") {
        std::string path;
        is >> path;
        auto [ks, ws] = load_band_table(path);
        return make_tabulated_band(ks, ws);
    }
    throw ConfigError("unknown band kind " + kind);
}

int cmd_resonance(const std::string& config, const std::string& format) {
    Config cfg = Config::parse_file(config);
    BandStructure bs = band_from_config(cfg);
    std::vector<NKPair> pairs;
    for (auto& p : cfg.get_all("resonance", "pair")) {
        std::istringstream is(p);
        int n;
        double k;
        if (!(is >> n >> k)) throw ConfigError("bad pair line: " + p);
        pairs.push_back({n, kv(k)});
    }
    NKSpectrum S(pairs);
    std::vector<double> mfd = cfg.get_doubles("resonance", "m_f");
    std::vector<int> M_F(mfd.begin(), mfd.end());
    ResonanceOptions opt;
    opt.tol = cfg.get_double_or("resonance", "tol", 1e-9);
    int max_iter = cfg.get_int_or("resonance", "max_iter", 8);

    auto sel = resonance_selection(S, bs, M_F, opt);
    auto clo = closure_and_invariance(S, bs, M_F, opt, max_iter);

    const bool csv = format == "csv";
    std::ostream& os = std::cout;
    if (csv) {
        os << "m,zeta,n,lambda,delta,kappa,omega_residual,class\n";
    } else {
        os << "resonance solution table (" << sel.base.solutions.size()
           << " solutions)\n";
        os << "  m zeta n lambda           delta     kappa        Omega     "
              "class\n";
    }
    for (auto& s : sel.base.solutions) {
        std::string cls = s.cls == SolutionClass::universal ? "universal"
                          : s.cls == SolutionClass::internal ? "internal"
                                                             : "external";
        std::ostringstream dv;
        auto d = s.lambda.delta(S.size());
        for (size_t i = 0; i < d.size(); ++i) dv << (i ? " " : "") << d[i];
        if (csv) {
            os << s.m << "," << s.zeta << "," << s.n << "," << s.lambda.str()
               << "," << dv.str() << "," << fmt(s.k_out[0]) << ","
               << fmt(s.omega_resid) << "," << cls << "\n";
        } else {
            os << "  " << s.m << " " << (s.zeta > 0 ? "+" : "-") << "    "
               << s.n << " " << s.lambda.str() << "  (" << dv.str() << ")  "
               << fmt(s.k_out[0]) << " " << fmt(s.omega_resid) << " " << cls
               << "\n";
        }
    }
    if (!csv) {
        os << "R(S): ";
        for (auto& p : sel.R_S.pairs()) os << "(" << p.n << "," << fmt(p.k[0]) << ") ";
        os << "\nR_inf(S): ";
        for (auto& p : clo.R_inf.pairs()) os << "(" << p.n << "," << fmt(p.k[0]) << ") ";
        os << "\nresonance_invariant: " << (clo.resonance_invariant ? "yes" : "no")
           << "\nuniversally_invariant: "
           << (clo.universally_invariant ? "yes" : "no")
           << "\niterations: " << clo.iterations
           << (clo.converged ? "" : " (no convergence; partial closure)")
           << "\n";
        if (!sel.base.near_misses.empty())
            os << "near-resonances within 1e3 tol: "
               << sel.base.near_misses.size() << "\n";
        for (auto& skip : sel.base.skipped) os << "skipped: " << skip << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& config, const std::string& out) {
    Config cfg = Config::parse_file(config);
    std::filesystem::create_directories(out);
    std::string preset = cfg.get_or("model", "preset", "toy");
    if (preset != "toy")
        throw ConfigError("simulate: only the toy preset is wired up");
    ToyModel m;
    m.c1 = cfg.get_double_or("model", "c1", 0.5);
    m.c2 = cfg.get_double_or("model", "c2", 1.3);
    m.a1 = cfg.get_double_or("model", "a1", 0.4);
    m.a2 = cfg.get_double_or("model", "a2", 0.7);
    m.k1_star = cfg.get_double_or("model", "k1_star", 4.0);
    m.k2_star = cfg.get_double_or("model", "k2_star", 6.0);
    m.beta = cfg.get_double_or("model", "beta", 0.4);
    m.rho = cfg.get_double_or("model", "rho", 0.1);
    double h1 = cfg.get_double_or("model", "height1", 1.0);
    double r1 = cfg.get_double_or("model", "radius1", 3.0);
    if (h1 > 0) m.phi1 = bump_envelope(h1, r1);
    double h2 = cfg.get_double_or("model", "height2", 0.0);
    double r2 = cfg.get_double_or("model", "radius2", 2.0);
    if (h2 > 0) m.phi2 = bump_envelope(h2, r2);
    KGrid grid(1, cfg.get_int_or("grid", "M", 1024),
               cfg.get_double_or("grid", "dk", 0.125));
    double tau_star = cfg.get_double_or("solver", "tau_star", 0.0);
    if (tau_star <= 0)
        tau_star = cfg.get_double_or("solver", "tau_star_frac_of_blowup", 0.4) *
                   m.blowup_time(1, grid);
    auto prob = toy_problem(m, grid, tau_star);
    SolverConfig scfg;
    double dtau = cfg.get_double_or("solver", "dtau", 1e-3);
    int snaps = cfg.get_int_or("solver", "snapshots", 8);
    auto traj = solve_windowed(prob, dtau, snaps, scfg);
    std::ofstream diag(out + "/diagnostics.csv");
    diag << "tau,l1_norm,residual,iterations\n";
    for (size_t i = 0; i < traj.u.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%s/snap_%04zu.dat", out.c_str(), i);
        dump_field(traj.u[i], 2, name);
        diag << fmt(traj.tau_at(static_cast<int>(i))) << ","
             << fmt(traj.u[i].l1_norm()) << "," << fmt(0.0) << "," << 1 << "\n";
    }
    std::cout << "wrote " << traj.u.size() << " snapshots to " << out << "\n";
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& out,
              int seed_override) {
    ExperimentConfig exp = load_experiment(config);
    if (!out.empty()) exp.out_dir = out;
    if (seed_override >= 0) exp.seed = static_cast<uint64_t>(seed_override);
    auto rep = run_experiment(exp);
    emit_report(rep, exp.out_dir);
    std::cout << report_text_summary(rep);
    return rep.all_pass() ? 0 : 1;
}

int cmd_compare(const std::string& config, const std::string& out) {
    Config cfg = Config::parse_file(config);
    auto points = run_ladder(cfg);
    std::filesystem::create_directories(out);
    std::ofstream os(out + "/gaps.csv");
    os << "level_a,level_b,rho,beta,sup_tau_l1_gap\n";
    for (auto& p : points)
        os << p.level_a << "," << p.level_b << "," << fmt(p.rho) << ","
           << fmt(p.beta) << "," << fmt(p.gap) << "\n";
    std::cout << "wrote " << points.size() << " ladder gaps to " << out
              << "/gaps.csv\n";
    return 0;
}

int cmd_report(const std::string& out, const std::string& format) {
    auto rep = load_report_csv(out + "/report.csv");
    if (format == "csv") {
        std::ifstream is(out + "/report.csv");
        std::cout << is.rdbuf();
    } else {
        std::cout << report_text_summary(rep);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavelab: wavepacket preservation toolkit"};
    app.require_subcommand(1);

    std::string config, out = "out", format = "text";
    int seed = -1;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("--config", config, "config file")->required();
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "seed override");
        sub->add_option("--format", format, "csv|text")
            ->check(CLI::IsMember({"csv", "text"}));
    };

    auto* res = app.add_subcommand("resonance", "resonance-selection report");
    add_common(res, true);
    auto* sim = app.add_subcommand("simulate", "solve and dump snapshots");
    add_common(sim, true);
    auto* swp = app.add_subcommand("sweep", "parameter sweep with slope fits");
    add_common(swp, true);
    auto* cmp = app.add_subcommand("compare", "reduction-ladder gaps");
    add_common(cmp, true);
    auto* rpt = app.add_subcommand("report", "reformat an existing report");
    add_common(rpt, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (res->parsed()) return cmd_resonance(config, format);
        if (sim->parsed()) return cmd_simulate(config, out);
        if (swp->parsed()) return cmd_sweep(config, out, seed);
        if (cmp->parsed()) return cmd_compare(config, out);
        if (rpt->parsed()) return cmd_report(out, format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

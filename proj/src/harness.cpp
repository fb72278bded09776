#include "wavelab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wavelab/fft.hpp"

namespace wavelab {

// Config ----------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
    Config c;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto pos = line.find('#');
        if (pos != std::string::npos) line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key");
        c.kv_[section][key].push_back(val);
    }
    return c;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IOFailureError("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_string(ss.str());
}

bool Config::has(const std::string& s, const std::string& k) const {
    auto it = kv_.find(s);
    if (it == kv_.end()) return false;
    return it->second.count(k) > 0;
}

std::string Config::get(const std::string& s, const std::string& k) const {
    if (!has(s, k))
        throw ConfigError("missing config key [" + s + "] " + k);
    return kv_.at(s).at(k).back();
}

std::string Config::get_or(const std::string& s, const std::string& k,
                           const std::string& fb) const {
    return has(s, k) ? get(s, k) : fb;
}

double Config::get_double(const std::string& s, const std::string& k) const {
    return std::stod(get(s, k));
}

double Config::get_double_or(const std::string& s, const std::string& k,
                             double fb) const {
    return has(s, k) ? std::stod(get(s, k)) : fb;
}

int Config::get_int_or(const std::string& s, const std::string& k,
                       int fb) const {
    return has(s, k) ? std::stoi(get(s, k)) : fb;
}

bool Config::get_bool_or(const std::string& s, const std::string& k,
                         bool fb) const {
    if (!has(s, k)) return fb;
    std::string v = get(s, k);
    return v == "1" || v == "true" || v == "yes" || v == "on";
}

std::vector<double> Config::get_doubles(const std::string& s,
                                        const std::string& k) const {
    std::istringstream is(get(s, k));
    std::vector<double> out;
    double x;
    while (is >> x) out.push_back(x);
    if (out.empty()) throw ConfigError("empty numeric list for key " + k);
    return out;
}

std::vector<std::string> Config::get_all(const std::string& s,
                                         const std::string& k) const {
    if (!has(s, k)) return {};
    return kv_.at(s).at(k);
}

// fitting ----------------------------------------------------------------------

FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int n = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (y[i] <= 0 || x[i] <= 0) continue;
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
        ++n;
    }
    FitResult f;
    if (n < 2) return f;
    double det = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (y[i] <= 0 || x[i] <= 0) continue;
        double e = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
        ss_res += e * e;
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

// windowed full solve -----------------------------------------------------------

Trajectory solve_windowed(const EvolutionProblem& prob, double window, int keep,
                          SolverConfig cfg) {
    int n_win =
        std::max(1, static_cast<int>(std::lround(prob.tau_star / window)));
    keep = std::max(1, std::min(keep, n_win));
    const int stride = (n_win + keep - 1) / keep;
    n_win = stride * ((n_win + stride - 1) / stride);
    window = prob.tau_star / n_win;

    Trajectory out;
    out.tau0 = 0.0;
    out.dtau = window * stride;
    out.u.push_back(prob.h);
    EvolutionProblem cur = prob;  // shares band tables across windows
    cur.tau_star = window;
    SolverConfig wcfg = cfg;
    // pin the substep estimate once; supports spread mildly under the
    // convolution, covered by the estimate's arity margin
    if (wcfg.phase_rate_hint <= 0)
        wcfg.phase_rate_hint = estimate_phase_rate(prob);
    for (int i = 0; i < n_win; ++i) {
        wcfg.tau0 = i * window;
        wcfg.dtau = window;
        auto [traj, diag] = solve_integrated(cur, wcfg);
        cur.h = traj.u.back();
        if ((i + 1) % stride == 0) out.u.push_back(cur.h);
    }
    return out;
}

int worker_count() {
    const char* env = std::getenv("WAVELAB_THREADS");
    if (!env) return 1;
    int n = std::atoi(env);
    return std::max(1, n);
}

// presets ----------------------------------------------------------------------

namespace {

cplx gaussian_env(double eta, double sigma) {
    return cplx(std::exp(-eta * eta / (2 * sigma * sigma)) /
                    (sigma * std::sqrt(two_pi)),
                0.0);
}

std::function<cplx(const Kvec&)> envelope_from(const Config& cfg, double beta,
                                               double eps) {
    std::string kind = cfg.get_or("model", "envelope", "gaussian");
    std::istringstream is(kind);
    std::string name;
    is >> name;
    if (name == "gaussian") {
        double sigma = cfg.get_double_or("model", "sigma", 0.3);
        return [sigma](const Kvec& eta) { return gaussian_env(eta[0], sigma); };
    }
    if (name == "compact") {
        double frac = 0.8;
        is >> frac;
        double R = frac * std::pow(beta, -eps);
        return [R](const Kvec& eta) {
            double t = eta[0] / R;
            if (std::abs(t) >= 1.0) return cplx(0.0);
            double q = 1.0 - t * t;
            return cplx(q * q * q, 0.0);
        };
    }
    throw ConfigError("unknown envelope kind " + kind);
}

struct SingleNls {
    EvolutionProblem prob;
    NKSpectrum S;
    double eps;
};

SingleNls make_single_nls(const Config& cfg, const KGrid& grid, double beta,
                          double rho, double tau_star) {
    double g0 = cfg.get_double_or("model", "g0", 1.0);
    double g1 = cfg.get_double_or("model", "g1", 0.0);
    double g2 = cfg.get_double_or("model", "g2", 0.5);
    double b = cfg.get_double_or("model", "b", 0.3);
    double kstar = cfg.get_double_or("model", "k_star", 1.0);
    double eps = cfg.get_double_or("model", "eps", 0.2);
    std::string preset = cfg.get_or("model", "preset", "single_nls");

    WavepacketSpec spec;
    spec.n = 1;
    spec.k_star = kv(kstar);
    spec.env_plus = envelope_from(cfg, beta, eps);
    spec.reality = true;
    spec.beta = beta;
    spec.eps = eps;

    if (preset == "two_band_nls") {
        // two packets sharing the carrier in different bands, with a
        // cross-band c-coupling (the off-resonance content of the ladder)
        double g02 = cfg.get_double_or("model", "g02", 1.5);
        double c22 = cfg.get_double_or("model", "c22", 0.6);
        double c12 = cfg.get_double_or("model", "c12", 0.0);
        auto bs = make_coupled_nls_band(g0, g1, g2, g02, g1, g2);
        ChiTensor chi(4, 3);
        auto add_pair = [&chi](int out, std::vector<int> ins, cplx w) {
            if (w == cplx(0.0)) return;
            chi.add_monomial(out, ins, w);
            std::vector<int> cins;
            for (int i : ins) cins.push_back(i ^ 1);
            chi.add_monomial(out ^ 1, cins, std::conj(w));
        };
        add_pair(0, {0, 1, 0}, cplx(0.0, b));
        add_pair(2, {2, 3, 2}, cplx(0.0, 0.8 * b));
        add_pair(2, {0, 1, 0}, cplx(0.0, c22));
        add_pair(0, {2, 3, 2}, cplx(0.0, c12));
        auto chim = SusceptibilityModel::constant({{3, chi}});
        WavepacketSpec s2 = spec;
        s2.n = 2;
        SpectralField h = synthesize_multiwavepacket({spec, s2}, grid, bs);
        NKSpectrum S({{1, kv(kstar)}, {2, kv(kstar)}});
        return {EvolutionProblem(bs, chim, rho, std::move(h), tau_star), S,
                eps};
    }

    auto bs = make_nls_band(g0, g1, g2);
    ChiTensor chi(2, 3);
    chi.add_monomial(0, {0, 0, 1}, cplx(0.0, b));
    chi.add_monomial(1, {1, 1, 0}, cplx(0.0, -b));
    // off-resonance third-harmonic channel: the order-rho content of the
    // preservation and full-vs-interaction measurements
    double c_thg = cfg.get_double_or("model", "c_thg", 0.0);
    if (c_thg != 0.0) {
        chi.add_monomial(0, {0, 0, 0}, cplx(0.0, c_thg));
        chi.add_monomial(1, {1, 1, 1}, cplx(0.0, -c_thg));
    }
    auto chim = SusceptibilityModel::constant({{3, chi}});
    std::vector<WavepacketSpec> specs{spec};
    std::vector<NKPair> pairs{{1, kv(kstar)}};
    if (preset == "counter_nls") {
        WavepacketSpec s2 = spec;
        s2.k_star = kv(-kstar);
        specs.push_back(s2);
        pairs.push_back({1, kv(-kstar)});
    }
    SpectralField h = synthesize_multiwavepacket(specs, grid, bs);
    NKSpectrum S(pairs);
    return {EvolutionProblem(bs, chim, rho, std::move(h), tau_star), S, eps};
}

CoupledNlsParams coupled_params_from(const Config& cfg, double beta,
                                     double rho) {
    CoupledNlsParams p;
    p.g01 = cfg.get_double_or("model", "g01", 1.0);
    p.g11 = cfg.get_double_or("model", "g11", 0.0);
    p.g21 = cfg.get_double_or("model", "g21", 0.5);
    p.g02 = cfg.get_double_or("model", "g02", 1.5);
    p.g12 = cfg.get_double_or("model", "g12", 0.0);
    p.g22 = cfg.get_double_or("model", "g22", 0.5);
    p.b11 = cplx(0.0, cfg.get_double_or("model", "b11", 0.4));
    p.b12 = cplx(0.0, cfg.get_double_or("model", "b12", 0.6));
    p.b21 = cplx(0.0, cfg.get_double_or("model", "b21", 0.5));
    p.b22 = cplx(0.0, cfg.get_double_or("model", "b22", 0.3));
    p.c12 = cplx(0.0, cfg.get_double_or("model", "c12", 0.0));
    p.c22 = cplx(0.0, cfg.get_double_or("model", "c22", 0.0));
    p.k1_star = cfg.get_double_or("model", "k1_star", 1.0);
    p.k2_star = cfg.get_double_or("model", "k2_star", -1.0);
    double sigma = cfg.get_double_or("model", "sigma", 0.3);
    p.env1 = [sigma](const Kvec& eta) { return gaussian_env(eta[0], sigma); };
    p.env2 = [sigma](const Kvec& eta) { return gaussian_env(eta[0], sigma); };
    p.beta = beta;
    p.eps = cfg.get_double_or("model", "eps", 0.2);
    p.rho = rho;
    return p;
}

ODECase ode4_preset(const Config& cfg) {
    ODECase c;
    c.w0 = {1.0, std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0)};
    c.excited = {1, 2};
    PolynomialMap F;
    F.ncomp = 8;
    double bu = cfg.get_double_or("model", "b_universal", 0.5);
    double bn = cfg.get_double_or("model", "b_nonresonant", 0.5);
    F.terms.push_back({0, {0, 1, 0}, cplx(0.0, bu)});
    F.terms.push_back({1, {0, 1, 1}, cplx(0.0, -bu)});
    F.terms.push_back({2, {2, 3, 2}, cplx(0.0, 0.8 * bu)});
    F.terms.push_back({3, {2, 3, 3}, cplx(0.0, -0.8 * bu)});
    F.terms.push_back({0, {2, 3, 0}, cplx(0.0, 0.6 * bu)});
    F.terms.push_back({1, {2, 3, 1}, cplx(0.0, -0.6 * bu)});
    // non-resonant couplings into B' = {3, 4}
    F.terms.push_back({4, {0, 2, 1}, cplx(bn, 0.0)});
    F.terms.push_back({6, {0, 0, 3}, cplx(0.8 * bn, 0.0)});
    c.F = F;
    return c;
}

double rho_of_beta(const Config& cfg, double beta) {
    std::string law = cfg.get_or("sweep", "rho_law", "fixed");
    std::istringstream is(law);
    std::string kind;
    is >> kind;
    if (kind == "fixed") {
        double r;
        if (is >> r) return r;
        return cfg.get_double("sweep", "rho");
    }
    if (kind == "power") {
        double C = 1.0, kap = 2.0;
        is >> C >> kap;
        return C * std::pow(beta, kap);
    }
    throw ConfigError("unknown rho_law " + law);
}

KGrid grid_from(const Config& cfg) {
    return KGrid(1, cfg.get_int_or("grid", "M", 1024),
                 cfg.get_double_or("grid", "dk", 0.01));
}

double tail_measure(const EvolutionProblem& prob, const NKSpectrum& S,
                    const Trajectory& traj, double beta, double eps) {
    double worst = 0.0;
    for (auto& u : traj.u) {
        SpectralField tail = u;
        for (int l = 1; l <= S.size(); ++l)
            tail -= band_window_project(u, S, l, beta, eps, prob.bs);
        worst = std::max(worst, tail.l1_norm());
    }
    return worst;
}

}  // namespace

ExperimentConfig load_experiment(const std::string& path) {
    ExperimentConfig e;
    e.cfg = Config::parse_file(path);
    e.out_dir = e.cfg.get_or("experiment", "out", "out");
    e.seed = static_cast<uint64_t>(e.cfg.get_int_or("experiment", "seed", 1));
    e.measurement = e.cfg.get_or("experiment", "measurement", "preservation");
    return e;
}

ScalingReport run_experiment(const ExperimentConfig& exp) {
    const Config& cfg = exp.cfg;
    ScalingReport rep;
    const std::string meas = exp.measurement;
    const double tau_star = cfg.get_double_or("experiment", "tau_star", 0.25);
    const double slope_min = cfg.get_double_or("sweep", "slope_min", 0.8);
    const double r2_min = cfg.get_double_or("sweep", "r2_min", 0.95);
    SolverConfig scfg;
    scfg.c_osc = cfg.get_double_or("solver", "c_osc", 0.1);
    const double dtau = cfg.get_double_or("solver", "dtau", 1e-3);
    const int snaps = cfg.get_int_or("solver", "snapshots", 8);

    if (meas == "preservation") {
        KGrid grid = grid_from(cfg);
        std::vector<double> betas = cfg.get_doubles("sweep", "beta");
        std::vector<double> xs, ys;
        for (double beta : betas) {
            double rho = rho_of_beta(cfg, beta);
            auto mdl = make_single_nls(cfg, grid, beta, rho, tau_star);
            auto traj = solve_windowed(mdl.prob, dtau, snaps, scfg);
            double v = tail_measure(mdl.prob, mdl.S, traj, beta, mdl.eps);
            rep.rows.push_back({meas, beta, rho, v});
            xs.push_back(rho);
            ys.push_back(v);
        }
        if (cfg.get_bool_or("experiment", "refinement_check", false)) {
            double beta = betas.back();
            double rho = rho_of_beta(cfg, beta);
            auto mdl = make_single_nls(cfg, grid, beta, rho, tau_star);
            auto traj = solve_windowed(mdl.prob, dtau / 2, snaps, scfg);
            double v = tail_measure(mdl.prob, mdl.S, traj, beta, mdl.eps);
            double rel = std::abs(v - ys.back()) / std::max(ys.back(), 1e-300);
            rep.notes.push_back("refinement check (dtau/2): relative change " +
                                std::to_string(rel));
            if (rel > 0.10)
                rep.notes.push_back(
                    "refinement gate FAILED: > 10 percent drift");
        }
        MeasurementFit mf{meas, fit_loglog(xs, ys), slope_min, r2_min, false};
        mf.pass = mf.fit.slope >= slope_min && mf.fit.r2 >= r2_min;
        rep.fits.push_back(mf);
        return rep;
    }

    if (meas == "superposition") {
        KGrid grid = grid_from(cfg);
        std::vector<double> betas = cfg.get_doubles("sweep", "beta");
        double eps = cfg.get_double_or("model", "eps", 0.2);
        std::vector<double> xs, ys;
        for (double beta : betas) {
            double rho = rho_of_beta(cfg, beta);
            auto p = coupled_params_from(cfg, beta, rho);
            auto bundle = coupled_nls_reference(
                p, CoupledScenario::superposition, grid, tau_star);
            auto tf = solve_windowed(bundle.full, dtau, snaps, scfg);
            auto t1 = solve_windowed(bundle.decoupled_1, dtau, snaps, scfg);
            auto t2 = solve_windowed(bundle.decoupled_2, dtau, snaps, scfg);
            double worst = 0.0;
            for (size_t i = 0; i < tf.u.size(); ++i) {
                auto Uf = reconstruct_physical_at(bundle.full, tf,
                                                  static_cast<int>(i));
                auto U1 = reconstruct_physical_at(bundle.decoupled_1, t1,
                                                  static_cast<int>(i));
                auto U2 = reconstruct_physical_at(bundle.decoupled_2, t2,
                                                  static_cast<int>(i));
                SpectralField D = Uf;
                D -= U1;
                D -= U2;
                worst = std::max(worst, D.sup_abs());
            }
            rep.rows.push_back({meas, beta, rho, worst});
            xs.push_back(rho / std::pow(beta, 1.0 + eps));
            ys.push_back(worst);
        }
        MeasurementFit mf{meas, fit_loglog(xs, ys), slope_min, r2_min, false};
        mf.pass = mf.fit.slope >= slope_min && mf.fit.r2 >= r2_min;
        rep.fits.push_back(mf);
        return rep;
    }

    if (meas == "ode") {
        ODECase c = ode4_preset(cfg);
        std::vector<double> rhos = cfg.get_doubles("sweep", "rho");
        std::vector<cplx> h(8, cplx(0.0));
        h[0] = cplx(0.8, 0.1);
        h[1] = std::conj(h[0]);
        h[2] = cplx(0.5, -0.2);
        h[3] = std::conj(h[2]);
        auto res = ode_average_compare(c, tau_star, rhos, h);
        for (size_t i = 0; i < rhos.size(); ++i) {
            rep.rows.push_back(
                {"ode_unexcited", 0.0, rhos[i], res.max_unexcited[i]});
            rep.rows.push_back({"ode_gap", 0.0, rhos[i], res.averaged_gap[i]});
        }
        MeasurementFit m1{"ode_unexcited",
                          fit_loglog(res.rho_values, res.max_unexcited),
                          slope_min, 0.0, false};
        m1.pass = m1.fit.slope >= slope_min;
        MeasurementFit m2{"ode_gap",
                          fit_loglog(res.rho_values, res.averaged_gap),
                          slope_min, 0.0, false};
        m2.pass = m2.fit.slope >= slope_min;
        rep.fits.push_back(m1);
        rep.fits.push_back(m2);
        if (!res.resonance_invariant)
            rep.notes.push_back(
                "warning: excited set not resonance invariant; bounds void");
        return rep;
    }

    if (meas == "blowup") {
        KGrid grid = grid_from(cfg);
        ToyModel m;
        m.c1 = cfg.get_double_or("model", "c1", 0.5);
        m.c2 = cfg.get_double_or("model", "c2", 1.3);
        m.a1 = cfg.get_double_or("model", "a1", 0.4);
        m.a2 = cfg.get_double_or("model", "a2", 0.7);
        m.k1_star = cfg.get_double_or("model", "k1_star", 4.0);
        m.beta = cfg.get_double_or("model", "beta", 0.4);
        m.phi1 = bump_envelope(cfg.get_double_or("model", "height1", 1.0),
                               cfg.get_double_or("model", "radius1", 3.0));
        std::vector<double> rhos = cfg.get_doubles("sweep", "rho");
        const double ceiling = cfg.get_double_or("sweep", "value_max", 1e-3);
        bool ok = true;
        for (double rho : rhos) {
            m.rho = rho;
            double tau0 = m.blowup_time(1, grid);
            auto prob = toy_problem(m, grid, 0.5 * tau0);
            auto traj = solve_windowed(prob, dtau * tau0, 2, scfg);
            SpectralField U =
                reconstruct_physical_at(prob, traj, traj.steps());
            double L = grid.box_length();
            double err = 0.0, ref = 0.0;
            for (int a = 0; a < grid.M; ++a) {
                double x = a * grid.dr() - L / 2;
                double v = toy_closed_form(m, 1, x, 0.5 * tau0, L);
                err = std::max(err, std::abs(U.at(a, 0).real() - v));
                ref = std::max(ref, std::abs(v));
            }
            double rel = err / ref;
            rep.rows.push_back({meas, m.beta, rho, rel});
            ok = ok && rel <= ceiling;
        }
        MeasurementFit mf{meas, FitResult{}, 0.0, 0.0, ok};
        rep.fits.push_back(mf);
        return rep;
    }

    if (meas == "nls_approx") {
        KGrid grid = grid_from(cfg);
        std::vector<double> betas = cfg.get_doubles("sweep", "beta");
        const int mu = cfg.get_int_or("sweep", "mu", 2);
        const int nu = cfg.get_int_or("sweep", "nu", 0);
        std::vector<double> xs, ys;
        for (double beta : betas) {
            double rho = rho_of_beta(cfg, beta);
            auto mdl = make_single_nls(cfg, grid, beta, rho, tau_star);
            auto full = solve_windowed(mdl.prob, dtau, snaps, scfg);
            // assembled minimal solution
            KGrid eg = eta_grid_for(beta, mdl.eps, grid.dk / beta);
            auto sc = scalarize(mdl.prob, mdl.S, beta, mdl.eps);
            MultiField H;
            for (int l = 1; l <= mdl.S.size(); ++l)
                for (int theta : {+1, -1})
                    H.f.push_back(rescale_amplitudes(
                        sc.sys.data.f[slot_of(l, theta)], beta,
                        static_cast<double>(theta) * mdl.S.pair(l).k, eg));
            MinimalSystemSpec spec;
            spec.mu = mu;
            spec.nu = nu;
            spec.rho1 = rho / beta;
            spec.rho2 = rho / (beta * beta);
            spec.beta = beta;
            spec.eps = mdl.eps;
            auto mins = build_minimal_system(spec, mdl.S, mdl.prob.bs,
                                             mdl.prob.chi, eg, H);
            auto mtraj =
                solve_reduced_windowed(mins, tau_star, dtau, snaps, scfg);
            // u_min(k) = sum beta^-d u_l.theta(beta^-1(k - theta k*)) g
            double worst = 0.0;
            for (size_t i = 0; i < full.u.size(); ++i) {
                MultiField zi = mtraj.w[i];
                SpectralField umin(grid, mdl.prob.h.ncomp());
                for (int l = 1; l <= mdl.S.size(); ++l) {
                    for (int theta : {+1, -1}) {
                        SpectralField vk = unscale_amplitudes(
                            zi.f[slot_of(l, theta)], beta,
                            static_cast<double>(theta) * mdl.S.pair(l).k, grid);
                        MultiField one;
                        one.f.assign(2 * mdl.S.size(),
                                     SpectralField(grid, 1));
                        one.f[slot_of(l, theta)] = vk;
                        MultiField lifted = sc.reconstruct(one);
                        umin += lifted.f[slot_of(l, theta)];
                    }
                }
                worst = std::max(worst, (full.u[i] - umin).l1_norm());
            }
            rep.rows.push_back({meas, beta, rho, worst});
            xs.push_back(beta);
            ys.push_back(worst);
        }
        MeasurementFit mf{meas, fit_loglog(xs, ys), slope_min, r2_min, false};
        mf.pass = mf.fit.slope >= slope_min && mf.fit.r2 >= r2_min;
        rep.fits.push_back(mf);
        return rep;
    }

    throw ConfigError("unknown measurement " + meas);
}

// report emission ----------------------------------------------------------------

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

void emit_report(const ScalingReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir + "/report.csv");
        if (!os) throw IOFailureError("cannot write report.csv in " + dir);
        os << "measurement,beta,rho,value,slope,intercept,r2,pass\n";
        for (auto& r : report.rows)
            os << r.measurement << "," << fmt(r.beta) << "," << fmt(r.rho)
               << "," << fmt(r.value) << ",,,,\n";
        for (auto& f : report.fits)
            os << f.measurement << ",,,," << fmt(f.fit.slope) << ","
               << fmt(f.fit.intercept) << "," << fmt(f.fit.r2) << ","
               << (f.pass ? 1 : 0) << "\n";
    }
    {
        std::ofstream os(dir + "/report.txt");
        os << report_text_summary(report);
    }
    // plot data: log10 abscissa (rho when nonzero, else beta) vs log10 value
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (auto& r : report.rows) {
        double x = r.rho > 0 ? r.rho : r.beta;
        if (x > 0 && r.value > 0)
            series[r.measurement].push_back(
                {std::log10(x), std::log10(r.value)});
    }
    for (auto& [name, pts] : series) {
        std::ofstream os(dir + "/" + name + ".dat");
        for (auto& [x, y] : pts) os << fmt(x) << " " << fmt(y) << "\n";
    }
}

ScalingReport load_report_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IOFailureError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) ||
        line != "measurement,beta,rho,value,slope,intercept,r2,pass")
        throw IOFailureError("bad report.csv header");
    ScalingReport rep;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        cells.resize(8);
        if (!cells[4].empty()) {
            MeasurementFit f;
            f.measurement = cells[0];
            f.fit.slope = std::stod(cells[4]);
            f.fit.intercept = std::stod(cells[5]);
            f.fit.r2 = std::stod(cells[6]);
            f.pass = cells[7] == "1";
            rep.fits.push_back(f);
        } else {
            ReportRow r;
            r.measurement = cells[0];
            r.beta = cells[1].empty() ? 0.0 : std::stod(cells[1]);
            r.rho = cells[2].empty() ? 0.0 : std::stod(cells[2]);
            r.value = cells[3].empty() ? 0.0 : std::stod(cells[3]);
            rep.rows.push_back(r);
        }
    }
    return rep;
}

std::vector<LadderPoint> run_ladder(const Config& cfg) {
    std::vector<LadderPoint> out;
    const double tau_star = cfg.get_double_or("ladder", "tau_star", 0.25);
    const double dtau = cfg.get_double_or("ladder", "dtau", 1e-3);
    const int snaps = cfg.get_int_or("ladder", "snapshots", 4);
    const int mu = cfg.get_int_or("ladder", "mu", 1);
    const int nu = cfg.get_int_or("ladder", "nu", 0);
    SolverConfig scfg;
    scfg.c_osc = cfg.get_double_or("ladder", "c_osc", 0.1);
    KGrid grid = grid_from(cfg);
    std::vector<double> betas = cfg.has("ladder", "beta")
                                    ? cfg.get_doubles("ladder", "beta")
                                    : std::vector<double>{0.2};
    std::vector<double> rhos = cfg.has("ladder", "rho")
                                   ? cfg.get_doubles("ladder", "rho")
                                   : std::vector<double>{0.1};
    std::istringstream ps(cfg.get_or(
        "ladder", "pairs", "full:interaction interaction:averaged"));
    std::vector<std::pair<std::string, std::string>> wanted;
    std::string tok;
    while (ps >> tok) {
        auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw ConfigError("ladder pairs must look like a:b");
        wanted.push_back({tok.substr(0, colon), tok.substr(colon + 1)});
    }

    for (double beta : betas) {
        for (double rho : rhos) {
            auto mdl = make_single_nls(cfg, grid, beta, rho, tau_star);
            // lazily computed shared artifacts per point
            std::optional<Trajectory> full;
            std::optional<MultiTrajectory> ti, ta, ts_scaled, tmin;
            std::optional<ScalarSystem> sc;
            KGrid eg = eta_grid_for(beta, mdl.eps, grid.dk / beta);
            auto need_full = [&]() {
                if (!full) full = solve_windowed(mdl.prob, dtau, snaps, scfg);
            };
            auto need_inter = [&]() {
                if (!ti) {
                    auto sys =
                        build_interaction_system(mdl.prob, mdl.S, beta, mdl.eps);
                    ti = solve_reduced_windowed(sys, tau_star, dtau, snaps, scfg);
                }
            };
            auto need_avg = [&]() {
                if (!ta) {
                    auto sys =
                        build_averaged_system(mdl.prob, mdl.S, beta, mdl.eps);
                    ta = solve_reduced_windowed(sys, tau_star, dtau, snaps, scfg);
                }
            };
            auto rescale_traj = [&](const MultiTrajectory& t) {
                MultiTrajectory z;
                z.tau0 = t.tau0;
                z.dtau = t.dtau;
                for (auto& W : t.w) {
                    MultiField Z;
                    for (int l = 1; l <= mdl.S.size(); ++l)
                        for (int theta : {+1, -1})
                            Z.f.push_back(rescale_amplitudes(
                                W.f[slot_of(l, theta)], beta,
                                static_cast<double>(theta) * mdl.S.pair(l).k,
                                eg));
                    z.w.push_back(std::move(Z));
                }
                return z;
            };
            auto need_scalar = [&]() {
                if (!sc) sc = scalarize(mdl.prob, mdl.S, beta, mdl.eps);
                if (!ts_scaled) {
                    auto t = solve_reduced_windowed(sc->sys, tau_star, dtau,
                                                    snaps, scfg);
                    ts_scaled = rescale_traj(t);
                }
            };
            auto minimal_sys = [&](bool cutoff) {
                need_scalar();
                MultiField H;
                for (int l = 1; l <= mdl.S.size(); ++l)
                    for (int theta : {+1, -1})
                        H.f.push_back(rescale_amplitudes(
                            sc->sys.data.f[slot_of(l, theta)], beta,
                            static_cast<double>(theta) * mdl.S.pair(l).k, eg));
                MinimalSystemSpec spec;
                spec.mu = mu;
                spec.nu = nu;
                spec.rho1 = rho / beta;
                spec.rho2 =
                    mu >= 2 ? rho / (beta * beta)
                            : std::numeric_limits<double>::infinity();
                spec.beta = beta;
                spec.eps = mdl.eps;
                spec.cutoff_enabled = cutoff;
                return build_minimal_system(spec, mdl.S, mdl.prob.bs,
                                            mdl.prob.chi, eg, H);
            };
            auto need_min = [&]() {
                if (!tmin)
                    tmin = solve_reduced_windowed(minimal_sys(true), tau_star,
                                                  dtau, snaps, scfg);
            };

            for (auto& [a, b] : wanted) {
                double gap = 0.0;
                if (a == "full" && b == "interaction") {
                    need_full();
                    need_inter();
                    gap = full_vs_interaction_gap(mdl.prob, mdl.S, *full, *ti,
                                                  beta, mdl.eps);
                } else if (a == "interaction" && b == "averaged") {
                    need_inter();
                    need_avg();
                    gap = sup_gap(*ti, *ta);
                } else if (a == "averaged" && b == "minimal") {
                    need_scalar();
                    need_min();
                    gap = sup_gap(*ts_scaled, *tmin);
                } else if (a == "minimal" && b == "minimal_nocutoff") {
                    need_min();
                    auto t0 = solve_reduced_windowed(minimal_sys(false),
                                                     tau_star, dtau, snaps,
                                                     scfg);
                    gap = sup_gap(*tmin, t0);
                } else {
                    throw ConfigError("unknown ladder pair " + a + ":" + b);
                }
                out.push_back({a, b, rho, beta, gap});
            }
        }
    }
    return out;
}

std::string report_text_summary(const ScalingReport& report) {
    std::ostringstream os;
    os << "measurement rows: " << report.rows.size() << "\n";
    for (auto& r : report.rows)
        os << "  " << r.measurement << " beta=" << fmt(r.beta)
           << " rho=" << fmt(r.rho) << " value=" << fmt(r.value) << "\n";
    for (auto& f : report.fits)
        os << "fit " << f.measurement << ": slope=" << fmt(f.fit.slope)
           << " intercept=" << fmt(f.fit.intercept) << " r2=" << fmt(f.fit.r2)
           << " threshold=" << fmt(f.slope_threshold)
           << (f.pass ? " PASS" : " FAIL") << "\n";
    for (auto& n : report.notes) os << "note: " << n << "\n";
    return os.str();
}

}  // namespace wavelab

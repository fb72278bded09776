// Python bindings for the main wavelab operations.
#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wavelab/fft.hpp"
#include "wavelab/harness.hpp"
#include "wavelab/models.hpp"
#include "wavelab/reduced.hpp"

namespace py = pybind11;
using namespace wavelab;

namespace {

py::array_t<cplx> field_to_numpy(const SpectralField& f) {
    py::array_t<cplx> a({static_cast<py::ssize_t>(f.nodes()),
                         static_cast<py::ssize_t>(f.ncomp())});
    auto r = a.mutable_unchecked<2>();
    for (size_t n = 0; n < f.nodes(); ++n)
        for (int c = 0; c < f.ncomp(); ++c)
            r(static_cast<py::ssize_t>(n), c) = f.at(n, c);
    return a;
}

SpectralField numpy_to_field(const KGrid& g, py::array_t<cplx> a) {
    auto r = a.unchecked<2>();
    SpectralField f(g, static_cast<int>(r.shape(1)));
    if (static_cast<size_t>(r.shape(0)) != g.nodes())
        throw SizeMismatchError("array rows must match grid nodes");
    for (py::ssize_t n = 0; n < r.shape(0); ++n)
        for (py::ssize_t c = 0; c < r.shape(1); ++c)
            f.at(static_cast<size_t>(n), static_cast<int>(c)) = r(n, c);
    return f;
}

}  // namespace

PYBIND11_MODULE(_wavelab, m) {
    m.doc() = "spectral wavepacket preservation toolkit";

    py::register_exception<Error>(m, "WavelabError");

    py::class_<KGrid>(m, "KGrid")
        .def(py::init<int, int, double>(), py::arg("d"), py::arg("M"),
             py::arg("dk"))
        .def_readonly("d", &KGrid::d)
        .def_readonly("M", &KGrid::M)
        .def_readonly("dk", &KGrid::dk)
        .def("k_values", [](const KGrid& g) {
            py::array_t<double> a(static_cast<py::ssize_t>(g.nodes()));
            auto r = a.mutable_unchecked<1>();
            for (size_t n = 0; n < g.nodes(); ++n)
                r(static_cast<py::ssize_t>(n)) = g.k_at(n)[0];
            return a;
        });

    py::class_<SpectralField>(m, "SpectralField")
        .def("l1_norm", &SpectralField::l1_norm)
        .def("sup_abs", &SpectralField::sup_abs)
        .def("to_numpy", &field_to_numpy)
        .def_property_readonly("grid", &SpectralField::grid);

    m.def("field_from_numpy", &numpy_to_field, py::arg("grid"),
          py::arg("values"));
    m.def("fourier_forward", &fourier_forward);
    m.def("fourier_inverse", &fourier_inverse);

    py::class_<BandStructure>(m, "BandStructure")
        .def_property_readonly("J", &BandStructure::J)
        .def("omega", &BandStructure::omega, py::arg("n"), py::arg("zeta"),
             py::arg("k"))
        .def("eval_band",
             [](const BandStructure& bs, int n, int zeta, const Kvec& k) {
                 auto e = bs.eval_band(n, zeta, k);
                 return py::make_tuple(e.omega, e.g, e.proj);
             })
        .def("taylor_dispersion", &BandStructure::taylor_dispersion,
             py::arg("n"), py::arg("k_star"), py::arg("mu"),
             py::arg("beta_eta"))
        .def("crossing", &BandStructure::crossing);

    m.def("make_two_speed_band", &make_two_speed_band, py::arg("c1"),
          py::arg("c2"), py::arg("r_bc") = 1e-6);
    m.def("make_nls_band", &make_nls_band);
    m.def("make_coupled_nls_band", &make_coupled_nls_band);
    m.def("make_tabulated_band", &make_tabulated_band);
    m.def("make_constant_band", &make_constant_band);

    m.def("probe_omega_degeneracy",
          [](const BandStructure& bs, double lo, double hi, int grid,
             double tol) {
              auto r = probe_omega_degeneracy(bs, kv(lo), kv(hi), grid, tol);
              py::dict d;
              d["linear_dependence"] = r.linear_dependence;
              d["linear_band"] = r.linear_band;
              d["scaling_relation"] = r.scaling_relation;
              d["mirror_relation"] = r.mirror_relation;
              return d;
          });

    py::class_<NKSpectrum>(m, "NKSpectrum")
        .def(py::init([](const std::vector<std::pair<int, double>>& pairs) {
                 std::vector<NKPair> ps;
                 for (auto& [n, k] : pairs) ps.push_back({n, kv(k)});
                 return NKSpectrum(ps);
             }),
             py::arg("pairs"))
        .def("size", &NKSpectrum::size)
        .def("pairs", [](const NKSpectrum& s) {
            std::vector<std::pair<int, double>> out;
            for (auto& p : s.pairs()) out.push_back({p.n, p.k[0]});
            return out;
        });

    m.def(
        "resonance_solutions",
        [](const NKSpectrum& S, const BandStructure& bs, std::vector<int> M_F,
           double tol) {
            ResonanceOptions opt;
            opt.tol = tol;
            auto res = resonance_solutions(S, bs, M_F, opt);
            py::list out;
            for (auto& s : res.solutions) {
                py::dict d;
                d["m"] = s.m;
                d["zeta"] = s.zeta;
                d["n"] = s.n;
                d["lambda"] = s.lambda.lam;
                d["k_out"] = s.k_out[0];
                d["omega_residual"] = s.omega_resid;
                d["cls"] = s.cls == SolutionClass::universal ? "universal"
                           : s.cls == SolutionClass::internal ? "internal"
                                                              : "external";
                out.append(d);
            }
            return out;
        },
        py::arg("S"), py::arg("bs"), py::arg("M_F"), py::arg("tol") = 1e-9);

    m.def(
        "closure_and_invariance",
        [](const NKSpectrum& S, const BandStructure& bs, std::vector<int> M_F,
           double tol, int max_iter) {
            ResonanceOptions opt;
            opt.tol = tol;
            auto c = closure_and_invariance(S, bs, M_F, opt, max_iter);
            py::dict d;
            d["resonance_invariant"] = c.resonance_invariant;
            d["universally_invariant"] = c.universally_invariant;
            d["iterations"] = c.iterations;
            d["converged"] = c.converged;
            std::vector<std::pair<int, double>> pairs;
            for (auto& p : c.R_inf.pairs()) pairs.push_back({p.n, p.k[0]});
            d["R_inf"] = pairs;
            return d;
        },
        py::arg("S"), py::arg("bs"), py::arg("M_F"), py::arg("tol") = 1e-9,
        py::arg("max_iter") = 8);

    py::class_<WavepacketSpec>(m, "WavepacketSpec")
        .def(py::init([](int n, double k_star,
                         std::function<cplx(double)> env, double beta,
                         double eps, bool reality) {
                 WavepacketSpec s;
                 s.n = n;
                 s.k_star = kv(k_star);
                 s.env_plus = [env](const Kvec& eta) { return env(eta[0]); };
                 s.beta = beta;
                 s.eps = eps;
                 s.reality = reality;
                 return s;
             }),
             py::arg("n"), py::arg("k_star"), py::arg("envelope"),
             py::arg("beta"), py::arg("eps") = 0.1, py::arg("reality") = true);

    m.def("synthesize_multiwavepacket", &synthesize_multiwavepacket);
    m.def("band_window_project", &band_window_project, py::arg("u"),
          py::arg("S"), py::arg("l"), py::arg("beta"), py::arg("eps"),
          py::arg("bs"));
    m.def("cutoff_psi",
          [](double k, double center, double radius) {
              return cutoff_psi(kv(k), kv(center), radius);
          });

    py::class_<ChiTensor>(m, "ChiTensor")
        .def(py::init<int, int>(), py::arg("ncomp"), py::arg("m"))
        .def("add_monomial",
             [](ChiTensor& t, int out, std::vector<int> ins,
                std::complex<double> coeff) {
                 t.add_monomial(out, std::move(ins), coeff);
             });

    py::class_<SusceptibilityModel>(m, "SusceptibilityModel");
    m.def("constant_susceptibility", [](std::map<int, ChiTensor> chi) {
        return SusceptibilityModel::constant(std::move(chi));
    });

    py::class_<EvolutionProblem>(m, "EvolutionProblem")
        .def(py::init<BandStructure, SusceptibilityModel, double,
                      SpectralField, double>(),
             py::arg("bs"), py::arg("chi"), py::arg("rho"), py::arg("h"),
             py::arg("tau_star"))
        .def_readonly("rho", &EvolutionProblem::rho)
        .def_readonly("tau_star", &EvolutionProblem::tau_star);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("tau0", &Trajectory::tau0)
        .def_readonly("dtau", &Trajectory::dtau)
        .def("__len__", [](const Trajectory& t) { return t.u.size(); })
        .def("field", [](const Trajectory& t, int i) { return t.u.at(i); })
        .def("tau", &Trajectory::tau_at);

    m.def(
        "solve_integrated",
        [](const EvolutionProblem& prob, double dtau, const std::string& method,
           double picard_tol) {
            SolverConfig cfg;
            cfg.dtau = dtau;
            cfg.picard_tol = picard_tol;
            if (method == "ifrk4") cfg.method = SolverConfig::Method::ifrk4;
            auto [traj, diag] = solve_integrated(prob, cfg);
            py::dict d;
            d["residual"] = diag.residual;
            d["iterations"] = diag.iterations;
            return py::make_tuple(traj, d);
        },
        py::arg("problem"), py::arg("dtau"), py::arg("method") = "picard",
        py::arg("picard_tol") = 1e-10);
    m.def("solve_windowed",
          [](const EvolutionProblem& prob, double window, int keep) {
              return solve_windowed(prob, window, keep);
          },
          py::arg("problem"), py::arg("window"), py::arg("keep") = 8);
    m.def("reconstruct_physical_at", &reconstruct_physical_at);
    m.def("oscillatory_term",
          [](const EvolutionProblem& prob, const Trajectory& traj, int m,
             double tau) {
              SolverConfig cfg;
              return oscillatory_term(prob, traj, m, tau, cfg);
          });

    // models
    py::class_<ToyModel>(m, "ToyModel")
        .def(py::init([](double c1, double c2, double a1, double a2,
                         double k1_star, double beta, double rho,
                         double height, double radius) {
                 ToyModel t;
                 t.c1 = c1;
                 t.c2 = c2;
                 t.a1 = a1;
                 t.a2 = a2;
                 t.k1_star = k1_star;
                 t.beta = beta;
                 t.rho = rho;
                 t.phi1 = bump_envelope(height, radius);
                 return t;
             }),
             py::arg("c1"), py::arg("c2"), py::arg("a1") = 0.0,
             py::arg("a2") = 0.0, py::arg("k1_star") = 4.0,
             py::arg("beta") = 0.4, py::arg("rho") = 0.1,
             py::arg("height") = 1.0, py::arg("radius") = 3.0)
        .def("blowup_time", &ToyModel::blowup_time)
        .def("closed_form",
             [](const ToyModel& t, int comp, double x, double tau, double L) {
                 return toy_closed_form(t, comp, x, tau, L);
             },
             py::arg("component"), py::arg("x"), py::arg("tau"),
             py::arg("box_length") = 0.0);
    m.def("toy_problem", &toy_problem);

    m.def("run_experiment_file", [](const std::string& path) {
        auto exp = load_experiment(path);
        auto rep = run_experiment(exp);
        py::dict d;
        py::list rows, fits;
        for (auto& r : rep.rows)
            rows.append(py::make_tuple(r.measurement, r.beta, r.rho, r.value));
        for (auto& f : rep.fits)
            fits.append(py::make_tuple(f.measurement, f.fit.slope, f.fit.r2,
                                       f.pass));
        d["rows"] = rows;
        d["fits"] = fits;
        return d;
    });
    m.def("emit_report_file",
          [](const std::string& config, const std::string& out) {
              auto exp = load_experiment(config);
              auto rep = run_experiment(exp);
              emit_report(rep, out);
              return rep.all_pass();
          });
}

#include "wavelab/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavelab/fft.hpp"

namespace wavelab {

// MultiField -----------------------------------------------------------------

MultiField MultiField::zeros_like(const MultiField& o) {
    MultiField z;
    for (auto& c : o.f) z.f.emplace_back(c.grid(), c.ncomp());
    return z;
}

double MultiField::norm_sum() const {
    double s = 0.0;
    for (auto& c : f) s += c.l1_norm();
    return s;
}

void MultiField::axpy(cplx a, const MultiField& o) {
    for (size_t i = 0; i < f.size(); ++i) f[i].axpy(a, o.f[i]);
}

MultiField& MultiField::operator+=(const MultiField& o) {
    for (size_t i = 0; i < f.size(); ++i) f[i] += o.f[i];
    return *this;
}

MultiField& MultiField::operator-=(const MultiField& o) {
    for (size_t i = 0; i < f.size(); ++i) f[i] -= o.f[i];
    return *this;
}

MultiField& MultiField::operator*=(cplx s) {
    for (auto& c : f) c *= s;
    return *this;
}

// shared helpers ---------------------------------------------------------

namespace {

constexpr double kGauss0 = 0.5 - 0.28867513459481287;
constexpr double kGauss1 = 0.5 + 0.28867513459481287;

struct Window {
    std::vector<size_t> nodes;  // grid nodes inside the ball
    Kvec center;
    double radius;
};

Window make_window(const KGrid& g, const Kvec& center, double radius) {
    Window w{{}, center, radius};
    for (size_t a = 0; a < g.nodes(); ++a)
        if (dist(g.k_at(a), center) <= radius) w.nodes.push_back(a);
    return w;
}

// Per-slot window layout for an nk-spectrum.  Slots sharing the (n, theta)
// channel must be disjoint; orthogonal channels may coincide.
std::vector<Window> slot_windows(const KGrid& g, const NKSpectrum& S,
                                 double beta, double eps) {
    const double radius = std::pow(beta, 1.0 - eps);
    std::vector<Window> ws;
    std::vector<std::pair<int, int>> chan;
    for (int l = 1; l <= S.size(); ++l) {
        for (int theta : {+1, -1}) {
            ws.push_back(
                make_window(g, static_cast<double>(theta) * S.pair(l).k, radius));
            chan.push_back({S.pair(l).n, theta});
        }
    }
    for (size_t i = 0; i < ws.size(); ++i)
        for (size_t j = i + 1; j < ws.size(); ++j)
            if (chan[i] == chan[j] &&
                dist(ws[i].center, ws[j].center) <= ws[i].radius + ws[j].radius)
                throw WindowOverlapError(
                    "interaction windows intersect; wavepackets unseparated");
    return ws;
}

// internal-solution projection of the resonance algebra as a term list
ResonantTermList internal_terms(const NKSpectrum& S, const BandStructure& bs,
                                const std::vector<int>& M_F,
                                const ResonanceOptions& opt) {
    ResonantTermList out;
    auto res = resonance_solutions(S, bs, M_F, opt);
    for (auto& sol : res.solutions) {
        if (sol.cls == SolutionClass::external) continue;
        auto lfound = S.find(sol.n, sol.k_out, opt.tol_k);
        if (!lfound) continue;
        InteractionTerm t;
        t.l = *lfound;
        t.theta = sol.zeta;
        t.m = sol.m;
        t.lambda = sol.lambda;
        out.push_back(std::move(t));
    }
    return out;
}

// generic Volterra machinery over MultiField ------------------------------

int substeps_for(double dt, double rate, double c_osc) {
    const double max_phase = two_pi * std::max(c_osc, 1e-3);
    int n = static_cast<int>(std::ceil(dt * rate / max_phase));
    return std::clamp(n, 1, 4096);
}

MultiField traj_value(const MultiTrajectory& traj, double tau) {
    double x = (tau - traj.tau0) / traj.dtau;
    int i = std::clamp(static_cast<int>(std::floor(x + 1e-12)), 0,
                       traj.steps());
    return traj.w[i];  // left-constant interpolation
}

void integrate_segment(const ReducedSystem& sys, const MultiTrajectory& traj,
                       double ta, double tb, int n_sub, MultiField& acc) {
    const double h = (tb - ta) / n_sub;
    for (int s = 0; s < n_sub; ++s) {
        double t0 = ta + s * h;
        for (double gx : {kGauss0, kGauss1}) {
            MultiField g = sys.integrand(t0 + gx * h, traj_value(traj, t0 + gx * h));
            acc.axpy(cplx(0.5 * h), g);
        }
    }
}

}  // namespace

ResonantTermList time_average_nonlinearity(const ResonantTermList& terms,
                                           const std::vector<double>& phi,
                                           double tol) {
    double scale = 0.0;
    for (double p : phi) scale = std::max(scale, std::abs(p));
    ResonantTermList out;
    for (auto& t : terms) {
        double om = -t.theta * phi.at(t.l - 1);
        for (auto& [zeta, l] : t.lambda.lam) om += zeta * phi.at(l - 1);
        if (std::abs(om) <= tol * std::max(scale, 1e-300)) out.push_back(t);
    }
    return out;
}

// interaction system -------------------------------------------------------

ReducedSystem build_interaction_system(const EvolutionProblem& prob,
                                       const NKSpectrum& S, double beta,
                                       double eps) {
    ReducedSystem sys;
    sys.level = ReducedSystem::Level::interaction;
    sys.grid = prob.h.grid();
    sys.S = S;
    sys.beta = beta;
    sys.eps = eps;
    sys.rho = prob.rho;

    S.validate_against(prob.bs, prob.chi.arities);
    {
        auto clo = closure_and_invariance(S, prob.bs, prob.chi.arities);
        sys.resonance_invariant_warning = !clo.resonance_invariant;
    }
    auto windows =
        std::make_shared<std::vector<Window>>(slot_windows(sys.grid, S, beta, eps));
    auto tb = prob.tables();
    const int N = S.size();
    const int nc = prob.h.ncomp();

    // windowed projected data
    std::vector<cplx> buf(nc);
    for (int l = 1; l <= N; ++l) {
        for (int theta : {+1, -1}) {
            SpectralField hf(sys.grid, nc);
            const Window& w = (*windows)[slot_of(l, theta)];
            for (size_t a : w.nodes) {
                tb->proj_apply(S.pair(l).n, theta, a, prob.h.node_span(a), buf);
                for (int c = 0; c < nc; ++c) hf.at(a, c) = buf[c];
            }
            sys.data.f.push_back(std::move(hf));
        }
    }

    // phase rate bound reused from the full problem
    {
        const int mF = std::max(prob.chi.max_arity(), 1);
        double r_supp = 0.0;
        for (auto& w : *windows)
            r_supp = std::max(r_supp, norm2(w.center) + w.radius);
        double om = tb->omega_abs_max(
            std::min((mF + 0.5) * r_supp, sys.grid.k_max()));
        sys.phase_rate = (mF + 1) * om / prob.rho;
    }

    EvolutionProblem probc = prob;  // shares band tables
    NKSpectrum Sc = S;
    sys.integrand = [probc, Sc, windows, tb, N, nc](
                        double tau, const MultiField& W) {
        const KGrid& g = probc.h.grid();
        SpectralField u(g, nc);
        for (auto& comp : W.f) u += comp;
        tb->rotate(u, tau / probc.rho);
        // F_hat of the summed field, all arities on one padded round trip
        SpectralField r = fourier_inverse(pad_spectrum(u));
        SpectralField accr(r.grid(), nc);
        for (int m : probc.chi.arities) {
            std::vector<const SpectralField*> ptrs(m, &r);
            accumulate_products(probc.chi.tensor(m).nonzeros(), ptrs, accr);
        }
        SpectralField F = truncate_spectrum(fourier_forward(accr), g);
        tb->rotate(F, -tau / probc.rho);
        MultiField out;
        std::vector<cplx> buf2(nc);
        for (int l = 1; l <= N; ++l) {
            for (int theta : {+1, -1}) {
                SpectralField of(g, nc);
                const Window& w = (*windows)[slot_of(l, theta)];
                for (size_t a : w.nodes) {
                    tb->proj_apply(Sc.pair(l).n, theta, a, F.node_span(a), buf2);
                    for (int c = 0; c < nc; ++c) of.at(a, c) = buf2[c];
                }
                out.f.push_back(std::move(of));
            }
        }
        return out;
    };
    return sys;
}

// averaged system -----------------------------------------------------------

ReducedSystem build_averaged_system(const EvolutionProblem& prob,
                                    const NKSpectrum& S, double beta,
                                    double eps, const ResonanceOptions& opt) {
    ReducedSystem sys = build_interaction_system(prob, S, beta, eps);
    sys.level = ReducedSystem::Level::averaged;
    sys.terms = internal_terms(S, prob.bs, prob.chi.arities, opt);

    auto windows =
        std::make_shared<std::vector<Window>>(slot_windows(sys.grid, S, beta, eps));
    auto tb = prob.tables();
    const int N = S.size();
    const int nc = prob.h.ncomp();
    auto terms = std::make_shared<ResonantTermList>(sys.terms);

    EvolutionProblem probc = prob;
    NKSpectrum Sc = S;
    sys.integrand = [probc, Sc, windows, tb, terms, N, nc](
                        double tau, const MultiField& W) {
        const KGrid& g = probc.h.grid();
        // rotate components and cache their padded r-space transforms
        std::vector<SpectralField> rfields;
        rfields.reserve(2 * N);
        for (auto& comp : W.f) {
            SpectralField w = comp;
            tb->rotate(w, tau / probc.rho);
            rfields.push_back(fourier_inverse(pad_spectrum(w)));
        }
        const KGrid& pg = rfields.front().grid();
        MultiField out;
        std::vector<cplx> buf(nc);
        for (int l = 1; l <= N; ++l) {
            for (int theta : {+1, -1}) {
                SpectralField accr(pg, nc);
                bool any = false;
                for (auto& t : *terms) {
                    if (t.l != l || t.theta != theta) continue;
                    any = true;
                    std::vector<const SpectralField*> ins(t.m);
                    for (int j = 0; j < t.m; ++j) {
                        auto [zj, lj] = t.lambda.lam[j];
                        ins[j] = &rfields[slot_of(lj, zj)];
                    }
                    accumulate_products(probc.chi.tensor(t.m).nonzeros(), ins,
                                        accr);
                }
                SpectralField of(g, nc);
                if (any) {
                    SpectralField Fk =
                        truncate_spectrum(fourier_forward(accr), g);
                    tb->rotate(Fk, -tau / probc.rho);
                    const Window& w = (*windows)[slot_of(l, theta)];
                    for (size_t a : w.nodes) {
                        tb->proj_apply(Sc.pair(l).n, theta, a, Fk.node_span(a),
                                       buf);
                        for (int c = 0; c < nc; ++c) of.at(a, c) = buf[c];
                    }
                }
                out.f.push_back(std::move(of));
            }
        }
        return out;
    };
    return sys;
}

// scalar amplitude system ----------------------------------------------------

namespace {

// frozen kernel Q^{(m)}(theta k_*l, centers) = g_out . chi[g_1, ..., g_m]
cplx frozen_Q(const BandStructure& bs, const SusceptibilityModel& chi,
              const NKSpectrum& S, const InteractionTerm& t,
              const std::vector<double>& shift = {}) {
    const int nc = bs.ncomp();
    Kvec kout = static_cast<double>(t.theta) * S.pair(t.l).k;
    std::vector<std::vector<cplx>> gs;
    for (int j = 0; j < t.m; ++j) {
        auto [zj, lj] = t.lambda.lam[j];
        Kvec kj = static_cast<double>(zj) * S.pair(lj).k;
        if (!shift.empty()) {
            kj[0] += shift[j + 1];
        }
        gs.push_back(bs.eigvec(S.pair(lj).n, zj, kj));
    }
    if (!shift.empty()) kout[0] += shift[0];
    std::vector<const cplx*> xs;
    for (auto& g : gs) xs.push_back(g.data());
    std::vector<cplx> val(nc);
    chi.tensor(t.m).apply(xs, val);
    auto gout = bs.eigvec(S.pair(t.l).n, t.theta, kout);
    cplx q(0.0);
    for (int c = 0; c < nc; ++c) q += std::conj(gout[c]) * val[c];
    return q;
}

// per-slot eigenfrequency table omega_{n_l,theta}(k) on a grid
std::vector<std::vector<double>> slot_omegas(const KGrid& g,
                                             const BandStructure& bs,
                                             const NKSpectrum& S) {
    std::vector<std::vector<double>> om;
    for (int l = 1; l <= S.size(); ++l) {
        for (int theta : {+1, -1}) {
            std::vector<double> v(g.nodes());
            for (size_t a = 0; a < g.nodes(); ++a) {
                Kvec k = g.k_at(a);
                if (bs.crossing(k)) k[0] += g.dk;
                v[a] = bs.omega(S.pair(l).n, theta, k);
            }
            om.push_back(std::move(v));
        }
    }
    return om;
}

}  // namespace

ScalarSystem scalarize(const EvolutionProblem& prob, const NKSpectrum& S,
                       double beta, double eps, const ResonanceOptions& opt) {
    ScalarSystem out;
    ReducedSystem& sys = out.sys;
    sys.level = ReducedSystem::Level::scalar;
    sys.grid = prob.h.grid();
    sys.S = S;
    sys.beta = beta;
    sys.eps = eps;
    sys.rho = prob.rho;
    sys.terms = internal_terms(S, prob.bs, prob.chi.arities, opt);
    for (auto& t : sys.terms) t.Q = frozen_Q(prob.bs, prob.chi, S, t);

    auto windows =
        std::make_shared<std::vector<Window>>(slot_windows(sys.grid, S, beta, eps));
    const int N = S.size();
    const int nc = prob.h.ncomp();
    auto om = std::make_shared<std::vector<std::vector<double>>>(
        slot_omegas(sys.grid, prob.bs, S));

    // scalar data: v = <g_{n_l,theta}(k), h(k)> on each window
    BandStructure bsc = prob.bs;
    for (int l = 1; l <= N; ++l) {
        for (int theta : {+1, -1}) {
            SpectralField hf(sys.grid, 1);
            const Window& w = (*windows)[slot_of(l, theta)];
            for (size_t a : w.nodes) {
                Kvec k = sys.grid.k_at(a);
                if (bsc.crossing(k)) k[0] += sys.grid.dk;
                auto g = bsc.eigvec(S.pair(l).n, theta, k);
                cplx v(0.0);
                for (int c = 0; c < nc; ++c)
                    v += std::conj(g[c]) * prob.h.at(a, c);
                hf.at(a, 0) = v;
            }
            sys.data.f.push_back(std::move(hf));
        }
    }

    {
        const int mF = std::max(prob.chi.max_arity(), 1);
        double r_supp = 0.0;
        for (auto& w : *windows)
            r_supp = std::max(r_supp, norm2(w.center) + w.radius);
        double wm = 0.0;
        for (auto& v : *om)
            for (double x : v) wm = std::max(wm, std::abs(x));
        (void)r_supp;
        sys.phase_rate = (mF + 1) * wm / prob.rho;
    }

    auto terms = std::make_shared<ResonantTermList>(sys.terms);
    const double rho = prob.rho;
    KGrid grid = sys.grid;
    sys.integrand = [grid, windows, om, terms, N, rho](double tau,
                                                       const MultiField& W) {
        // rotate scalar amplitudes by their own band phase
        std::vector<SpectralField> rfields;
        rfields.reserve(2 * N);
        for (size_t s = 0; s < W.f.size(); ++s) {
            SpectralField w = W.f[s];
            const auto& omv = (*om)[s];
            for (size_t a = 0; a < w.nodes(); ++a)
                w.at(a, 0) *= std::polar(1.0, -tau / rho * omv[a]);
            rfields.push_back(fourier_inverse(pad_spectrum(w)));
        }
        const KGrid& pg = rfields.front().grid();
        MultiField out2;
        for (int l = 1; l <= N; ++l) {
            for (int theta : {+1, -1}) {
                SpectralField accr(pg, 1);
                bool any = false;
                for (auto& t : *terms) {
                    if (t.l != l || t.theta != theta) continue;
                    any = true;
                    for (size_t a = 0; a < pg.nodes(); ++a) {
                        cplx p = t.Q;
                        for (int j = 0; j < t.m; ++j) {
                            auto [zj, lj] = t.lambda.lam[j];
                            p *= rfields[slot_of(lj, zj)].at(a, 0);
                        }
                        accr.at(a, 0) += p;
                    }
                }
                SpectralField of(grid, 1);
                if (any) {
                    SpectralField Fk = truncate_spectrum(fourier_forward(accr), grid);
                    const auto& omv = (*om)[slot_of(l, theta)];
                    const Window& w = (*windows)[slot_of(l, theta)];
                    for (size_t a : w.nodes)
                        of.at(a, 0) =
                            Fk.at(a, 0) * std::polar(1.0, tau / rho * omv[a]);
                }
                out2.f.push_back(std::move(of));
            }
        }
        return out2;
    };

    BandStructure bs2 = prob.bs;
    NKSpectrum S2 = S;
    KGrid g2 = sys.grid;
    int nc2 = nc;
    out.reconstruct = [bs2, S2, g2, nc2](const MultiField& V) {
        MultiField out3;
        for (int l = 1; l <= S2.size(); ++l) {
            for (int theta : {+1, -1}) {
                const SpectralField& v = V.f[slot_of(l, theta)];
                SpectralField w(g2, nc2);
                for (size_t a = 0; a < g2.nodes(); ++a) {
                    if (v.at(a, 0) == cplx(0.0)) continue;
                    Kvec k = g2.k_at(a);
                    if (bs2.crossing(k)) k[0] += g2.dk;
                    auto g = bs2.eigvec(S2.pair(l).n, theta, k);
                    for (int c = 0; c < nc2; ++c)
                        w.at(a, c) = v.at(a, 0) * g[c];
                }
                out3.f.push_back(std::move(w));
            }
        }
        return out3;
    };
    return out;
}

// rescaled amplitudes ---------------------------------------------------------

KGrid eta_grid_for(double beta, double eps, double deta) {
    double radius = 2.0 * std::pow(beta, -eps);
    int M = 8;
    while (M / 2 * deta < radius) M *= 2;
    return KGrid(1, M, deta);
}

SpectralField rescale_amplitudes(const SpectralField& v, double beta,
                                 const Kvec& center, const KGrid& eta_grid) {
    const KGrid& kg = v.grid();
    if (std::abs(eta_grid.dk * beta - kg.dk) > 1e-12 * kg.dk)
        throw GridMismatchError("rescale: eta spacing must be dk/beta");
    int ic = kg.index_of(center[0]);
    if (ic < 0) throw GridMismatchError("rescale: center off grid");
    SpectralField z(eta_grid, v.ncomp());
    const double amp = std::pow(beta, kg.d);
    for (int j = 0; j < eta_grid.M; ++j) {
        int src = ic + (j - eta_grid.M / 2);
        if (src < 0 || src >= kg.M) continue;
        for (int c = 0; c < v.ncomp(); ++c)
            z.at(j, c) = amp * v.at(src, c);
    }
    return z;
}

SpectralField unscale_amplitudes(const SpectralField& z, double beta,
                                 const Kvec& center, const KGrid& k_grid) {
    if (std::abs(z.grid().dk * beta - k_grid.dk) > 1e-12 * k_grid.dk)
        throw GridMismatchError("unscale: eta spacing must be dk/beta");
    int ic = k_grid.index_of(center[0]);
    if (ic < 0) throw GridMismatchError("unscale: center off grid");
    SpectralField v(k_grid, z.ncomp());
    const double amp = std::pow(beta, z.grid().d);
    for (int j = 0; j < z.grid().M; ++j) {
        int dst = ic + (j - z.grid().M / 2);
        if (dst < 0 || dst >= k_grid.M) continue;
        for (int c = 0; c < z.ncomp(); ++c)
            v.at(dst, c) = z.at(j, c) / amp;
    }
    return v;
}

// minimal system --------------------------------------------------------------

ReducedSystem build_minimal_system(const MinimalSystemSpec& spec,
                                   const NKSpectrum& S, const BandStructure& bs,
                                   const SusceptibilityModel& chi,
                                   const KGrid& eta_grid, MultiField H,
                                   const ResonanceOptions& opt) {
    if (spec.mu < 1 || spec.mu > 3 || spec.nu < 0 || spec.nu > 1)
        throw Error("minimal system: mu in 1..3, nu in 0..1");
    {
        auto clo = closure_and_invariance(S, bs, chi.arities, opt);
        if (!clo.resonance_invariant)
            throw NotResonanceInvariantError(
                "minimal system requires a resonance-invariant spectrum");
    }
    ReducedSystem sys;
    sys.level = ReducedSystem::Level::minimal;
    sys.grid = eta_grid;
    sys.S = S;
    sys.eps = spec.cutoff_enabled ? 1.0 : 0.0;  // marker only
    sys.rho = 1.0;
    sys.terms = internal_terms(S, bs, chi.arities, opt);
    for (auto& t : sys.terms) {
        t.Q = frozen_Q(bs, chi, S, t);
        if (spec.nu >= 1) {
            // q^{(m),j} = d/dbeta Q with slot j and the output shifted by beta
            for (int j = 0; j < t.m; ++j) {
                double h = spec.q_fd_beta;
                std::vector<double> sp(t.m + 1, 0.0), sm(t.m + 1, 0.0);
                sp[0] = h;
                sp[j + 1] = h;
                sm[0] = -h;
                sm[j + 1] = -h;
                cplx qp = frozen_Q(bs, chi, S, t, sp);
                cplx qm = frozen_Q(bs, chi, S, t, sm);
                t.q1.push_back((qp - qm) / (2.0 * h));
            }
        }
    }

    // per-slot effective phase arrays: omega_eff(eta) =
    //   (w'_l . eta)/rho1 + theta (eta, W'' eta)/(2 rho2)   (mu >= 2 part)
    const int N = S.size();
    auto omeff = std::make_shared<std::vector<std::vector<double>>>();
    const bool use_quad = spec.mu >= 2 && std::isfinite(spec.rho2);
    for (int l = 1; l <= N; ++l) {
        Kvec w1 = bs.grad_omega(S.pair(l).n, +1, S.pair(l).k);
        auto W2 = bs.hess_omega(S.pair(l).n, +1, S.pair(l).k);
        for (int theta : {+1, -1}) {
            std::vector<double> v(eta_grid.nodes());
            for (size_t a = 0; a < eta_grid.nodes(); ++a) {
                double eta = eta_grid.k_at(a)[0];
                double lin = w1[0] * eta / spec.rho1;
                double quad = use_quad
                                  ? theta * 0.5 * W2[0] * eta * eta / spec.rho2
                                  : 0.0;
                v[a] = lin + quad;
            }
            omeff->push_back(std::move(v));
        }
    }

    // cutoff Psi(beta^eps eta): indicator of |eta| <= beta^{-eps}
    std::shared_ptr<std::vector<uint8_t>> mask;
    if (spec.cutoff_enabled) {
        double radius = std::pow(spec.beta, -spec.eps);
        auto mk = std::make_shared<std::vector<uint8_t>>(eta_grid.nodes(), 0);
        for (size_t a = 0; a < eta_grid.nodes(); ++a)
            (*mk)[a] = norm2(eta_grid.k_at(a)) <= radius ? 1 : 0;
        mask = mk;
        for (size_t s = 0; s < H.f.size(); ++s)
            for (size_t a = 0; a < eta_grid.nodes(); ++a)
                if (!(*mask)[a])
                    for (int c = 0; c < H.f[s].ncomp(); ++c)
                        H.f[s].at(a, c) = cplx(0.0);
    }
    sys.data = std::move(H);

    {
        double rate = 0.0;
        for (auto& v : *omeff)
            for (double x : v) rate = std::max(rate, std::abs(x));
        const int mF = std::max(chi.max_arity(), 1);
        sys.phase_rate = (mF + 1) * rate;
    }

    auto terms = std::make_shared<ResonantTermList>(sys.terms);
    KGrid grid = eta_grid;
    const int nu = spec.nu;
    const double beta_tr = spec.beta;
    sys.integrand = [grid, omeff, terms, mask, N, nu, beta_tr](
                        double tau, const MultiField& Z) {
        std::vector<SpectralField> rfields, rfields_sin;
        rfields.reserve(2 * N);
        for (size_t s = 0; s < Z.f.size(); ++s) {
            SpectralField w = Z.f[s];
            const auto& omv = (*omeff)[s];
            for (size_t a = 0; a < w.nodes(); ++a)
                w.at(a, 0) *= std::polar(1.0, -tau * omv[a]);
            if (nu >= 1) {
                SpectralField ws = w;
                for (size_t a = 0; a < ws.nodes(); ++a)
                    ws.at(a, 0) *= std::sin(beta_tr * grid.k_at(a)[0]);
                rfields_sin.push_back(fourier_inverse(pad_spectrum(ws)));
            }
            rfields.push_back(fourier_inverse(pad_spectrum(w)));
        }
        const KGrid& pg = rfields.front().grid();
        MultiField out;
        for (int l = 1; l <= N; ++l) {
            for (int theta : {+1, -1}) {
                SpectralField accr(pg, 1);
                bool any = false;
                for (auto& t : *terms) {
                    if (t.l != l || t.theta != theta) continue;
                    any = true;
                    for (size_t a = 0; a < pg.nodes(); ++a) {
                        cplx p = t.Q;
                        for (int j = 0; j < t.m; ++j) {
                            auto [zj, lj] = t.lambda.lam[j];
                            p *= rfields[slot_of(lj, zj)].at(a, 0);
                        }
                        accr.at(a, 0) += p;
                    }
                    // nu = 1: first-order trig corrections, one per slot
                    if (nu >= 1) {
                        for (int j = 0; j < t.m; ++j) {
                            cplx qj = t.q1[j];
                            if (qj == cplx(0.0)) continue;
                            for (size_t a = 0; a < pg.nodes(); ++a) {
                                cplx p = qj;
                                for (int i = 0; i < t.m; ++i) {
                                    auto [zi, li] = t.lambda.lam[i];
                                    const auto& fld = (i == j)
                                                          ? rfields_sin
                                                          : rfields;
                                    p *= fld[slot_of(li, zi)].at(a, 0);
                                }
                                accr.at(a, 0) += p;
                            }
                        }
                    }
                }
                SpectralField of(grid, 1);
                if (any) {
                    SpectralField Fk = truncate_spectrum(fourier_forward(accr), grid);
                    const auto& omv = (*omeff)[slot_of(l, theta)];
                    for (size_t a = 0; a < grid.nodes(); ++a) {
                        if (mask && !(*mask)[a]) continue;
                        of.at(a, 0) =
                            Fk.at(a, 0) * std::polar(1.0, tau * omv[a]);
                    }
                }
                out.f.push_back(std::move(of));
            }
        }
        return out;
    };
    return sys;
}

// generic solve ----------------------------------------------------------------

std::pair<MultiTrajectory, ReducedSolveDiagnostics> solve_reduced(
    const ReducedSystem& sys, double tau_star, const SolverConfig& cfg_in) {
    SolverConfig cfg = cfg_in;
    if (cfg.dtau <= 0) cfg.dtau = tau_star / 16.0;
    const int n_steps =
        std::max(1, static_cast<int>(std::lround(tau_star / cfg.dtau)));
    cfg.dtau = tau_star / n_steps;

    MultiTrajectory traj;
    traj.tau0 = cfg.tau0;
    traj.dtau = cfg.dtau;
    traj.w.assign(n_steps + 1, sys.data);
    ReducedSolveDiagnostics diag;

    if (cfg.method == SolverConfig::Method::ifrk4) {
        traj.w.assign(1, sys.data);
        for (int i = 0; i < n_steps; ++i) {
            double t = traj.tau_at(i);
            const MultiField& u = traj.w.back();
            MultiField k1 = sys.integrand(t, u);
            MultiField u2 = u;
            u2.axpy(cplx(0.5 * cfg.dtau), k1);
            MultiField k2 = sys.integrand(t + 0.5 * cfg.dtau, u2);
            MultiField u3 = u;
            u3.axpy(cplx(0.5 * cfg.dtau), k2);
            MultiField k3 = sys.integrand(t + 0.5 * cfg.dtau, u3);
            MultiField u4 = u;
            u4.axpy(cplx(cfg.dtau), k3);
            MultiField k4 = sys.integrand(t + cfg.dtau, u4);
            MultiField nxt = u;
            nxt.axpy(cplx(cfg.dtau / 6.0), k1);
            nxt.axpy(cplx(cfg.dtau / 3.0), k2);
            nxt.axpy(cplx(cfg.dtau / 3.0), k3);
            nxt.axpy(cplx(cfg.dtau / 6.0), k4);
            traj.w.push_back(std::move(nxt));
        }
        diag.iterations = n_steps;
        return {std::move(traj), diag};
    }

    const int n_sub = substeps_for(cfg.dtau, sys.phase_rate, cfg.c_osc);
    const double cap = 1e3 * std::max(sys.data.norm_sum(), 1e-12);
    if (n_steps == 1 && cfg.interp == SolverConfig::Interp::left_const) {
        // single-window marching: the integrand sees only the fixed left
        // endpoint, so one sweep is the exact discrete fixed point
        MultiField acc = MultiField::zeros_like(sys.data);
        integrate_segment(sys, traj, traj.tau_at(0), traj.tau_at(1), n_sub,
                          acc);
        traj.w[1] += acc;
        if (traj.w[1].norm_sum() > cap)
            throw BlowUpError("solve_reduced: exceeded 1e3 x initial");
        diag.iterations = 1;
        diag.residual = 0.0;
        return {std::move(traj), diag};
    }
    double prev_delta = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int iter = 1; iter <= cfg.picard_max_iter; ++iter) {
        std::vector<MultiField> next(n_steps + 1, sys.data);
        MultiField acc = MultiField::zeros_like(sys.data);
        double delta = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            integrate_segment(sys, traj, traj.tau_at(i), traj.tau_at(i + 1),
                              n_sub, acc);
            next[i + 1] += acc;
            delta = std::max(delta, (next[i + 1] - traj.w[i + 1]).norm_sum());
        }
        diag.iterations = iter;
        diag.residual = delta;
        if (delta <= cfg.picard_tol) return {std::move(traj), diag};
        traj.w = std::move(next);
        if (traj.w.back().norm_sum() > cap)
            throw BlowUpError("solve_reduced: exceeded 1e3 x initial");
        if (delta >= prev_delta * (1.0 - 1e-12)) {
            if (++stall >= 3)
                throw NoContractionError("solve_reduced: residual stalled");
        } else {
            stall = 0;
        }
        prev_delta = delta;
    }
    throw NoContractionError("solve_reduced: no convergence in max iterations");
}

MultiTrajectory solve_reduced_windowed(const ReducedSystem& sys,
                                       double tau_star, double window,
                                       int keep, SolverConfig cfg) {
    int n_win = std::max(1, static_cast<int>(std::lround(tau_star / window)));
    keep = std::max(1, std::min(keep, n_win));
    const int stride = (n_win + keep - 1) / keep;
    n_win = stride * ((n_win + stride - 1) / stride);  // multiple of stride
    window = tau_star / n_win;

    MultiTrajectory out;
    out.tau0 = 0.0;
    out.dtau = window * stride;
    out.w.push_back(sys.data);
    ReducedSystem cur = sys;
    for (int i = 0; i < n_win; ++i) {
        SolverConfig wcfg = cfg;
        wcfg.tau0 = i * window;
        wcfg.dtau = window;
        auto [traj, diag] = solve_reduced(cur, window, wcfg);
        cur.data = traj.w.back();
        if ((i + 1) % stride == 0) out.w.push_back(cur.data);
    }
    return out;
}

// diagnostics --------------------------------------------------------------

double sup_gap(const MultiTrajectory& a, const MultiTrajectory& b) {
    if (a.w.size() != b.w.size())
        throw SizeMismatchError("sup_gap: trajectories differ in length");
    double s = 0.0;
    for (size_t i = 0; i < a.w.size(); ++i) {
        double g = 0.0;
        for (size_t c = 0; c < a.w[i].f.size(); ++c)
            g += (a.w[i].f[c] - b.w[i].f[c]).l1_norm();
        s = std::max(s, g);
    }
    return s;
}

double interaction_defect_in_full(const EvolutionProblem& prob,
                                  const MultiTrajectory& wtraj,
                                  const SolverConfig& cfg) {
    Trajectory sum;
    sum.tau0 = wtraj.tau0;
    sum.dtau = wtraj.dtau;
    for (auto& W : wtraj.w) {
        SpectralField u(prob.h.grid(), prob.h.ncomp());
        for (auto& c : W.f) u += c;
        sum.u.push_back(std::move(u));
    }
    double worst = 0.0;
    for (size_t i = 0; i < sum.u.size(); ++i) {
        double tau = sum.tau_at(static_cast<int>(i)) - sum.tau0;
        SpectralField F(prob.h.grid(), prob.h.ncomp());
        for (int m : prob.chi.arities)
            F += oscillatory_term(prob, sum, m, tau, cfg);
        SpectralField D = sum.u[i];
        D -= F;
        D -= prob.h;
        worst = std::max(worst, D.l1_norm());
    }
    return worst;
}

MultiTrajectory project_full_trajectory(const EvolutionProblem& prob,
                                        const NKSpectrum& S,
                                        const Trajectory& full, double beta,
                                        double eps) {
    MultiTrajectory out;
    out.tau0 = full.tau0;
    out.dtau = full.dtau;
    for (auto& u : full.u) {
        MultiField W;
        for (int l = 1; l <= S.size(); ++l) {
            // band_window_project splits into +-; store per theta
            for (int theta : {+1, -1}) {
                const double radius = std::pow(beta, 1.0 - eps);
                SpectralField of(u.grid(), u.ncomp());
                Kvec center = static_cast<double>(theta) * S.pair(l).k;
                auto tb = prob.tables();
                std::vector<cplx> buf(u.ncomp());
                for (size_t a = 0; a < u.grid().nodes(); ++a) {
                    if (dist(u.grid().k_at(a), center) > radius) continue;
                    tb->proj_apply(S.pair(l).n, theta, a, u.node_span(a), buf);
                    for (int c = 0; c < u.ncomp(); ++c) of.at(a, c) = buf[c];
                }
                W.f.push_back(std::move(of));
            }
        }
        out.w.push_back(std::move(W));
    }
    return out;
}

double full_vs_interaction_gap(const EvolutionProblem& prob,
                               const NKSpectrum& S, const Trajectory& full,
                               const MultiTrajectory& wtraj, double beta,
                               double eps, bool window_projected) {
    if (full.u.size() != wtraj.w.size())
        throw SizeMismatchError("gap: trajectories differ in length");
    auto tb = prob.tables();
    const double radius = std::pow(beta, 1.0 - eps);
    double worst = 0.0;
    std::vector<cplx> buf(prob.h.ncomp());
    for (size_t i = 0; i < full.u.size(); ++i) {
        double g = 0.0;
        for (int l = 1; l <= S.size(); ++l) {
            for (int theta : {+1, -1}) {
                SpectralField proj(full.u[i].grid(), full.u[i].ncomp());
                Kvec center = static_cast<double>(theta) * S.pair(l).k;
                for (size_t a = 0; a < proj.nodes(); ++a) {
                    if (window_projected &&
                        dist(proj.grid().k_at(a), center) > radius)
                        continue;
                    tb->proj_apply(S.pair(l).n, theta, a,
                                   full.u[i].node_span(a), buf);
                    for (int c = 0; c < proj.ncomp(); ++c)
                        proj.at(a, c) = buf[c];
                }
                g += (proj - wtraj.w[i].f[slot_of(l, theta)]).l1_norm();
            }
        }
        worst = std::max(worst, g);
    }
    return worst;
}

double necessary_direction_residual(const EvolutionProblem& prob,
                                    const NKSpectrum& S,
                                    const Trajectory& full, double beta,
                                    double eps, const SolverConfig& cfg) {
    ReducedSystem sys = build_interaction_system(prob, S, beta, eps);
    MultiTrajectory wp = project_full_trajectory(prob, S, full, beta, eps);
    const int n_sub = substeps_for(wp.dtau, sys.phase_rate, cfg.c_osc);
    MultiField acc = MultiField::zeros_like(sys.data);
    double worst = 0.0;
    for (size_t i = 0; i < wp.w.size(); ++i) {
        if (i > 0)
            integrate_segment(sys, wp, wp.tau_at(static_cast<int>(i) - 1),
                              wp.tau_at(static_cast<int>(i)), n_sub, acc);
        // h'(tau_i) = w'(tau_i) - F_Psi(w')(tau_i); compare with h_Psi
        MultiField hp = wp.w[i];
        hp -= acc;
        hp -= sys.data;
        worst = std::max(worst, hp.norm_sum());
    }
    return worst;
}

}  // namespace wavelab

#include "wavelab/models.hpp"

#include <algorithm>
#include <cmath>

#include "wavelab/fft.hpp"
#include "wavelab/wavepacket.hpp"

namespace wavelab {

double ToyModel::sup_h(int j, const KGrid& grid) const {
    double s = 0.0;
    const double L = grid.box_length();
    for (int a = 0; a < grid.M; ++a) {
        double x = a * grid.dr() - L / 2;  // centered sampling
        s = std::max(s, std::abs(j == 1 ? h1(x) : h2(x)));
    }
    return s;
}

double ToyModel::blowup_time(int j, const KGrid& grid) const {
    double s = sup_h(j, grid);
    if (s <= 0) throw Error("toy model: zero data has no blow-up time");
    return 1.0 / s;
}

double toy_closed_form(const ToyModel& m, int component, double x, double tau,
                       double box_length) {
    const double c = component == 1 ? m.c1 : m.c2;
    double y = x - c * tau / m.rho;
    if (box_length > 0) {
        y = std::fmod(y, box_length);
        if (y > box_length / 2) y -= box_length;
        if (y < -box_length / 2) y += box_length;
    }
    double hy = component == 1 ? m.h1(y) : m.h2(y);
    double denom = 1.0 - tau * hy;
    if (denom <= 0)
        throw PastBlowUpError("toy_closed_form: tau at or past blow-up");
    return hy / denom;
}

EvolutionProblem toy_problem(const ToyModel& m, const KGrid& grid,
                             double tau_star) {
    // quadratic tensor on (u1, u2, w1, w2):
    //   F1 = u1^2 + a1 u1 u2, F2 = u2^2 + a2 u1 u2, mirrored on (w1, w2)
    ChiTensor chi(4, 2);
    chi.add_monomial(0, {0, 0}, cplx(1.0));
    chi.add_monomial(0, {0, 1}, cplx(m.a1));
    chi.add_monomial(1, {1, 1}, cplx(1.0));
    chi.add_monomial(1, {0, 1}, cplx(m.a2));
    chi.add_monomial(2, {2, 2}, cplx(1.0));
    chi.add_monomial(2, {2, 3}, cplx(m.a1));
    chi.add_monomial(3, {3, 3}, cplx(1.0));
    chi.add_monomial(3, {2, 3}, cplx(m.a2));
    SusceptibilityModel chim = SusceptibilityModel::constant({{2, chi}});

    SpectralField u0(grid, 4);
    const double L = grid.box_length();
    for (int a = 0; a < grid.M; ++a) {
        double x = a * grid.dr() - L / 2;
        u0.at(a, 0) = cplx(m.h1(x), 0.0);
        u0.at(a, 1) = cplx(m.h2(x), 0.0);
    }
    SpectralField h = fourier_forward(u0);
    return EvolutionProblem(make_two_speed_band(m.c1, m.c2), chim, m.rho,
                            std::move(h), tau_star);
}

std::function<double(double)> bump_envelope(double height, double radius) {
    return [height, radius](double y) {
        double t = y / radius;
        if (std::abs(t) >= 1.0) return 0.0;
        double q = 1.0 - t * t;
        return height * q * q * q;  // C^2 at the edge, exact sup at center
    };
}

// ODE case ---------------------------------------------------------------

namespace {

std::vector<double> ode_diag(const ODECase& c) {
    std::vector<double> d(2 * c.J());
    for (int j = 0; j < c.J(); ++j) {
        d[2 * j] = c.w0[j];
        d[2 * j + 1] = -c.w0[j];
    }
    return d;
}

using OdeRhs =
    std::function<std::vector<cplx>(double, const std::vector<cplx>&)>;

std::vector<std::vector<cplx>> rk4(const OdeRhs& f, std::vector<cplx> u,
                                   double tau_star, double dtau) {
    const int n = std::max(1, static_cast<int>(std::lround(tau_star / dtau)));
    const double h = tau_star / n;
    std::vector<std::vector<cplx>> traj{u};
    auto axpy = [](std::vector<cplx> a, double s, const std::vector<cplx>& b) {
        for (size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
        return a;
    };
    for (int i = 0; i < n; ++i) {
        double t = i * h;
        auto k1 = f(t, u);
        auto k2 = f(t + h / 2, axpy(u, h / 2, k1));
        auto k3 = f(t + h / 2, axpy(u, h / 2, k2));
        auto k4 = f(t + h, axpy(u, h, k3));
        for (size_t q = 0; q < u.size(); ++q)
            u[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        traj.push_back(u);
    }
    return traj;
}

}  // namespace

std::vector<std::vector<cplx>> ode_integrate_oscillatory(
    const ODECase& c, const std::vector<cplx>& h, double tau_star,
    double dtau) {
    if (dtau > 0.1 * c.rho + 1e-15)
        throw UnderResolvedError("ode integrate: dtau must be <= 0.1 rho");
    auto d = ode_diag(c);
    OdeRhs rhs = [&c, d](double tau, const std::vector<cplx>& u) {
        std::vector<cplx> w(u.size()), out(u.size());
        for (size_t q = 0; q < u.size(); ++q)
            w[q] = u[q] * std::polar(1.0, -tau * d[q] / c.rho);
        c.F.apply(w, out);
        for (size_t q = 0; q < u.size(); ++q)
            out[q] *= std::polar(1.0, tau * d[q] / c.rho);
        return out;
    };
    return rk4(rhs, h, tau_star, dtau);
}

std::vector<std::vector<cplx>> ode_integrate_averaged(const ODECase& c,
                                                      const std::vector<cplx>& h,
                                                      double tau_star,
                                                      double dtau) {
    PolynomialMap Fav = ode_time_average(c.F, c.w0);
    OdeRhs rhs = [&Fav](double, const std::vector<cplx>& u) {
        std::vector<cplx> out(u.size());
        Fav.apply(u, out);
        return out;
    };
    return rk4(rhs, h, tau_star, dtau);
}

PolynomialMap ode_time_average(const PolynomialMap& F,
                               const std::vector<double>& w0, double tol) {
    double scale = 0.0;
    for (double w : w0) scale = std::max(scale, std::abs(w));
    PolynomialMap out;
    out.ncomp = F.ncomp;
    for (auto& t : F.terms) {
        // Omega = -zeta_out w_out + sum_j zeta_j w_j (the k* = 0 reduction)
        auto freq = [&](int comp) {
            return (comp % 2 == 0 ? 1.0 : -1.0) * w0[comp / 2];
        };
        double om = -freq(t.out);
        for (int i : t.ins) om += freq(i);
        if (std::abs(om) <= tol * std::max(scale, 1e-300))
            out.terms.push_back(t);
    }
    return out;
}

OdeCompareResult ode_average_compare(const ODECase& base, double tau_star,
                                     const std::vector<double>& rho_sweep,
                                     const std::vector<cplx>& h,
                                     double dtau_cap) {
    OdeCompareResult res;
    // resonance invariance of B via the k* = 0 reduction of `resonance`
    {
        auto bs = make_constant_band(base.w0);
        std::vector<NKPair> pairs;
        for (int j : base.excited) pairs.push_back({j, kv(0.0)});
        NKSpectrum S(pairs);
        std::vector<int> arities;
        for (auto& t : base.F.terms) {
            int m = static_cast<int>(t.ins.size());
            if (std::find(arities.begin(), arities.end(), m) == arities.end())
                arities.push_back(m);
        }
        auto clo = closure_and_invariance(S, bs, arities);
        res.resonance_invariant = clo.resonance_invariant;
    }
    for (double rho : rho_sweep) {
        ODECase c = base;
        c.rho = rho;
        double dtau = 0.1 * rho;
        if (dtau_cap > 0) dtau = std::min(dtau, dtau_cap);
        auto full = ode_integrate_oscillatory(c, h, tau_star, dtau);
        auto avg = ode_integrate_averaged(c, h, tau_star, dtau);
        double unex = 0.0, gap = 0.0;
        for (size_t i = 0; i < full.size(); ++i) {
            for (int j = 1; j <= c.J(); ++j) {
                bool in_B = std::find(base.excited.begin(), base.excited.end(),
                                      j) != base.excited.end();
                for (int z = 0; z < 2; ++z) {
                    int q = 2 * (j - 1) + z;
                    if (!in_B) unex = std::max(unex, std::abs(full[i][q]));
                    gap = std::max(gap, std::abs(full[i][q] - avg[i][q]));
                }
            }
        }
        res.rho_values.push_back(rho);
        res.max_unexcited.push_back(unex);
        res.averaged_gap.push_back(gap);
    }
    return res;
}

ReductionResult standard_reduction(ReductionKind kind, double param,
                                   int degree_m, double beta) {
    ReductionResult r;
    switch (kind) {
        case ReductionKind::small_nonlinearity:
            r.rho = param;
            r.tau_scale = param;
            r.description = "tau = alpha t, rho = alpha";
            break;
        case ReductionKind::small_data:
            r.rho = std::pow(param, degree_m - 1);
            r.tau_scale = r.rho;
            r.amp_scale = param;
            r.description = "v = alpha0 U, tau = alpha0^(m-1) t";
            break;
        case ReductionKind::high_frequency:
            r.rho = 1.0 / (param * param);
            r.beta_eff = beta / param;
            r.description = "y = M x, rho = 1/M^2, beta1 = beta/M";
            break;
        case ReductionKind::hyperbolic_extension:
            r.rho = param;
            r.description = "two extra components with zero data";
            break;
    }
    return r;
}

CoupledNlsBundle coupled_nls_reference(const CoupledNlsParams& p,
                                       CoupledScenario scenario,
                                       const KGrid& grid, double tau_star) {
    auto band = make_coupled_nls_band(p.g01, p.g11, p.g21, p.g02, p.g12, p.g22);
    // cubic tensor on (u1, cu1, u2, cu2); the conjugate components carry the
    // mirrored coefficients so u_{j,-} = conj(u_{j,+}) is preserved
    auto chi_for = [](cplx b11, cplx b12, cplx b21, cplx b22, cplx c12,
                      cplx c22) {
        ChiTensor chi(4, 3);
        auto add_pair = [&chi](int out, std::vector<int> ins, cplx w) {
            if (w == cplx(0.0)) return;
            chi.add_monomial(out, ins, w);
            std::vector<int> cins;
            for (int i : ins) cins.push_back(i ^ 1);
            chi.add_monomial(out ^ 1, cins, std::conj(w));
        };
        add_pair(0, {0, 1, 0}, b11);  // |u1|^2 u1
        add_pair(0, {2, 3, 0}, b12);  // |u2|^2 u1
        add_pair(0, {2, 3, 2}, c12);  // |u2|^2 u2
        add_pair(2, {0, 1, 2}, b21);  // |u1|^2 u2
        add_pair(2, {2, 3, 2}, b22);  // |u2|^2 u2
        add_pair(2, {0, 1, 0}, c22);  // |u1|^2 u1
        return SusceptibilityModel::constant({{3, chi}});
    };

    auto band_of = [&p](double k) {
        double q1 = p.g01 + p.g11 * k + p.g21 * k * k;
        double q2 = p.g02 + p.g12 * k + p.g22 * k * k;
        return std::pair<int, int>{q1 <= q2 ? 1 : 2, q2 < q1 ? 1 : 2};
    };

    auto data = [&](bool with_1, bool with_2) {
        std::vector<WavepacketSpec> specs;
        if (with_1 && p.env1) {
            WavepacketSpec s;
            s.n = band_of(p.k1_star).first;  // parabola 1 hosts u1
            s.k_star = kv(p.k1_star);
            s.env_plus = p.env1;
            s.beta = p.beta;
            s.eps = p.eps;
            s.reality = true;
            specs.push_back(s);
        }
        if (with_2 && p.env2) {
            WavepacketSpec s;
            s.n = band_of(p.k2_star).second;  // parabola 2 hosts u2
            s.k_star = kv(p.k2_star);
            s.env_plus = p.env2;
            s.beta = p.beta;
            s.eps = p.eps;
            s.reality = true;
            specs.push_back(s);
        }
        return synthesize_multiwavepacket(specs, grid, band);
    };

    const bool preserve = scenario == CoupledScenario::preservation;
    CoupledNlsBundle bundle{
        EvolutionProblem(band, chi_for(p.b11, p.b12, p.b21, p.b22, p.c12, p.c22),
                         p.rho, data(true, !preserve), tau_star),
        EvolutionProblem(band, chi_for(p.b11, 0, 0, p.b22, 0, 0), p.rho,
                         data(true, false), tau_star),
        EvolutionProblem(band, chi_for(p.b11, 0, 0, p.b22, 0, 0), p.rho,
                         data(false, true), tau_star),
        scenario,
        preserve ? "C * rho" : "C_eps * rho / beta^(1+eps) + C * beta"};
    return bundle;
}

}  // namespace wavelab

#include "doctest.h"
#include "wavelab/fft.hpp"
#include "wavelab/harness.hpp"
#include "wavelab/models.hpp"

using namespace wavelab;

namespace {

ToyModel unit_toy() {
    ToyModel m;
    m.c1 = 0.5;
    m.c2 = 1.3;
    m.a1 = 0.4;
    m.a2 = 0.7;
    m.phi1 = bump_envelope(1.0, 3.0);
    m.k1_star = 4.0;
    m.beta = 0.4;
    m.rho = 0.1;
    return m;
}

}  // namespace

TEST_CASE("toy closed form basics") {
    ToyModel m = unit_toy();
    KGrid g(1, 1024, 0.125);
    // tau = 0 returns the initial data
    for (double x : {-3.0, 0.0, 1.7})
        CHECK(toy_closed_form(m, 1, x, 0.0, g.box_length()) ==
              doctest::Approx(m.h1(x)));
    // on the characteristic through the envelope peak: h = 0.5 at tau = 1
    ToyModel mb = m;
    mb.phi1 = bump_envelope(0.5, 3.0);
    mb.k1_star = 0.0;  // pure bump so the peak value is exact
    double x = mb.c1 * 1.0 / mb.rho;  // characteristic through y = 0
    CHECK(toy_closed_form(mb, 1, x, 1.0) == doctest::Approx(0.5 / (1 - 0.5)));
    // blow-up time is 1/sup|h| and does not depend on rho
    CHECK(m.blowup_time(1, g) == doctest::Approx(1.0).epsilon(1e-6));
    ToyModel m2 = m;
    m2.rho = 0.01;
    CHECK(m2.blowup_time(1, g) == doctest::Approx(m.blowup_time(1, g)));
    CHECK_THROWS_AS(toy_closed_form(mb, 1, mb.c1 * 2.1 / mb.rho, 2.1),
                    PastBlowUpError);
}

TEST_CASE("toy spectral solve matches the closed form") {
    ToyModel m = unit_toy();
    KGrid g(1, 1024, 0.125);  // box ~ 50, k range +-64
    double tau0 = m.blowup_time(1, g);
    auto prob = toy_problem(m, g, 0.5 * tau0);
    auto traj = solve_windowed(prob, 1e-3 * tau0);
    SpectralField U = reconstruct_physical_at(prob, traj, traj.steps());
    double L = g.box_length();
    double sup_err = 0.0, sup_ref = 0.0;
    for (int a = 0; a < g.M; ++a) {
        double xx = a * g.dr() - L / 2;
        double ref = toy_closed_form(m, 1, xx, 0.5 * tau0, L);
        sup_err = std::max(sup_err, std::abs(U.at(a, 0).real() - ref));
        sup_ref = std::max(sup_ref, std::abs(ref));
        // u2 and the extension components stay dark
        CHECK(std::abs(U.at(a, 1)) < 1e-10);
        CHECK(std::abs(U.at(a, 2)) < 1e-12);
        CHECK(std::abs(U.at(a, 3)) < 1e-12);
    }
    CHECK(sup_err / sup_ref < 5e-3);
}

TEST_CASE("traveling envelope moves at c/rho within 1 percent") {
    ToyModel m = unit_toy();
    m.phi1 = bump_envelope(0.3, 2.0);  // mild amplitude, slow shape change
    KGrid g(1, 1024, 0.125);
    auto prob = toy_problem(m, g, 0.2);
    auto traj = solve_windowed(prob, 2e-3, 8);  // keep 8 snapshots
    double L = g.box_length();
    auto centroid = [&](const SpectralField& uhat, double tau) {
        SpectralField U = reconstruct_physical_field(prob, uhat, tau);
        // centroid of |u1| about the expected center, windowed to avoid wrap
        double x0 = m.c1 * tau / m.rho;
        double sw = 0.0, sx = 0.0;
        for (int a = 0; a < g.M; ++a) {
            double xx = a * g.dr() - L / 2 - x0;
            if (std::abs(xx) > 8.0) continue;
            double wv = std::abs(U.at(a, 0));
            sw += wv;
            sx += wv * xx;
        }
        return x0 + sx / sw;
    };
    double tau_a = 0.2 * 1.0 / 8, tau_b = 0.2;
    int ia = 1, ib = traj.steps();
    double xa = centroid(traj.u[ia], traj.tau_at(ia));
    double xb = centroid(traj.u[ib], traj.tau_at(ib));
    double speed = (xb - xa) / (tau_b - tau_a);
    CHECK(std::abs(speed - m.c1 / m.rho) <= 0.01 * (m.c1 / m.rho));
}

TEST_CASE("hyperbolic extension components stay dark") {
    ToyModel m = unit_toy();
    KGrid g(1, 512, 0.25);
    auto prob = toy_problem(m, g, 0.2);
    auto traj = solve_windowed(prob, 2e-3, 4);
    for (auto& u : traj.u) {
        double dark = 0.0;
        for (size_t a = 0; a < g.nodes(); ++a)
            dark = std::max(dark,
                            std::max(std::abs(u.at(a, 2)), std::abs(u.at(a, 3))));
        CHECK(dark <= 1e-12);
    }
}

TEST_CASE("ODE averaging: unexcited modes stay order rho") {
    ODECase c;
    c.w0 = {1.0, std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0)};
    c.excited = {1, 2};
    PolynomialMap F;
    F.ncomp = 8;
    // universal couplings inside B
    F.terms.push_back({0, {0, 1, 0}, cplx(0.0, 0.6)});
    F.terms.push_back({1, {0, 1, 1}, cplx(0.0, -0.6)});
    F.terms.push_back({2, {2, 3, 2}, cplx(0.0, 0.4)});
    F.terms.push_back({3, {2, 3, 3}, cplx(0.0, -0.4)});
    F.terms.push_back({0, {2, 3, 0}, cplx(0.0, 0.3)});
    F.terms.push_back({1, {2, 3, 1}, cplx(0.0, -0.3)});
    // non-resonant feeds into B' = {3, 4}
    F.terms.push_back({4, {0, 2, 1}, cplx(0.5, 0.0)});
    F.terms.push_back({6, {0, 0, 3}, cplx(0.4, 0.0)});
    c.F = F;
    std::vector<cplx> h(8, cplx(0.0));
    h[0] = cplx(0.8, 0.1);
    h[1] = std::conj(h[0]);
    h[2] = cplx(0.5, -0.2);
    h[3] = std::conj(h[2]);
    auto res = ode_average_compare(c, 1.0, {1e-1, 3e-2, 1e-2}, h);
    CHECK(res.resonance_invariant);
    auto slope = fit_loglog(res.rho_values, res.max_unexcited);
    CHECK(slope.slope >= 0.8);
    auto slope2 = fit_loglog(res.rho_values, res.averaged_gap);
    CHECK(slope2.slope >= 0.8);
    ODECase zero = c;
    auto rz = ode_integrate_oscillatory(zero, std::vector<cplx>(8, cplx(0.0)),
                                        0.5, 0.01 * zero.rho);
    for (auto& u : rz)
        for (auto& z : u) CHECK(std::abs(z) == 0.0);
}

TEST_CASE("time averaging fixes universal nonlinearities") {
    auto F = universal_cubic(2, {{cplx(0.3), cplx(0.1)}, {cplx(0.2), cplx(0.4)}});
    auto Fav = ode_time_average(F, {1.0, std::sqrt(2.0)});
    REQUIRE(Fav.terms.size() == F.terms.size());
    for (size_t i = 0; i < F.terms.size(); ++i) {
        CHECK(Fav.terms[i].out == F.terms[i].out);
        CHECK(Fav.terms[i].ins == F.terms[i].ins);
        CHECK(Fav.terms[i].coeff == F.terms[i].coeff);
    }
    // a non-resonant monomial is killed...
    PolynomialMap G = F;
    G.terms.push_back({0, {2, 2, 3}, cplx(1.0)});
    auto Gav = ode_time_average(G, {1.0, std::sqrt(2.0)});
    CHECK(Gav.terms.size() == F.terms.size());
    // ... and its finite-T average is O(1/(T Omega)), oracle by quadrature
    {
        double om = -1.0 + std::sqrt(2.0);  // mismatch of the added term
        double T = 1e4 / std::abs(om);
        int n = 200000;
        cplx acc(0.0);
        for (int i = 0; i < n; ++i) {
            double t = (i + 0.5) * T / n;
            acc += std::polar(1.0, om * t);
        }
        acc *= T / n / T;
        CHECK(std::abs(acc) <= 2.0 / (T * std::abs(om)) * 1.01);
    }
}

TEST_CASE("four-wave resonant term is retained") {
    // w2 - w1 + w3 = w4 arrangement: choose frequencies so that
    // w identities hold: w = {1, 2, 4, 5}: -1 + 2 + 4 = 5
    PolynomialMap F;
    F.ncomp = 8;
    F.terms.push_back({6, {1, 2, 4}, cplx(1.0)});  // u1^- u2^+ u3^+ -> u4^+
    auto Fav = ode_time_average(F, {1.0, 2.0, 4.0, 5.0});
    CHECK(Fav.terms.size() == 1);
}

TEST_CASE("standard reductions produce the advertised parameters") {
    auto r1 = standard_reduction(ReductionKind::small_data, 0.1, 3);
    CHECK(r1.rho == doctest::Approx(0.01));
    CHECK(r1.tau_scale == doctest::Approx(0.01));
    auto r2 = standard_reduction(ReductionKind::high_frequency, 10.0, 3, 0.1);
    CHECK(r2.rho == doctest::Approx(0.01));
    CHECK(r2.beta_eff == doctest::Approx(0.01));
    auto r3 = standard_reduction(ReductionKind::small_nonlinearity, 0.05);
    CHECK(r3.rho == doctest::Approx(0.05));
}

TEST_CASE("coupled NLS: trivial second component when uncoupled") {
    CoupledNlsParams p;
    p.b11 = cplx(0.0, 0.5);
    p.b22 = cplx(0.0, 0.4);
    p.b12 = p.b21 = p.c12 = p.c22 = cplx(0.0);
    p.k1_star = 1.0;
    p.k2_star = -1.0;
    p.beta = 0.25;
    p.eps = 0.2;
    p.rho = 0.1;
    p.env1 = [](const Kvec& eta) {
        return cplx(std::exp(-eta[0] * eta[0] / (2 * 0.09)), 0.0);
    };
    p.env2 = nullptr;  // h2 = 0
    KGrid g(1, 256, 0.05);
    auto bundle =
        coupled_nls_reference(p, CoupledScenario::preservation, g, 0.3);
    auto traj = solve_windowed(bundle.full, 2e-3, 4);
    for (auto& u : traj.u)
        for (size_t a = 0; a < g.nodes(); ++a) {
            CHECK(std::abs(u.at(a, 2)) < 1e-12);
            CHECK(std::abs(u.at(a, 3)) < 1e-12);
        }
}

#include <random>

#include "doctest.h"
#include "wavelab/dispersion.hpp"

using namespace wavelab;

namespace {

// cosine test band, eigvec = coordinate orts
BandStructure cosine_band() {
    BandStructure::Callbacks cb;
    cb.J = 1;
    cb.d = 1;
    cb.name = "cosine";
    cb.omega = [](int, const Kvec& k) { return std::cos(k[0]); };
    cb.eigvec = [](int, int zeta, const Kvec&) {
        std::vector<cplx> g(2, cplx(0.0));
        g[zeta > 0 ? 0 : 1] = cplx(1.0);
        return g;
    };
    return BandStructure(std::move(cb));
}

std::vector<BandStructure> builtin_bands() {
    std::vector<BandStructure> out;
    out.push_back(make_two_speed_band(0.7, 1.3));
    out.push_back(make_nls_band(1.0, 0.2, 0.5));
    out.push_back(make_coupled_nls_band(1.0, 0.0, 0.5, 1.6, 0.1, 0.4));
    out.push_back(make_tabulated_band({-4, -3, -2, -1, 0, 1, 2, 3, 4},
                                      {17, 10, 5, 2, 1, 2, 5, 10, 17}));
    return out;
}

}  // namespace

TEST_CASE("two-speed band: omega = c|k| by construction") {
    auto bs = make_two_speed_band(3.0, 5.0);
    // band 1 is the slower pair
    CHECK(bs.eval_band(1, +1, kv(2.0)).omega == doctest::Approx(6.0));
    CHECK(bs.eval_band(2, +1, kv(2.0)).omega == doctest::Approx(10.0));
    CHECK_THROWS_AS(bs.eval_band(3, +1, kv(1.0)), IndexOutOfRangeError);
    CHECK_THROWS_AS(bs.eval_band(1, +1, kv(0.0)), BandCrossingError);
}

TEST_CASE("diagonal symmetry on every builtin") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (auto& bs : builtin_bands()) {
        for (int trial = 0; trial < 200; ++trial) {
            Kvec k = kv(u(rng));
            if (bs.crossing(k) || bs.crossing(kv(-k[0]))) continue;
            for (int n = 1; n <= bs.J(); ++n)
                CHECK(bs.omega(n, -1, -1.0 * k) ==
                      doctest::Approx(-bs.omega(n, +1, k)).epsilon(1e-12));
        }
    }
}

TEST_CASE("band ordering and nonnegativity on samples") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (auto& bs : builtin_bands()) {
        for (int trial = 0; trial < 200; ++trial) {
            Kvec k = kv(u(rng));
            if (bs.crossing(k)) continue;
            double prev = 0.0;
            for (int n = 1; n <= bs.J(); ++n) {
                double w = bs.omega_plus(n, k);
                CHECK(w >= -1e-12);
                CHECK(w >= prev - 1e-9);
                prev = w;
            }
        }
    }
}

TEST_CASE("projections: rank one, orthogonal, complete") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (auto& bs : builtin_bands()) {
        const int nc = bs.ncomp();
        for (int trial = 0; trial < 1000; ++trial) {
            Kvec k = kv(u(rng));
            if (bs.crossing(k)) continue;
            std::vector<std::vector<cplx>> projs;
            for (int n = 1; n <= bs.J(); ++n)
                for (int zeta : {+1, -1})
                    projs.push_back(bs.proj_matrix(n, zeta, k));
            // unit eigenvectors
            for (int n = 1; n <= bs.J(); ++n)
                for (int zeta : {+1, -1}) {
                    auto g = bs.eigvec(n, zeta, k);
                    double nrm = 0;
                    for (auto& z : g) nrm += std::norm(z);
                    CHECK(std::sqrt(nrm) == doctest::Approx(1.0).epsilon(1e-12));
                }
            // mutual annihilation and completeness
            std::vector<cplx> sum(nc * nc, cplx(0.0));
            for (size_t p = 0; p < projs.size(); ++p) {
                for (int i = 0; i < nc * nc; ++i) sum[i] += projs[p][i];
                for (size_t q = 0; q < projs.size(); ++q) {
                    if (p == q) continue;
                    double m = 0.0;
                    for (int i = 0; i < nc; ++i)
                        for (int j = 0; j < nc; ++j) {
                            cplx z(0.0);
                            for (int l = 0; l < nc; ++l)
                                z += projs[p][i * nc + l] * projs[q][l * nc + j];
                            m = std::max(m, std::abs(z));
                        }
                    CHECK(m < 1e-12);
                }
            }
            for (int i = 0; i < nc; ++i)
                for (int j = 0; j < nc; ++j) {
                    cplx expect = (i == j) ? cplx(1.0) : cplx(0.0);
                    CHECK(std::abs(sum[i * nc + j] - expect) < 1e-12);
                }
        }
    }
}

TEST_CASE("NLS band at k=0 gives gamma0") {
    auto bs = make_nls_band(1.25, 0.3, 0.5);
    CHECK(bs.eval_band(1, +1, kv(0.0)).omega == doctest::Approx(1.25));
}

TEST_CASE("taylor_dispersion: exact on quadratic bands") {
    auto bs = make_nls_band(1.0, 0.0, 0.5);
    for (double be : {0.02, 0.1, 0.4}) {
        double gamma2 = bs.taylor_dispersion(1, kv(0.7), 2, kv(be));
        double exact = bs.omega_plus(1, kv(0.7 + be));
        CHECK(gamma2 == doctest::Approx(exact).epsilon(1e-12));
    }
    // mu = 1 at zero offset is omega itself
    CHECK(bs.taylor_dispersion(1, kv(0.7), 1, kv(0.0)) ==
          doctest::Approx(bs.omega_plus(1, kv(0.7))));
}

TEST_CASE("taylor_dispersion: cosine band remainder") {
    auto bs = cosine_band();
    double g2 = bs.taylor_dispersion(1, kv(0.0), 2, kv(0.1));
    CHECK(g2 == doctest::Approx(1.0 - 0.005).epsilon(1e-8));
    double exact = std::cos(0.1);
    CHECK(std::abs(exact - g2) <= 1e-3);  // remainder below C * (0.1)^3

    // remainder order: fitted slope >= mu + 0.8 over beta_eta 1e-1 .. 1e-3
    for (int mu : {1, 2, 3}) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (double be : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
            double approx = bs.taylor_dispersion(1, kv(0.3), mu, kv(be));
            double exact2 = std::cos(0.3 + be);
            double err = std::abs(exact2 - approx);
            if (err < 1e-14) continue;
            double x = std::log(be), y = std::log(err);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(slope >= mu + 0.8);
    }
}

TEST_CASE("degeneracy probe flags") {
    // linear band flagged
    {
        BandStructure::Callbacks cb;
        cb.J = 1;
        cb.omega = [](int, const Kvec& k) { return 2.0 * k[0]; };
        cb.eigvec = [](int, int zeta, const Kvec&) {
            std::vector<cplx> g(2, cplx(0.0));
            g[zeta > 0 ? 0 : 1] = cplx(1.0);
            return g;
        };
        auto rep = probe_omega_degeneracy(BandStructure(std::move(cb)), kv(0.1),
                                          kv(1.0), 64, 1e-9);
        CHECK(rep.linear_band);
    }
    // |k| scaling relation flagged: 2 w(k) = w(2k)
    {
        auto bs = make_two_speed_band(1.0, 2.0);
        auto rep = probe_omega_degeneracy(bs, kv(0.2), kv(1.0), 64, 1e-9);
        CHECK(rep.scaling_relation);
    }
    // generic quadratic band: clean report at tol 1e-9
    {
        auto bs = make_nls_band(1.0, 0.0, 1.0);
        auto rep = probe_omega_degeneracy(bs, kv(0.5), kv(1.5), 64, 1e-9);
        CHECK(!rep.any());
    }
    CHECK_THROWS_AS(probe_omega_degeneracy(make_nls_band(1, 0, 1), kv(0.5),
                                           kv(1.5), 1, 1e-9),
                    EmptySampleError);
}

TEST_CASE("degeneracy probe is deterministic") {
    auto bs = make_nls_band(1.0, 0.1, 0.7);
    auto r1 = probe_omega_degeneracy(bs, kv(0.2), kv(2.0), 101, 1e-9);
    auto r2 = probe_omega_degeneracy(bs, kv(0.2), kv(2.0), 101, 1e-9);
    CHECK(r1.linear_dependence_residual == r2.linear_dependence_residual);
    CHECK(r1.affine_residual == r2.affine_residual);
}

TEST_CASE("tabulated band interpolates samples") {
    std::vector<double> ks, ws;
    for (int i = -8; i <= 8; ++i) {
        ks.push_back(0.5 * i);
        ws.push_back(1.0 + 0.25 * ks.back() * ks.back());
    }
    auto bs = make_tabulated_band(ks, ws);
    CHECK(bs.omega_plus(1, kv(0.5)) == doctest::Approx(1.0625).epsilon(1e-3));
    CHECK_THROWS(make_tabulated_band({0.0, 0.0}, {1.0, 1.0}));
}

#include <random>

#include "doctest.h"
#include "wavelab/fft.hpp"
#include "wavelab/field.hpp"
#include "wavelab/wavepacket.hpp"

using namespace wavelab;

namespace {

SpectralField random_field(const KGrid& g, int ncomp, uint64_t seed,
                           double amp = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SpectralField f(g, ncomp);
    for (size_t a = 0; a < g.nodes(); ++a)
        for (int c = 0; c < ncomp; ++c)
            f.at(a, c) = amp * cplx(u(rng), u(rng));
    return f;
}

}  // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS(KGrid(1, 7, 0.1));
    CHECK_THROWS(KGrid(1, 12, 0.1));  // not a power of two
    KGrid g(1, 64, 0.25);
    CHECK(g.k1(32) == doctest::Approx(0.0));
    CHECK(g.k1(0) == doctest::Approx(-8.0));
    CHECK(g.box_length() == doctest::Approx(two_pi / 0.25));
    CHECK(g.dr() * g.dk * g.M == doctest::Approx(two_pi));
}

TEST_CASE("fourier round trip to 1e-12") {
    KGrid g(1, 128, 0.25);
    SpectralField f = random_field(g, 2, 7);
    SpectralField back = fourier_forward(fourier_inverse(f));
    CHECK(back.max_abs_diff(f) < 1e-12);
    SpectralField back2 = fourier_inverse(fourier_forward(f));
    CHECK(back2.max_abs_diff(f) < 1e-12);
}

TEST_CASE("plane wave maps to a grid delta at k*") {
    KGrid g(1, 64, 0.5);
    const double kstar = 3.0;  // on-grid frequency
    REQUIRE(g.index_of(kstar) >= 0);
    SpectralField u(g, 1);
    for (size_t a = 0; a < g.nodes(); ++a)
        u.at(a, 0) = std::polar(1.0, kstar * g.r_at(a)[0]);
    SpectralField uh = fourier_forward(u);
    int idx = g.index_of(kstar);
    // delta of weight (integral) 2*pi/dk * dk = L_r at k*
    CHECK(std::abs(uh.at(idx, 0)) == doctest::Approx(g.box_length()));
    for (int a = 0; a < g.M; ++a)
        if (a != idx) CHECK(std::abs(uh.at(a, 0)) < 1e-9);
}

TEST_CASE("single grid delta of height 1/dk has unit l1 norm") {
    KGrid g(1, 32, 0.125);
    SpectralField f(g, 1);
    f.at(5, 0) = cplx(1.0 / g.dk, 0.0);
    CHECK(f.l1_norm() == doctest::Approx(1.0));
}

TEST_CASE("L-infinity bound by (2pi)^-d L1 norm of the transform") {
    KGrid g(1, 64, 0.3);
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        SpectralField fh = random_field(g, 2, seed);
        SpectralField f = fourier_inverse(fh);
        CHECK(f.sup_abs() <= fh.l1_norm() / two_pi + 1e-12);
    }
}

TEST_CASE("Young inequality for convolutions") {
    KGrid g(1, 32, 0.2);
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        SpectralField f = random_field(g, 1, 2 * seed);
        SpectralField h = random_field(g, 1, 2 * seed + 1);
        SpectralField c = convolve(f, h);
        CHECK(c.l1_norm() <= f.l1_norm() * h.l1_norm() * (1 + 1e-12));
    }
}

TEST_CASE("dilation preserves l1 and commutes with convolution") {
    KGrid g(1, 64, 0.2);
    auto bump = [&](uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        SpectralField f(g, 1);
        for (int a = 28; a <= 36; ++a) f.at(a, 0) = cplx(u(rng), u(rng));
        return f;
    };
    SpectralField f = bump(3), h = bump(4);
    for (double beta : {2.0, 0.25, 0.1}) {
        SpectralField f2 = dilate(f, beta), h2 = dilate(h, beta);
        CHECK(f2.l1_norm() == doctest::Approx(f.l1_norm()).epsilon(1e-10));
        SpectralField lhs = convolve(f2, h2);
        SpectralField rhs = dilate(convolve(f, h), beta);
        CHECK(lhs.max_abs_diff(rhs) < 1e-10);
    }
}

TEST_CASE("cutoff is the closed-ball indicator") {
    Kvec c = kv(1.0);
    CHECK(cutoff_psi(kv(1.0), c, 0.5) == 1.0);
    CHECK(cutoff_psi(kv(1.5), c, 0.5) == 1.0);  // boundary included
    CHECK(cutoff_psi(kv(1.505), c, 0.5) == 0.0);
    CHECK_THROWS(cutoff_psi(kv(0.0), c, 0.0));
}

TEST_CASE("weighted norm with psi = a ln(1+r) equals the L1a norm") {
    KGrid g(1, 64, 0.3);
    SpectralField f = random_field(g, 2, 11);
    const double a = 1.7;
    double wn = f.weighted_norm([a](double r) { return a * std::log1p(r); });
    CHECK(wn == doctest::Approx(f.l1a_norm(a)).epsilon(1e-12));
}

TEST_CASE("weight function class checks") {
    CHECK_NOTHROW(WeightFunction([](double r) { return 2.0 * std::log1p(r) + 0.5; }, 2.0));
    // decreasing psi rejected
    CHECK_THROWS(WeightFunction([](double r) { return 1.0 - 0.1 * r; }, 0.0));
    // psi(0) = 0 rejected
    CHECK_THROWS(WeightFunction([](double r) { return r; }, 0.0));
}

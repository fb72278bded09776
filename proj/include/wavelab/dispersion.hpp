#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wavelab/common.hpp"

namespace wavelab {

// Linear part L(k) of the evolution system, presented through its band data:
// dispersion relations omega_{n,zeta}(k), unit eigenvector fields
// g_{n,zeta}(k) in C^{2J} and the band-crossing set sigma_bc.  Everything is
// immutable after construction and safe to evaluate concurrently.
class BandStructure {
public:
    struct Callbacks {
        int J = 1;
        int d = 1;
        // omega_n(k) = omega_{n,+}(k); the zeta branches follow from the
        // diagonal symmetry omega_{n,zeta}(k) = zeta * omega_n(zeta k).
        std::function<double(int n, const Kvec& k)> omega;
        std::function<Kvec(int n, const Kvec& k)> grad;                  // optional
        std::function<std::vector<double>(int n, const Kvec& k)> hess;   // optional, d*d row-major
        std::function<std::vector<cplx>(int n, int zeta, const Kvec& k)> eigvec;
        std::function<bool(const Kvec& k)> crossing;                     // optional
        // Optional fast path: L(k) diagonal in the component basis, entry c.
        std::function<double(int c, const Kvec& k)> diag;
        std::string name = "custom";
    };

    explicit BandStructure(Callbacks cb);

    int J() const { return cb_.J; }
    int d() const { return cb_.d; }
    int ncomp() const { return 2 * cb_.J; }
    const std::string& name() const { return cb_.name; }

    bool crossing(const Kvec& k) const;
    bool has_diag() const { return static_cast<bool>(cb_.diag); }
    double diag_entry(int c, const Kvec& k) const { return cb_.diag(c, k); }

    // omega_{n,zeta}(k); n is 1-based.  No crossing check (raw evaluation).
    double omega(int n, int zeta, const Kvec& k) const;
    // Convenience: omega_n(k) = omega_{n,+}(k).
    double omega_plus(int n, const Kvec& k) const { return omega(n, +1, k); }

    Kvec grad_omega(int n, int zeta, const Kvec& k) const;
    std::vector<double> hess_omega(int n, int zeta, const Kvec& k) const;

    // Gauge-fixed unit eigenvector: largest-magnitude component made
    // real-positive, ties broken by lowest index.
    std::vector<cplx> eigvec(int n, int zeta, const Kvec& k) const;

    void proj_apply(int n, int zeta, const Kvec& k, std::span<const cplx> in,
                    std::span<cplx> out) const;
    std::vector<cplx> proj_matrix(int n, int zeta, const Kvec& k) const;

    struct BandEval {
        double omega;
        std::vector<cplx> g;
        std::vector<cplx> proj;  // 2J x 2J row-major
    };
    // Errors: BandCrossing if k is flagged, IndexOutOfRange if n not in 1..J.
    BandEval eval_band(int n, int zeta, const Kvec& k) const;

    // Taylor polynomial gamma_mu(k*, n, beta_eta) of omega_n around k*,
    // mu in {1,2,3}.  Derivatives analytic when provided, 4th-order central
    // differences with h = 1e-4 * (1 + |k|) otherwise (3rd derivative always
    // by differences).
    double taylor_dispersion(int n, const Kvec& k_star, int mu,
                             const Kvec& beta_eta) const;

    void check_band_index(int n) const;

private:
    Callbacks cb_;
    double fd_step(const Kvec& k) const { return 1e-4 * (1.0 + norm2(k)); }
    double omega_n(int n, const Kvec& k) const;  // omega_{n,+}
};

// Advisory sampled probe of the omega-degeneracy conditions.
struct DegeneracyReport {
    bool linear_dependence = false;
    bool linear_band = false;
    bool scaling_relation = false;
    bool mirror_relation = false;
    double linear_dependence_residual = 0.0;
    std::vector<double> affine_residual;       // per band
    std::vector<double> scaling_residual;      // per band, min over C
    std::vector<double> mirror_residual;       // per ordered band pair
    bool any() const {
        return linear_dependence || linear_band || scaling_relation ||
               mirror_relation;
    }
};

DegeneracyReport probe_omega_degeneracy(const BandStructure& bs,
                                        const Kvec& box_lo, const Kvec& box_hi,
                                        int grid_per_axis, double tol);

// Builtin band library ------------------------------------------------------

// (a) Two-speed hyperbolic pair omega_{j,zeta}(k) = c_j zeta |k| on the
// 4-component extension (u1, u2, w1, w2); k = 0 is a band-crossing point.
BandStructure make_two_speed_band(double c1, double c2, double r_bc = 1e-6);

// (b) Single NLS band omega(k) = g0 + g1 k + g2 k^2, complexified to the
// doublet (u, conj u).
BandStructure make_nls_band(double g0, double g1, double g2);

// (c) Coupled-NLS bands omega_j(k) = g0j + g1j k + g2j k^2, components
// (u1, conj u1, u2, conj u2).  Bands are indexed so that band 1 is the lower
// one at k = 0; points where the bands meet are flagged as crossings.
BandStructure make_coupled_nls_band(double g01, double g11, double g21,
                                    double g02, double g12, double g22);

// (d) Tabulated band: (k, omega) samples, strictly increasing k, cubic
// Hermite interpolation; omega_{1,-}(k) = -omega(-k) needs the table to
// cover the negated range as well.
BandStructure make_tabulated_band(const std::vector<double>& ks,
                                  const std::vector<double>& ws);

// Constant bands omega_j(k) = w0_j (ODE reduction); w0 ascending positive.
BandStructure make_constant_band(const std::vector<double>& w0);

}  // namespace wavelab

#pragma once

#include <functional>

#include "wavelab/dispersion.hpp"
#include "wavelab/field.hpp"
#include "wavelab/resonance.hpp"

namespace wavelab {

// Sharp indicator cutoff: 1 on the closed ball |k - center| <= radius.
double cutoff_psi(const Kvec& k, const Kvec& center, double radius);

// Fourier-domain wavepacket envelope data for one nk-pair.  env_minus
// defaults to the conjugate-symmetric partner eta -> conj(env_plus(-eta))
// when reality is set.
struct WavepacketSpec {
    int n = 1;
    Kvec k_star;
    std::function<cplx(const Kvec& eta)> env_plus;
    std::function<cplx(const Kvec& eta)> env_minus;  // may be empty
    double beta = 0.1;
    double eps = 0.1;
    bool reality = false;
};

// h_hat(k) = sum_l sum_zeta beta^{-d} H_{l,zeta}(beta^{-1}(k - zeta k_*l))
//            * Psi(k, zeta k_*l, beta^{1-eps}) * g_{n_l,zeta}(k).
// Throws OverlapError when windows collide, GridTooCoarse when
// beta^{1-eps} < 4 dk.
SpectralField synthesize_multiwavepacket(const std::vector<WavepacketSpec>& specs,
                                         const KGrid& grid,
                                         const BandStructure& bs);

// u_l = sum_zeta Psi(k, zeta k_*l, beta^{1-eps}) Pi_{n_l,zeta}(k) u.
SpectralField band_window_project(const SpectralField& u, const NKSpectrum& S,
                                  int l, double beta, double eps,
                                  const BandStructure& bs);

struct DiagnosticsResult {
    std::vector<double> tails;                   // per beta
    std::vector<std::vector<double>> component_norms;  // per beta, per l
    double fitted_s = 0.0;
    bool degenerate = false;  // all tails below floor; fitted_s = +inf sentinel
};

// tail(beta) = l1(u_beta - sum_l band_window_project(u_beta, ...)); fits the
// log-log slope of tail against beta.  Fields must align with the beta list.
DiagnosticsResult wavepacket_diagnostics(const std::vector<SpectralField>& u,
                                         const NKSpectrum& S,
                                         const std::vector<double>& betas,
                                         double eps, const BandStructure& bs);

// Weight function class W(a): positive at 0, nondecreasing, sublinear,
// superlogarithmic relative to a.  Constructor samples these properties.
struct WeightFunction {
    std::function<double(double)> psi;
    double a = 0.0;
    WeightFunction(std::function<double(double)> psi_, double a_);
};

}  // namespace wavelab

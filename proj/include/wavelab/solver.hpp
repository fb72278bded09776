#pragma once

#include <memory>
#include <optional>

#include "wavelab/dispersion.hpp"
#include "wavelab/fft.hpp"
#include "wavelab/field.hpp"
#include "wavelab/resonance.hpp"
#include "wavelab/susceptibility.hpp"

namespace wavelab {

// Per-grid band data: eigenvalue tables for the phase rotations e^{-i t L(k)}
// and the modal basis when L(k) is not diagonal in the component basis.
class BandTables {
public:
    BandTables(const KGrid& grid, const BandStructure& bs);

    const KGrid& grid() const { return grid_; }
    bool diagonal() const { return diagonal_; }
    double excluded_measure() const { return excluded_measure_; }

    // In-place application of exp(-i * s * L(k)) to every node.
    void rotate(SpectralField& u, double s) const;

    // Pi_{n,zeta}(k)-projection of one node (crossing nodes use the stored
    // clean-neighbor basis).
    void proj_apply(int n, int zeta, size_t node, std::span<const cplx> in,
                    std::span<cplx> out) const;

    // max |omega| over nodes with |k| <= radius (all nodes when radius <= 0)
    double omega_abs_max(double radius = -1.0) const;

    bool node_crossing(size_t node) const { return crossing_[node] != 0; }

private:
    KGrid grid_;
    int ncomp_;
    int J_;
    bool diagonal_;
    std::vector<double> diag_omega_;   // [node*ncomp + c] (diagonal path)
    std::vector<int> comp_of_;         // [node*ncomp + p] component of (n,zeta)
    std::vector<double> modal_omega_;  // [node*ncomp + p]
    std::vector<cplx> modal_g_;        // [node*ncomp*ncomp + p*ncomp + c]
    std::vector<uint8_t> crossing_;
    double excluded_measure_ = 0.0;
};

enum class ConvolutionPath { fft, direct };

// acc[node, e.out] += e.c * prod_j inputs[j][node, e.in[j]] for every
// nonzero tensor entry; the workhorse of the pointwise r-space products.
void accumulate_products(const std::vector<ChiTensor::Entry>& entries,
                         const std::vector<const SpectralField*>& inputs,
                         SpectralField& acc);

// F_hat^(m)(u_1,...,u_m)(k), the discretized convolution form.  The fft path
// dealiases by zero-padding to 2M; the direct path is the quadratic-cost
// oracle (no wrap-around), guarded by `budget` summation terms.
SpectralField apply_nonlinearity(const ChiTensor& chi,
                                 const std::vector<const SpectralField*>& fields,
                                 ConvolutionPath path = ConvolutionPath::fft,
                                 size_t budget = 100'000'000);

struct EvolutionProblem {
    BandStructure bs;
    SusceptibilityModel chi;
    double rho = 1.0;
    SpectralField h;
    double tau_star = 1.0;
    std::optional<NKSpectrum> spectrum;

    EvolutionProblem(BandStructure bs_, SusceptibilityModel chi_, double rho_,
                     SpectralField h_, double tau_star_);

    std::shared_ptr<const BandTables> tables() const;
    // Lipschitz-constant estimate C_F = C_chi m_F^2 (4R)^{m_F-1}; the
    // contraction warning fires when tau_star >= 1/C_F.
    double contraction_estimate() const;

private:
    mutable std::shared_ptr<const BandTables> tables_;
};

struct SolverConfig {
    enum class Method { picard, ifrk4 };
    enum class Interp { left_const, linear };
    Method method = Method::picard;
    double dtau = 0.0;  // trajectory step; defaults to tau_star/64
    double picard_tol = 1e-10;
    int picard_max_iter = 64;
    ConvolutionPath convolution = ConvolutionPath::fft;
    double c_osc = 0.1;   // oscillation resolution parameter
    double tau0 = 0.0;    // absolute time origin (restart recipe)
    Interp interp = Interp::left_const;
    double phase_rate_hint = 0.0;  // reuse of the substep estimate (restarts)
};

struct Trajectory {
    double tau0 = 0.0;
    double dtau = 0.0;
    std::vector<SpectralField> u;  // u[i] at tau0 + i*dtau
    int steps() const { return static_cast<int>(u.size()) - 1; }
    double tau_at(int i) const { return tau0 + i * dtau; }
    const SpectralField& back() const { return u.back(); }
};

struct SolveDiagnostics {
    double residual = 0.0;
    int iterations = 0;
    bool contraction_warning = false;
    std::vector<double> l1_history;
};

// Integrated-equation nonlinearity F^(m)(u^m)(k, tau) =
//   int_0^tau e^{i tau' L/rho} F_hat^(m)((e^{-i tau' L/rho} u)(tau')) dtau'
// evaluated by composite Gauss-2 quadrature with exact per-band phases at
// every node; substeps resolve the 1/rho oscillation.
SpectralField oscillatory_term(const EvolutionProblem& prob,
                               const Trajectory& traj, int m, double tau,
                               const SolverConfig& cfg);

std::pair<Trajectory, SolveDiagnostics> solve_integrated(
    const EvolutionProblem& prob, const SolverConfig& cfg);

// Conservative bound on the integrand phase rate over the data support,
// used to pick oscillation-resolving quadrature substeps.
double estimate_phase_rate(const EvolutionProblem& prob);

// U(r, tau) snapshots from a slow-variable trajectory (F-solution sense).
Trajectory reconstruct_physical(const EvolutionProblem& prob,
                                const Trajectory& traj);

// Single-snapshot helper: U(r) at trajectory index i.
SpectralField reconstruct_physical_at(const EvolutionProblem& prob,
                                      const Trajectory& traj, int i);

// U(r) from a slow-variable snapshot at absolute time tau.
SpectralField reconstruct_physical_field(const EvolutionProblem& prob,
                                         const SpectralField& uhat, double tau);

}  // namespace wavelab

#pragma once

#include <functional>

#include "wavelab/solver.hpp"
#include "wavelab/wavepacket.hpp"

namespace wavelab {

// Product state for the 2N-component reduced systems.
struct MultiField {
    std::vector<SpectralField> f;

    MultiField() = default;
    explicit MultiField(std::vector<SpectralField> f_) : f(std::move(f_)) {}
    static MultiField zeros_like(const MultiField& o);

    size_t size() const { return f.size(); }
    double norm_sum() const;  // E^{2N} norm: sum of component L1 norms
    void axpy(cplx a, const MultiField& o);
    MultiField& operator+=(const MultiField& o);
    MultiField& operator-=(const MultiField& o);
    MultiField& operator*=(cplx s);
    friend MultiField operator-(MultiField a, const MultiField& b) {
        a -= b;
        return a;
    }
};

// slot index of component (l, theta): 2(l-1) + (theta > 0 ? 0 : 1)
inline int slot_of(int l, int theta) { return 2 * (l - 1) + (theta > 0 ? 0 : 1); }

// One resonant interaction monomial of the (l, theta) equation.
struct InteractionTerm {
    int l = 1;
    int theta = +1;
    int m = 0;
    IndexString lambda;     // slots lambda_j = (zeta_j, l_j)
    cplx Q;                 // frozen scalar kernel (scalar/minimal levels)
    std::vector<cplx> q1;   // per-slot first-derivative kernels (nu = 1, d=1)
};

using ResonantTermList = std::vector<InteractionTerm>;

// Keeps exactly the terms whose frequency mismatch vanishes:
// Omega = -theta * phi_l + sum_j zeta_j phi_{l_j}, |Omega| <= tol * scale.
ResonantTermList time_average_nonlinearity(const ResonantTermList& terms,
                                           const std::vector<double>& phi,
                                           double tol = 1e-9);

struct MultiTrajectory {
    double tau0 = 0.0;
    double dtau = 0.0;
    std::vector<MultiField> w;
    int steps() const { return static_cast<int>(w.size()) - 1; }
    double tau_at(int i) const { return tau0 + i * dtau; }
};

// A reduced fixed-point system W = integral of K(tau', W(tau')) + data.
struct ReducedSystem {
    enum class Level { interaction, averaged, scalar, minimal };
    Level level = Level::interaction;
    KGrid grid;                 // k-grid (interaction/averaged/scalar), eta-grid (minimal)
    MultiField data;
    std::function<MultiField(double, const MultiField&)> integrand;
    double phase_rate = 0.0;    // substep control for the quadrature
    NKSpectrum S;
    double beta = 0.0, eps = 0.0, rho = 0.0;
    bool resonance_invariant_warning = false;
    ResonantTermList terms;     // averaged/scalar/minimal levels
};

// Full-vector wavepacket interaction system (sysloc): 2N windowed
// band-projected copies of the integrated equation.
ReducedSystem build_interaction_system(const EvolutionProblem& prob,
                                       const NKSpectrum& S, double beta,
                                       double eps);

// Same windows, nonlinearity restricted to the resonant term set.
ReducedSystem build_averaged_system(const EvolutionProblem& prob,
                                    const NKSpectrum& S, double beta,
                                    double eps,
                                    const ResonanceOptions& opt = {});

// Scalar amplitude system over v_{l,theta} with kernels Q frozen at the
// wavepacket centers; reconstruct() lifts a scalar state back to vectors.
struct ScalarSystem {
    ReducedSystem sys;
    // per slot: amplitude field -> vector field via g_{n_l,theta}(k)
    std::function<MultiField(const MultiField&)> reconstruct;
};
ScalarSystem scalarize(const EvolutionProblem& prob, const NKSpectrum& S,
                       double beta, double eps,
                       const ResonanceOptions& opt = {});

// z_{l,theta}(eta) = beta^d v(theta k_*l + beta eta) on the eta-grid with
// deta = dk/beta (exact index map; GridMismatch when misaligned).
SpectralField rescale_amplitudes(const SpectralField& v, double beta,
                                 const Kvec& center, const KGrid& eta_grid);
SpectralField unscale_amplitudes(const SpectralField& z, double beta,
                                 const Kvec& center, const KGrid& k_grid);

// eta-grid of radius >= 2 beta^{-eps} with the given spacing
KGrid eta_grid_for(double beta, double eps, double deta);

struct MinimalSystemSpec {
    int mu = 2;              // dispersion Taylor order (1..3)
    int nu = 0;              // susceptibility trig order (0..1)
    double rho1 = 1.0;       // rho / beta
    double rho2 = 1.0;       // rho / beta^2; +inf allowed (mu = 1 sets it)
    double beta = 0.1;       // physical beta (cutoff radius, trig argument)
    double eps = 0.2;
    bool cutoff_enabled = true;
    double q_fd_beta = 1e-4; // finite-difference step for nu = 1 kernels
};

// Minimal (mu, nu) amplitude system on the eta-grid; initial data are the
// rescaled envelopes H_{l,theta}.  Requires a resonance-invariant S.
ReducedSystem build_minimal_system(const MinimalSystemSpec& spec,
                                   const NKSpectrum& S, const BandStructure& bs,
                                   const SusceptibilityModel& chi,
                                   const KGrid& eta_grid, MultiField H,
                                   const ResonanceOptions& opt = {});

struct ReducedSolveDiagnostics {
    double residual = 0.0;
    int iterations = 0;
};

std::pair<MultiTrajectory, ReducedSolveDiagnostics> solve_reduced(
    const ReducedSystem& sys, double tau_star, const SolverConfig& cfg);

// Restart-recipe marching driver (one-window picard steps), keeping
// `keep` stored snapshots.
MultiTrajectory solve_reduced_windowed(const ReducedSystem& sys,
                                       double tau_star, double window,
                                       int keep = 16, SolverConfig cfg = {});

// Residual / gap diagnostics across ladder rungs ---------------------------

// sup_tau of the summed component-wise L1 difference of two trajectories on
// the same stored grid.
double sup_gap(const MultiTrajectory& a, const MultiTrajectory& b);

// Defect of an interaction solution in the full integrated equation:
// sup_tau l1( w(tau) - F(w)(tau) - h ), w = sum of components.
double interaction_defect_in_full(const EvolutionProblem& prob,
                                  const MultiTrajectory& wtraj,
                                  const SolverConfig& cfg);

// uminw-style gap: sup_tau sum_l,theta l1(Pi_{n_l,theta} u - w_{l,theta}).
double full_vs_interaction_gap(const EvolutionProblem& prob,
                               const NKSpectrum& S, const Trajectory& full,
                               const MultiTrajectory& wtraj, double beta,
                               double eps, bool window_projected = false);

// Necessary direction (Theorem on windowed solutions): windows of the full
// solution solve the interaction system with data perturbed by at most the
// returned sup norm.
double necessary_direction_residual(const EvolutionProblem& prob,
                                    const NKSpectrum& S,
                                    const Trajectory& full, double beta,
                                    double eps, const SolverConfig& cfg);

// Windowed projections of a full trajectory as a MultiTrajectory.
MultiTrajectory project_full_trajectory(const EvolutionProblem& prob,
                                        const NKSpectrum& S,
                                        const Trajectory& full, double beta,
                                        double eps);

}  // namespace wavelab

#pragma once

#include <functional>

#include "wavelab/solver.hpp"

namespace wavelab {

// Exactly solvable two-speed transport model with quadratic coupling
//   d_tau u1 = -(c1/rho) dx u1 + u1^2 + a1 u1 u2
//   d_tau u2 = -(c2/rho) dx u2 + u2^2 + a2 u1 u2
// and wavepacket data h_j(x) = Phi_j(beta x) cos(k_j* x).  The solver sees the
// 4-component extension (u1, u2, w1, w2).
struct ToyModel {
    double c1 = 0.5, c2 = 1.0;
    double a1 = 0.0, a2 = 0.0;
    std::function<double(double)> phi1, phi2;  // envelopes Phi_j (r-space)
    double k1_star = 0.0, k2_star = 0.0;
    double beta = 0.2;
    double rho = 0.1;

    double h1(double x) const {
        return phi1 ? phi1(beta * x) * std::cos(k1_star * x) : 0.0;
    }
    double h2(double x) const {
        return phi2 ? phi2(beta * x) * std::cos(k2_star * x) : 0.0;
    }
    // sup |h_j| over the periodic box sampled on the grid
    double sup_h(int j, const KGrid& grid) const;
    double blowup_time(int j, const KGrid& grid) const;  // 1 / sup |h_j|
};

// Traveling-wave closed form v_j(x,tau) = h_j(y)/(1 - tau h_j(y)) with
// y = x - c_j tau / rho, valid when the other component vanishes; the
// argument wraps around the periodic box when box_length > 0.
double toy_closed_form(const ToyModel& m, int component, double x, double tau,
                       double box_length = 0.0);

// Assembles the 4-component spectral problem for the extended toy system.
EvolutionProblem toy_problem(const ToyModel& m, const KGrid& grid,
                             double tau_star);

// C^2 compactly supported bump with exact sup = height at the center,
// supported on |y| <= radius.
std::function<double(double)> bump_envelope(double height, double radius);

// Finite-dimensional ODE case: d_tau U = -(i/rho) L0 U + F(U) in C^{2J},
// L0 = diag over components (j,+),(j,-) of +-w0_j.
struct ODECase {
    std::vector<double> w0;   // J distinct positive frequencies
    PolynomialMap F;          // polynomial nonlinearity on C^{2J}
    std::vector<int> excited; // B subset of 1..J
    double rho = 0.1;

    int J() const { return static_cast<int>(w0.size()); }
};

// RK4 integration of the oscillatory form d_tau u = e^{i tau L0/rho} F(e^{-i
// tau L0/rho} u); step <= 0.1 rho.
std::vector<std::vector<cplx>> ode_integrate_oscillatory(
    const ODECase& c, const std::vector<cplx>& h, double tau_star, double dtau);

// Plain RK4 for the time-averaged system d_tau v = F_av(v).
std::vector<std::vector<cplx>> ode_integrate_averaged(
    const ODECase& c, const std::vector<cplx>& h, double tau_star, double dtau);

// Drops the non-resonant monomials of F for frequencies w0 (k* = 0 reduction
// of the resonance algebra).
PolynomialMap ode_time_average(const PolynomialMap& F,
                               const std::vector<double>& w0, double tol = 1e-9);

struct OdeCompareResult {
    std::vector<double> rho_values;
    std::vector<double> max_unexcited;    // sup_tau |U_n'|, n' outside B
    std::vector<double> averaged_gap;     // sup_tau |v - u| over excited set
    bool resonance_invariant = false;
};

OdeCompareResult ode_average_compare(const ODECase& base, double tau_star,
                                     const std::vector<double>& rho_sweep,
                                     const std::vector<cplx>& h, double dtau_cap = 0.0);

// Standard rescalings into the (difeqintr) form.
struct ReductionResult {
    double rho = 1.0;        // resulting small parameter
    double tau_scale = 1.0;  // tau = tau_scale * t
    double amp_scale = 1.0;  // U = amp_scale^-1 * v
    double beta_eff = 0.0;   // rescaled wavepacket width (high_frequency)
    std::string description;
};

enum class ReductionKind {
    small_nonlinearity,  // alpha f(v): rho = alpha
    small_data,          // v|0 = alpha0 h, degree m: rho = alpha0^(m-1)
    high_frequency,      // carrier factor M: rho = 1/M^2, beta1 = beta/M
    hyperbolic_extension
};

ReductionResult standard_reduction(ReductionKind kind, double param,
                                   int degree_m = 3, double beta = 0.1);

// Coupled-NLS reference bundle (complexified, 4 components).
struct CoupledNlsParams {
    double g01 = 1.0, g11 = 0.0, g21 = 0.5;
    double g02 = 1.5, g12 = 0.0, g22 = 0.5;
    cplx b11, b12, b21, b22, c12, c22;
    double k1_star = 1.0, k2_star = -1.0;
    std::function<cplx(const Kvec&)> env1, env2;  // Fourier envelopes
    double beta = 0.2, eps = 0.2, rho = 0.1;
};

enum class CoupledScenario { preservation, superposition };

struct CoupledNlsBundle {
    EvolutionProblem full;
    EvolutionProblem decoupled_1;  // b12 = c12 = 0 (and mirrored for u2)
    EvolutionProblem decoupled_2;
    CoupledScenario scenario;
    std::string target_error;  // human-readable bound form
};

CoupledNlsBundle coupled_nls_reference(const CoupledNlsParams& p,
                                       CoupledScenario scenario,
                                       const KGrid& grid, double tau_star);

}  // namespace wavelab

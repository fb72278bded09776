#include "wavelab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavelab {

// BandTables -----------------------------------------------------------------

BandTables::BandTables(const KGrid& grid, const BandStructure& bs)
    : grid_(grid), ncomp_(bs.ncomp()), J_(bs.J()), diagonal_(bs.has_diag()) {
    const size_t nn = grid.nodes();
    crossing_.assign(nn, 0);
    size_t excluded = 0;
    for (size_t a = 0; a < nn; ++a) {
        if (bs.crossing(grid.k_at(a))) {
            crossing_[a] = 1;
            ++excluded;
        }
    }
    excluded_measure_ = excluded * std::pow(grid.dk, grid.d);

    auto clean_neighbor = [&](size_t a) {
        Kvec k = grid_.k_at(a);
        if (!crossing_[a]) return k;
        Kvec kk = k;
        int step = 1;
        while (bs.crossing(kk) && step <= grid.M) {
            kk = k;
            kk[0] += step * grid.dk;
            if (bs.crossing(kk)) {
                kk = k;
                kk[0] -= step * grid.dk;
            }
            ++step;
        }
        return kk;
    };

    if (diagonal_) {
        diag_omega_.resize(nn * ncomp_);
        for (size_t a = 0; a < nn; ++a) {
            Kvec k = grid_.k_at(a);
            for (int c = 0; c < ncomp_; ++c)
                diag_omega_[a * ncomp_ + c] = bs.diag_entry(c, k);
        }
        // component index of g_{n,zeta}(k) per node, from the eigvec map
        comp_of_.resize(nn * ncomp_);
        for (size_t a = 0; a < nn; ++a) {
            Kvec k = clean_neighbor(a);
            int p = 0;
            for (int n = 1; n <= J_; ++n) {
                for (int zeta : {+1, -1}) {
                    auto g = bs.eigvec(n, zeta, k);
                    int cmax = 0;
                    double best = -1.0;
                    for (int c = 0; c < ncomp_; ++c) {
                        double v = std::abs(g[c]);
                        if (v > best) {
                            best = v;
                            cmax = c;
                        }
                    }
                    comp_of_[a * ncomp_ + p] = static_cast<int>(cmax);
                    ++p;
                }
            }
        }
    } else {
        modal_omega_.resize(nn * ncomp_);
        modal_g_.resize(nn * ncomp_ * ncomp_);
        for (size_t a = 0; a < nn; ++a) {
            Kvec k = clean_neighbor(a);
            int p = 0;
            for (int n = 1; n <= J_; ++n) {
                for (int zeta : {+1, -1}) {
                    modal_omega_[a * ncomp_ + p] = bs.omega(n, zeta, k);
                    auto g = bs.eigvec(n, zeta, k);
                    for (int c = 0; c < ncomp_; ++c)
                        modal_g_[(a * ncomp_ + p) * ncomp_ + c] = g[c];
                    ++p;
                }
            }
        }
    }
}

void BandTables::rotate(SpectralField& u, double s) const {
    if (s == 0.0) return;
    const size_t nn = grid_.nodes();
    if (diagonal_) {
        for (size_t a = 0; a < nn; ++a) {
            auto span = u.node_span(a);
            const double* om = &diag_omega_[a * ncomp_];
            for (int c = 0; c < ncomp_; ++c)
                span[c] *= std::polar(1.0, -s * om[c]);
        }
    } else {
        std::vector<cplx> out(ncomp_);
        for (size_t a = 0; a < nn; ++a) {
            auto span = u.node_span(a);
            std::fill(out.begin(), out.end(), cplx(0.0));
            for (int p = 0; p < ncomp_; ++p) {
                const cplx* g = &modal_g_[(a * ncomp_ + p) * ncomp_];
                cplx ip(0.0);
                for (int c = 0; c < ncomp_; ++c)
                    ip += std::conj(g[c]) * span[c];
                ip *= std::polar(1.0, -s * modal_omega_[a * ncomp_ + p]);
                for (int c = 0; c < ncomp_; ++c) out[c] += ip * g[c];
            }
            std::copy(out.begin(), out.end(), span.begin());
        }
    }
}

void BandTables::proj_apply(int n, int zeta, size_t node,
                            std::span<const cplx> in,
                            std::span<cplx> out) const {
    const int p = 2 * (n - 1) + (zeta > 0 ? 0 : 1);
    if (diagonal_) {
        std::fill(out.begin(), out.end(), cplx(0.0));
        int c = comp_of_[node * ncomp_ + p];
        out[c] = in[c];
        return;
    }
    const cplx* g = &modal_g_[(node * ncomp_ + p) * ncomp_];
    cplx ip(0.0);
    for (int c = 0; c < ncomp_; ++c) ip += std::conj(g[c]) * in[c];
    for (int c = 0; c < ncomp_; ++c) out[c] = ip * g[c];
}

double BandTables::omega_abs_max(double radius) const {
    const size_t nn = grid_.nodes();
    double m = 0.0;
    const std::vector<double>& tab = diagonal_ ? diag_omega_ : modal_omega_;
    for (size_t a = 0; a < nn; ++a) {
        if (radius > 0 && norm2(grid_.k_at(a)) > radius) continue;
        for (int c = 0; c < ncomp_; ++c)
            m = std::max(m, std::abs(tab[a * ncomp_ + c]));
    }
    return m;
}

// apply_nonlinearity ----------------------------------------------------------

namespace {

}  // namespace

void accumulate_products(const std::vector<ChiTensor::Entry>& entries,
                         const std::vector<const SpectralField*>& inputs,
                         SpectralField& acc) {
    const size_t nn = acc.nodes();
    const int nc = acc.ncomp();
    for (auto& e : entries) {
        const int m = static_cast<int>(e.in.size());
        cplx* out = acc.raw().data() + e.out;
        for (size_t a = 0; a < nn; ++a) {
            cplx p = e.c;
            for (int j = 0; j < m; ++j) p *= inputs[j]->at(a, e.in[j]);
            out[a * nc] += p;
        }
    }
}

namespace {

SpectralField nonlinearity_fft(const ChiTensor& chi,
                               const std::vector<const SpectralField*>& fields) {
    const KGrid& g = fields[0]->grid();
    const int m = chi.m;
    std::vector<SpectralField> r_fields;
    r_fields.reserve(m);
    for (int j = 0; j < m; ++j)
        r_fields.push_back(fourier_inverse(pad_spectrum(*fields[j])));
    SpectralField acc(r_fields[0].grid(), chi.ncomp);
    std::vector<const SpectralField*> ptrs;
    for (auto& r : r_fields) ptrs.push_back(&r);
    accumulate_products(chi.nonzeros(), ptrs, acc);
    return truncate_spectrum(fourier_forward(acc), g);
}

SpectralField nonlinearity_direct(const ChiTensor& chi,
                                  const std::vector<const SpectralField*>& fields,
                                  size_t budget) {
    const KGrid& g = fields[0]->grid();
    if (g.d != 1)
        throw Error("apply_nonlinearity direct path: tested path is d=1");
    const int m = chi.m;
    const int M = g.M;
    if (std::pow(static_cast<double>(M), m) > static_cast<double>(budget))
        throw BudgetExceededError("direct convolution exceeds budget");
    SpectralField out(g, chi.ncomp);
    const double w = std::pow(g.dk / two_pi, (m - 1) * g.d);
    std::vector<const cplx*> xs(m);
    std::vector<cplx> node_out(chi.ncomp);
    std::vector<int> idx(m, 0);
    // free slots 1..m-1; the last is pinned by k_out = k_1 + ... + k_m;
    // a_out = 0 stays empty (symmetric-band restriction as in the fft path)
    for (int a_out = 1; a_out < M; ++a_out) {
        auto out_span = out.node_span(a_out);
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            int s = a_out + (m - 1) * (M / 2);
            for (int j = 0; j < m - 1; ++j) s -= idx[j];
            if (s >= 0 && s < M) {
                idx[m - 1] = s;
                for (int j = 0; j < m; ++j)
                    xs[j] = fields[j]->node_span(idx[j]).data();
                chi.apply(xs, node_out);
                for (int c = 0; c < chi.ncomp; ++c)
                    out_span[c] += w * node_out[c];
            }
            int j = m - 2;
            for (; j >= 0; --j) {
                if (++idx[j] < M) break;
                idx[j] = 0;
            }
            if (j < 0) break;
        }
    }
    return out;
}

}  // namespace

SpectralField apply_nonlinearity(const ChiTensor& chi,
                                 const std::vector<const SpectralField*>& fields,
                                 ConvolutionPath path, size_t budget) {
    if (static_cast<int>(fields.size()) != chi.m)
        throw SizeMismatchError("apply_nonlinearity: field count != arity");
    for (auto* f : fields) fields[0]->check_same_shape(*f);
    if (fields[0]->ncomp() != chi.ncomp)
        throw SizeMismatchError("apply_nonlinearity: component mismatch");
    if (path == ConvolutionPath::fft) return nonlinearity_fft(chi, fields);
    return nonlinearity_direct(chi, fields, budget);
}

// EvolutionProblem ------------------------------------------------------------

EvolutionProblem::EvolutionProblem(BandStructure bs_, SusceptibilityModel chi_,
                                   double rho_, SpectralField h_,
                                   double tau_star_)
    : bs(std::move(bs_)),
      chi(std::move(chi_)),
      rho(rho_),
      h(std::move(h_)),
      tau_star(tau_star_) {
    if (rho <= 0 || rho > 1.0) throw Error("EvolutionProblem: rho in (0,1]");
    if (tau_star <= 0) throw Error("EvolutionProblem: tau_star > 0");
    if (h.ncomp() != bs.ncomp())
        throw SizeMismatchError("EvolutionProblem: field/band mismatch");
}

std::shared_ptr<const BandTables> EvolutionProblem::tables() const {
    if (!tables_ || tables_->grid() != h.grid())
        tables_ = std::make_shared<BandTables>(h.grid(), bs);
    return tables_;
}

double EvolutionProblem::contraction_estimate() const {
    const double R = h.l1_norm();
    const int mF = chi.max_arity();
    return chi.c_chi * mF * mF * std::pow(4.0 * R, mF - 1);
}

// Oscillatory quadrature ------------------------------------------------------

namespace {

// Gauss-Legendre 2-point nodes on [0,1]
constexpr double kGauss0 = 0.5 - 0.28867513459481287;
constexpr double kGauss1 = 0.5 + 0.28867513459481287;

double phase_rate(const EvolutionProblem& prob) {
    auto tables = prob.tables();
    const SpectralField& h = prob.h;
    double sup = h.sup_abs();
    double r_supp = 0.0;
    for (size_t a = 0; a < h.nodes(); ++a)
        if (h.node_abs(a) > 1e-13 * sup)
            r_supp = std::max(r_supp, norm2(h.grid().k_at(a)));
    const int mF = std::max(prob.chi.max_arity(), 1);
    double radius = std::min((mF + 1.5) * r_supp, h.grid().k_max());
    double om = tables->omega_abs_max(radius);
    if (om <= 0) om = tables->omega_abs_max();
    return (mF + 1) * om / prob.rho;
}

int substeps_for(double dt, double rate, double c_osc) {
    const double max_phase = two_pi * c_osc;
    int n = static_cast<int>(std::ceil(dt * rate / max_phase));
    return std::clamp(n, 1, 4096);
}

// F_hat(w) = sum over arities, sharing one padded transform round-trip.
SpectralField nonlinearity_all(const EvolutionProblem& prob,
                               const SpectralField& w, ConvolutionPath path) {
    if (path == ConvolutionPath::direct) {
        SpectralField out(w.grid(), w.ncomp());
        for (int m : prob.chi.arities) {
            std::vector<const SpectralField*> fs(m, &w);
            out += apply_nonlinearity(prob.chi.tensor(m), fs, path);
        }
        return out;
    }
    SpectralField r = fourier_inverse(pad_spectrum(w));
    SpectralField acc(r.grid(), w.ncomp());
    for (int m : prob.chi.arities) {
        std::vector<const SpectralField*> ptrs(m, &r);
        accumulate_products(prob.chi.tensor(m).nonzeros(), ptrs, acc);
    }
    return truncate_spectrum(fourier_forward(acc), w.grid());
}

SpectralField traj_value(const Trajectory& traj, double tau,
                         SolverConfig::Interp interp) {
    if (traj.u.empty()) throw Error("empty trajectory");
    double x = (tau - traj.tau0) / traj.dtau;
    int i = static_cast<int>(std::floor(x + 1e-12));
    i = std::clamp(i, 0, traj.steps());
    if (interp == SolverConfig::Interp::left_const || i >= traj.steps())
        return traj.u[i];
    double t = x - i;
    SpectralField v = traj.u[i];
    v *= cplx(1.0 - t);
    v.axpy(cplx(t), traj.u[i + 1]);
    return v;
}

SpectralField integrand_at(const EvolutionProblem& prob, const BandTables& tb,
                           const Trajectory& traj, double tau,
                           const SolverConfig& cfg) {
    SpectralField w = traj_value(traj, tau, cfg.interp);
    tb.rotate(w, tau / prob.rho);
    SpectralField F = nonlinearity_all(prob, w, cfg.convolution);
    tb.rotate(F, -tau / prob.rho);
    return F;
}

void integrate_segment(const EvolutionProblem& prob, const BandTables& tb,
                       const Trajectory& traj, double ta, double tb_time,
                       int n_sub, const SolverConfig& cfg, SpectralField& acc) {
    const double h = (tb_time - ta) / n_sub;
    for (int s = 0; s < n_sub; ++s) {
        double t0 = ta + s * h;
        for (double gx : {kGauss0, kGauss1}) {
            SpectralField g = integrand_at(prob, tb, traj, t0 + gx * h, cfg);
            acc.axpy(cplx(0.5 * h), g);
        }
    }
}

}  // namespace

double estimate_phase_rate(const EvolutionProblem& prob) {
    return phase_rate(prob);
}

SpectralField oscillatory_term(const EvolutionProblem& prob,
                               const Trajectory& traj, int m, double tau,
                               const SolverConfig& cfg) {
    if (!prob.chi.has_arity(m))
        throw Error("oscillatory_term: arity not in M_F");
    if (traj.dtau > cfg.c_osc * prob.rho + 1e-15)
        throw UnderResolvedError(
            "oscillatory_term: trajectory step > c_osc*rho");
    auto tb = prob.tables();
    SpectralField acc(prob.h.grid(), prob.h.ncomp());
    if (tau <= 0) return acc;
    EvolutionProblem sub = prob;
    SusceptibilityModel chi1;
    chi1.mode = prob.chi.mode;
    chi1.arities = {m};
    chi1.constant_chi[m] = prob.chi.tensor(m);
    chi1.c_chi = prob.chi.c_chi;
    sub.chi = std::move(chi1);
    const double rate = phase_rate(sub);
    int steps =
        std::max(1, static_cast<int>(std::ceil(tau / traj.dtau - 1e-12)));
    for (int i = 0; i < steps; ++i) {
        double ta = traj.tau0 + i * traj.dtau;
        double tb_time =
            std::min(traj.tau0 + (i + 1) * traj.dtau, traj.tau0 + tau);
        if (tb_time <= ta) break;
        int n_sub = substeps_for(tb_time - ta, rate, cfg.c_osc);
        integrate_segment(sub, *tb, traj, ta, tb_time, n_sub, cfg, acc);
    }
    return acc;
}

std::pair<Trajectory, SolveDiagnostics> solve_integrated(
    const EvolutionProblem& prob, const SolverConfig& cfg_in) {
    SolverConfig cfg = cfg_in;
    if (cfg.dtau <= 0) cfg.dtau = prob.tau_star / 64.0;
    const int n_steps =
        std::max(1, static_cast<int>(std::lround(prob.tau_star / cfg.dtau)));
    cfg.dtau = prob.tau_star / n_steps;

    auto tb = prob.tables();
    SolveDiagnostics diag;
    diag.contraction_warning =
        prob.tau_star * prob.contraction_estimate() >= 1.0;

    Trajectory traj;
    traj.tau0 = cfg.tau0;
    traj.dtau = cfg.dtau;

    const double h_l1 = prob.h.l1_norm();
    const double blowup_cap = 1e3 * std::max(h_l1, 1e-12);
    const double rate =
        cfg.phase_rate_hint > 0 ? cfg.phase_rate_hint : phase_rate(prob);

    if (cfg.method == SolverConfig::Method::ifrk4) {
        if (cfg.dtau > cfg.c_osc * prob.rho + 1e-15)
            throw UnderResolvedError("ifrk4: dtau must be <= c_osc * rho");
        traj.u.assign(1, prob.h);
        auto G = [&](double tau, const SpectralField& u) {
            SpectralField w = u;
            tb->rotate(w, tau / prob.rho);
            SpectralField F = nonlinearity_all(prob, w, cfg.convolution);
            tb->rotate(F, -tau / prob.rho);
            return F;
        };
        for (int i = 0; i < n_steps; ++i) {
            double t = traj.tau_at(i);
            const SpectralField& u = traj.u.back();
            SpectralField k1 = G(t, u);
            SpectralField u2 = u;
            u2.axpy(cplx(0.5 * cfg.dtau), k1);
            SpectralField k2 = G(t + 0.5 * cfg.dtau, u2);
            SpectralField u3 = u;
            u3.axpy(cplx(0.5 * cfg.dtau), k2);
            SpectralField k3 = G(t + 0.5 * cfg.dtau, u3);
            SpectralField u4 = u;
            u4.axpy(cplx(cfg.dtau), k3);
            SpectralField k4 = G(t + cfg.dtau, u4);
            SpectralField nxt = u;
            nxt.axpy(cplx(cfg.dtau / 6.0), k1);
            nxt.axpy(cplx(cfg.dtau / 3.0), k2);
            nxt.axpy(cplx(cfg.dtau / 3.0), k3);
            nxt.axpy(cplx(cfg.dtau / 6.0), k4);
            if (nxt.l1_norm() > blowup_cap)
                throw BlowUpError("ifrk4: trajectory exceeded 1e3 x initial");
            traj.u.push_back(std::move(nxt));
            diag.l1_history.push_back(traj.u.back().l1_norm());
        }
        diag.iterations = n_steps;
        return {std::move(traj), diag};
    }

    // Picard iteration of u = F(u) + h on the stored trajectory grid.  The
    // returned iterate is the one whose fixed-point residual was measured
    // at or below tolerance.
    traj.u.assign(n_steps + 1, prob.h);
    const int n_sub = substeps_for(cfg.dtau, rate, cfg.c_osc);
    if (n_steps == 1 && cfg.interp == SolverConfig::Interp::left_const) {
        // the integrand sees only the fixed left endpoint, so the first
        // sweep already is the exact fixed point of the discrete map
        SpectralField acc(prob.h.grid(), prob.h.ncomp());
        integrate_segment(prob, *tb, traj, traj.tau_at(0), traj.tau_at(1),
                          n_sub, cfg, acc);
        traj.u[1] += acc;
        if (traj.u[1].l1_norm() > blowup_cap)
            throw BlowUpError("picard: trajectory exceeded 1e3 x initial");
        diag.iterations = 1;
        diag.residual = 0.0;
        diag.l1_history.push_back(traj.u[1].l1_norm());
        return {std::move(traj), diag};
    }
    double prev_delta = std::numeric_limits<double>::infinity();
    int non_decreasing = 0;
    for (int iter = 1; iter <= cfg.picard_max_iter; ++iter) {
        std::vector<SpectralField> next(n_steps + 1, prob.h);
        SpectralField acc(prob.h.grid(), prob.h.ncomp());
        double delta = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            integrate_segment(prob, *tb, traj, traj.tau_at(i),
                              traj.tau_at(i + 1), n_sub, cfg, acc);
            next[i + 1] += acc;
            delta = std::max(delta, (next[i + 1] - traj.u[i + 1]).l1_norm());
        }
        diag.iterations = iter;
        diag.residual = delta;
        diag.l1_history.push_back(next.back().l1_norm());
        if (delta <= cfg.picard_tol) {
            // traj currently holds the iterate with measured residual = delta
            return {std::move(traj), diag};
        }
        traj.u = std::move(next);
        if (traj.u.back().l1_norm() > blowup_cap)
            throw BlowUpError("picard: trajectory exceeded 1e3 x initial");
        if (delta >= prev_delta * (1.0 - 1e-12)) {
            if (++non_decreasing >= 3)
                throw NoContractionError(
                    "picard: residual non-decreasing over 3 sweeps");
        } else {
            non_decreasing = 0;
        }
        prev_delta = delta;
    }
    throw NoContractionError("picard: no convergence within max iterations");
}

Trajectory reconstruct_physical(const EvolutionProblem& prob,
                                const Trajectory& traj) {
    Trajectory out;
    out.tau0 = traj.tau0;
    out.dtau = traj.dtau;
    for (size_t i = 0; i < traj.u.size(); ++i)
        out.u.push_back(
            reconstruct_physical_at(prob, traj, static_cast<int>(i)));
    return out;
}

SpectralField reconstruct_physical_at(const EvolutionProblem& prob,
                                      const Trajectory& traj, int i) {
    return reconstruct_physical_field(prob, traj.u.at(i), traj.tau_at(i));
}

SpectralField reconstruct_physical_field(const EvolutionProblem& prob,
                                         const SpectralField& uhat,
                                         double tau) {
    auto tb = prob.tables();
    SpectralField Uhat = uhat;
    tb->rotate(Uhat, tau / prob.rho);
    return fourier_inverse(Uhat);
}

}  // namespace wavelab

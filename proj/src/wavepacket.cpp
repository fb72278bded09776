#include "wavelab/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavelab {

double cutoff_psi(const Kvec& k, const Kvec& center, double radius) {
    if (radius <= 0) throw Error("cutoff_psi: radius must be positive");
    return dist(k, center) <= radius ? 1.0 : 0.0;
}

SpectralField synthesize_multiwavepacket(const std::vector<WavepacketSpec>& specs,
                                         const KGrid& grid,
                                         const BandStructure& bs) {
    SpectralField out(grid, bs.ncomp());
    if (specs.empty()) return out;

    // support separation: windows of the same (n, zeta) channel must not
    // collide (different channels project onto orthogonal eigenspaces)
    struct Win {
        int n;
        int zeta;
        Kvec c;
        double r;
    };
    std::vector<Win> wins;
    for (auto& sp : specs) {
        double radius = std::pow(sp.beta, 1.0 - sp.eps);
        if (radius < 4.0 * grid.dk)
            throw GridTooCoarseError("synthesize: window below 4 dk");
        wins.push_back({sp.n, +1, sp.k_star, radius});
        wins.push_back({sp.n, -1, -1.0 * sp.k_star, radius});
    }
    for (size_t i = 0; i < wins.size(); ++i)
        for (size_t j = i + 1; j < wins.size(); ++j)
            if (wins[i].n == wins[j].n && wins[i].zeta == wins[j].zeta &&
                dist(wins[i].c, wins[j].c) <= wins[i].r + wins[j].r)
                throw OverlapError("synthesize: wavepacket supports collide");

    const size_t nn = grid.nodes();
    std::vector<cplx> g(bs.ncomp());
    for (auto& sp : specs) {
        bs.check_band_index(sp.n);
        const double radius = std::pow(sp.beta, 1.0 - sp.eps);
        const double amp = std::pow(sp.beta, -grid.d);
        for (int zeta : {+1, -1}) {
            std::function<cplx(const Kvec&)> env;
            if (zeta > 0) env = sp.env_plus;
            else if (sp.reality && !sp.env_minus)
                env = [&sp](const Kvec& eta) {
                    return std::conj(sp.env_plus(-1.0 * eta));
                };
            else
                env = sp.env_minus;
            if (!env) continue;
            Kvec center = static_cast<double>(zeta) * sp.k_star;
            for (size_t a = 0; a < nn; ++a) {
                Kvec k = grid.k_at(a);
                if (dist(k, center) > radius) continue;
                Kvec eta = (1.0 / sp.beta) * (k - center);
                cplx w = amp * env(eta);
                if (w == cplx(0.0)) continue;
                // projections next to sigma_bc use the nearest clean neighbor
                Kvec kp = k;
                if (bs.crossing(kp)) {
                    int step = 1;
                    while (bs.crossing(kp) && step < grid.M) {
                        kp = k;
                        kp[0] += step * grid.dk;
                        if (bs.crossing(kp)) {
                            kp = k;
                            kp[0] -= step * grid.dk;
                        }
                        ++step;
                    }
                }
                auto gv = bs.eigvec(sp.n, zeta, kp);
                for (int c = 0; c < bs.ncomp(); ++c)
                    out.at(a, c) += w * gv[c];
            }
        }
    }
    return out;
}

SpectralField band_window_project(const SpectralField& u, const NKSpectrum& S,
                                  int l, double beta, double eps,
                                  const BandStructure& bs) {
    if (l < 1 || l > S.size())
        throw IndexOutOfRangeError("band_window_project: l out of range");
    const NKPair& p = S.pair(l);
    const double radius = std::pow(beta, 1.0 - eps);
    const KGrid& grid = u.grid();
    SpectralField out(grid, u.ncomp());
    const size_t nn = grid.nodes();
    std::vector<cplx> buf(u.ncomp());
    for (int zeta : {+1, -1}) {
        Kvec center = static_cast<double>(zeta) * p.k;
        for (size_t a = 0; a < nn; ++a) {
            Kvec k = grid.k_at(a);
            if (dist(k, center) > radius) continue;
            Kvec kp = k;
            if (bs.crossing(kp)) {
                kp[0] += grid.dk;  // one-sided neighbor
                if (bs.crossing(kp)) kp[0] -= 2 * grid.dk;
            }
            bs.proj_apply(p.n, zeta, kp, u.node_span(a), buf);
            for (int c = 0; c < u.ncomp(); ++c) out.at(a, c) += buf[c];
        }
    }
    return out;
}

DiagnosticsResult wavepacket_diagnostics(const std::vector<SpectralField>& u,
                                         const NKSpectrum& S,
                                         const std::vector<double>& betas,
                                         double eps, const BandStructure& bs) {
    if (betas.size() < 3 || u.size() != betas.size())
        throw Error("wavepacket_diagnostics: need >= 3 aligned beta samples");
    double bmax = *std::max_element(betas.begin(), betas.end());
    double bmin = *std::min_element(betas.begin(), betas.end());
    if (bmax / bmin < 10.0)
        throw Error("wavepacket_diagnostics: sweep must span a decade");

    DiagnosticsResult res;
    for (size_t i = 0; i < betas.size(); ++i) {
        SpectralField tail = u[i];
        std::vector<double> comp_norms;
        for (int l = 1; l <= S.size(); ++l) {
            SpectralField wl = band_window_project(u[i], S, l, betas[i], eps, bs);
            comp_norms.push_back(wl.l1_norm());
            tail -= wl;
        }
        res.tails.push_back(tail.l1_norm());
        res.component_norms.push_back(std::move(comp_norms));
    }
    bool all_tiny = true;
    for (double t : res.tails)
        if (t > 1e-14) all_tiny = false;
    if (all_tiny) {
        res.degenerate = true;
        res.fitted_s = std::numeric_limits<double>::infinity();
        return res;
    }
    // least-squares slope of log tail vs log beta
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < betas.size(); ++i) {
        if (res.tails[i] <= 1e-300) continue;
        double x = std::log(betas[i]), y = std::log(res.tails[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    res.fitted_s = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return res;
}

WeightFunction::WeightFunction(std::function<double(double)> psi_, double a_)
    : psi(std::move(psi_)), a(a_) {
    if (psi(0.0) <= 0) throw Error("weight function: psi(0) > 0 required");
    // sampled class checks
    double prev = psi(0.0);
    for (double r = 0.5; r <= 64.0; r *= 2.0) {
        double v = psi(r);
        if (v + 1e-12 < prev)
            throw Error("weight function: psi must be nondecreasing");
        prev = v;
        if (psi(2 * r) > 2 * v + 10.0 + 1e-9)
            throw Error("weight function: psi must be sublinear");
        if (a > 0 && v - a * std::log(r) <= 0 && r >= 1.0)
            throw Error("weight function: psi not superlogarithmic for a");
    }
}

}  // namespace wavelab

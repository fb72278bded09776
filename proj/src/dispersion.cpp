#include "wavelab/dispersion.hpp"

#include <algorithm>
#include <cmath>

namespace wavelab {

BandStructure::BandStructure(Callbacks cb) : cb_(std::move(cb)) {
    if (cb_.J < 1) throw Error("BandStructure: J >= 1 required");
    if (!cb_.omega) throw Error("BandStructure: omega callable required");
    if (!cb_.eigvec) throw Error("BandStructure: eigvec callable required");
}

void BandStructure::check_band_index(int n) const {
    if (n < 1 || n > cb_.J)
        throw IndexOutOfRangeError("band index n=" + std::to_string(n) +
                                   " outside 1.." + std::to_string(cb_.J));
}

bool BandStructure::crossing(const Kvec& k) const {
    return cb_.crossing ? cb_.crossing(k) : false;
}

double BandStructure::omega_n(int n, const Kvec& k) const {
    return cb_.omega(n, k);
}

double BandStructure::omega(int n, int zeta, const Kvec& k) const {
    check_band_index(n);
    if (zeta == +1) return omega_n(n, k);
    return -omega_n(n, -1.0 * k);
}

Kvec BandStructure::grad_omega(int n, int zeta, const Kvec& k) const {
    check_band_index(n);
    // d/dk [zeta * omega_n(zeta k)] = grad omega_n(zeta k)
    Kvec kz = (zeta == +1) ? k : -1.0 * k;
    Kvec g(cb_.d);
    if (cb_.grad) {
        g = cb_.grad(n, kz);
    } else {
        double h = fd_step(kz);
        for (int ax = 0; ax < cb_.d; ++ax) {
            Kvec kp = kz, km = kz, kp2 = kz, km2 = kz;
            kp[ax] += h;
            km[ax] -= h;
            kp2[ax] += 2 * h;
            km2[ax] -= 2 * h;
            g[ax] = (-omega_n(n, kp2) + 8 * omega_n(n, kp) - 8 * omega_n(n, km) +
                     omega_n(n, km2)) /
                    (12 * h);
        }
    }
    return g;
}

std::vector<double> BandStructure::hess_omega(int n, int zeta,
                                              const Kvec& k) const {
    check_band_index(n);
    Kvec kz = (zeta == +1) ? k : -1.0 * k;
    std::vector<double> H(static_cast<size_t>(cb_.d) * cb_.d, 0.0);
    if (cb_.hess) {
        H = cb_.hess(n, kz);
    } else {
        double h = fd_step(kz);
        for (int a = 0; a < cb_.d; ++a) {
            for (int b = a; b < cb_.d; ++b) {
                double v;
                if (a == b) {
                    Kvec kp = kz, km = kz, kp2 = kz, km2 = kz;
                    kp[a] += h;
                    km[a] -= h;
                    kp2[a] += 2 * h;
                    km2[a] -= 2 * h;
                    v = (-omega_n(n, kp2) + 16 * omega_n(n, kp) -
                         30 * omega_n(n, kz) + 16 * omega_n(n, km) -
                         omega_n(n, km2)) /
                        (12 * h * h);
                } else {
                    Kvec kpp = kz, kpm = kz, kmp = kz, kmm = kz;
                    kpp[a] += h;
                    kpp[b] += h;
                    kpm[a] += h;
                    kpm[b] -= h;
                    kmp[a] -= h;
                    kmp[b] += h;
                    kmm[a] -= h;
                    kmm[b] -= h;
                    v = (omega_n(n, kpp) - omega_n(n, kpm) - omega_n(n, kmp) +
                         omega_n(n, kmm)) /
                        (4 * h * h);
                }
                H[a * cb_.d + b] = v;
                H[b * cb_.d + a] = v;
            }
        }
    }
    // zeta branch: d^2/dk^2 [zeta omega_n(zeta k)] = zeta * hess(zeta k)
    if (zeta == -1)
        for (auto& x : H) x = -x;
    return H;
}

std::vector<cplx> BandStructure::eigvec(int n, int zeta, const Kvec& k) const {
    check_band_index(n);
    std::vector<cplx> g = cb_.eigvec(n, zeta, k);
    if (static_cast<int>(g.size()) != ncomp())
        throw Error("eigvec callable returned wrong dimension");
    // normalize and fix the gauge: largest-magnitude entry real-positive
    double nrm = 0.0;
    for (auto& z : g) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-300) throw GaugeUndefinedError("eigvec: zero vector");
    size_t imax = 0;
    double amax = -1.0;
    for (size_t i = 0; i < g.size(); ++i) {
        double a = std::abs(g[i]);
        if (a > amax + 1e-15 * (1 + amax)) {
            amax = a;
            imax = i;
        }
    }
    cplx phase = std::conj(g[imax]) / std::abs(g[imax]);
    for (auto& z : g) z *= phase / nrm;
    return g;
}

void BandStructure::proj_apply(int n, int zeta, const Kvec& k,
                               std::span<const cplx> in,
                               std::span<cplx> out) const {
    std::vector<cplx> g = eigvec(n, zeta, k);
    cplx ip(0.0);
    for (size_t i = 0; i < g.size(); ++i) ip += std::conj(g[i]) * in[i];
    for (size_t i = 0; i < g.size(); ++i) out[i] = ip * g[i];
}

std::vector<cplx> BandStructure::proj_matrix(int n, int zeta,
                                             const Kvec& k) const {
    std::vector<cplx> g = eigvec(n, zeta, k);
    const size_t m = g.size();
    std::vector<cplx> P(m * m);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) P[i * m + j] = g[i] * std::conj(g[j]);
    return P;
}

BandStructure::BandEval BandStructure::eval_band(int n, int zeta,
                                                 const Kvec& k) const {
    check_band_index(n);
    if (crossing(k))
        throw BandCrossingError("eval_band: k lies on sigma_bc");
    BandEval e;
    e.omega = omega(n, zeta, k);
    e.g = eigvec(n, zeta, k);
    e.proj = proj_matrix(n, zeta, k);
    return e;
}

double BandStructure::taylor_dispersion(int n, const Kvec& k_star, int mu,
                                        const Kvec& beta_eta) const {
    check_band_index(n);
    if (crossing(k_star))
        throw BandCrossingError("taylor_dispersion: k* on sigma_bc");
    if (mu < 1 || mu > 3) throw Error("taylor_dispersion: mu in {1,2,3}");
    double val = omega_n(n, k_star);
    if (mu >= 1) {
        Kvec g = grad_omega(n, +1, k_star);
        for (int ax = 0; ax < cb_.d; ++ax) val += g[ax] * beta_eta[ax];
    }
    if (mu >= 2) {
        std::vector<double> H = hess_omega(n, +1, k_star);
        for (int a = 0; a < cb_.d; ++a)
            for (int b = 0; b < cb_.d; ++b)
                val += 0.5 * beta_eta[a] * H[a * cb_.d + b] * beta_eta[b];
    }
    if (mu >= 3) {
        // third directional derivative along beta_eta by central differences
        double t = norm2(beta_eta);
        if (t > 0) {
            Kvec dir = (1.0 / t) * beta_eta;
            double h = fd_step(k_star);
            auto f = [&](double s) {
                Kvec kk = k_star;
                for (int ax = 0; ax < cb_.d; ++ax) kk[ax] += s * dir[ax];
                return omega_n(n, kk);
            };
            double d3 =
                (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h * h * h);
            val += d3 * t * t * t / 6.0;
        }
    }
    return val;
}

// Degeneracy probe -----------------------------------------------------------

namespace {

// Smallest/largest singular value ratio of an n_rows x n_cols matrix via the
// Gram matrix and cyclic Jacobi; n_cols is tiny here.
double min_gram_eigen_ratio(const std::vector<double>& A, int rows, int cols) {
    std::vector<double> G(static_cast<size_t>(cols) * cols, 0.0);
    for (int i = 0; i < rows; ++i)
        for (int a = 0; a < cols; ++a)
            for (int b = 0; b < cols; ++b)
                G[a * cols + b] += A[i * cols + a] * A[i * cols + b];
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < cols; ++p)
            for (int q = p + 1; q < cols; ++q) off += std::abs(G[p * cols + q]);
        if (off < 1e-15) break;
        for (int p = 0; p < cols; ++p) {
            for (int q = p + 1; q < cols; ++q) {
                double apq = G[p * cols + q];
                if (std::abs(apq) < 1e-18) continue;
                double theta = 0.5 * (G[q * cols + q] - G[p * cols + p]) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int i = 0; i < cols; ++i) {
                    double gip = G[i * cols + p], giq = G[i * cols + q];
                    G[i * cols + p] = c * gip - s * giq;
                    G[i * cols + q] = s * gip + c * giq;
                }
                for (int i = 0; i < cols; ++i) {
                    double gpi = G[p * cols + i], gqi = G[q * cols + i];
                    G[p * cols + i] = c * gpi - s * gqi;
                    G[q * cols + i] = s * gpi + c * gqi;
                }
            }
        }
    }
    double lmin = G[0], lmax = G[0];
    for (int i = 1; i < cols; ++i) {
        lmin = std::min(lmin, G[i * cols + i]);
        lmax = std::max(lmax, G[i * cols + i]);
    }
    if (lmax <= 0) return 0.0;
    return std::sqrt(std::max(lmin, 0.0) / lmax);
}

}  // namespace

DegeneracyReport probe_omega_degeneracy(const BandStructure& bs,
                                        const Kvec& box_lo, const Kvec& box_hi,
                                        int grid_per_axis, double tol) {
    if (grid_per_axis < 2) throw EmptySampleError("degeneracy probe: grid < 2");
    if (bs.d() != 1)
        throw Error("probe_omega_degeneracy: tested path is d=1");
    const int J = bs.J();
    std::vector<Kvec> samples;
    for (int i = 0; i < grid_per_axis; ++i) {
        double t = static_cast<double>(i) / (grid_per_axis - 1);
        Kvec k = kv(box_lo[0] + t * (box_hi[0] - box_lo[0]));
        if (!bs.crossing(k)) samples.push_back(k);
    }
    if (samples.size() < 2)
        throw EmptySampleError("degeneracy probe: all samples on sigma_bc");
    const int ns = static_cast<int>(samples.size());

    DegeneracyReport rep;
    rep.affine_residual.assign(J, 0.0);
    rep.scaling_residual.assign(J, 0.0);

    // (i) rank test on {omega_n(k), 1}
    {
        std::vector<double> A(static_cast<size_t>(ns) * (J + 1));
        double scale = 0.0;
        for (int i = 0; i < ns; ++i) {
            for (int n = 1; n <= J; ++n) {
                double w = bs.omega_plus(n, samples[i]);
                A[i * (J + 1) + (n - 1)] = w;
                scale = std::max(scale, std::abs(w));
            }
            A[i * (J + 1) + J] = 1.0;
        }
        rep.linear_dependence_residual = min_gram_eigen_ratio(A, ns, J + 1);
        rep.linear_dependence = rep.linear_dependence_residual < tol;
        (void)scale;
    }

    // (ii) affine-fit residual per band
    for (int n = 1; n <= J; ++n) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto& k : samples) {
            double x = k[0], y = bs.omega_plus(n, k);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double det = ns * sxx - sx * sx;
        double b = (ns * sxy - sx * sy) / det;
        double a = (sy - b * sx) / ns;
        double res = 0.0, scale = 0.0;
        for (auto& k : samples) {
            double y = bs.omega_plus(n, k);
            res = std::max(res, std::abs(y - (a + b * k[0])));
            scale = std::max(scale, std::abs(y));
        }
        rep.affine_residual[n - 1] = res / std::max(scale, 1e-300);
        if (rep.affine_residual[n - 1] < tol) rep.linear_band = true;
    }

    // (iii) C w(k) = w(C k) for C in {+-2, +-3}
    for (int n = 1; n <= J; ++n) {
        double best = 1e300;
        for (int C : {2, -2, 3, -3}) {
            double res = 0.0, scale = 0.0, used = 0;
            for (auto& k : samples) {
                Kvec ck = static_cast<double>(C) * k;
                if (bs.crossing(ck)) continue;
                double lhs = C * bs.omega_plus(n, k);
                double rhs = bs.omega_plus(n, ck);
                res = std::max(res, std::abs(lhs - rhs));
                scale = std::max(scale, std::abs(rhs));
                used += 1;
            }
            if (used < 2) continue;
            best = std::min(best, res / std::max(scale, 1e-300));
        }
        rep.scaling_residual[n - 1] = best;
        if (best < tol) rep.scaling_relation = true;
    }

    // (iv) w_n(k) = w_{n'}(-k), n' != n
    for (int n = 1; n <= J; ++n) {
        for (int np = 1; np <= J; ++np) {
            if (np == n) continue;
            double res = 0.0, scale = 0.0;
            for (auto& k : samples) {
                Kvec mk = -1.0 * k;
                if (bs.crossing(mk)) continue;
                double a = bs.omega_plus(n, k), b = bs.omega_plus(np, mk);
                res = std::max(res, std::abs(a - b));
                scale = std::max(scale, std::abs(a));
            }
            rep.mirror_residual.push_back(res / std::max(scale, 1e-300));
            if (rep.mirror_residual.back() < tol) rep.mirror_relation = true;
        }
    }
    return rep;
}

// Builtins -------------------------------------------------------------------

namespace {

std::vector<cplx> ort(int dim, int c) {
    std::vector<cplx> g(dim, cplx(0.0));
    g[c] = cplx(1.0);
    return g;
}

}  // namespace

BandStructure make_two_speed_band(double c1, double c2, double r_bc) {
    if (c1 <= 0 || c2 <= 0 || c1 == c2)
        throw Error("two_speed band: need 0 < c1 != c2");
    // band 1 <-> slower speed so that omega_{2,+} >= omega_{1,+}
    const double s1 = std::min(c1, c2), s2 = std::max(c1, c2);
    // components (u1, u2, w1, w2) with L = diag(c1 k, c2 k, -c1 k, -c2 k)
    const double d0 = c1, d1 = c2;
    auto comp_of = [s1, s2, c1](int n, int zeta, double k) {
        double speed = (n == 1) ? s1 : s2;
        bool first_pair = (speed == c1);
        // eigenvalue zeta*speed*|k| lives in component c with L_cc = +-speed*k
        bool positive_slope = (zeta > 0) == (k >= 0.0);
        int base = first_pair ? 0 : 1;
        return positive_slope ? base : base + 2;
    };
    BandStructure::Callbacks cb;
    cb.J = 2;
    cb.d = 1;
    cb.name = "two_speed";
    cb.omega = [s1, s2](int n, const Kvec& k) {
        return (n == 1 ? s1 : s2) * std::abs(k[0]);
    };
    cb.grad = [s1, s2](int n, const Kvec& k) {
        double s = (n == 1 ? s1 : s2);
        return Kvec{k[0] >= 0 ? s : -s};
    };
    cb.hess = [](int, const Kvec&) { return std::vector<double>{0.0}; };
    cb.eigvec = [comp_of](int n, int zeta, const Kvec& k) {
        return ort(4, comp_of(n, zeta, k[0]));
    };
    cb.crossing = [r_bc](const Kvec& k) { return std::abs(k[0]) < r_bc; };
    cb.diag = [d0, d1](int c, const Kvec& k) {
        switch (c) {
            case 0: return d0 * k[0];
            case 1: return d1 * k[0];
            case 2: return -d0 * k[0];
            default: return -d1 * k[0];
        }
    };
    return BandStructure(std::move(cb));
}

BandStructure make_nls_band(double g0, double g1, double g2) {
    BandStructure::Callbacks cb;
    cb.J = 1;
    cb.d = 1;
    cb.name = "nls";
    cb.omega = [g0, g1, g2](int, const Kvec& k) {
        return g0 + g1 * k[0] + g2 * k[0] * k[0];
    };
    cb.grad = [g1, g2](int, const Kvec& k) { return Kvec{g1 + 2 * g2 * k[0]}; };
    cb.hess = [g2](int, const Kvec&) { return std::vector<double>{2 * g2}; };
    cb.eigvec = [](int, int zeta, const Kvec&) {
        return ort(2, zeta > 0 ? 0 : 1);
    };
    cb.diag = [g0, g1, g2](int c, const Kvec& k) {
        double x = k[0];
        if (c == 0) return g0 + g1 * x + g2 * x * x;
        return -(g0 - g1 * x + g2 * x * x);
    };
    return BandStructure(std::move(cb));
}

BandStructure make_coupled_nls_band(double g01, double g11, double g21,
                                    double g02, double g12, double g22) {
    auto p1 = [g01, g11, g21](double k) { return g01 + g11 * k + g21 * k * k; };
    auto p2 = [g02, g12, g22](double k) { return g02 + g12 * k + g22 * k * k; };
    // bands ordered pointwise: band 1 = lower parabola at k, band 2 = upper;
    // where the parabolas meet the ordering flips, so that set is sigma_bc
    auto which = [p1, p2](int n, double k) {
        bool one_lower = p1(k) <= p2(k);
        return (n == 1) == one_lower ? 1 : 2;
    };
    BandStructure::Callbacks cb;
    cb.J = 2;
    cb.d = 1;
    cb.name = "coupled_nls";
    cb.omega = [p1, p2, which](int n, const Kvec& k) {
        return which(n, k[0]) == 1 ? p1(k[0]) : p2(k[0]);
    };
    cb.grad = [g11, g21, g12, g22, which](int n, const Kvec& k) {
        return Kvec{which(n, k[0]) == 1 ? g11 + 2 * g21 * k[0]
                                        : g12 + 2 * g22 * k[0]};
    };
    cb.hess = [g21, g22, which](int n, const Kvec& k) {
        return std::vector<double>{which(n, k[0]) == 1 ? 2 * g21 : 2 * g22};
    };
    // components (u1, conj u1, u2, conj u2)
    cb.eigvec = [which](int n, int zeta, const Kvec& k) {
        if (zeta > 0) return ort(4, 2 * (which(n, k[0]) - 1));
        return ort(4, 2 * (which(n, -k[0]) - 1) + 1);
    };
    cb.crossing = [p1, p2](const Kvec& k) {
        return std::abs(p1(k[0]) - p2(k[0])) < 1e-9 ||
               std::abs(p1(-k[0]) - p2(-k[0])) < 1e-9;
    };
    cb.diag = [g01, g11, g21, g02, g12, g22](int c, const Kvec& k) {
        double x = k[0];
        switch (c) {
            case 0: return g01 + g11 * x + g21 * x * x;
            case 1: return -(g01 - g11 * x + g21 * x * x);
            case 2: return g02 + g12 * x + g22 * x * x;
            default: return -(g02 - g12 * x + g22 * x * x);
        }
    };
    return BandStructure(std::move(cb));
}

BandStructure make_tabulated_band(const std::vector<double>& ks,
                                  const std::vector<double>& ws) {
    if (ks.size() != ws.size() || ks.size() < 2)
        throw Error("tabulated band: need >= 2 samples");
    for (size_t i = 1; i < ks.size(); ++i)
        if (ks[i] <= ks[i - 1])
            throw Error("tabulated band: k samples must strictly increase");
    auto eval = [ks, ws](double x) {
        size_t n = ks.size();
        if (x <= ks.front()) {  // linear extrapolation
            double s = (ws[1] - ws[0]) / (ks[1] - ks[0]);
            return ws[0] + s * (x - ks[0]);
        }
        if (x >= ks.back()) {
            double s = (ws[n - 1] - ws[n - 2]) / (ks[n - 1] - ks[n - 2]);
            return ws[n - 1] + s * (x - ks[n - 1]);
        }
        size_t i = 0;
        {
            size_t lo = 0, hi = n - 1;
            while (hi - lo > 1) {
                size_t mid = (lo + hi) / 2;
                if (ks[mid] <= x) lo = mid;
                else hi = mid;
            }
            i = lo;
        }
        // cubic Hermite with finite-difference slopes
        double h = ks[i + 1] - ks[i];
        double t = (x - ks[i]) / h;
        auto slope = [&](size_t j) {
            if (j == 0) return (ws[1] - ws[0]) / (ks[1] - ks[0]);
            if (j == n - 1)
                return (ws[n - 1] - ws[n - 2]) / (ks[n - 1] - ks[n - 2]);
            return 0.5 * ((ws[j + 1] - ws[j]) / (ks[j + 1] - ks[j]) +
                          (ws[j] - ws[j - 1]) / (ks[j] - ks[j - 1]));
        };
        double m0 = slope(i) * h, m1 = slope(i + 1) * h;
        double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * ws[i] + (t3 - 2 * t2 + t) * m0 +
               (-2 * t3 + 3 * t2) * ws[i + 1] + (t3 - t2) * m1;
    };
    BandStructure::Callbacks cb;
    cb.J = 1;
    cb.d = 1;
    cb.name = "tabulated";
    cb.omega = [eval](int, const Kvec& k) { return eval(k[0]); };
    cb.eigvec = [](int, int zeta, const Kvec&) {
        return ort(2, zeta > 0 ? 0 : 1);
    };
    cb.diag = [eval](int c, const Kvec& k) {
        return c == 0 ? eval(k[0]) : -eval(-k[0]);
    };
    return BandStructure(std::move(cb));
}

BandStructure make_constant_band(const std::vector<double>& w0) {
    const int J = static_cast<int>(w0.size());
    if (J < 1) throw Error("constant band: need >= 1 frequency");
    for (int j = 0; j < J; ++j) {
        if (w0[j] <= 0) throw Error("constant band: frequencies must be > 0");
        if (j > 0 && w0[j] <= w0[j - 1])
            throw Error("constant band: frequencies must ascend");
    }
    BandStructure::Callbacks cb;
    cb.J = J;
    cb.d = 1;
    cb.name = "constant";
    cb.omega = [w0](int n, const Kvec&) { return w0[n - 1]; };
    cb.grad = [](int, const Kvec&) { return Kvec{0.0}; };
    cb.hess = [](int, const Kvec&) { return std::vector<double>{0.0}; };
    cb.eigvec = [J](int n, int zeta, const Kvec&) {
        return ort(2 * J, 2 * (n - 1) + (zeta > 0 ? 0 : 1));
    };
    cb.diag = [w0](int c, const Kvec&) {
        return (c % 2 == 0) ? w0[c / 2] : -w0[c / 2];
    };
    return BandStructure(std::move(cb));
}

}  // namespace wavelab

#include "wavelab/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wavelab {

NKSpectrum::NKSpectrum(std::vector<NKPair> pairs, double tol_k)
    : tol_k_(tol_k) {
    for (size_t i = 0; i < pairs.size(); ++i)
        for (size_t j = i + 1; j < pairs.size(); ++j)
            if (pairs[i].n == pairs[j].n &&
                same_k(pairs[i].k, pairs[j].k, tol_k))
                throw Error("NKSpectrum: pairs must be pairwise distinct");
    // normalize ordering: first |K_S| pairs carry the distinct wavevectors,
    // in order of first appearance
    std::vector<NKPair> lead, rest;
    for (auto& p : pairs) {
        bool fresh = true;
        for (auto& q : lead)
            if (same_k(p.k, q.k, tol_k)) {
                fresh = false;
                break;
            }
        if (fresh) lead.push_back(p);
        else rest.push_back(p);
    }
    pairs_ = lead;
    pairs_.insert(pairs_.end(), rest.begin(), rest.end());
    for (auto& p : lead) kspec_.push_back(p.k);
    iofl_.resize(pairs_.size());
    for (size_t l = 0; l < pairs_.size(); ++l) {
        for (size_t i = 0; i < kspec_.size(); ++i)
            if (same_k(pairs_[l].k, kspec_[i], tol_k)) {
                iofl_[l] = static_cast<int>(i) + 1;
                break;
            }
    }
}

std::optional<int> NKSpectrum::find(int n, const Kvec& k, double tol_k) const {
    for (size_t l = 0; l < pairs_.size(); ++l)
        if (pairs_[l].n == n && same_k(pairs_[l].k, k, tol_k))
            return static_cast<int>(l) + 1;
    return std::nullopt;
}

bool NKSpectrum::same_set(const NKSpectrum& o, double tol_k) const {
    if (size() != o.size()) return false;
    for (auto& p : pairs_)
        if (!o.contains(p.n, p.k, tol_k)) return false;
    return true;
}

void NKSpectrum::validate_against(const BandStructure& bs,
                                  const std::vector<int>& M_F,
                                  double tol_k) const {
    for (auto& p : pairs_) {
        bs.check_band_index(p.n);
        if (bs.crossing(p.k))
            throw BandCrossingError("NKSpectrum: k_* on sigma_bc");
    }
    // (Skempty): every kappa_m value off sigma_bc
    const int N = size();
    for (int m : M_F) {
        if (std::pow(2.0 * N, m) > 1e7)
            throw BudgetExceededError("NKSpectrum validation exceeds budget");
        std::vector<int> idx(m, 0);  // each slot encodes (zeta, l)
        const int slots = 2 * N;
        while (true) {
            Kvec kk(bs.d(), 0.0);
            for (int j = 0; j < m; ++j) {
                int zeta = (idx[j] < N) ? +1 : -1;
                int l = idx[j] % N;
                kk = kk + static_cast<double>(zeta) * pairs_[l].k;
            }
            if (bs.crossing(kk))
                throw BandCrossingError(
                    "NKSpectrum: output wavevector lands on sigma_bc");
            int j = 0;
            for (; j < m; ++j) {
                if (++idx[j] < slots) break;
                idx[j] = 0;
            }
            if (j == m) break;
        }
    }
    (void)tol_k;
}

std::vector<int> IndexString::delta(int N) const {
    std::vector<int> d(N, 0);
    for (auto& [zeta, l] : lam) d.at(l - 1) += zeta;
    return d;
}

std::string IndexString::str() const {
    std::ostringstream os;
    os << "(";
    for (size_t j = 0; j < lam.size(); ++j) {
        if (j) os << ",";
        os << (lam[j].first > 0 ? "+" : "-") << lam[j].second;
    }
    os << ")";
    return os.str();
}

Kvec kappa(const IndexString& lambda, const NKSpectrum& S) {
    if (S.size() == 0) throw Error("kappa: empty spectrum");
    Kvec k(S.pair(1).k.size(), 0.0);
    for (auto& [zeta, l] : lambda.lam) {
        if (l < 1 || l > S.size())
            throw IndexOutOfRangeError("kappa: lambda references l=" +
                                       std::to_string(l));
        k = k + static_cast<double>(zeta) * S.pair(l).k;
    }
    return k;
}

double omega_mismatch(int zeta, int n, const IndexString& lambda,
                      const Kvec& k_star_star, const NKSpectrum& S,
                      const BandStructure& bs) {
    double s = -zeta * bs.omega_plus(n, k_star_star);
    for (auto& [zj, l] : lambda.lam)
        s += zj * bs.omega_plus(S.pair(l).n, S.pair(l).k);
    return s;
}

bool ResonanceSolution::operator<(const ResonanceSolution& o) const {
    if (m != o.m) return m < o.m;
    if (zeta != o.zeta) return zeta > o.zeta;  // + before -
    if (n != o.n) return n < o.n;
    return lambda < o.lambda;
}

bool ResonanceSolution::operator==(const ResonanceSolution& o) const {
    return m == o.m && zeta == o.zeta && n == o.n && lambda == o.lambda;
}

std::vector<ResonanceSolution> ResonanceResult::universal() const {
    std::vector<ResonanceSolution> r;
    for (auto& s : solutions)
        if (s.cls == SolutionClass::universal) r.push_back(s);
    return r;
}

std::vector<ResonanceSolution> ResonanceResult::internal() const {
    std::vector<ResonanceSolution> r;
    for (auto& s : solutions)
        if (s.cls != SolutionClass::external) r.push_back(s);
    return r;
}

namespace {

// Lexicographic enumeration of Lambda^m; slot order: zeta (+ then -), then l
// ascending, i.e. slot code q in [0, 2N): q < N -> (+, q+1), else (-, q-N+1).
std::pair<int, int> slot_decode(int q, int N) {
    return q < N ? std::make_pair(+1, q + 1) : std::make_pair(-1, q - N + 1);
}

SolutionClass classify(const ResonanceSolution& sol, const NKSpectrum& S,
                       double tol_k) {
    const int N = S.size();
    std::vector<int> delta = sol.lambda.delta(N);
    int nonzero = 0, i0 = -1;
    for (int l = 0; l < N; ++l)
        if (delta[l] != 0) {
            ++nonzero;
            i0 = l;
        }
    if (nonzero == 1 && std::abs(delta[i0]) == 1 &&
        sol.n == S.pair(i0 + 1).n && sol.zeta == delta[i0])
        return SolutionClass::universal;
    if (S.contains(sol.n, sol.k_out, tol_k)) return SolutionClass::internal;
    return SolutionClass::external;
}

}  // namespace

ResonanceResult resonance_solutions(const NKSpectrum& S, const BandStructure& bs,
                                    const std::vector<int>& M_F,
                                    const ResonanceOptions& opt) {
    ResonanceResult res;
    const int N = S.size();
    if (N == 0) return res;
    S.validate_against(bs, M_F, opt.tol_k);

    for (auto& p : S.pairs())
        res.omega_scale =
            std::max(res.omega_scale, std::abs(bs.omega_plus(p.n, p.k)));
    const double tol_abs = opt.tol * std::max(res.omega_scale, 1e-300);

    std::vector<int> ms = M_F;
    std::sort(ms.begin(), ms.end());

    size_t count = 0;
    for (int m : ms) {
        size_t strings = 1;
        for (int j = 0; j < m; ++j) strings *= static_cast<size_t>(2 * N);
        count += strings * 2 * bs.J();
        if (count > opt.budget)
            throw BudgetExceededError("resonance enumeration exceeds budget");
    }

    for (int m : ms) {
        for (int zeta : {+1, -1}) {
            for (int n = 1; n <= bs.J(); ++n) {
                std::vector<int> idx(m, 0);
                while (true) {
                    IndexString lambda;
                    lambda.lam.resize(m);
                    for (int j = 0; j < m; ++j)
                        lambda.lam[j] = slot_decode(idx[j], N);
                    Kvec kap = kappa(lambda, S);
                    Kvec k_out = static_cast<double>(zeta) * kap;
                    if (bs.crossing(k_out)) {
                        res.skipped.push_back("m=" + std::to_string(m) +
                                              " zeta=" + std::to_string(zeta) +
                                              " n=" + std::to_string(n) +
                                              " lambda=" + lambda.str() +
                                              ": kappa on sigma_bc");
                    } else {
                        double om =
                            omega_mismatch(zeta, n, lambda, k_out, S, bs);
                        if (std::abs(om) <= tol_abs) {
                            ResonanceSolution sol{m,    zeta, n, lambda,
                                                  k_out, om,  SolutionClass::external};
                            sol.cls = classify(sol, S, opt.tol_k);
                            res.solutions.push_back(std::move(sol));
                        } else if (std::abs(om) <= opt.warn_factor * tol_abs) {
                            ResonanceSolution sol{m,    zeta, n, lambda,
                                                  k_out, om,  SolutionClass::external};
                            res.near_misses.push_back(std::move(sol));
                        }
                    }
                    // lexicographic advance, last slot fastest
                    int j = m - 1;
                    for (; j >= 0; --j) {
                        if (++idx[j] < 2 * N) break;
                        idx[j] = 0;
                    }
                    if (j < 0) break;
                }
            }
        }
    }
    // enumeration order is already canonical; dedup defensively
    res.solutions.erase(std::unique(res.solutions.begin(), res.solutions.end()),
                        res.solutions.end());
    return res;
}

SelectionResult resonance_selection(const NKSpectrum& S, const BandStructure& bs,
                                    const std::vector<int>& M_F,
                                    const ResonanceOptions& opt) {
    SelectionResult sel;
    sel.base = resonance_solutions(S, bs, M_F, opt);
    const int N = S.size();
    if (N == 0) {
        sel.R_S = S;
        return sel;
    }
    // [S]_{K,out}: every kappa value over all strings
    std::vector<int> ms = M_F;
    std::sort(ms.begin(), ms.end());
    for (int m : ms) {
        std::vector<int> idx(m, 0);
        while (true) {
            IndexString lambda;
            lambda.lam.resize(m);
            for (int j = 0; j < m; ++j) lambda.lam[j] = slot_decode(idx[j], N);
            Kvec kap = kappa(lambda, S);
            bool fresh = true;
            for (auto& k : sel.out_k)
                if (same_k(k, kap, opt.tol_k)) {
                    fresh = false;
                    break;
                }
            if (fresh) sel.out_k.push_back(kap);
            int j = m - 1;
            for (; j >= 0; --j) {
                if (++idx[j] < 2 * N) break;
                idx[j] = 0;
            }
            if (j < 0) break;
        }
    }
    // resonant output spectrum and R(S) = S union [S]^{res}_{out}
    std::vector<NKPair> pairs = S.pairs();
    for (auto& sol : sel.base.solutions) {
        bool fresh = true;
        for (auto& p : sel.out_res)
            if (p.n == sol.n && same_k(p.k, sol.k_out, opt.tol_k)) {
                fresh = false;
                break;
            }
        if (fresh) sel.out_res.push_back({sol.n, sol.k_out});
        bool in_S = false;
        for (auto& p : pairs)
            if (p.n == sol.n && same_k(p.k, sol.k_out, opt.tol_k)) {
                in_S = true;
                break;
            }
        if (!in_S) pairs.push_back({sol.n, sol.k_out});
    }
    sel.R_S = NKSpectrum(pairs, opt.tol_k);
    return sel;
}

ClosureResult closure_and_invariance(const NKSpectrum& S, const BandStructure& bs,
                                     const std::vector<int>& M_F,
                                     const ResonanceOptions& opt, int max_iter) {
    if (max_iter < 1) throw Error("closure: max_iter >= 1 required");
    ClosureResult out;
    NKSpectrum cur = S;
    for (int it = 1; it <= max_iter; ++it) {
        SelectionResult sel = resonance_selection(cur, bs, M_F, opt);
        out.iterations = it;
        if (it == 1) {
            out.resonance_invariant = sel.R_S.same_set(S, opt.tol_k);
            if (out.resonance_invariant) {
                auto uni = sel.base.universal();
                auto intr = sel.base.internal();
                out.universally_invariant = uni.size() == intr.size();
            }
        }
        if (sel.R_S.same_set(cur, opt.tol_k)) {
            out.R_inf = sel.R_S;
            out.converged = true;
            return out;
        }
        cur = sel.R_S;
    }
    out.R_inf = cur;  // partial closure, NoConvergence
    out.converged = false;
    out.resonance_invariant = false;
    out.universally_invariant = false;
    return out;
}

}  // namespace wavelab

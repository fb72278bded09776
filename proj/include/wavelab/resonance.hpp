#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wavelab/common.hpp"
#include "wavelab/dispersion.hpp"

namespace wavelab {

struct NKPair {
    int n;
    Kvec k;
};

// Ordered nk-spectrum S = {(n_l, k_{*l})}.  Construction normalizes the order
// so that the first |K_S| pairs carry the distinct wavevectors (l_i = i).
class NKSpectrum {
public:
    NKSpectrum() = default;
    explicit NKSpectrum(std::vector<NKPair> pairs, double tol_k = 1e-9);

    int size() const { return static_cast<int>(pairs_.size()); }
    const NKPair& pair(int l) const { return pairs_.at(l - 1); }  // 1-based
    const std::vector<NKPair>& pairs() const { return pairs_; }
    const std::vector<Kvec>& k_spectrum() const { return kspec_; }
    // index i_l of pair l's wavevector inside K_S (1-based both ways)
    int k_index(int l) const { return iofl_.at(l - 1); }

    std::optional<int> find(int n, const Kvec& k, double tol_k = 1e-9) const;
    bool contains(int n, const Kvec& k, double tol_k = 1e-9) const {
        return find(n, k, tol_k).has_value();
    }
    bool same_set(const NKSpectrum& o, double tol_k = 1e-9) const;

    // Checks k_* off sigma_bc and the (Skempty) condition that no output
    // wavevector kappa_m lands on sigma_bc.  Throws on violation.
    void validate_against(const BandStructure& bs, const std::vector<int>& M_F,
                          double tol_k = 1e-9) const;

private:
    std::vector<NKPair> pairs_;
    std::vector<Kvec> kspec_;
    std::vector<int> iofl_;
    double tol_k_ = 1e-9;
};

// Interaction index string lambda = ((zeta^(1), l_1), ..., (zeta^(m), l_m)).
struct IndexString {
    std::vector<std::pair<int, int>> lam;  // (zeta = +-1, l 1-based)
    int m() const { return static_cast<int>(lam.size()); }
    // multiplicities delta_l = sum of zeta^(j) over j with l_j = l
    std::vector<int> delta(int N) const;
    bool operator==(const IndexString& o) const { return lam == o.lam; }
    bool operator<(const IndexString& o) const { return lam < o.lam; }
    std::string str() const;
};

// kappa_m(lambda) = sum_j zeta^(j) k_{*l_j}
Kvec kappa(const IndexString& lambda, const NKSpectrum& S);

// Omega(zeta, n, lambda)(k**, kvec_*) = -zeta omega_n(k**) + sum_j zeta^(j)
// omega_{n_{l_j}}(k_{*l_j}); the resonance equation takes k** = zeta kappa_m.
double omega_mismatch(int zeta, int n, const IndexString& lambda,
                      const Kvec& k_star_star, const NKSpectrum& S,
                      const BandStructure& bs);

enum class SolutionClass { universal, internal, external };

struct ResonanceSolution {
    int m = 0;
    int zeta = 0;
    int n = 0;
    IndexString lambda;
    Kvec k_out;           // zeta * kappa_m(lambda)
    double omega_resid = 0.0;
    SolutionClass cls = SolutionClass::external;
    bool operator<(const ResonanceSolution& o) const;
    bool operator==(const ResonanceSolution& o) const;
};

struct ResonanceOptions {
    double tol = 1e-9;           // |Omega| <= tol * omega_scale
    double warn_factor = 1e3;    // near-resonance report window
    double tol_k = 1e-9;         // wavevector dedup
    size_t budget = 10'000'000;  // enumeration guard
};

struct ResonanceResult {
    std::vector<ResonanceSolution> solutions;     // canonical order
    std::vector<ResonanceSolution> near_misses;   // tol < |Omega| <= 1e3 tol
    std::vector<std::string> skipped;             // kappa on sigma_bc etc.
    double omega_scale = 0.0;
    std::vector<ResonanceSolution> universal() const;
    std::vector<ResonanceSolution> internal() const;  // includes universal
};

ResonanceResult resonance_solutions(const NKSpectrum& S, const BandStructure& bs,
                                    const std::vector<int>& M_F,
                                    const ResonanceOptions& opt = {});

struct SelectionResult {
    std::vector<Kvec> out_k;        // [S]_{K,out}, deduplicated
    std::vector<NKPair> out_res;    // [S]^{res}_{out}
    NKSpectrum R_S;                 // S joined with out_res
    ResonanceResult base;
};

SelectionResult resonance_selection(const NKSpectrum& S, const BandStructure& bs,
                                    const std::vector<int>& M_F,
                                    const ResonanceOptions& opt = {});

struct ClosureResult {
    NKSpectrum R_inf;
    bool resonance_invariant = false;
    bool universally_invariant = false;
    int iterations = 0;
    bool converged = false;  // false = NoConvergence, partial closure returned
};

ClosureResult closure_and_invariance(const NKSpectrum& S, const BandStructure& bs,
                                     const std::vector<int>& M_F,
                                     const ResonanceOptions& opt = {},
                                     int max_iter = 8);

}  // namespace wavelab

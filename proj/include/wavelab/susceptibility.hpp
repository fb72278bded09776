#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "wavelab/common.hpp"

namespace wavelab {

// Dense m-linear tensor chi: (C^n)^m -> C^n, coefficients indexed
// a[out, i1, ..., im] row-major.
struct ChiTensor {
    int ncomp = 0;
    int m = 0;
    std::vector<cplx> a;

    ChiTensor() = default;
    ChiTensor(int ncomp_, int m_)
        : ncomp(ncomp_), m(m_), a(flat_size(ncomp_, m_), cplx(0.0)) {}

    static size_t flat_size(int ncomp, int m) {
        size_t s = static_cast<size_t>(ncomp);
        for (int j = 0; j < m; ++j) s *= static_cast<size_t>(ncomp);
        return s;
    }

    cplx& coef(int out, std::span<const int> ins) {
        size_t idx = static_cast<size_t>(out);
        for (int j = 0; j < m; ++j)
            idx = idx * ncomp + static_cast<size_t>(ins[j]);
        return a[idx];
    }
    const cplx& coef(int out, std::span<const int> ins) const {
        return const_cast<ChiTensor*>(this)->coef(out, ins);
    }

    // Adds coeff * prod_j u_{ins[j]} to component `out`, distributing the
    // coefficient over all orderings so the stored tensor is symmetric.
    void add_monomial(int out, std::vector<int> ins, cplx coeff);

    // out[c] = sum over multi-index chi[c, i...] prod_j xs[j][i_j]
    void apply(std::span<const cplx* const> xs, std::span<cplx> out) const;

    struct Entry {
        int out;
        std::vector<int> in;
        cplx c;
    };
    // nonzero coefficients, for entry-outer field loops
    std::vector<Entry> nonzeros() const;

    // sup over unit vectors is estimated by the l1 size of each output row;
    // adequate for the C_chi boundedness check.
    double bound_estimate() const;
};

// Nonlinearity F_hat = sum_{m in M_F} F^(m) with convolution kernels chi^(m).
struct SusceptibilityModel {
    enum class Mode { constant, center_evaluated, grid_callable };

    std::vector<int> arities;  // M_F
    Mode mode = Mode::constant;
    std::map<int, ChiTensor> constant_chi;  // per arity, constant/center modes
    // grid-callable: full evaluation chi(k, kvec)[x1..xm] -> out
    std::function<ChiTensor(int m, const Kvec& k, const std::vector<Kvec>& kj)>
        chi_at;
    double c_chi = 1.0;  // declared bound (chiCR)

    static SusceptibilityModel constant(std::map<int, ChiTensor> chi);
    const ChiTensor& tensor(int m) const;
    bool has_arity(int m) const;
    int max_arity() const;
};

// Plain polynomial map C^n -> C^n as a monomial list; used for the ODE
// reduction, universal-nonlinearity checks and pointwise RHS evaluations.
struct Monomial {
    int out = 0;
    std::vector<int> ins;
    cplx coeff;
};

struct PolynomialMap {
    int ncomp = 0;
    std::vector<Monomial> terms;
    void apply(std::span<const cplx> u, std::span<cplx> out) const;
    std::vector<cplx> operator()(const std::vector<cplx>& u) const;
};

// Universal nonlinearity (2N slots ordered (1,+),(1,-),...,(N,+),(N,-)):
// F_{j,zeta} = sum over nu of b * prod_l (u_{l,+} u_{l,-})^{nu_l} * u_{j,zeta}.
// Here a single nu multi-index per (j-dependent) coefficient table.
PolynomialMap universal_cubic(int N, const std::vector<std::vector<cplx>>& b);

}  // namespace wavelab

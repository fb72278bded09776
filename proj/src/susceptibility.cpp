#include "wavelab/susceptibility.hpp"

#include <algorithm>

namespace wavelab {

void ChiTensor::add_monomial(int out, std::vector<int> ins, cplx coeff) {
    if (static_cast<int>(ins.size()) != m)
        throw Error("ChiTensor::add_monomial: arity mismatch");
    std::sort(ins.begin(), ins.end());
    // count distinct orderings
    size_t perms = 1;
    for (size_t i = 2; i <= ins.size(); ++i) perms *= i;
    size_t rep = 1;
    size_t i = 0;
    while (i < ins.size()) {
        size_t j = i;
        while (j < ins.size() && ins[j] == ins[i]) ++j;
        size_t cnt = j - i;
        size_t f = 1;
        for (size_t q = 2; q <= cnt; ++q) f *= q;
        rep *= f;
        i = j;
    }
    const size_t distinct = perms / rep;
    const cplx w = coeff / static_cast<double>(distinct);
    std::vector<int> p = ins;
    do {
        coef(out, p) += w;
    } while (std::next_permutation(p.begin(), p.end()));
}

void ChiTensor::apply(std::span<const cplx* const> xs,
                      std::span<cplx> out) const {
    for (int c = 0; c < ncomp; ++c) out[c] = cplx(0.0);
    std::vector<int> idx(m, 0);
    size_t flat = 0;
    // iterate over all multi-indices; coefficients are dense but tiny
    const size_t total = a.size() / ncomp;
    for (size_t t = 0; t < total; ++t, ++flat) {
        // decode flat -> idx (row-major over m slots)
        size_t rest = t;
        for (int j = m - 1; j >= 0; --j) {
            idx[j] = static_cast<int>(rest % ncomp);
            rest /= ncomp;
        }
        cplx prod(1.0);
        for (int j = 0; j < m; ++j) prod *= xs[j][idx[j]];
        if (prod == cplx(0.0)) continue;
        for (int c = 0; c < ncomp; ++c) {
            const cplx& coefv = a[c * total + t];
            if (coefv != cplx(0.0)) out[c] += coefv * prod;
        }
    }
}

std::vector<ChiTensor::Entry> ChiTensor::nonzeros() const {
    std::vector<Entry> out;
    const size_t total = a.size() / ncomp;
    std::vector<int> idx(m, 0);
    for (size_t t = 0; t < total; ++t) {
        size_t rest = t;
        for (int j = m - 1; j >= 0; --j) {
            idx[j] = static_cast<int>(rest % ncomp);
            rest /= ncomp;
        }
        for (int c = 0; c < ncomp; ++c) {
            const cplx& v = a[c * total + t];
            if (v != cplx(0.0)) out.push_back({c, idx, v});
        }
    }
    return out;
}

double ChiTensor::bound_estimate() const {
    const size_t total = a.size() / ncomp;
    double best = 0.0;
    for (int c = 0; c < ncomp; ++c) {
        double s = 0.0;
        for (size_t t = 0; t < total; ++t) s += std::abs(a[c * total + t]);
        best = std::max(best, s);
    }
    return best;
}

SusceptibilityModel SusceptibilityModel::constant(std::map<int, ChiTensor> chi) {
    SusceptibilityModel s;
    s.mode = Mode::constant;
    for (auto& [m, t] : chi) s.arities.push_back(m);
    s.constant_chi = std::move(chi);
    double b = 0.0;
    for (auto& [m, t] : s.constant_chi) b = std::max(b, t.bound_estimate());
    s.c_chi = std::max(b, 1e-300);
    return s;
}

const ChiTensor& SusceptibilityModel::tensor(int m) const {
    auto it = constant_chi.find(m);
    if (it == constant_chi.end())
        throw Error("SusceptibilityModel: no tensor for arity " +
                    std::to_string(m));
    return it->second;
}

bool SusceptibilityModel::has_arity(int m) const {
    return std::find(arities.begin(), arities.end(), m) != arities.end();
}

int SusceptibilityModel::max_arity() const {
    int mx = 0;
    for (int m : arities) mx = std::max(mx, m);
    return mx;
}

void PolynomialMap::apply(std::span<const cplx> u, std::span<cplx> out) const {
    for (int c = 0; c < ncomp; ++c) out[c] = cplx(0.0);
    for (auto& t : terms) {
        cplx p = t.coeff;
        for (int i : t.ins) p *= u[i];
        out[t.out] += p;
    }
}

std::vector<cplx> PolynomialMap::operator()(const std::vector<cplx>& u) const {
    std::vector<cplx> out(ncomp);
    apply(u, out);
    return out;
}

PolynomialMap universal_cubic(int N, const std::vector<std::vector<cplx>>& b) {
    PolynomialMap F;
    F.ncomp = 2 * N;
    for (int j = 0; j < N; ++j) {
        for (int zeta = 0; zeta < 2; ++zeta) {
            int self = 2 * j + zeta;
            for (int l = 0; l < N; ++l) {
                cplx coeff = b[j][l];
                if (zeta == 1) coeff = std::conj(coeff);
                if (coeff == cplx(0.0)) continue;
                F.terms.push_back({self, {2 * l, 2 * l + 1, self}, coeff});
            }
        }
    }
    return F;
}

}  // namespace wavelab

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "wavelab/common.hpp"
#include "wavelab/grid.hpp"

namespace wavelab {

// A 2J-component complex field sampled on a KGrid.  The same container holds
// k-space and r-space samples; which one it is follows from context.
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(const KGrid& grid, int ncomp)
        : grid_(grid), ncomp_(ncomp), v_(grid.nodes() * ncomp, cplx(0.0, 0.0)) {}

    const KGrid& grid() const { return grid_; }
    int ncomp() const { return ncomp_; }
    size_t nodes() const { return grid_.nodes(); }

    cplx& at(size_t node, int c) { return v_[node * ncomp_ + c]; }
    const cplx& at(size_t node, int c) const { return v_[node * ncomp_ + c]; }

    std::span<cplx> node_span(size_t node) {
        return {v_.data() + node * ncomp_, static_cast<size_t>(ncomp_)};
    }
    std::span<const cplx> node_span(size_t node) const {
        return {v_.data() + node * ncomp_, static_cast<size_t>(ncomp_)};
    }

    std::vector<cplx>& raw() { return v_; }
    const std::vector<cplx>& raw() const { return v_; }

    double node_abs(size_t node) const {
        double s = 0.0;
        for (int c = 0; c < ncomp_; ++c) s += std::norm(v_[node * ncomp_ + c]);
        return std::sqrt(s);
    }

    // Riemann-sum L1 norm: dk^d * sum |f(k)| with |.| the Euclidean norm over
    // components.
    double l1_norm() const {
        double s = 0.0;
        for (size_t n = 0; n < nodes(); ++n) s += node_abs(n);
        return s * cell();
    }

    double l1a_norm(double a) const {
        double s = 0.0;
        for (size_t n = 0; n < nodes(); ++n)
            s += std::pow(1.0 + norm2(grid_.k_at(n)), a) * node_abs(n);
        return s * cell();
    }

    double weighted_norm(const std::function<double(double)>& psi) const {
        double s = 0.0;
        for (size_t n = 0; n < nodes(); ++n)
            s += std::exp(psi(norm2(grid_.k_at(n)))) * node_abs(n);
        return s * cell();
    }

    double sup_abs() const {
        double s = 0.0;
        for (size_t n = 0; n < nodes(); ++n) s = std::max(s, node_abs(n));
        return s;
    }

    double max_abs_diff(const SpectralField& o) const {
        check_same_shape(o);
        double s = 0.0;
        for (size_t i = 0; i < v_.size(); ++i)
            s = std::max(s, std::abs(v_[i] - o.v_[i]));
        return s;
    }

    double cell() const {
        double c = 1.0;
        for (int i = 0; i < grid_.d; ++i) c *= grid_.dk;
        return c;
    }

    SpectralField& operator+=(const SpectralField& o) {
        check_same_shape(o);
        for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same_shape(o);
        for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    SpectralField& operator*=(cplx s) {
        for (auto& z : v_) z *= s;
        return *this;
    }
    void axpy(cplx a, const SpectralField& x) {
        check_same_shape(x);
        for (size_t i = 0; i < v_.size(); ++i) v_[i] += a * x.v_[i];
    }
    void set_zero() { std::fill(v_.begin(), v_.end(), cplx(0.0)); }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) {
        a += b;
        return a;
    }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) {
        a -= b;
        return a;
    }

    void check_same_shape(const SpectralField& o) const {
        if (grid_ != o.grid_ || ncomp_ != o.ncomp_)
            throw SizeMismatchError("SpectralField: shape mismatch");
    }

private:
    KGrid grid_;
    int ncomp_ = 0;
    std::vector<cplx> v_;
};

// Linear (non-circular) convolution on the grid, d = 1:
// (f*g)(k_a) = dk * sum_b f(k_b) g(k_{a-b}), out-of-range factors dropped.
// Components are convolved slot-by-slot (ncomp must match).
SpectralField convolve(const SpectralField& f, const SpectralField& g);

// Dilation (B_beta f)(eta) = beta^d f(beta eta), realized exactly as a
// per-node map onto the rescaled grid with spacing dk/beta.
SpectralField dilate(const SpectralField& f, double beta);

}  // namespace wavelab

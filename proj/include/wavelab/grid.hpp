#pragma once

#include <cstddef>
#include <cstdint>

#include "wavelab/common.hpp"

namespace wavelab {

// Uniform k-grid, symmetric about 0: per-axis node a in [0, M) sits at
// k = (a - M/2) * dk.  The grid is the Fourier dual of a periodic r-box of
// period 2*pi/dk with nodes r = a * dr, dr = 2*pi/(M*dk).
struct KGrid {
    int d = 1;
    int M = 0;
    double dk = 0.0;

    KGrid() = default;
    KGrid(int d_, int M_, double dk_) : d(d_), M(M_), dk(dk_) {
        if (d < 1) throw Error("KGrid: dimension must be >= 1");
        if (M < 8 || (M & (M - 1)) != 0)
            throw Error("KGrid: M must be a power of two >= 8");
        if (dk <= 0.0) throw Error("KGrid: dk must be positive");
    }

    size_t nodes() const {
        size_t n = 1;
        for (int i = 0; i < d; ++i) n *= static_cast<size_t>(M);
        return n;
    }

    double k1(int a) const { return (a - M / 2) * dk; }
    double dr() const { return two_pi / (M * dk); }
    double box_length() const { return two_pi / dk; }
    double k_max() const { return (M / 2) * dk; }

    Kvec k_at(size_t flat) const {
        Kvec k(d);
        for (int ax = d - 1; ax >= 0; --ax) {
            k[ax] = k1(static_cast<int>(flat % M));
            flat /= M;
        }
        return k;
    }

    Kvec r_at(size_t flat) const {
        Kvec r(d);
        for (int ax = d - 1; ax >= 0; --ax) {
            r[ax] = static_cast<double>(flat % M) * dr();
            flat /= M;
        }
        return r;
    }

    // Parity (-1)^(sum of per-axis indices) used by the centered transforms.
    int parity(size_t flat) const {
        int s = 0;
        while (flat) {
            s += static_cast<int>(flat % M);
            flat /= M;
        }
        return (s & 1) ? -1 : 1;
    }

    // Nearest per-axis index of a scalar k value; -1 when off-grid.
    int index_of(double k, double tol = 1e-9) const {
        double a = k / dk + M / 2;
        int ai = static_cast<int>(std::lround(a));
        if (ai < 0 || ai >= M) return -1;
        if (std::abs(a - ai) > tol * (1.0 + std::abs(a))) return -1;
        return ai;
    }

    bool operator==(const KGrid& o) const {
        return d == o.d && M == o.M && dk == o.dk;
    }
    bool operator!=(const KGrid& o) const { return !(*this == o); }
};

}  // namespace wavelab

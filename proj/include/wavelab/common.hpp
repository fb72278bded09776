#pragma once

#include <complex>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavelab {

using cplx = std::complex<double>;
using Kvec = std::vector<double>;  // wavevector, size d (tested path d = 1)

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BandCrossingError : Error { using Error::Error; };
struct IndexOutOfRangeError : Error { using Error::Error; };
struct BudgetExceededError : Error { using Error::Error; };
struct EmptySampleError : Error { using Error::Error; };
struct OverlapError : Error { using Error::Error; };
struct GridTooCoarseError : Error { using Error::Error; };
struct SizeMismatchError : Error { using Error::Error; };
struct GridMismatchError : Error { using Error::Error; };
struct NoContractionError : Error { using Error::Error; };
struct BlowUpError : Error { using Error::Error; };
struct UnderResolvedError : Error { using Error::Error; };
struct PastBlowUpError : Error { using Error::Error; };
struct NotResonanceInvariantError : Error { using Error::Error; };
struct GaugeUndefinedError : Error { using Error::Error; };
struct WindowOverlapError : Error { using Error::Error; };
struct IOFailureError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

inline Kvec kv(double x) { return Kvec{x}; }

inline double norm2(const Kvec& k) {
    double s = 0.0;
    for (double x : k) s += x * x;
    return std::sqrt(s);
}

inline Kvec operator+(const Kvec& a, const Kvec& b) {
    Kvec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Kvec operator-(const Kvec& a, const Kvec& b) {
    Kvec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Kvec operator*(double s, const Kvec& a) {
    Kvec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

inline double dist(const Kvec& a, const Kvec& b) { return norm2(a - b); }

// Wavevector dedup tolerance: 1e-9 * (1 + |k|).
inline bool same_k(const Kvec& a, const Kvec& b, double tol_base = 1e-9) {
    return dist(a, b) <= tol_base * (1.0 + norm2(a));
}

}  // namespace wavelab

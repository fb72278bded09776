#include "wavelab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace wavelab {
namespace {

// Plans are cached per (shape, direction).  Planning is not thread-safe in
// FFTW; execution on caller-owned arrays via fftw_execute_dft is.
struct PlanKey {
    int d;
    int M;
    int sign;
    bool operator<(const PlanKey& o) const {
        if (d != o.d) return d < o.d;
        if (M != o.M) return M < o.M;
        return sign < o.sign;
    }
};

class PlanCache {
public:
    fftw_plan get(int d, int M, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        PlanKey key{d, M, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        size_t n = 1;
        for (int i = 0; i < d; ++i) n *= static_cast<size_t>(M);
        std::vector<cplx> buf(n);
        std::vector<int> dims(d, M);
        fftw_plan p = fftw_plan_dft(
            d, dims.data(), reinterpret_cast<fftw_complex*>(buf.data()),
            reinterpret_cast<fftw_complex*>(buf.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw Error("fftw planning failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mu_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void run_fft(const KGrid& g, std::vector<cplx>& buf, int sign) {
    fftw_plan p = cache().get(g.d, g.M, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
}

}  // namespace

namespace {

bool component_zero(const SpectralField& f, int c) {
    for (size_t a = 0; a < f.nodes(); ++a)
        if (f.at(a, c) != cplx(0.0)) return false;
    return true;
}

}  // namespace

SpectralField fourier_forward(const SpectralField& rf) {
    const KGrid& g = rf.grid();
    SpectralField out(g, rf.ncomp());
    const size_t n = g.nodes();
    const double w = std::pow(g.dr(), g.d);
    std::vector<cplx> buf(n);
    for (int c = 0; c < rf.ncomp(); ++c) {
        if (component_zero(rf, c)) continue;
        for (size_t a = 0; a < n; ++a)
            buf[a] = rf.at(a, c) * static_cast<double>(g.parity(a));
        run_fft(g, buf, FFTW_FORWARD);
        for (size_t a = 0; a < n; ++a) out.at(a, c) = w * buf[a];
    }
    return out;
}

SpectralField fourier_inverse(const SpectralField& kf) {
    const KGrid& g = kf.grid();
    SpectralField out(g, kf.ncomp());
    const size_t n = g.nodes();
    const double w = std::pow(g.dk / two_pi, g.d);
    std::vector<cplx> buf(n);
    for (int c = 0; c < kf.ncomp(); ++c) {
        if (component_zero(kf, c)) continue;
        for (size_t a = 0; a < n; ++a) buf[a] = kf.at(a, c);
        run_fft(g, buf, FFTW_BACKWARD);
        for (size_t a = 0; a < n; ++a)
            out.at(a, c) = w * static_cast<double>(g.parity(a)) * buf[a];
    }
    return out;
}

SpectralField pad_spectrum(const SpectralField& f) {
    const KGrid& g = f.grid();
    KGrid pg(g.d, 2 * g.M, g.dk);
    SpectralField out(pg, f.ncomp());
    const int off = pg.M / 2 - g.M / 2;
    const size_t n = g.nodes();
    for (size_t a = 0; a < n; ++a) {
        // per-axis index shift by off
        size_t rest = a, pa = 0, stride = 1;
        for (int ax = g.d - 1; ax >= 0; --ax) {
            int idx = static_cast<int>(rest % g.M);
            rest /= g.M;
            pa += static_cast<size_t>(idx + off) * stride;
            stride *= pg.M;
        }
        for (int c = 0; c < f.ncomp(); ++c) out.at(pa, c) = f.at(a, c);
    }
    return out;
}

SpectralField truncate_spectrum(const SpectralField& f, const KGrid& target) {
    const KGrid& pg = f.grid();
    if (pg.d != target.d || pg.dk != target.dk || pg.M < target.M)
        throw GridMismatchError("truncate_spectrum: incompatible grids");
    SpectralField out(target, f.ncomp());
    const int off = pg.M / 2 - target.M / 2;
    const size_t n = target.nodes();
    for (size_t a = 0; a < n; ++a) {
        // restrict to the symmetric band: the extreme index-0 node at -K has
        // no +K partner and would break conjugate symmetry of real data
        size_t rest = a, pa = 0, stride = 1;
        bool edge = false;
        for (int ax = target.d - 1; ax >= 0; --ax) {
            int idx = static_cast<int>(rest % target.M);
            rest /= target.M;
            if (idx == 0) edge = true;
            pa += static_cast<size_t>(idx + off) * stride;
            stride *= pg.M;
        }
        if (edge) continue;
        for (int c = 0; c < f.ncomp(); ++c) out.at(a, c) = f.at(pa, c);
    }
    return out;
}

}  // namespace wavelab

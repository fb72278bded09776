#include "wavelab/field.hpp"

namespace wavelab {

SpectralField convolve(const SpectralField& f, const SpectralField& g) {
    f.check_same_shape(g);
    const KGrid& gr = f.grid();
    if (gr.d != 1) throw Error("convolve: direct path implemented for d=1");
    const int M = gr.M;
    SpectralField out(gr, f.ncomp());
    for (int a = 0; a < M; ++a) {
        for (int b = 0; b < M; ++b) {
            // k_a - k_b sits at index a - b + M/2
            int j = a - b + M / 2;
            if (j < 0 || j >= M) continue;
            for (int c = 0; c < f.ncomp(); ++c)
                out.at(a, c) += f.at(b, c) * g.at(j, c);
        }
    }
    out *= gr.dk;
    return out;
}

SpectralField dilate(const SpectralField& f, double beta) {
    if (beta <= 0) throw Error("dilate: beta > 0 required");
    const KGrid& gr = f.grid();
    // node a of the target grid sits at k/beta, so beta*k reads node a of f:
    // the dilation is an exact per-node map onto the rescaled grid
    KGrid out_grid(gr.d, gr.M, gr.dk / beta);
    SpectralField out(out_grid, f.ncomp());
    const double amp = std::pow(beta, gr.d);
    const size_t n = gr.nodes();
    for (size_t a = 0; a < n; ++a)
        for (int c = 0; c < f.ncomp(); ++c) out.at(a, c) = amp * f.at(a, c);
    return out;
}

}  // namespace wavelab

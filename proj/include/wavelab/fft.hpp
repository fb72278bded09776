#pragma once

#include "wavelab/field.hpp"

namespace wavelab {

// Discrete realization of the paper-convention transform pair
//   u_hat(k) = integral u(r) e^{-i k.r} dr,
//   u(r)    = (2 pi)^{-d} integral u_hat(k) e^{+i k.r} dk,
// on the centered k-grid / periodic r-box of KGrid.  Exact inverses of each
// other in floating point up to FFT round-off.
SpectralField fourier_forward(const SpectralField& r_field);   // r -> k
SpectralField fourier_inverse(const SpectralField& k_field);   // k -> r

// Embed a k-space field into a grid with 2M points (same dk) and the reverse
// truncation; used for dealiased convolution.
SpectralField pad_spectrum(const SpectralField& f);
SpectralField truncate_spectrum(const SpectralField& f, const KGrid& target);

}  // namespace wavelab

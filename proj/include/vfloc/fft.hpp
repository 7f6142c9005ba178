#pragma once

// Radix-2 FFT plus a Bluestein fallback so spectra can be computed at the
// signal's natural length (bin width = 1/duration) without zero padding.

#include <complex>
#include <cstddef>
#include <vector>

namespace vfloc {

using cplx = std::complex<double>;

[[nodiscard]] std::size_t next_pow2(std::size_t n);

// In-place power-of-two FFT. `inverse` applies the conjugate transform and
// the 1/n scaling.
void fft_pow2(std::vector<cplx>& data, bool inverse);

// DFT of arbitrary length (Bluestein for non power-of-two sizes).
// Plans are cached per length internally.
[[nodiscard]] std::vector<cplx> dft(const std::vector<cplx>& input, bool inverse);

// Forward DFT of a real signal; returns full complex spectrum of length n.
[[nodiscard]] std::vector<cplx> dft_real(const std::vector<double>& input);

// Reference O(n^2) transform used by tests as an oracle.
[[nodiscard]] std::vector<cplx> dft_naive(const std::vector<cplx>& input, bool inverse);

}  // namespace vfloc

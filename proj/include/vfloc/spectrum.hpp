#pragma once

// One-sided magnitude spectra and peak refinement helpers.

#include <cstddef>
#include <optional>
#include <vector>

#include "vfloc/signal.hpp"

namespace vfloc {

struct Spectrum {
    double bin_hz = 0.0;               // frequency resolution
    std::vector<double> magnitude;     // index k -> |X(k * bin_hz)|, volts
    [[nodiscard]] std::size_t size() const { return magnitude.size(); }
    [[nodiscard]] double frequency(std::size_t bin) const {
        return static_cast<double>(bin) * bin_hz;
    }
    [[nodiscard]] double max_frequency() const {
        return magnitude.empty() ? 0.0 : frequency(magnitude.size() - 1);
    }
};

// Hann window of length n.
[[nodiscard]] std::vector<double> hann_window(std::size_t n);

// One-sided amplitude spectrum of the mean-removed, Hann-windowed signal at
// the signal's natural resolution (bin width 1/duration). Magnitudes are
// scaled so an in-band sinusoid of amplitude A reads about A at its peak.
[[nodiscard]] Spectrum magnitude_spectrum(const SampledSignal& signal);

// Same, but zero-padded to at least pad_factor * next_pow2(n) bins for cheap
// computation and finer peak interpolation.
[[nodiscard]] Spectrum magnitude_spectrum_padded(const SampledSignal& signal, int pad_factor);

// Parabolic refinement of a spectral peak on log magnitude. Returns the
// refined frequency; `bin` must be a local maximum index.
[[nodiscard]] double refine_peak(const Spectrum& spec, std::size_t bin);

// Largest-magnitude bin in [lo, hi] (inclusive), or nullopt when empty.
[[nodiscard]] std::optional<std::size_t> peak_bin_in_range(const Spectrum& spec,
                                                           std::size_t lo, std::size_t hi);

}  // namespace vfloc

#pragma once

// Empirical wavelet decomposition of an envelope: data-driven segmentation of
// the magnitude spectrum, a Meyer-type zero-phase filter bank built on the
// boundaries, and regularization of each band into a step signal whose step
// heights are the voltage-change amplitudes.

#include <complex>
#include <cstddef>
#include <vector>

#include "vfloc/fft.hpp"
#include "vfloc/signal.hpp"
#include "vfloc/spectrum.hpp"

namespace vfloc {

struct SpectrumSegmentation {
    std::vector<double> boundaries_hz;  // ascending, strictly inside (0, nyquist)
    int n_bands = 1;
};

struct Component {
    SampledSignal signal;
    int band_index = 0;
    double f_low_hz = 0.0;
    double f_high_hz = 0.0;
};

struct ChangeEvent {
    double time_s = 0.0;
    double amplitude_v = 0.0;  // signed plateau difference k^(j)
};

struct RegularizedComponent {
    SampledSignal step_signal;
    std::vector<ChangeEvent> changes;
    std::vector<double> plateau_levels;
    double theta_abs = 0.0;  // noise-derived threshold, reused as MAD floor
};

struct SegmentationConfig {
    double smooth_hz = 0.08;      // moving-maximum envelope width
    int min_smooth_bins = 3;
    double peak_floor_mult = 6.0;  // maxima must exceed this times the median bin
};

struct EwtConfig {
    double gamma_max = 0.45;  // cap on the Meyer transition ratio
};

struct RegularizeConfig {
    double median_window_s = 0.02;
    double theta_rel = 0.05;        // of smoothed peak-to-peak
    double theta_abs_mult = 3.0;    // times the noise scale estimate
    double binarize_hysteresis = 0.15;  // of peak-to-peak, for smooth components
};

struct LeakageConfig {
    double comb_tol_bins = 2.0;
    double line_floor_mult = 6.0;
    double flag_threshold = 0.2;
};

struct LeakageBand {
    int band_index = 0;
    double ratio = 0.0;       // foreign-train energy fraction in [0, 1]
    double fundamental_hz = 0.0;
    bool flagged = false;
};

// Precomputed transform of the envelope so several segmentations can be
// decomposed without repeating the FFT.
struct DecompositionPlan {
    std::size_t length = 0;
    double sample_rate = 0.0;
    double start_time = 0.0;
    double mean = 0.0;
    std::vector<cplx> spectrum;  // FFT of the mirrored, mean-removed signal
};

// N-1 boundaries between the N strongest peaks of the smoothed spectrum,
// each placed at the raw-spectrum minimum between adjacent kept peaks.
// Throws NotEnoughPeaks when fewer than N qualify.
SpectrumSegmentation segment_spectrum(const Spectrum& spectrum, int n_bands,
                                      const SegmentationConfig& cfg = {});

DecompositionPlan prepare_decomposition(const SampledSignal& envelope);

// Band components via the Meyer-type filter bank; band 0 keeps the mean.
// The components sum back to the envelope.
std::vector<Component> decompose(const SampledSignal& envelope, const SpectrumSegmentation& seg,
                                 const EwtConfig& cfg = {});
std::vector<Component> decompose_with_plan(const DecompositionPlan& plan,
                                           const SpectrumSegmentation& seg,
                                           const EwtConfig& cfg = {});

// Piecewise-constant fit: median smoothing, difference thresholding, plateau
// collapse. Smooth oscillatory components fall back to midline binarization.
RegularizedComponent regularize(const Component& component, const RegularizeConfig& cfg = {});

// Fraction of each band's line energy that belongs to harmonic trains whose
// fundamental lies in another band.
std::vector<LeakageBand> leakage_diagnostic(const SpectrumSegmentation& seg,
                                            const Spectrum& spectrum,
                                            const LeakageConfig& cfg = {});

}  // namespace vfloc

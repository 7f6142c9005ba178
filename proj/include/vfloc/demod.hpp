#pragma once

// Carrier estimation and amplitude demodulation. The detector is square-law:
// squaring shifts the envelope to baseband plus an image band around twice
// the carrier; a zero-phase low pass plus an iterative image subtraction
// driven by the carrier estimate leaves the squared envelope, and the square
// root recovers the RMS-equivalent modulating signal.

#include "vfloc/signal.hpp"

namespace vfloc {

struct CarrierEstimate {
    double frequency_hz = 0.0;
    double phase_rad = 0.0;     // cos(2 pi f t + phase)
    double amplitude_v = 0.0;   // peak volts
};

struct DemodConfig {
    double search_window_hz = 5.0;   // carrier search half-width around nominal
    double dominance_ratio = 8.0;    // peak / median required in the window
    double lp_ratio = 0.4;           // low-pass cutoff = lp_ratio * env_rate
    int lp_order = 4;
    int image_iterations = 12;
    double trim_seconds = 0.25;      // discarded at each end after filtering
};

// Dominant spectral peak near nominal_fc refined by parabolic interpolation,
// then amplitude/phase/frequency polished by least squares.
CarrierEstimate estimate_carrier(const SampledSignal& signal, double nominal_fc_hz,
                                 const DemodConfig& cfg = {});

// Envelope in RMS-equivalent volts, decimated to env_rate, transient-trimmed.
SampledSignal demodulate(const SampledSignal& signal, const CarrierEstimate& carrier,
                         double env_rate_hz, const DemodConfig& cfg = {});

}  // namespace vfloc

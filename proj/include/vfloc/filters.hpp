#pragma once

// Time-domain filtering: Butterworth biquad cascades, zero-phase two-pass
// application, and sliding order-statistic filters.

#include <cstddef>
#include <vector>

namespace vfloc {

// Direct-form biquad, normalized so a0 == 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

// Butterworth low-pass of even order as a cascade of order/2 sections.
[[nodiscard]] std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs_hz);

// Band-stop centred on f0 with quality factor q.
[[nodiscard]] Biquad notch(double f0_hz, double q, double fs_hz);

// Single forward pass through a biquad cascade.
[[nodiscard]] std::vector<double> filter_forward(const std::vector<Biquad>& cascade,
                                                 const std::vector<double>& x);

// Forward-backward pass (zero phase). Edges are odd-reflected by pad samples
// before filtering to suppress startup transients.
[[nodiscard]] std::vector<double> filtfilt(const std::vector<Biquad>& cascade,
                                           const std::vector<double>& x,
                                           std::size_t pad);

// Sliding-window median with centred window (width forced odd, edges clamped).
[[nodiscard]] std::vector<double> moving_median(const std::vector<double>& x, std::size_t width);

// Sliding-window maximum with centred window (width forced odd, edges clamped).
[[nodiscard]] std::vector<double> moving_max(const std::vector<double>& x, std::size_t width);

}  // namespace vfloc

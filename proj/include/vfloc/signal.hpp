#pragma once

// Uniformly sampled real-valued waveform plus small stats helpers used
// throughout the pipeline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vfloc {

enum class Unit { Volt, Dimensionless };

struct SampledSignal {
    std::vector<double> samples;
    double sample_rate = 0.0;  // Hz
    Unit unit = Unit::Volt;
    double start_time = 0.0;  // s

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    [[nodiscard]] bool empty() const { return samples.empty(); }
    [[nodiscard]] double duration() const {
        return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
    [[nodiscard]] double nyquist() const { return sample_rate / 2.0; }

    void validate() const {
        if (sample_rate <= 0.0) throw std::invalid_argument("sample_rate must be > 0");
        for (double v : samples) {
            if (!std::isfinite(v)) throw std::invalid_argument("signal contains non-finite value");
        }
    }
};

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double rms(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline double peak_to_peak(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

// Median of a copy; the input is left untouched.
inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1, v.end());
    return 0.5 * (v[mid - 1] + hi);
}

// Median absolute deviation about the median (unscaled).
inline double mad(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double med = median(v);
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
    return median(std::move(dev));
}

}  // namespace vfloc

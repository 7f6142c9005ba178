#include "vfloc/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vfloc/errors.hpp"
#include "vfloc/fft.hpp"

namespace vfloc {

namespace {

Spectrum spectrum_impl(const SampledSignal& signal, std::size_t fft_len) {
    const std::size_t n = signal.size();
    if (n == 0) throw EmptySignal("magnitude_spectrum: empty signal");

    const double mu = mean(signal.samples);
    const std::vector<double> win = hann_window(n);
    double win_sum = 0.0;
    for (double w : win) win_sum += w;

    std::vector<cplx> buf(fft_len, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) buf[i] = cplx((signal.samples[i] - mu) * win[i], 0.0);
    buf = dft(buf, false);

    Spectrum out;
    out.bin_hz = signal.sample_rate / static_cast<double>(fft_len);
    const std::size_t half = fft_len / 2 + 1;
    out.magnitude.resize(half);
    const double scale = 2.0 / win_sum;  // sinusoid of amplitude A peaks near A
    for (std::size_t k = 0; k < half; ++k) out.magnitude[k] = std::abs(buf[k]) * scale;
    return out;
}

}  // namespace

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n - 1));
    }
    return w;
}

Spectrum magnitude_spectrum(const SampledSignal& signal) {
    return spectrum_impl(signal, signal.size());
}

Spectrum magnitude_spectrum_padded(const SampledSignal& signal, int pad_factor) {
    if (pad_factor < 1) throw std::invalid_argument("pad_factor must be >= 1");
    const std::size_t fft_len = next_pow2(signal.size()) * static_cast<std::size_t>(pad_factor);
    return spectrum_impl(signal, fft_len);
}

double refine_peak(const Spectrum& spec, std::size_t bin) {
    const std::size_t n = spec.size();
    if (bin == 0 || bin + 1 >= n) return spec.frequency(bin);
    const double eps = 1e-300;
    const double l = std::log(spec.magnitude[bin - 1] + eps);
    const double c = std::log(spec.magnitude[bin] + eps);
    const double r = std::log(spec.magnitude[bin + 1] + eps);
    const double denom = l - 2.0 * c + r;
    if (denom >= 0.0 || !std::isfinite(denom)) return spec.frequency(bin);
    double delta = 0.5 * (l - r) / denom;
    if (delta > 0.5) delta = 0.5;
    if (delta < -0.5) delta = -0.5;
    return (static_cast<double>(bin) + delta) * spec.bin_hz;
}

std::optional<std::size_t> peak_bin_in_range(const Spectrum& spec, std::size_t lo,
                                             std::size_t hi) {
    if (spec.magnitude.empty()) return std::nullopt;
    hi = std::min(hi, spec.size() - 1);
    if (lo > hi) return std::nullopt;
    std::size_t best = lo;
    for (std::size_t k = lo + 1; k <= hi; ++k) {
        if (spec.magnitude[k] > spec.magnitude[best]) best = k;
    }
    return best;
}

}  // namespace vfloc

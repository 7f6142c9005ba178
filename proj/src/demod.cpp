#include "vfloc/demod.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vfloc/errors.hpp"
#include "vfloc/fft.hpp"
#include "vfloc/filters.hpp"
#include "vfloc/spectrum.hpp"

namespace vfloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SinusoidFit {
    double amplitude = 0.0;
    double phase = 0.0;
    double energy = 0.0;  // squared projection, the concentrated LS objective
};

// Least-squares fit of a*cos(wt) + b*sin(wt) at fixed frequency.
SinusoidFit fit_sinusoid(const std::vector<double>& x, double f_hz, double fs_hz) {
    const double w = kTwoPi * f_hz / fs_hz;
    double cc = 0.0, cs = 0.0, ss = 0.0, xc = 0.0, xs = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ph = w * static_cast<double>(i);
        const double c = std::cos(ph);
        const double s = std::sin(ph);
        cc += c * c;
        cs += c * s;
        ss += s * s;
        xc += x[i] * c;
        xs += x[i] * s;
    }
    const double det = cc * ss - cs * cs;
    SinusoidFit fit;
    if (std::abs(det) < 1e-12) return fit;
    const double a = (xc * ss - xs * cs) / det;
    const double b = (xs * cc - xc * cs) / det;
    fit.amplitude = std::hypot(a, b);
    fit.phase = std::atan2(-b, a);  // x ~ A cos(wt + phase)
    fit.energy = a * xc + b * xs;
    return fit;
}

}  // namespace

CarrierEstimate estimate_carrier(const SampledSignal& signal, double nominal_fc_hz,
                                 const DemodConfig& cfg) {
    if (nominal_fc_hz <= 0.0) throw std::invalid_argument("nominal carrier must be > 0");
    const double fs = signal.sample_rate;
    if (signal.duration() * nominal_fc_hz < 10.0)
        throw SignalTooShort("need at least 10 carrier periods");

    const Spectrum spec = magnitude_spectrum_padded(signal, 2);
    const double lo_hz = std::max(0.0, nominal_fc_hz - cfg.search_window_hz);
    const double hi_hz = std::min(fs / 2.0, nominal_fc_hz + cfg.search_window_hz);
    const std::size_t lo = static_cast<std::size_t>(std::ceil(lo_hz / spec.bin_hz));
    const std::size_t hi = static_cast<std::size_t>(std::floor(hi_hz / spec.bin_hz));
    const auto peak = peak_bin_in_range(spec, std::max<std::size_t>(lo, 1), hi);
    if (!peak) throw NoCarrierFound("no spectral bins in carrier search window");

    std::vector<double> window_mags(spec.magnitude.begin() + static_cast<std::ptrdiff_t>(lo),
                                    spec.magnitude.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    const double med = median(window_mags);
    if (spec.magnitude[*peak] < cfg.dominance_ratio * std::max(med, 1e-12))
        throw NoCarrierFound("no dominant peak near nominal carrier");

    double f = refine_peak(spec, *peak);

    // polish frequency on the concentrated LS objective (golden section)
    const double half = spec.bin_hz;
    double a = f - half, b = f + half;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double e1 = fit_sinusoid(signal.samples, x1, fs).energy;
    double e2 = fit_sinusoid(signal.samples, x2, fs).energy;
    for (int it = 0; it < 40; ++it) {
        if (e1 < e2) {
            a = x1;
            x1 = x2;
            e1 = e2;
            x2 = a + gr * (b - a);
            e2 = fit_sinusoid(signal.samples, x2, fs).energy;
        } else {
            b = x2;
            x2 = x1;
            e2 = e1;
            x1 = b - gr * (b - a);
            e1 = fit_sinusoid(signal.samples, x1, fs).energy;
        }
    }
    f = 0.5 * (a + b);
    const SinusoidFit fit = fit_sinusoid(signal.samples, f, fs);

    CarrierEstimate est;
    est.frequency_hz = f;
    est.phase_rad = fit.phase;
    est.amplitude_v = fit.amplitude;
    if (est.amplitude_v <= 0.0) throw NoCarrierFound("carrier fit degenerate");
    return est;
}

SampledSignal demodulate(const SampledSignal& signal, const CarrierEstimate& carrier,
                         double env_rate_hz, const DemodConfig& cfg) {
    const double fs = signal.sample_rate;
    if (env_rate_hz <= 0.0 || env_rate_hz >= fs / 2.0)
        throw InvalidRate("env_rate must lie inside (0, fs/2)");
    const std::size_t decim = static_cast<std::size_t>(std::llround(fs / env_rate_hz));
    if (decim < 1 || std::abs(fs / static_cast<double>(decim) - env_rate_hz) > 1e-6)
        throw InvalidRate("env_rate must divide the sample rate");

    const std::size_t n = signal.size();
    const double f_lp = std::min(cfg.lp_ratio * env_rate_hz, 0.45 * fs);
    const std::vector<Biquad> lp = butterworth_lowpass(cfg.lp_order, f_lp, fs);
    const std::size_t lp_pad = static_cast<std::size_t>(8.0 * fs / f_lp) + 64;
    auto smooth = [&](const std::vector<double>& x) { return filtfilt(lp, x, lp_pad); };

    // u^2 = C^2 (1 + cos(2 theta)). The bulk of the image term is the known
    // carrier power riding on cos(2 theta); removing it analytically keeps
    // the filters' edge transients at modulation scale. The fixed point below
    // is exact for any constant split K.
    const double f_image = 2.0 * carrier.frequency_hz;
    const double bulk = 0.5 * carrier.amplitude_v * carrier.amplitude_v;
    std::vector<double> mix(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        mix[i] = std::cos(kTwoPi * f_image * t + 2.0 * carrier.phase_rad);
        sq[i] = signal.samples[i] * signal.samples[i] - bulk * mix[i];
    }
    const std::vector<double> base = smooth(sq);

    // remaining image: LP[(C^2 - K) cos(2 theta)]; subtract iteratively
    std::vector<double> est = base;
    std::vector<double> tmp(n);
    for (int it = 0; it < cfg.image_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) tmp[i] = (est[i] - bulk) * mix[i];
        tmp = smooth(tmp);
        for (std::size_t i = 0; i < n; ++i) est[i] = base[i] - tmp[i];
    }

    SampledSignal env;
    env.sample_rate = fs / static_cast<double>(decim);
    env.unit = Unit::Volt;
    env.samples.reserve(n / decim + 1);
    for (std::size_t i = 0; i < n; i += decim)
        env.samples.push_back(std::sqrt(std::max(est[i], 0.0)));

    const std::size_t trim =
        static_cast<std::size_t>(std::llround(cfg.trim_seconds * env.sample_rate));
    if (env.size() > 2 * trim + 16) {
        env.samples.erase(env.samples.begin(),
                          env.samples.begin() + static_cast<std::ptrdiff_t>(trim));
        env.samples.resize(env.samples.size() - trim);
        env.start_time = signal.start_time + static_cast<double>(trim) / env.sample_rate;
    }
    return env;
}

}  // namespace vfloc

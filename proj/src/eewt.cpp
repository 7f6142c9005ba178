#include "vfloc/eewt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "vfloc/errors.hpp"
#include "vfloc/filters.hpp"

namespace vfloc {

namespace {

constexpr double kPi = std::numbers::pi;

double meyer_beta(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x);
}

struct PeakCandidate {
    std::size_t bin = 0;
    double value = 0.0;
};

// Local maxima of the moving-maximum envelope; plateau runs count once, at
// the raw-spectrum argmax inside the run.
std::vector<PeakCandidate> smoothed_maxima(const Spectrum& spec, std::size_t width) {
    const std::vector<double>& mag = spec.magnitude;
    const std::size_t n = mag.size();
    std::vector<PeakCandidate> out;
    if (n < 3) return out;
    const std::vector<double> env = moving_max(mag, width);

    std::size_t run_start = 1;
    for (std::size_t i = 2; i <= n; ++i) {
        if (i < n && env[i] == env[run_start]) continue;
        const std::size_t run_end = i - 1;  // inclusive
        const bool left_ok = run_start > 1 && env[run_start - 1] < env[run_start];
        const bool right_ok = run_end + 1 < n && env[run_end + 1] < env[run_end];
        if (left_ok && right_ok) {
            std::size_t best = run_start;
            for (std::size_t k = run_start + 1; k <= run_end; ++k)
                if (mag[k] > mag[best]) best = k;
            out.push_back({best, env[run_start]});
        }
        run_start = i;
    }
    return out;
}

double rise(double f, double boundary, double tau) {
    if (f <= boundary - tau) return 0.0;
    if (f >= boundary + tau) return 1.0;
    const double s = std::sin(kPi / 2.0 * meyer_beta((f - (boundary - tau)) / (2.0 * tau)));
    return s * s;
}

void validate_segmentation(const SpectrumSegmentation& seg, double nyquist) {
    if (seg.n_bands < 1) throw InvalidSegmentation("n_bands must be >= 1");
    if (static_cast<int>(seg.boundaries_hz.size()) != seg.n_bands - 1)
        throw InvalidSegmentation("boundary count must be n_bands - 1");
    double prev = 0.0;
    for (double b : seg.boundaries_hz) {
        if (!(b > prev)) throw InvalidSegmentation("boundaries must be strictly increasing");
        if (!(b > 0.0 && b < nyquist))
            throw InvalidSegmentation("boundaries must lie strictly inside (0, nyquist)");
        prev = b;
    }
}

struct LineInfo {
    double freq = 0.0;
    double energy = 0.0;
};

std::vector<LineInfo> extract_lines(const Spectrum& spec, double floor) {
    const std::vector<double>& mag = spec.magnitude;
    const std::size_t n = mag.size();
    std::vector<LineInfo> lines;
    for (std::size_t k = 2; k + 2 < n; ++k) {
        if (mag[k] < floor) continue;
        if (mag[k] >= mag[k - 1] && mag[k] > mag[k + 1] && mag[k] > mag[k - 2] &&
            mag[k] > mag[k + 2]) {
            double e = 0.0;
            for (std::size_t j = k - 2; j <= k + 2; ++j) e += mag[j] * mag[j];
            lines.push_back({refine_peak(spec, k), e});
        }
    }
    return lines;
}

}  // namespace

SpectrumSegmentation segment_spectrum(const Spectrum& spectrum, int n_bands,
                                      const SegmentationConfig& cfg) {
    if (n_bands < 1) throw std::invalid_argument("n_bands must be >= 1");
    const std::size_t n = spectrum.size();
    if (n < 2 * static_cast<std::size_t>(n_bands))
        throw std::invalid_argument("spectrum too short for requested band count");

    SpectrumSegmentation seg;
    seg.n_bands = n_bands;
    if (n_bands == 1) return seg;

    std::size_t width = static_cast<std::size_t>(
        std::max<double>(cfg.min_smooth_bins, std::round(cfg.smooth_hz / spectrum.bin_hz)));
    if (width % 2 == 0) ++width;

    std::vector<PeakCandidate> maxima = smoothed_maxima(spectrum, width);

    const std::vector<double> tail(spectrum.magnitude.begin() + 1, spectrum.magnitude.end());
    const double top = *std::max_element(tail.begin(), tail.end());
    const double floor = std::max(cfg.peak_floor_mult * median(tail), 1e-4 * top);
    std::erase_if(maxima, [&](const PeakCandidate& p) { return p.value < floor; });

    if (static_cast<int>(maxima.size()) < n_bands)
        throw NotEnoughPeaks(static_cast<int>(maxima.size()),
                             "only " + std::to_string(maxima.size()) + " spectral peaks found");

    std::sort(maxima.begin(), maxima.end(), [](const PeakCandidate& a, const PeakCandidate& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.bin < b.bin;
    });
    maxima.resize(static_cast<std::size_t>(n_bands));
    std::sort(maxima.begin(), maxima.end(),
              [](const PeakCandidate& a, const PeakCandidate& b) { return a.bin < b.bin; });

    for (std::size_t i = 0; i + 1 < maxima.size(); ++i) {
        const std::size_t lo = maxima[i].bin;
        const std::size_t hi = maxima[i + 1].bin;
        if (hi <= lo + 1) {
            seg.boundaries_hz.push_back((static_cast<double>(lo) + 0.5) * spectrum.bin_hz);
            continue;
        }
        std::size_t best = lo + 1;
        for (std::size_t k = lo + 2; k < hi; ++k)
            if (spectrum.magnitude[k] < spectrum.magnitude[best]) best = k;
        seg.boundaries_hz.push_back(spectrum.frequency(best));
    }
    return seg;
}

DecompositionPlan prepare_decomposition(const SampledSignal& envelope) {
    if (envelope.empty()) throw EmptySignal("decompose: empty envelope");
    DecompositionPlan plan;
    plan.length = envelope.size();
    plan.sample_rate = envelope.sample_rate;
    plan.start_time = envelope.start_time;
    plan.mean = mean(envelope.samples);

    const std::size_t padded = next_pow2(2 * plan.length);
    std::vector<cplx> buf(padded, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < plan.length; ++i)
        buf[i] = cplx(envelope.samples[i] - plan.mean, 0.0);
    for (std::size_t i = 0; i < plan.length; ++i)
        buf[plan.length + i] = cplx(envelope.samples[plan.length - 1 - i] - plan.mean, 0.0);
    fft_pow2(buf, false);
    plan.spectrum = std::move(buf);
    return plan;
}

std::vector<Component> decompose(const SampledSignal& envelope, const SpectrumSegmentation& seg,
                                 const EwtConfig& cfg) {
    return decompose_with_plan(prepare_decomposition(envelope), seg, cfg);
}

std::vector<Component> decompose_with_plan(const DecompositionPlan& plan,
                                           const SpectrumSegmentation& seg,
                                           const EwtConfig& cfg) {
    const double nyquist = plan.sample_rate / 2.0;
    validate_segmentation(seg, nyquist);

    const std::vector<double>& bounds = seg.boundaries_hz;
    const std::size_t nb = bounds.size();
    const std::size_t m = plan.spectrum.size();
    const double df = plan.sample_rate / static_cast<double>(m);

    // transition half-width per boundary from the neighbour gaps
    std::vector<double> tau(nb, 0.0);
    if (nb > 0) {
        std::vector<double> ratio(nb);
        for (std::size_t i = 0; i < nb; ++i) {
            const double next = (i + 1 < nb) ? bounds[i + 1] : nyquist;
            ratio[i] = (next - bounds[i]) / (next + bounds[i]);
        }
        for (std::size_t i = 0; i < nb; ++i) {
            double g = ratio[i];
            if (i > 0) g = std::min(g, ratio[i - 1]);
            g = std::min(g, cfg.gamma_max);
            if (g <= 0.0) throw InvalidSegmentation("degenerate boundary spacing");
            tau[i] = g * bounds[i];
        }
    }

    std::vector<Component> out(nb + 1);
    std::vector<cplx> band(m);
    for (std::size_t b = 0; b <= nb; ++b) {
        for (std::size_t k = 0; k < m; ++k) {
            const double f = static_cast<double>(std::min(k, m - k)) * df;
            const double r_prev = (b == 0) ? 1.0 : rise(f, bounds[b - 1], tau[b - 1]);
            const double r_cur = (b == nb) ? 0.0 : rise(f, bounds[b], tau[b]);
            band[k] = plan.spectrum[k] * (r_prev - r_cur);
        }
        fft_pow2(band, true);

        Component& comp = out[b];
        comp.band_index = static_cast<int>(b);
        comp.f_low_hz = (b == 0) ? 0.0 : bounds[b - 1];
        comp.f_high_hz = (b == nb) ? nyquist : bounds[b];
        comp.signal.sample_rate = plan.sample_rate;
        comp.signal.start_time = plan.start_time;
        comp.signal.unit = Unit::Volt;
        comp.signal.samples.resize(plan.length);
        const double offset = (b == 0) ? plan.mean : 0.0;
        for (std::size_t i = 0; i < plan.length; ++i)
            comp.signal.samples[i] = band[i].real() + offset;
    }
    return out;
}

RegularizedComponent regularize(const Component& component, const RegularizeConfig& cfg) {
    const std::vector<double>& x = component.signal.samples;
    const std::size_t n = x.size();
    if (n < 16) throw SignalTooShort("regularize: need at least 16 samples");
    const double fs = component.signal.sample_rate;

    // Window must stay shorter than the plateaus the band can carry.
    double w_s = cfg.median_window_s;
    if (component.f_low_hz > 0.0) w_s = std::min(w_s, 0.1 / component.f_low_hz);
    std::size_t w = static_cast<std::size_t>(std::ceil(w_s * fs));
    w = std::clamp<std::size_t>(w | 1u, 3, (n / 4) | 1u);
    const std::vector<double> s = moving_median(x, w);

    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = s[i + 1] - s[i];

    // noise scale from the diff MAD; steps are rare so the median ignores them
    const double sigma = 1.4826 * mad(d) / std::numbers::sqrt2;
    const double theta_abs = cfg.theta_abs_mult * sigma;
    const double p2p = peak_to_peak(s);
    const double theta = std::max(theta_abs, cfg.theta_rel * p2p);

    RegularizedComponent reg;
    reg.theta_abs = theta_abs;
    reg.step_signal.sample_rate = fs;
    reg.step_signal.start_time = component.signal.start_time;
    reg.step_signal.unit = component.signal.unit;
    reg.step_signal.samples.resize(n);

    if (p2p <= std::max(1e-12, 6.0 * sigma)) {
        const double level = median(x);
        std::fill(reg.step_signal.samples.begin(), reg.step_signal.samples.end(), level);
        reg.plateau_levels.push_back(level);
        return reg;
    }

    // change points: same-sign runs of |diff| above threshold; opposite-sign
    // runs stay separate so fast toggles keep both edges
    std::vector<std::size_t> change_at;
    {
        struct Run {
            std::size_t best;
            std::size_t last;
            int sign;
        };
        std::vector<Run> runs;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (std::abs(d[i]) <= theta) continue;
            const int sign = d[i] > 0.0 ? 1 : -1;
            if (!runs.empty() && runs.back().sign == sign && i - runs.back().last <= w) {
                Run& r = runs.back();
                if (std::abs(d[i]) > std::abs(d[r.best])) r.best = i;
                r.last = i;
            } else {
                runs.push_back({i, i, sign});
            }
        }
        for (const Run& r : runs) change_at.push_back(r.best);
    }

    if (change_at.empty()) {
        // smooth oscillation: two-level snap around the midline with hysteresis
        const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
        const double mid = 0.5 * (*lo_it + *hi_it);
        const double hys = cfg.binarize_hysteresis * p2p;
        int state = s[0] > mid ? 1 : 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (state == 0 && s[i] > mid + hys) {
                state = 1;
                change_at.push_back(i - 1);
            } else if (state == 1 && s[i] < mid - hys) {
                state = 0;
                change_at.push_back(i - 1);
            }
        }
        if (change_at.empty()) {
            const double level = median(x);
            std::fill(reg.step_signal.samples.begin(), reg.step_signal.samples.end(), level);
            reg.plateau_levels.push_back(level);
            return reg;
        }
    }

    // collapse plateaus to their medians, guarding the transition smear
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // [start, end] inclusive
    std::size_t start = 0;
    for (std::size_t c : change_at) {
        spans.emplace_back(start, c);
        start = c + 1;
    }
    spans.emplace_back(start, n - 1);

    const std::size_t guard = w / 2;
    for (const auto& [a, b] : spans) {
        std::size_t ga = a, gb = b;
        if (b - a > 2 * guard + 2) {
            ga = a + guard;
            gb = b - guard;
        }
        std::vector<double> seg(x.begin() + static_cast<std::ptrdiff_t>(ga),
                                x.begin() + static_cast<std::ptrdiff_t>(gb) + 1);
        reg.plateau_levels.push_back(median(std::move(seg)));
    }
    for (std::size_t p = 0; p < spans.size(); ++p) {
        for (std::size_t i = spans[p].first; i <= spans[p].second; ++i)
            reg.step_signal.samples[i] = reg.plateau_levels[p];
    }
    reg.changes.reserve(spans.size() - 1);
    for (std::size_t p = 0; p + 1 < spans.size(); ++p) {
        ChangeEvent ev;
        ev.time_s = component.signal.start_time +
                    static_cast<double>(spans[p].second) / fs;
        ev.amplitude_v = reg.plateau_levels[p + 1] - reg.plateau_levels[p];
        reg.changes.push_back(ev);
    }
    return reg;
}

std::vector<LeakageBand> leakage_diagnostic(const SpectrumSegmentation& seg,
                                            const Spectrum& spectrum, const LeakageConfig& cfg) {
    const double nyquist = spectrum.max_frequency();
    validate_segmentation(seg, nyquist + spectrum.bin_hz);

    const std::vector<double> tail(spectrum.magnitude.begin() + 1, spectrum.magnitude.end());
    const double floor = cfg.line_floor_mult * std::max(median(tail), 1e-15);
    const std::vector<LineInfo> lines = extract_lines(spectrum, floor);

    const int nb = seg.n_bands;
    auto band_of = [&](double f) {
        int b = 0;
        while (b < nb - 1 && f >= seg.boundaries_hz[static_cast<std::size_t>(b)]) ++b;
        return b;
    };

    // dominant line per band
    std::vector<double> dominant(static_cast<std::size_t>(nb), 0.0);
    std::vector<double> dominant_e(static_cast<std::size_t>(nb), 0.0);
    for (const LineInfo& ln : lines) {
        const int b = band_of(ln.freq);
        if (ln.energy > dominant_e[static_cast<std::size_t>(b)]) {
            dominant_e[static_cast<std::size_t>(b)] = ln.energy;
            dominant[static_cast<std::size_t>(b)] = ln.freq;
        }
    }

    // a band whose dominant line is an integer multiple of a lower band's
    // dominant line belongs to that train
    const double tol = cfg.comb_tol_bins * spectrum.bin_hz;
    std::vector<double> root = dominant;
    for (int b = 0; b < nb; ++b) {
        if (dominant[static_cast<std::size_t>(b)] <= 0.0) continue;
        for (int a = 0; a < nb; ++a) {
            const double ga = dominant[static_cast<std::size_t>(a)];
            if (a == b || ga <= 0.0 || ga >= dominant[static_cast<std::size_t>(b)]) continue;
            const double ratio = dominant[static_cast<std::size_t>(b)] / ga;
            const double k = std::round(ratio);
            if (k >= 2.0 && std::abs(dominant[static_cast<std::size_t>(b)] - k * ga) <= tol) {
                if (root[static_cast<std::size_t>(b)] > ga) root[static_cast<std::size_t>(b)] = ga;
            }
        }
    }

    // distinct roots across bands
    std::vector<double> roots;
    for (int b = 0; b < nb; ++b) {
        const double r = root[static_cast<std::size_t>(b)];
        if (r <= 0.0) continue;
        bool seen = false;
        for (double q : roots) seen = seen || std::abs(q - r) <= tol;
        if (!seen) roots.push_back(r);
    }

    std::vector<double> foreign_e(static_cast<std::size_t>(nb), 0.0);
    std::vector<double> total_e(static_cast<std::size_t>(nb), 0.0);
    for (const LineInfo& ln : lines) {
        const int b = band_of(ln.freq);
        total_e[static_cast<std::size_t>(b)] += ln.energy;
        // best comb explanation for this line
        double best_err = tol;
        double best_root = -1.0;
        for (double r : roots) {
            const double k = std::round(ln.freq / r);
            if (k < 1.0) continue;
            const double err = std::abs(ln.freq - k * r);
            if (err <= best_err) {
                best_err = err;
                best_root = r;
            }
        }
        if (best_root > 0.0 && band_of(best_root) != b) {
            foreign_e[static_cast<std::size_t>(b)] += ln.energy;
        }
    }

    std::vector<LeakageBand> out(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) {
        LeakageBand& lb = out[static_cast<std::size_t>(b)];
        lb.band_index = b;
        lb.fundamental_hz = dominant[static_cast<std::size_t>(b)];
        lb.ratio = total_e[static_cast<std::size_t>(b)] > 0.0
                       ? foreign_e[static_cast<std::size_t>(b)] / total_e[static_cast<std::size_t>(b)]
                       : 0.0;
        lb.flagged = lb.ratio > cfg.flag_threshold;
    }
    return out;
}

}  // namespace vfloc

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vfloc/eewt.hpp"
#include "vfloc/errors.hpp"

using namespace vfloc;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SampledSignal make_signal(double fs, double dur) {
    SampledSignal s;
    s.sample_rate = fs;
    s.samples.assign(static_cast<std::size_t>(dur * fs), 0.0);
    return s;
}

void add_tone(SampledSignal& s, double f, double amp, double phase = 0.0) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = static_cast<double>(i) / s.sample_rate;
        s.samples[i] += amp * std::sin(kTwoPi * f * t + phase);
    }
}

void add_rectangle(SampledSignal& s, double f, double amp, double duty) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = static_cast<double>(i) / s.sample_rate;
        const double cyc = f * t - std::floor(f * t);
        s.samples[i] += cyc < duty ? amp : 0.0;
    }
}

double relative_rms_error(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

double band_rms(const SampledSignal& s, double f_lo, double f_hi) {
    const Spectrum spec = magnitude_spectrum(s);
    double acc = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
        const double f = spec.frequency(k);
        if (f >= f_lo && f <= f_hi) acc += spec.magnitude[k] * spec.magnitude[k];
    }
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("spectrum of a constant is zero after mean removal") {
    SampledSignal s = make_signal(1250.0, 10.0);
    std::fill(s.samples.begin(), s.samples.end(), 230.0);
    const Spectrum spec = magnitude_spectrum(s);
    for (double m : spec.magnitude) CHECK(m < 1e-9);
}

TEST_CASE("spectrum recovers a tone at the right bin") {
    SampledSignal s = make_signal(1250.0, 60.0);
    add_tone(s, 1.7, 2.0);
    const Spectrum spec = magnitude_spectrum(s);
    const auto peak = peak_bin_in_range(spec, 1, spec.size() - 1);
    REQUIRE(peak.has_value());
    CHECK(std::abs(spec.frequency(*peak) - 1.7) <= spec.bin_hz);
    CHECK(spec.magnitude[*peak] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("asymmetric rectangle shows the Fourier-series line pattern") {
    SampledSignal s = make_signal(1250.0, 60.0);
    const double duty = 0.35, amp = 4.0;
    add_rectangle(s, 0.25, amp, duty);
    const Spectrum spec = magnitude_spectrum(s);

    auto line_mag = [&](double f) {
        const std::size_t bin = static_cast<std::size_t>(std::llround(f / spec.bin_hz));
        double best = 0.0;
        for (std::size_t k = bin - 2; k <= bin + 2; ++k) best = std::max(best, spec.magnitude[k]);
        return best;
    };
    auto expected = [&](int k) {
        return amp * 2.0 / (kTwoPi / 2.0 * k) * std::abs(std::sin(std::numbers::pi * k * duty));
    };
    for (int k = 1; k <= 4; ++k) {
        CHECK(line_mag(0.25 * k) == doctest::Approx(expected(k)).epsilon(0.08));
    }
}

TEST_CASE("two tones segment into two bands with the boundary in the gap") {
    SampledSignal s = make_signal(1250.0, 60.0);
    add_tone(s, 0.25, 2.0);
    add_tone(s, 1.7, 1.5);
    const Spectrum spec = magnitude_spectrum(s);

    const SpectrumSegmentation one = segment_spectrum(spec, 1);
    CHECK(one.boundaries_hz.empty());

    const SpectrumSegmentation seg = segment_spectrum(spec, 2);
    REQUIRE(seg.boundaries_hz.size() == 1);
    CHECK(seg.boundaries_hz[0] > 0.25);
    CHECK(seg.boundaries_hz[0] < 1.7);

    CHECK_THROWS_AS(segment_spectrum(spec, 40), NotEnoughPeaks);
}

TEST_CASE("segmentation boundaries are strictly increasing and interior") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> fdist(0.3, 500.0);
    for (int trial = 0; trial < 20; ++trial) {
        SampledSignal s = make_signal(1250.0, 40.0);
        const int tones = 3 + static_cast<int>(rng() % 4);
        for (int t = 0; t < tones; ++t) add_tone(s, fdist(rng), 0.5 + (t % 3));
        const Spectrum spec = magnitude_spectrum(s);
        for (int n = 2; n <= tones; ++n) {
            SpectrumSegmentation seg;
            try {
                seg = segment_spectrum(spec, n);
            } catch (const NotEnoughPeaks&) {
                continue;  // random tones may collide
            }
            double prev = 0.0;
            for (double b : seg.boundaries_hz) {
                CHECK(b > prev);
                CHECK(b > 0.0);
                CHECK(b < s.nyquist());
                prev = b;
            }
        }
    }
}

TEST_CASE("decompose with one band is the identity") {
    SampledSignal s = make_signal(1250.0, 20.0);
    add_tone(s, 0.7, 2.0);
    add_rectangle(s, 2.5, 1.0, 0.35);
    for (auto& v : s.samples) v += 230.0;

    SpectrumSegmentation seg;
    seg.n_bands = 1;
    const auto comps = decompose(s, seg);
    REQUIRE(comps.size() == 1);
    CHECK(relative_rms_error(comps[0].signal.samples, s.samples) < 1e-9);
}

TEST_CASE("well separated tones land in their own bands") {
    SampledSignal s = make_signal(1250.0, 60.0);
    add_tone(s, 0.25, 2.0);
    add_tone(s, 11.0, 1.5);

    SpectrumSegmentation seg = segment_spectrum(magnitude_spectrum(s), 2);
    const auto comps = decompose(s, seg);
    REQUIRE(comps.size() == 2);

    // each component carries one tone; the other tone is 40 dB down
    const double in0 = band_rms(comps[0].signal, 0.2, 0.3);
    const double leak0 = band_rms(comps[0].signal, 10.5, 11.5);
    const double in1 = band_rms(comps[1].signal, 10.5, 11.5);
    const double leak1 = band_rms(comps[1].signal, 0.2, 0.3);
    CHECK(leak0 < in0 * 0.01);
    CHECK(leak1 < in1 * 0.01);
}

TEST_CASE("components reconstruct the envelope for random segmentations") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> fdist(0.05, 600.0);
    std::uniform_real_distribution<double> adist(0.1, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        SampledSignal s = make_signal(1250.0, 8.0);
        for (int t = 0; t < 5; ++t) add_tone(s, fdist(rng), adist(rng));
        for (auto& v : s.samples) v += 230.0;

        const int n_bands = 2 + static_cast<int>(rng() % 5);
        std::vector<double> bounds;
        for (int b = 0; b < n_bands - 1; ++b) bounds.push_back(fdist(rng));
        std::sort(bounds.begin(), bounds.end());
        bool distinct = true;
        for (std::size_t i = 1; i < bounds.size(); ++i)
            distinct = distinct && bounds[i] - bounds[i - 1] > 1e-3;
        if (!distinct) continue;

        SpectrumSegmentation seg;
        seg.boundaries_hz = bounds;
        seg.n_bands = n_bands;
        const auto comps = decompose(s, seg);
        std::vector<double> sum(s.size(), 0.0);
        for (const Component& c : comps) {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += c.signal.samples[i];
        }
        CHECK(relative_rms_error(sum, s.samples) < 1e-6);
    }
}

TEST_CASE("invalid segmentations are rejected") {
    SampledSignal s = make_signal(1250.0, 5.0);
    add_tone(s, 1.0, 1.0);
    SpectrumSegmentation seg;
    seg.n_bands = 3;
    seg.boundaries_hz = {5.0, 4.0};
    CHECK_THROWS_AS(decompose(s, seg), InvalidSegmentation);
    seg.boundaries_hz = {5.0, 700.0};
    CHECK_THROWS_AS(decompose(s, seg), InvalidSegmentation);
    seg.boundaries_hz = {5.0};
    CHECK_THROWS_AS(decompose(s, seg), InvalidSegmentation);  // count mismatch
}

TEST_CASE("regularize recovers the plateaus of an ideal rectangle") {
    SampledSignal s = make_signal(1250.0, 60.0);
    add_rectangle(s, 0.25, 4.08, 0.5);
    Component c;
    c.signal = s;
    const RegularizedComponent reg = regularize(c);
    REQUIRE(reg.changes.size() == 29);
    for (const ChangeEvent& ev : reg.changes)
        CHECK(std::abs(ev.amplitude_v) == doctest::Approx(4.08).epsilon(0.005));
    for (double lvl : reg.plateau_levels) {
        const bool near0 = std::abs(lvl) < 0.02;
        const bool near4 = std::abs(lvl - 4.08) < 0.02;
        CHECK((near0 || near4));
    }
}

TEST_CASE("regularize of a constant yields one plateau and no changes") {
    SampledSignal s = make_signal(1250.0, 10.0);
    std::fill(s.samples.begin(), s.samples.end(), 230.0);
    Component c;
    c.signal = s;
    const RegularizedComponent reg = regularize(c);
    CHECK(reg.changes.empty());
    REQUIRE(reg.plateau_levels.size() == 1);
    CHECK(reg.plateau_levels[0] == doctest::Approx(230.0));
}

TEST_CASE("regularize tolerates measurement noise") {
    SampledSignal s = make_signal(1250.0, 60.0);
    add_rectangle(s, 0.25, 4.08, 0.5);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist(0.0, 0.1);
    for (auto& v : s.samples) v += dist(rng);
    Component c;
    c.signal = s;
    const RegularizedComponent reg = regularize(c);
    REQUIRE(!reg.changes.empty());
    double acc = 0.0;
    for (const ChangeEvent& ev : reg.changes) {
        CHECK(std::abs(ev.amplitude_v) == doctest::Approx(4.08).epsilon(0.04));
        acc += std::abs(ev.amplitude_v);
    }
    CHECK(acc / static_cast<double>(reg.changes.size()) == doctest::Approx(4.08).epsilon(0.01));
}

TEST_CASE("regularize is idempotent on its own output") {
    SampledSignal s = make_signal(1250.0, 30.0);
    add_rectangle(s, 0.7, 2.7, 0.35);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> dist(0.0, 0.05);
    for (auto& v : s.samples) v += dist(rng);
    Component c;
    c.signal = s;
    const RegularizedComponent first = regularize(c);

    Component again;
    again.signal = first.step_signal;
    const RegularizedComponent second = regularize(again);
    REQUIRE(second.plateau_levels.size() == first.plateau_levels.size());
    for (std::size_t i = 0; i < first.plateau_levels.size(); ++i) {
        CHECK(std::abs(second.plateau_levels[i] - first.plateau_levels[i]) <=
              std::max(first.theta_abs, 1e-9));
    }
}

TEST_CASE("smooth sinusoidal components binarize into a square wave") {
    SampledSignal s = make_signal(1250.0, 40.0);
    add_tone(s, 0.7, 1.0);
    Component c;
    c.signal = s;
    const RegularizedComponent reg = regularize(c);
    REQUIRE(reg.changes.size() >= 40);  // two per period over 28 periods
    double mean_abs = 0.0;
    for (const ChangeEvent& ev : reg.changes) mean_abs += std::abs(ev.amplitude_v);
    mean_abs /= static_cast<double>(reg.changes.size());
    CHECK(mean_abs > 1.0);
    CHECK(mean_abs < 1.8);
}

TEST_CASE("leakage is zero for cleanly separated non-harmonic tones") {
    SampledSignal s = make_signal(1250.0, 60.0);
    add_tone(s, 0.25, 2.0);
    add_tone(s, 1.7, 1.5);
    const Spectrum spec = magnitude_spectrum(s);
    const SpectrumSegmentation seg = segment_spectrum(spec, 2);
    const auto bands = leakage_diagnostic(seg, spec);
    REQUIRE(bands.size() == 2);
    for (const LeakageBand& b : bands) {
        CHECK(b.ratio < 0.05);
        CHECK(!b.flagged);
    }
}

TEST_CASE("a boundary through a harmonic train flags the polluted band") {
    // rectangle harmonics above the boundary land in the second band whose
    // nominal fundamental belongs to the rectangle's train
    SampledSignal s = make_signal(1250.0, 60.0);
    add_rectangle(s, 0.25, 4.0, 0.35);
    add_tone(s, 1.7, 0.8);
    const Spectrum spec = magnitude_spectrum(s);
    SpectrumSegmentation seg;
    seg.n_bands = 2;
    seg.boundaries_hz = {0.35};
    const auto bands = leakage_diagnostic(seg, spec);
    REQUIRE(bands.size() == 2);
    CHECK(bands[1].ratio > 0.2);
    CHECK(bands[1].flagged);
}

TEST_CASE("single band has no leakage") {
    SampledSignal s = make_signal(1250.0, 30.0);
    add_rectangle(s, 0.7, 3.0, 0.35);
    const Spectrum spec = magnitude_spectrum(s);
    SpectrumSegmentation seg;
    seg.n_bands = 1;
    const auto bands = leakage_diagnostic(seg, spec);
    REQUIRE(bands.size() == 1);
    CHECK(bands[0].ratio == 0.0);
}

TEST_CASE("full chain separates two distant sinusoids") {
    SampledSignal s = make_signal(1250.0, 60.0);
    add_tone(s, 0.4, 2.0);
    add_tone(s, 6.0, 1.2);
    for (auto& v : s.samples) v += 230.0;

    const Spectrum spec = magnitude_spectrum(s);
    const SpectrumSegmentation seg = segment_spectrum(spec, 2);
    const auto comps = decompose(s, seg);

    const double leak0 = band_rms(comps[0].signal, 5.5, 6.5);
    const double in0 = band_rms(comps[0].signal, 0.3, 0.5);
    const double leak1 = band_rms(comps[1].signal, 0.3, 0.5);
    const double in1 = band_rms(comps[1].signal, 5.5, 6.5);
    CHECK(leak0 < 0.01 * in0);
    CHECK(leak1 < 0.01 * in1);
}

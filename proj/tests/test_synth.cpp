#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vfloc/errors.hpp"
#include "vfloc/presets.hpp"
#include "vfloc/spectrum.hpp"
#include "vfloc/synth.hpp"

using namespace vfloc;

namespace {

SourceSpec rect(const std::string& node, double p_kw, double f, double duty, double phase = 0.0) {
    SourceSpec s;
    s.node = node;
    s.power_kw = p_kw;
    s.mod_frequency_hz = f;
    s.duty = duty;
    s.shape = ModShape::Rectangular;
    s.phase_rad = phase;
    return s;
}

}  // namespace

TEST_CASE("rectangular modulation: duty equals the on fraction") {
    const SourceSpec s = rect("P4", 3.0, 0.25, 0.5);
    const SampledSignal g = modulation_waveform(s, 1250.0, 60.0);
    CHECK(g.size() == 75000);
    CHECK(mean(g.samples) == doctest::Approx(0.5).epsilon(1e-3));

    int transitions = 0;
    for (std::size_t i = 1; i < g.size(); ++i)
        if (g.samples[i] != g.samples[i - 1]) ++transitions;
    CHECK(transitions == 29);  // 15 full periods, final edge lands at the window end

    const SampledSignal g2 = modulation_waveform(rect("P4", 3.0, 0.25, 0.2), 1250.0, 60.0);
    CHECK(mean(g2.samples) == doctest::Approx(0.2).epsilon(1e-2));
}

TEST_CASE("modulation is periodic within one sample") {
    const SourceSpec s = rect("P4", 3.0, 1.7, 0.35, 1.0);
    const double fs = 1250.0;
    const SampledSignal g = modulation_waveform(s, fs, 20.0);
    const std::size_t period = static_cast<std::size_t>(fs / 1.7);
    int mismatches = 0;
    for (std::size_t i = 0; i + period + 1 < g.size(); ++i) {
        const bool ok = g.samples[i] == g.samples[i + period] ||
                        g.samples[i] == g.samples[i + period + 1];
        if (!ok) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("sinusoidal modulation is a single spectral line") {
    SourceSpec s = rect("P4", 3.0, 1.7, 0.5);
    s.shape = ModShape::Sinusoidal;
    const SampledSignal g = modulation_waveform(s, 1250.0, 60.0);
    const Spectrum spec = magnitude_spectrum(g);
    const auto peak = peak_bin_in_range(spec, 1, spec.size() - 1);
    REQUIRE(peak.has_value());
    CHECK(spec.frequency(*peak) == doctest::Approx(1.7).epsilon(0.01));
    // all remaining energy at least 40 dB down
    double second = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
        if (k + 5 >= *peak && k <= *peak + 5) continue;
        second = std::max(second, spec.magnitude[k]);
    }
    CHECK(second < spec.magnitude[*peak] * 0.01);
}

TEST_CASE("sample rate guard") {
    CHECK_THROWS_AS(modulation_waveform(rect("P4", 3.0, 200.0, 0.5), 1250.0, 10.0),
                    SampleRateTooLow);
}

TEST_CASE("carrier without sources is a pure cosine at sqrt(2) U") {
    Scenario sc;
    sc.grid = grid_table1();
    sc.meters = {"P3"};
    sc.duration_s = 2.0;
    sc.noise_rms_v = 0.0;
    const SampledSignal u = synthesize_meter_voltage(sc, "P3");
    const double peak = *std::max_element(u.samples.begin(), u.samples.end());
    CHECK(peak == doctest::Approx(230.0 * std::numbers::sqrt2).epsilon(1e-4));
    // matches the analytic carrier sample by sample
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double t = static_cast<double>(i) / sc.sample_rate_hz;
        err = std::max(err, std::abs(u.samples[i] - 230.0 * std::numbers::sqrt2 *
                                                        std::cos(2.0 * std::numbers::pi * 50.0 * t)));
    }
    CHECK(err < 1e-9);
}

TEST_CASE("single source dips the envelope by the coupling amplitude") {
    Scenario sc;
    sc.grid = grid_table1();
    sc.meters = {"P3", "P4"};
    sc.duration_s = 20.0;
    sc.noise_rms_v = 0.0;
    sc.sources = {rect("P3", 3.0, 0.25, 0.5)};

    const SampledSignal env3 = analytic_envelope(sc, "P3", 1250.0);
    const SampledSignal env4 = analytic_envelope(sc, "P4", 1250.0);
    const auto [lo3, hi3] = std::minmax_element(env3.samples.begin(), env3.samples.end());
    const auto [lo4, hi4] = std::minmax_element(env4.samples.begin(), env4.samples.end());
    CHECK(*hi3 == doctest::Approx(230.0));
    CHECK(*lo3 == doctest::Approx(230.0 - 4.079).epsilon(1e-3));
    CHECK(*lo4 == doctest::Approx(230.0 - 2.083).epsilon(1e-3));
    CHECK(230.0 - *lo3 > 230.0 - *lo4);  // dip at the source exceeds the remote dip
}

TEST_CASE("per-source dip at its own node dominates every other meter") {
    const GridModel g = grid_table1();
    const std::vector<std::string> nodes{"P1", "P3", "P4", "P6"};
    for (const std::string& src : nodes) {
        const double di = 13.04;
        const double at_source = coupling_coefficient(g, src, src, di);
        for (const std::string& meter : nodes) {
            CHECK(coupling_coefficient(g, src, meter, di) <= at_source + 1e-12);
        }
    }
}

TEST_CASE("case presets have the advertised loads") {
    const GridModel g = grid_table1();

    const Scenario c1 = case_scenario("case1", g);
    REQUIRE(c1.sources.size() == 2);
    CHECK(c1.sources[0].node == "P4");
    CHECK(c1.sources[1].node == "P4");

    const Scenario c4 = case_scenario("case4", g);
    std::vector<double> freqs;
    for (const auto& s : c4.sources) freqs.push_back(s.mod_frequency_hz);
    std::sort(freqs.begin(), freqs.end());
    CHECK(freqs == std::vector<double>{8.8, 91.2, 108.8});

    const auto sig5 = run_case("case5", g);
    CHECK(sig5.size() == 4);
    for (const auto& [meter, s] : sig5) {
        (void)meter;
        CHECK(s.size() == 750000);
        CHECK(s.sample_rate == 12500.0);
    }

    CHECK_THROWS_AS(case_scenario("case9", g), UnknownCase);
}

TEST_CASE("synthesis is deterministic for a fixed seed") {
    Scenario sc = case_scenario("case2", grid_table1());
    sc.duration_s = 1.0;
    const SampledSignal a = synthesize_meter_voltage(sc, "P3");
    const SampledSignal b = synthesize_meter_voltage(sc, "P3");
    CHECK(a.samples == b.samples);
    sc.seed = 999;
    const SampledSignal c = synthesize_meter_voltage(sc, "P3");
    CHECK(a.samples != c.samples);
}

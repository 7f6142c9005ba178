#include "vfloc/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "vfloc/errors.hpp"
#include "vfloc/presets.hpp"

namespace vfloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_spec(const SourceSpec& spec) {
    if (spec.power_kw <= 0.0) throw std::invalid_argument("source power must be > 0");
    if (spec.mod_frequency_hz <= 0.0) throw std::invalid_argument("mod frequency must be > 0");
    if (spec.duty <= 0.0 || spec.duty >= 1.0) throw std::invalid_argument("duty must be in (0,1)");
}

// per-meter noise stream decoupled from meter ordering
unsigned long long meter_seed(unsigned long long base, const std::string& meter) {
    unsigned long long h = base ^ 0x9e3779b97f4a7c15ull;
    for (char c : meter) h = (h ^ static_cast<unsigned long long>(c)) * 0x100000001b3ull;
    return h;
}

}  // namespace

SampledSignal modulation_waveform(const SourceSpec& spec, double sample_rate_hz,
                                  double duration_s) {
    validate_spec(spec);
    if (sample_rate_hz < 8.0 * spec.mod_frequency_hz)
        throw SampleRateTooLow("sample rate below 8x modulation frequency");
    if (duration_s <= 0.0) throw std::invalid_argument("duration must be > 0");

    const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    SampledSignal out;
    out.sample_rate = sample_rate_hz;
    out.unit = Unit::Dimensionless;
    out.samples.resize(n);
    const double f = spec.mod_frequency_hz;
    const double phase_cycles = spec.phase_rad / kTwoPi;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        if (spec.shape == ModShape::Rectangular) {
            double cyc = f * t + phase_cycles;
            cyc -= std::floor(cyc);
            out.samples[i] = cyc < spec.duty ? 1.0 : 0.0;
        } else {
            out.samples[i] = 0.5 * (1.0 + std::sin(kTwoPi * f * t + spec.phase_rad));
        }
    }
    return out;
}

double load_current_step(const SourceSpec& spec, const GridModel& grid) {
    return spec.power_kw * 1e3 / grid.u_nominal();
}

SampledSignal analytic_envelope(const Scenario& scenario, const std::string& meter,
                                double sample_rate_hz) {
    if (!scenario.grid.has_node(meter)) throw UnknownNode("unknown meter node: " + meter);
    const std::size_t n =
        static_cast<std::size_t>(std::llround(scenario.duration_s * sample_rate_hz));
    SampledSignal env;
    env.sample_rate = sample_rate_hz;
    env.unit = Unit::Volt;
    env.samples.assign(n, scenario.grid.u_nominal());
    for (const SourceSpec& spec : scenario.sources) {
        const double du = coupling_coefficient(scenario.grid, spec.node, meter,
                                               load_current_step(spec, scenario.grid));
        const SampledSignal g = modulation_waveform(spec, sample_rate_hz, scenario.duration_s);
        for (std::size_t i = 0; i < n; ++i) env.samples[i] -= du * g.samples[i];
    }
    return env;
}

SampledSignal synthesize_meter_voltage(const Scenario& scenario, const std::string& meter) {
    SampledSignal env = analytic_envelope(scenario, meter, scenario.sample_rate_hz);
    const std::size_t n = env.size();

    SampledSignal out;
    out.sample_rate = scenario.sample_rate_hz;
    out.unit = Unit::Volt;
    out.samples.resize(n);
    const double w = kTwoPi * scenario.carrier_frequency_hz;
    const double sqrt2 = std::numbers::sqrt2;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / scenario.sample_rate_hz;
        out.samples[i] = sqrt2 * env.samples[i] * std::cos(w * t);
    }
    if (scenario.noise_rms_v > 0.0) {
        std::mt19937_64 rng(meter_seed(scenario.seed, meter));
        std::normal_distribution<double> dist(0.0, scenario.noise_rms_v);
        for (std::size_t i = 0; i < n; ++i) out.samples[i] += dist(rng);
    }
    return out;
}

std::map<std::string, SampledSignal> synthesize_all(const Scenario& scenario) {
    std::map<std::string, SampledSignal> out;
    for (const std::string& meter : scenario.meters)
        out[meter] = synthesize_meter_voltage(scenario, meter);
    return out;
}

Scenario case_scenario(const std::string& case_id, const GridModel& grid) {
    return preset_scenario(case_id, grid);
}

std::map<std::string, SampledSignal> run_case(const std::string& case_id, const GridModel& grid) {
    return synthesize_all(case_scenario(case_id, grid));
}

}  // namespace vfloc

#pragma once

// Synthesizes synchronized multi-point voltage recordings for configurable
// disturbance scenarios: a power-frequency carrier whose amplitude dips by
// the coupling of each switching load, plus white measurement noise.

#include <map>
#include <string>
#include <vector>

#include "vfloc/grid.hpp"
#include "vfloc/signal.hpp"

namespace vfloc {

enum class ModShape { Rectangular, Sinusoidal };

struct SourceSpec {
    std::string node;
    double power_kw = 0.0;
    double mod_frequency_hz = 0.0;
    double duty = 0.5;              // on-fraction per period, rectangular only
    ModShape shape = ModShape::Rectangular;
    double phase_rad = 0.0;
};

struct Scenario {
    GridModel grid;
    std::vector<SourceSpec> sources;
    std::vector<std::string> meters;
    double duration_s = 60.0;
    double carrier_frequency_hz = 50.0;
    double noise_rms_v = 0.1;
    double sample_rate_hz = 12500.0;
    unsigned long long seed = 12345;
};

// Modulation state g(t) in [0, 1] sampled at `sample_rate`.
// Rectangular: 1 during the on-fraction `duty` of each period.
// Sinusoidal: (1 + sin(2 pi f t + phase)) / 2.
SampledSignal modulation_waveform(const SourceSpec& spec, double sample_rate_hz,
                                  double duration_s);

// Load current step for a resistive load: P / U_nominal.
double load_current_step(const SourceSpec& spec, const GridModel& grid);

// u(t) = sqrt(2) (U_nom - sum_i dU_i(meter) g_i(t)) cos(2 pi f_c t) + noise.
SampledSignal synthesize_meter_voltage(const Scenario& scenario, const std::string& meter);

// RMS-equivalent envelope U_nom - sum_i dU_i(meter) g_i(t), noise-free, at an
// arbitrary rate. Ground truth for round-trip checks.
SampledSignal analytic_envelope(const Scenario& scenario, const std::string& meter,
                                double sample_rate_hz);

// All meters of the scenario.
std::map<std::string, SampledSignal> synthesize_all(const Scenario& scenario);

// Built-in scenario presets "case1".."case5" on the given grid.
Scenario case_scenario(const std::string& case_id, const GridModel& grid);
std::map<std::string, SampledSignal> run_case(const std::string& case_id, const GridModel& grid);

}  // namespace vfloc

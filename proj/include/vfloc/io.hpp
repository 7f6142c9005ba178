#pragma once

// File formats: CSV and raw float64 signals (with JSON sidecar metadata),
// grid and scenario configs, the meter manifest for external recordings, and
// report/trace serialization. SVG plotting for the diagnostic figures.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vfloc/eewt.hpp"
#include "vfloc/grid.hpp"
#include "vfloc/locator.hpp"
#include "vfloc/signal.hpp"
#include "vfloc/synth.hpp"

namespace vfloc {

// --- signals ---------------------------------------------------------------

// Two-column CSV: time_s,value_v. Sample rate is derived from the time axis.
void write_signal_csv(const std::filesystem::path& path, const SampledSignal& signal);
SampledSignal read_signal_csv(const std::filesystem::path& path);

// Little-endian float64 samples plus a "<file>.meta.json" sidecar carrying
// sample_rate_hz, unit and start_time_s.
void write_signal_f64(const std::filesystem::path& path, const SampledSignal& signal);
SampledSignal read_signal_f64(const std::filesystem::path& path);

// Dispatch on extension: .csv or .f64.
SampledSignal read_signal(const std::filesystem::path& path);

// --- configs ---------------------------------------------------------------

GridConfig read_grid_config(const std::filesystem::path& path);
void write_grid_config(const std::filesystem::path& path, const GridConfig& config);

// Named built-in ("grid_table1") or a path to a grid config file.
GridModel load_grid(const std::string& name_or_path);

struct ManifestMeter {
    std::string node;
    std::string file;
    double sample_rate_hz = 0.0;  // optional for CSV
};

struct SignalManifest {
    std::vector<ManifestMeter> meters;
};

SignalManifest read_manifest(const std::filesystem::path& path);

// Loads all manifest meters; all signals must share one sample rate and are
// trimmed to the common overlap.
std::map<std::string, SampledSignal> load_manifest_signals(const std::filesystem::path& manifest_path);

Scenario read_scenario(const std::filesystem::path& path, const GridModel& grid);

// --- results ---------------------------------------------------------------

std::string report_to_json(const SourceReport& report);
std::string trace_to_json(const IterationTrace& trace);

// Spectrum CSV with the fixed column contract frequency_hz,magnitude_v,boundary.
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spectrum,
                        const std::vector<double>& boundaries_hz);

void write_leakage_csv(const std::filesystem::path& path,
                       const std::vector<LeakageBand>& bands);

// Simple polyline SVG of one or more labelled series.
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::vector<SvgSeries>& series,
                    const std::vector<double>& vertical_marks = {});

}  // namespace vfloc

// Command-line front end: synthesize scenario recordings, run the full
// identification/localization pipeline, or emit spectral diagnostics.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vfloc/demod.hpp"
#include "vfloc/errors.hpp"
#include "vfloc/io.hpp"
#include "vfloc/locator.hpp"
#include "vfloc/presets.hpp"
#include "vfloc/synth.hpp"

namespace fs = std::filesystem;
using namespace vfloc;

namespace {

struct CommonOpts {
    std::string case_id;
    std::string manifest;
    std::string scenario_file;
    std::string grid = "grid_table1";
    std::string out_dir = "out";
    double env_rate = 1250.0;
    double nominal_fc = 50.0;
    double window_s = 60.0;
    int n_max = 12;
    double noise = -1.0;  // <0: preset default
    double duty = -1.0;   // <0: preset default
    unsigned long long seed = 12345;
    bool emit_plots = false;
    std::string boundaries;  // comma-separated oracle boundaries
};

std::vector<double> parse_boundaries(const std::string& s) {
    std::vector<double> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

Scenario make_scenario(const CommonOpts& opt, const GridModel& grid) {
    Scenario sc;
    if (!opt.case_id.empty()) {
        if (!is_preset_case(opt.case_id)) throw ConfigInvalid("unknown case: " + opt.case_id);
        sc = preset_scenario(opt.case_id, grid);
    } else if (!opt.scenario_file.empty()) {
        sc = read_scenario(opt.scenario_file, grid);
    } else {
        throw ConfigInvalid("need --case or --scenario");
    }
    sc.duration_s = opt.window_s;
    sc.seed = opt.seed;
    if (opt.noise >= 0.0) sc.noise_rms_v = opt.noise;
    if (opt.duty > 0.0) {
        for (SourceSpec& s : sc.sources) s.duty = opt.duty;
    }
    return sc;
}

std::map<std::string, SampledSignal> obtain_signals(const CommonOpts& opt, const GridModel& grid) {
    if (!opt.manifest.empty()) {
        if (!fs::exists(opt.manifest)) throw ConfigInvalid("manifest not found: " + opt.manifest);
        return load_manifest_signals(opt.manifest);
    }
    return synthesize_all(make_scenario(opt, grid));
}

std::map<std::string, SampledSignal> demodulate_all(
    const std::map<std::string, SampledSignal>& signals, const CommonOpts& opt) {
    std::map<std::string, SampledSignal> envelopes;
    for (const auto& [meter, sig] : signals) {
        const CarrierEstimate carrier = estimate_carrier(sig, opt.nominal_fc);
        envelopes[meter] = demodulate(sig, carrier, opt.env_rate);
    }
    return envelopes;
}

int cmd_run(const CommonOpts& opt) {
    const GridModel grid = load_grid(opt.grid);
    const auto signals = obtain_signals(opt, grid);
    const auto envelopes = demodulate_all(signals, opt);

    LocatorConfig cfg;
    cfg.n_max = opt.n_max;
    cfg.carrier_frequency_hz = opt.nominal_fc;
    if (!opt.boundaries.empty()) cfg.forced_boundaries_hz = parse_boundaries(opt.boundaries);

    const IterationTrace trace = run_iterative(envelopes, grid, cfg);
    const SourceReport report = build_report(trace);

    fs::create_directories(opt.out_dir);
    {
        std::ofstream out(fs::path(opt.out_dir) / "report.json");
        out << report_to_json(report);
    }
    {
        std::ofstream out(fs::path(opt.out_dir) / "trace.json");
        out << trace_to_json(trace);
    }
    if (opt.emit_plots) {
        for (const auto& [meter, env] : envelopes) {
            const Spectrum spec = magnitude_spectrum(env);
            std::vector<double> bounds;
            for (const IterationRecord& rec : trace.iterations) {
                if (rec.n_requested == trace.n_identification) {
                    auto it = rec.segmentations.find(meter);
                    if (it != rec.segmentations.end()) bounds = it->second.boundaries_hz;
                }
            }
            write_spectrum_csv(fs::path(opt.out_dir) / ("spectrum_" + meter + ".csv"), spec,
                               bounds);
            SvgSeries series;
            series.label = meter;
            const std::size_t show = std::min<std::size_t>(spec.size(), static_cast<std::size_t>(
                                                               20.0 / spec.bin_hz));
            for (std::size_t k = 1; k < show; ++k) {
                series.x.push_back(spec.frequency(k));
                series.y.push_back(spec.magnitude[k]);
            }
            write_svg_plot(fs::path(opt.out_dir) / ("spectrum_" + meter + ".svg"),
                           "envelope spectrum " + meter, {series}, bounds);

            SvgSeries ts;
            ts.label = meter;
            for (std::size_t i = 0; i < env.size(); ++i) {
                ts.x.push_back(env.start_time + static_cast<double>(i) / env.sample_rate);
                ts.y.push_back(env.samples[i]);
            }
            write_svg_plot(fs::path(opt.out_dir) / ("envelope_" + meter + ".svg"),
                           "recovered envelope " + meter, {ts});
        }
    }

    std::cout << "sources: " << report.sources.size() << "\n";
    for (const MergedSource& s : report.sources) {
        std::printf("  %.4g Hz -> %s (A = %.3g V)\n", s.frequency_hz, s.supply_point.c_str(),
                    s.amplitude_v);
    }
    for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
    std::cout << "report written to " << (fs::path(opt.out_dir) / "report.json").string() << "\n";
    return 0;
}

int cmd_synth(const CommonOpts& opt, const std::string& format) {
    const GridModel grid = load_grid(opt.grid);
    const Scenario sc = make_scenario(opt, grid);
    const auto signals = synthesize_all(sc);

    fs::create_directories(opt.out_dir);
    nlohmann::ordered_json meta;
    meta["sample_rate_hz"] = sc.sample_rate_hz;
    meta["duration_s"] = sc.duration_s;
    meta["carrier_frequency_hz"] = sc.carrier_frequency_hz;
    meta["noise_rms_v"] = sc.noise_rms_v;
    meta["sources"] = nlohmann::ordered_json::array();
    for (const SourceSpec& s : sc.sources) {
        meta["sources"].push_back({{"node", s.node},
                                   {"power_kw", s.power_kw},
                                   {"frequency_hz", s.mod_frequency_hz},
                                   {"duty", s.duty}});
    }
    nlohmann::ordered_json manifest;
    for (const auto& [meter, sig] : signals) {
        const std::string fname = "meter_" + meter + "." + format;
        const fs::path p = fs::path(opt.out_dir) / fname;
        if (format == "csv") {
            write_signal_csv(p, sig);
        } else {
            write_signal_f64(p, sig);
        }
        manifest["meters"].push_back(
            {{"node", meter}, {"file", fname}, {"sample_rate_hz", sig.sample_rate}});
    }
    {
        std::ofstream out(fs::path(opt.out_dir) / "metadata.json");
        out << meta.dump(2) << '\n';
    }
    {
        std::ofstream out(fs::path(opt.out_dir) / "manifest.json");
        out << manifest.dump(2) << '\n';
    }
    std::cout << signals.size() << " meter signals written to " << opt.out_dir << "\n";
    return 0;
}

int cmd_diag(const CommonOpts& opt, int n_bands) {
    const GridModel grid = load_grid(opt.grid);
    const auto signals = obtain_signals(opt, grid);
    const auto envelopes = demodulate_all(signals, opt);

    fs::create_directories(opt.out_dir);
    for (const auto& [meter, env] : envelopes) {
        const Spectrum spec = magnitude_spectrum(env);
        SpectrumSegmentation seg;
        try {
            seg = segment_spectrum(spec, n_bands);
        } catch (const NotEnoughPeaks& e) {
            seg = segment_spectrum(spec, std::max(1, e.available));
        }
        write_spectrum_csv(fs::path(opt.out_dir) / ("spectrum_" + meter + ".csv"), spec,
                           seg.boundaries_hz);
        const auto leaks = leakage_diagnostic(seg, spec);
        write_leakage_csv(fs::path(opt.out_dir) / ("leakage_" + meter + ".csv"), leaks);

        const auto comps = decompose(env, seg);
        for (const Component& c : comps) {
            const Spectrum cs = magnitude_spectrum(c.signal);
            write_spectrum_csv(fs::path(opt.out_dir) / ("component_" + meter + "_band" +
                                                        std::to_string(c.band_index) + ".csv"),
                               cs, {});
        }
        write_signal_csv(fs::path(opt.out_dir) / ("envelope_" + meter + ".csv"), env);
    }
    std::cout << "diagnostics written to " << opt.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"voltage fluctuation source identification and localization"};
    app.require_subcommand(1);

    CommonOpts opt;
    std::string format = "csv";
    int diag_bands = 3;

    auto add_common = [&](CLI::App* sub, bool wants_inputs) {
        if (wants_inputs) {
            sub->add_option("--case", opt.case_id, "scenario preset case1..case5");
            sub->add_option("--manifest", opt.manifest, "manifest of recorded meter signals");
            sub->add_option("--scenario", opt.scenario_file, "scenario config file");
        }
        sub->add_option("--grid", opt.grid, "grid config name or path")->capture_default_str();
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--window", opt.window_s, "processing window, s")->capture_default_str();
        sub->add_option("--env-rate", opt.env_rate, "envelope rate, Hz")->capture_default_str();
        sub->add_option("--fc", opt.nominal_fc, "nominal carrier, Hz")->capture_default_str();
        sub->add_option("--noise", opt.noise, "noise RMS override, V");
        sub->add_option("--duty", opt.duty, "duty-cycle override for all sources");
        sub->add_option("--seed", opt.seed, "noise seed")->capture_default_str();
    };

    CLI::App* run = app.add_subcommand("run", "full pipeline to a source report");
    add_common(run, true);
    run->add_option("--n-max", opt.n_max, "iteration cap")->capture_default_str();
    run->add_option("--boundaries", opt.boundaries, "inject fixed segmentation boundaries (Hz)");
    run->add_flag("--emit-plots", opt.emit_plots, "write CSV/SVG diagnostics");

    CLI::App* synth = app.add_subcommand("synth", "write scenario meter signals");
    add_common(synth, true);
    synth->add_option("--format", format, "csv or f64")->capture_default_str();

    CLI::App* diag = app.add_subcommand("diag", "spectra, boundaries, leakage");
    add_common(diag, true);
    diag->add_option("--bands", diag_bands, "band count")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(opt);
        if (synth->parsed()) return cmd_synth(opt, format);
        if (diag->parsed()) return cmd_diag(opt, diag_bands);
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include "vfloc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vfloc/errors.hpp"
#include "vfloc/presets.hpp"

namespace vfloc {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string unit_name(Unit u) { return u == Unit::Volt ? "volt" : "dimensionless"; }

Unit unit_from_name(const std::string& s) {
    if (s == "volt") return Unit::Volt;
    if (s == "dimensionless") return Unit::Dimensionless;
    throw IngestFailed("unknown unit: " + s);
}

ordered_json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigInvalid("bad JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace

void write_signal_csv(const std::filesystem::path& path, const SampledSignal& signal) {
    std::ofstream out(path);
    if (!out) throw IngestFailed("cannot write " + path.string());
    out << "time_s,value_v\n";
    out.precision(12);
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const double t = signal.start_time + static_cast<double>(i) / signal.sample_rate;
        out << t << ',' << signal.samples[i] << '\n';
    }
}

SampledSignal read_signal_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestFailed("cannot open " + path.string());
    std::string line;
    std::vector<double> times, values;
    while (std::getline(in, line)) {
        if (line.empty() || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IngestFailed("bad CSV row in " + path.string());
        times.push_back(std::stod(line.substr(0, comma)));
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (times.size() < 2) throw IngestFailed("signal too short in " + path.string());
    SampledSignal sig;
    sig.start_time = times.front();
    sig.sample_rate = static_cast<double>(times.size() - 1) / (times.back() - times.front());
    sig.sample_rate = std::round(sig.sample_rate * 1e6) / 1e6;
    sig.samples = std::move(values);
    sig.validate();
    return sig;
}

void write_signal_f64(const std::filesystem::path& path, const SampledSignal& signal) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestFailed("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(signal.samples.data()),
              static_cast<std::streamsize>(signal.samples.size() * sizeof(double)));
    ordered_json meta;
    meta["sample_rate_hz"] = signal.sample_rate;
    meta["unit"] = unit_name(signal.unit);
    meta["start_time_s"] = signal.start_time;
    meta["samples"] = signal.size();
    std::ofstream ms(path.string() + ".meta.json");
    ms << meta.dump(2) << '\n';
}

SampledSignal read_signal_f64(const std::filesystem::path& path) {
    const ordered_json meta = parse_json_file(path.string() + ".meta.json");
    SampledSignal sig;
    sig.sample_rate = meta.at("sample_rate_hz").get<double>();
    sig.unit = unit_from_name(meta.at("unit").get<std::string>());
    sig.start_time = meta.value("start_time_s", 0.0);

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestFailed("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const std::streamoff bytes = in.tellg();
    in.seekg(0);
    if (bytes % static_cast<std::streamoff>(sizeof(double)) != 0)
        throw IngestFailed("raw file size not a multiple of 8: " + path.string());
    sig.samples.resize(static_cast<std::size_t>(bytes) / sizeof(double));
    in.read(reinterpret_cast<char*>(sig.samples.data()), bytes);
    sig.validate();
    return sig;
}

SampledSignal read_signal(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".csv") return read_signal_csv(path);
    if (ext == ".f64") return read_signal_f64(path);
    throw IngestFailed("unsupported signal format: " + path.string());
}

GridConfig read_grid_config(const std::filesystem::path& path) {
    const ordered_json j = parse_json_file(path);
    GridConfig cfg;
    try {
        for (const auto& n : j.at("nodes")) {
            if (n.is_string()) {
                cfg.nodes.push_back(n.get<std::string>());
            } else {
                cfg.nodes.push_back(n.at("id").get<std::string>());
                if (n.contains("name"))
                    cfg.node_names[cfg.nodes.back()] = n.at("name").get<std::string>();
            }
        }
        for (const auto& e : j.at("edges")) {
            GridEdge edge;
            edge.from = e.at("from").get<std::string>();
            edge.to = e.at("to").get<std::string>();
            edge.r_mohm = e.at("r_mohm").get<double>();
            edge.x_mohm = e.at("x_mohm").get<double>();
            cfg.edges.push_back(edge);
        }
        cfg.slack = j.at("slack").get<std::string>();
        cfg.source_r_mohm = j.at("source_r_mohm").get<double>();
        cfg.source_x_mohm = j.at("source_x_mohm").get<double>();
        cfg.u_nominal_v = j.value("u_nominal_v", 230.0);
    } catch (const ordered_json::exception& e) {
        throw ConfigInvalid("grid config " + path.string() + ": " + e.what());
    }
    return cfg;
}

void write_grid_config(const std::filesystem::path& path, const GridConfig& config) {
    ordered_json j;
    for (const auto& n : config.nodes) {
        ordered_json node;
        node["id"] = n;
        auto it = config.node_names.find(n);
        if (it != config.node_names.end()) node["name"] = it->second;
        j["nodes"].push_back(node);
    }
    for (const auto& e : config.edges) {
        j["edges"].push_back({{"from", e.from},
                              {"to", e.to},
                              {"r_mohm", e.r_mohm},
                              {"x_mohm", e.x_mohm}});
    }
    j["slack"] = config.slack;
    j["source_r_mohm"] = config.source_r_mohm;
    j["source_x_mohm"] = config.source_x_mohm;
    j["u_nominal_v"] = config.u_nominal_v;
    std::ofstream out(path);
    if (!out) throw IngestFailed("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

GridModel load_grid(const std::string& name_or_path) {
    if (name_or_path.empty() || name_or_path == "grid_table1") return grid_table1();
    return GridModel::build(read_grid_config(name_or_path));
}

SignalManifest read_manifest(const std::filesystem::path& path) {
    const ordered_json j = parse_json_file(path);
    SignalManifest m;
    try {
        for (const auto& e : j.at("meters")) {
            ManifestMeter mm;
            mm.node = e.at("node").get<std::string>();
            mm.file = e.at("file").get<std::string>();
            mm.sample_rate_hz = e.value("sample_rate_hz", 0.0);
            m.meters.push_back(mm);
        }
    } catch (const ordered_json::exception& e) {
        throw ConfigInvalid("manifest " + path.string() + ": " + e.what());
    }
    if (m.meters.empty()) throw ConfigInvalid("manifest has no meters");
    return m;
}

std::map<std::string, SampledSignal> load_manifest_signals(
    const std::filesystem::path& manifest_path) {
    const SignalManifest manifest = read_manifest(manifest_path);
    const std::filesystem::path base = manifest_path.parent_path();
    std::map<std::string, SampledSignal> out;
    double rate = 0.0;
    std::size_t min_len = 0;
    for (const ManifestMeter& m : manifest.meters) {
        std::filesystem::path p(m.file);
        if (p.is_relative()) p = base / p;
        SampledSignal sig = read_signal(p);
        if (m.sample_rate_hz > 0.0) sig.sample_rate = m.sample_rate_hz;
        if (rate == 0.0) rate = sig.sample_rate;
        if (std::abs(sig.sample_rate - rate) > 1e-6)
            throw IngestFailed("meters disagree on sample rate");
        min_len = min_len == 0 ? sig.size() : std::min(min_len, sig.size());
        out[m.node] = std::move(sig);
    }
    for (auto& [node, sig] : out) {
        (void)node;
        sig.samples.resize(min_len);
    }
    return out;
}

Scenario read_scenario(const std::filesystem::path& path, const GridModel& grid) {
    const ordered_json j = parse_json_file(path);
    Scenario sc;
    sc.grid = grid;
    try {
        for (const auto& s : j.at("sources")) {
            SourceSpec spec;
            spec.node = s.at("node").get<std::string>();
            spec.power_kw = s.at("power_kw").get<double>();
            spec.mod_frequency_hz = s.at("frequency_hz").get<double>();
            spec.duty = s.value("duty", 0.5);
            spec.phase_rad = s.value("phase_rad", 0.0);
            const std::string shape = s.value("shape", std::string("rectangular"));
            if (shape == "rectangular") {
                spec.shape = ModShape::Rectangular;
            } else if (shape == "sinusoidal") {
                spec.shape = ModShape::Sinusoidal;
            } else {
                throw ConfigInvalid("unknown modulation shape: " + shape);
            }
            sc.sources.push_back(spec);
        }
        for (const auto& m : j.at("meters")) sc.meters.push_back(m.get<std::string>());
        sc.duration_s = j.value("duration_s", 60.0);
        sc.carrier_frequency_hz = j.value("carrier_frequency_hz", 50.0);
        sc.noise_rms_v = j.value("noise_rms_v", 0.1);
        sc.sample_rate_hz = j.value("sample_rate_hz", 12500.0);
        sc.seed = j.value("seed", 12345ull);
    } catch (const ordered_json::exception& e) {
        throw ConfigInvalid("scenario " + path.string() + ": " + e.what());
    }
    if (sc.meters.empty()) throw ConfigInvalid("scenario has no meters");
    return sc;
}

namespace {

ordered_json source_to_json(const MergedSource& s) {
    ordered_json j;
    j["supply_point"] = s.supply_point;
    j["frequency_hz"] = s.frequency_hz;
    j["amplitude_v"] = s.amplitude_v;
    j["related_frequencies_hz"] = ordered_json::array();
    for (double f : s.related_frequencies_hz) j["related_frequencies_hz"].push_back(f);
    ordered_json prof;
    for (const auto& [node, a] : s.profile.entries) prof[node] = a;
    j["profile_v"] = prof;
    return j;
}

ordered_json group_to_json(const ComponentGroup& g) {
    ordered_json j;
    j["frequency_hz"] = g.frequency_hz;
    j["indicated_point"] = g.indicated_point;
    j["shape_score"] = g.shape_score;
    ordered_json prof;
    for (const auto& [node, a] : g.profile.entries) prof[node] = a;
    j["profile_v"] = prof;
    ordered_json members = ordered_json::array();
    for (const ComponentFeatures& m : g.members) {
        members.push_back({{"meter", m.meter},
                           {"band", m.band_index},
                           {"f_hz", m.f_i_hz},
                           {"a_v", m.a_i_v},
                           {"changes_used", m.n_changes_used},
                           {"outliers", m.n_outliers}});
    }
    j["members"] = members;
    return j;
}

}  // namespace

std::string report_to_json(const SourceReport& report) {
    ordered_json j;
    j["sources"] = ordered_json::array();
    for (const MergedSource& s : report.sources) j["sources"].push_back(source_to_json(s));
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

std::string trace_to_json(const IterationTrace& trace) {
    ordered_json j;
    j["n_stop"] = trace.n_stop;
    j["n_identification"] = trace.n_identification;
    j["iterations"] = ordered_json::array();
    for (const IterationRecord& rec : trace.iterations) {
        ordered_json it;
        it["n"] = rec.n_requested;
        it["has_duplicate_point"] = rec.has_duplicate_point;
        it["duplicates_explained"] = rec.duplicates_explained;
        ordered_json segs;
        for (const auto& [meter, seg] : rec.segmentations) {
            ordered_json b = ordered_json::array();
            for (double f : seg.boundaries_hz) b.push_back(f);
            segs[meter] = b;
        }
        it["boundaries_hz"] = segs;
        ordered_json leaks;
        for (const auto& [meter, bands] : rec.leakage) {
            ordered_json arr = ordered_json::array();
            for (const LeakageBand& lb : bands) {
                arr.push_back({{"band", lb.band_index},
                               {"ratio", lb.ratio},
                               {"fundamental_hz", lb.fundamental_hz},
                               {"flagged", lb.flagged}});
            }
            leaks[meter] = arr;
        }
        it["leakage"] = leaks;
        it["groups"] = ordered_json::array();
        for (const ComponentGroup& g : rec.groups) it["groups"].push_back(group_to_json(g));
        j["iterations"].push_back(it);
    }
    j["localization_set"] = ordered_json::array();
    for (const ComponentGroup& g : trace.localization_set)
        j["localization_set"].push_back(group_to_json(g));
    j["identification_set"] = ordered_json::array();
    for (const MergedSource& s : trace.identification_set)
        j["identification_set"].push_back(source_to_json(s));
    j["warnings"] = trace.warnings;
    return j.dump(2) + "\n";
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spectrum,
                        const std::vector<double>& boundaries_hz) {
    std::ofstream out(path);
    if (!out) throw IngestFailed("cannot write " + path.string());
    out << "frequency_hz,magnitude_v,boundary\n";
    out.precision(10);
    std::vector<std::size_t> marks;
    for (double b : boundaries_hz)
        marks.push_back(static_cast<std::size_t>(std::llround(b / spectrum.bin_hz)));
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const bool is_boundary = std::find(marks.begin(), marks.end(), k) != marks.end();
        out << spectrum.frequency(k) << ',' << spectrum.magnitude[k] << ','
            << (is_boundary ? 1 : 0) << '\n';
    }
}

void write_leakage_csv(const std::filesystem::path& path,
                       const std::vector<LeakageBand>& bands) {
    std::ofstream out(path);
    if (!out) throw IngestFailed("cannot write " + path.string());
    out << "band,fundamental_hz,leakage_ratio,flagged\n";
    out.precision(10);
    for (const LeakageBand& lb : bands) {
        out << lb.band_index << ',' << lb.fundamental_hz << ',' << lb.ratio << ','
            << (lb.flagged ? 1 : 0) << '\n';
    }
}

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::vector<SvgSeries>& series,
                    const std::vector<double>& vertical_marks) {
    const int width = 960, height = 420, margin = 50;
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool first = true;
    for (const SvgSeries& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    auto sx = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
    };
    auto sy = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ofstream out(path);
    if (!out) throw IngestFailed("cannot write " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
        << "</text>\n";
    out << "<line x1='" << margin << "' y1='" << height - margin << "' x2='" << width - margin
        << "' y2='" << height - margin << "' stroke='black'/>\n";
    out << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << height - margin << "' stroke='black'/>\n";
    for (double m : vertical_marks) {
        if (m < xmin || m > xmax) continue;
        out << "<line x1='" << sx(m) << "' y1='" << margin << "' x2='" << sx(m) << "' y2='"
            << height - margin << "' stroke='#999' stroke-dasharray='4 3'/>\n";
    }
    int ci = 0;
    for (const SvgSeries& s : series) {
        out << "<polyline fill='none' stroke='" << colors[ci % 5] << "' stroke-width='1' points='";
        const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 4000);
        for (std::size_t i = 0; i < s.x.size(); i += stride)
            out << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
        out << "'/>\n";
        out << "<text x='" << width - margin - 150 << "' y='" << margin + 16 * (ci + 1)
            << "' font-size='12' fill='" << colors[ci % 5] << "'>" << s.label << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

}  // namespace vfloc

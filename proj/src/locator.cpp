#include "vfloc/locator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "vfloc/errors.hpp"

namespace vfloc {

namespace {

struct MeterState {
    std::string name;
    SampledSignal envelope;
    Spectrum spectrum;
    DecompositionPlan plan;
    int max_bands = 1 << 20;  // shrinks when segmentation runs out of peaks
};

double zero_lag_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    if (n == 0) return 0.0;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

struct FeatureEntry {
    ComponentFeatures features;
    const RegularizedComponent* reg = nullptr;  // for shape scoring
};

// union-find over group indices
struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

std::vector<MergedSource> merge_groups(const std::vector<ComponentGroup>& groups, double fc_hz,
                                       double tol_hz) {
    DisjointSet ds(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            if (groups[i].indicated_point != groups[j].indicated_point) continue;
            const double fi = groups[i].frequency_hz;
            const double fj = groups[j].frequency_hz;
            if (harmonic_or_mirror_related(fi, fj, fc_hz, tol_hz) ||
                harmonic_or_mirror_related(fj, fi, fc_hz, tol_hz)) {
                ds.unite(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }

    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < groups.size(); ++i)
        clusters[ds.find(static_cast<int>(i))].push_back(i);

    std::vector<MergedSource> out;
    for (const auto& [rep, idxs] : clusters) {
        (void)rep;
        // the member with the strongest profile speaks for the source
        std::size_t lead = idxs[0];
        double lead_amp = -1.0;
        for (std::size_t i : idxs) {
            double amp = 0.0;
            for (const auto& [node, a] : groups[i].profile.entries) amp = std::max(amp, a);
            if (amp > lead_amp) {
                lead_amp = amp;
                lead = i;
            }
        }
        MergedSource src;
        src.supply_point = groups[lead].indicated_point;
        src.frequency_hz = groups[lead].frequency_hz;
        src.profile = groups[lead].profile;
        auto it = groups[lead].profile.entries.find(src.supply_point);
        src.amplitude_v = it != groups[lead].profile.entries.end() ? it->second : lead_amp;
        for (std::size_t i : idxs) {
            if (i != lead) src.related_frequencies_hz.push_back(groups[i].frequency_hz);
        }
        std::sort(src.related_frequencies_hz.begin(), src.related_frequencies_hz.end());
        out.push_back(std::move(src));
    }
    std::sort(out.begin(), out.end(), [](const MergedSource& a, const MergedSource& b) {
        return a.frequency_hz < b.frequency_hz;
    });
    return out;
}

// duplicates are "explained" when merging leaves pairwise-distinct points
bool duplicates_explained(const std::vector<MergedSource>& merged) {
    std::set<std::string> seen;
    for (const MergedSource& s : merged) {
        if (!seen.insert(s.supply_point).second) return false;
    }
    return true;
}

bool has_duplicate_point(const std::vector<ComponentGroup>& groups) {
    std::set<std::string> seen;
    for (const ComponentGroup& g : groups) {
        if (!seen.insert(g.indicated_point).second) return true;
    }
    return false;
}

}  // namespace

bool harmonic_or_mirror_related(double f_i_hz, double f_j_hz, double fc_hz, double tol_hz) {
    if (f_i_hz <= 0.0 || f_j_hz <= 0.0 || fc_hz <= 0.0)
        throw std::invalid_argument("frequencies must be > 0");
    if (std::abs(f_i_hz - std::abs(2.0 * fc_hz - f_j_hz)) <= tol_hz) return true;
    for (int n = 1; n <= 5; ++n) {
        if (std::abs(f_i_hz - static_cast<double>(n) * f_j_hz) <= tol_hz) return true;
    }
    return false;
}

std::vector<ComponentGroup> match_components(
    const std::map<std::string, std::vector<ComponentFeatures>>& per_meter, double tol_abs_hz,
    double tol_rel) {
    struct Item {
        ComponentFeatures f;
    };
    std::vector<Item> items;
    for (const auto& [meter, feats] : per_meter) {
        (void)meter;
        for (const ComponentFeatures& f : feats) items.push_back({f});
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.f.f_i_hz != b.f.f_i_hz) return a.f.f_i_hz < b.f.f_i_hz;
        return a.f.meter < b.f.meter;
    });

    std::vector<char> used(items.size(), 0);
    std::vector<ComponentGroup> groups;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (used[i]) continue;
        const double f0 = items[i].f.f_i_hz;
        const double tol = std::max(tol_abs_hz, tol_rel * f0);

        // candidate window around the seed; per meter the strongest wins, so
        // a weak artifact cannot displace the genuine component
        std::map<std::string, std::size_t> chosen;
        for (std::size_t j = i; j < items.size(); ++j) {
            if (items[j].f.f_i_hz - f0 > tol) break;
            if (used[j]) continue;
            auto it = chosen.find(items[j].f.meter);
            if (it == chosen.end() || items[j].f.a_i_v > items[it->second].f.a_i_v) {
                chosen[items[j].f.meter] = j;
            }
        }
        ComponentGroup g;
        for (const auto& [meter, j] : chosen) {
            (void)meter;
            used[j] = 1;
            g.members.push_back(items[j].f);
        }
        if (!used[i]) used[i] = 1;  // unselected seed is spent either way
        if (chosen.size() < 2) continue;
        double fsum = 0.0;
        for (const ComponentFeatures& m : g.members) {
            fsum += m.f_i_hz;
            g.profile.entries[m.meter] = m.a_i_v;
        }
        g.frequency_hz = fsum / static_cast<double>(g.members.size());
        g.profile.frequency = g.frequency_hz;
        groups.push_back(std::move(g));
    }
    return groups;
}

std::string assess_propagation(ComponentGroup& group, const GridModel& grid, double tie_rel) {
    group.indicated_point = localize(group.profile, grid, tie_rel);
    return group.indicated_point;
}

IterationTrace run_iterative(const std::map<std::string, SampledSignal>& envelopes,
                             const GridModel& grid, const LocatorConfig& cfg) {
    if (envelopes.size() < 2) throw InsufficientMeters("need at least 2 meters");

    std::vector<MeterState> meters;
    meters.reserve(envelopes.size());
    std::size_t common_len = 0;
    for (const auto& [name, env] : envelopes) {
        if (!grid.has_node(name)) throw UnknownNode("meter not in grid: " + name);
        if (env.empty()) throw EmptySignal("empty envelope for meter " + name);
        MeterState st;
        st.name = name;
        st.envelope = env;
        common_len = common_len == 0 ? env.size() : std::min(common_len, env.size());
        meters.push_back(std::move(st));
    }
    for (MeterState& st : meters) {
        st.envelope.samples.resize(common_len);
        st.spectrum = magnitude_spectrum(st.envelope);
        st.plan = prepare_decomposition(st.envelope);
    }
    const double bin_hz = meters.front().spectrum.bin_hz;
    const double related_tol = cfg.related_tol_bins * bin_hz;

    const bool forced = !cfg.forced_boundaries_hz.empty();
    const int n_first = forced ? static_cast<int>(cfg.forced_boundaries_hz.size()) + 1 : 1;
    const int n_last = forced ? n_first : cfg.n_max;

    IterationTrace trace;
    bool stop_extension = false;
    for (int n = n_first; n <= n_last && !stop_extension; ++n) {
        IterationRecord rec;
        rec.n_requested = n;

        std::map<std::string, std::vector<ComponentFeatures>> per_meter;
        std::map<std::string, std::map<int, RegularizedComponent>> reg_store;
        for (MeterState& st : meters) {
            SpectrumSegmentation seg;
            if (forced) {
                seg.boundaries_hz = cfg.forced_boundaries_hz;
                seg.n_bands = n;
            } else {
                const int bands = std::min(n, st.max_bands);
                try {
                    seg = segment_spectrum(st.spectrum, bands, cfg.seg);
                } catch (const NotEnoughPeaks& e) {
                    st.max_bands = std::max(1, e.available);
                    seg = segment_spectrum(st.spectrum, st.max_bands, cfg.seg);
                }
            }
            rec.segmentations[st.name] = seg;
            rec.leakage[st.name] = leakage_diagnostic(seg, st.spectrum, cfg.leak);

            const std::vector<Component> comps = decompose_with_plan(st.plan, seg, cfg.ewt);
            std::vector<ComponentFeatures> feats;
            for (const Component& c : comps) {
                try {
                    RegularizedComponent reg = regularize(c, cfg.reg);
                    ComponentFeatures f = extract_features(reg, st.name, c.band_index, cfg.feat);
                    feats.push_back(f);
                    reg_store[st.name][c.band_index] = std::move(reg);
                } catch (const Error&) {
                    // flat or featureless band; skipped
                }
            }
            per_meter[st.name] = std::move(feats);
        }

        rec.groups = match_components(per_meter, cfg.match_tol_abs_hz, cfg.match_tol_rel);
        for (ComponentGroup& g : rec.groups) {
            assess_propagation(g, grid, cfg.tie_rel);
            // shape consistency across meters
            double score = 1.0;
            for (std::size_t i = 0; i < g.members.size(); ++i) {
                for (std::size_t j = i + 1; j < g.members.size(); ++j) {
                    const auto& ra = reg_store[g.members[i].meter][g.members[i].band_index];
                    const auto& rb = reg_store[g.members[j].meter][g.members[j].band_index];
                    score = std::min(score, zero_lag_correlation(ra.step_signal.samples,
                                                                 rb.step_signal.samples));
                }
            }
            g.shape_score = score;
        }

        rec.has_duplicate_point = has_duplicate_point(rec.groups);
        std::vector<MergedSource> merged = merge_groups(rec.groups, cfg.carrier_frequency_hz,
                                                        related_tol);
        rec.duplicates_explained = duplicates_explained(merged);

        const bool stopping = rec.has_duplicate_point && rec.n_requested >= 2;
        trace.iterations.push_back(rec);

        if (forced) {
            trace.n_identification = n;
            trace.identification_set = std::move(merged);
            trace.localization_set = trace.iterations.back().groups;
            break;
        }

        if (trace.n_stop == 0) {
            if (stopping) {
                trace.n_stop = n;
                if (trace.iterations.size() >= 2)
                    trace.localization_set = trace.iterations[trace.iterations.size() - 2].groups;
                trace.n_identification = n;
                trace.identification_set = merged;
                if (!rec.duplicates_explained) stop_extension = true;
            } else {
                // keep the best-so-far answer in case the loop exhausts n_max
                trace.n_identification = n;
                trace.identification_set = merged;
            }
        } else {
            if (rec.duplicates_explained) {
                trace.n_identification = n;
                trace.identification_set = merged;
            } else {
                stop_extension = true;
            }
        }
    }

    if (!forced && trace.n_stop == 0 && trace.iterations.size() >= 2) {
        // no duplicate appeared: localization falls back to the penultimate run
        trace.localization_set = trace.iterations[trace.iterations.size() - 2].groups;
    }

    if (trace.identification_set.empty())
        throw NoComponentsFound("no cross-meter component groups found");

    // warnings from the iteration the identification came from
    for (const IterationRecord& rec : trace.iterations) {
        if (rec.n_requested != trace.n_identification) continue;
        for (const auto& [meter, bands] : rec.leakage) {
            for (const LeakageBand& lb : bands) {
                if (!lb.flagged) continue;
                std::ostringstream os;
                os << "meter " << meter << " band " << lb.band_index << " leakage ratio "
                   << lb.ratio << " exceeds threshold: spectral content of another source's "
                   << "harmonic train shares this band";
                trace.warnings.push_back(os.str());
            }
        }
        for (const ComponentGroup& g : rec.groups) {
            if (g.members.size() >= 2 && g.shape_score < cfg.shape_warn_threshold) {
                std::ostringstream os;
                os << "group at " << g.frequency_hz << " Hz has shape consistency "
                   << g.shape_score << " below " << cfg.shape_warn_threshold
                   << ": component shapes differ across meters";
                trace.warnings.push_back(os.str());
            }
        }
    }
    return trace;
}

SourceReport build_report(const IterationTrace& trace) {
    SourceReport report;
    report.sources = trace.identification_set;
    report.warnings = trace.warnings;
    return report;
}

}  // namespace vfloc

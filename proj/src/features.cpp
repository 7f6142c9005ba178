#include "vfloc/features.hpp"

#include <cmath>

#include "vfloc/errors.hpp"

namespace vfloc {

double fundamental_frequency(const RegularizedComponent& reg, const FeatureConfig& cfg) {
    const SampledSignal& step = reg.step_signal;
    if (step.size() < 4) throw SignalTooShort("fundamental_frequency: signal too short");
    if (peak_to_peak(step.samples) <= 0.0)
        throw NoDominantPeak("constant step signal has no fundamental");

    const Spectrum spec = magnitude_spectrum_padded(step, cfg.spectrum_pad_factor);
    const auto peak = peak_bin_in_range(spec, 1, spec.size() - 1);
    if (!peak) throw NoDominantPeak("empty spectrum");

    const std::vector<double> tail(spec.magnitude.begin() + 1, spec.magnitude.end());
    const double floor = cfg.peak_floor_ratio * median(tail);
    if (spec.magnitude[*peak] < std::max(floor, 1e-12))
        throw NoDominantPeak("no dominant spectral peak");
    return refine_peak(spec, *peak);
}

std::vector<double> exclude_outliers(const std::vector<double>& changes, double mad_floor,
                                     double mad_mult) {
    if (changes.empty()) throw EmptyChanges("exclude_outliers: no changes");
    // iterated to a fixpoint so a second application changes nothing
    std::vector<double> kept = changes;
    while (true) {
        std::vector<double> mags(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) mags[i] = std::abs(kept[i]);
        const double med = median(mags);
        const double spread = std::max(mad(mags), mad_floor);
        std::vector<double> next;
        next.reserve(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) {
            if (std::abs(mags[i] - med) <= mad_mult * spread) next.push_back(kept[i]);
        }
        if (next.empty() || next.size() == kept.size()) break;
        kept = std::move(next);
    }
    return kept;
}

double mean_amplitude(const std::vector<double>& changes) {
    if (changes.empty()) throw EmptyChanges("mean_amplitude: no changes");
    double s = 0.0;
    for (double k : changes) s += std::abs(k);
    return s / static_cast<double>(changes.size());
}

ComponentFeatures extract_features(const RegularizedComponent& reg, const std::string& meter,
                                   int band_index, const FeatureConfig& cfg) {
    if (reg.changes.empty()) throw EmptyChanges("component has no changes");
    ComponentFeatures f;
    f.meter = meter;
    f.band_index = band_index;
    f.f_i_hz = fundamental_frequency(reg, cfg);

    std::vector<double> ks(reg.changes.size());
    for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = reg.changes[i].amplitude_v;
    const std::vector<double> kept = exclude_outliers(ks, reg.theta_abs, cfg.outlier_mad_mult);
    f.a_i_v = mean_amplitude(kept);
    f.n_changes_used = static_cast<int>(kept.size());
    f.n_outliers = static_cast<int>(ks.size() - kept.size());
    return f;
}

}  // namespace vfloc

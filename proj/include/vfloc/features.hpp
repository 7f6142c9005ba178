#pragma once

// Per-component features: fundamental frequency of the regularized step
// signal and the mean change amplitude with outlier exclusion.

#include <string>
#include <vector>

#include "vfloc/eewt.hpp"

namespace vfloc {

struct ComponentFeatures {
    double f_i_hz = 0.0;
    double a_i_v = 0.0;
    int n_changes_used = 0;
    int n_outliers = 0;
    std::string meter;
    int band_index = 0;
};

struct FeatureConfig {
    double peak_floor_ratio = 5.0;  // dominant peak vs the median bin
    double outlier_mad_mult = 3.0;
    int spectrum_pad_factor = 2;
};

// Largest spectral peak of the mean-removed step signal, refined by
// parabolic interpolation. Throws NoDominantPeak for flat signals.
double fundamental_frequency(const RegularizedComponent& reg, const FeatureConfig& cfg = {});

// Keep changes whose |k| lies within 3 MAD of the median |k|; mad_floor
// guards the all-equal case.
std::vector<double> exclude_outliers(const std::vector<double>& changes, double mad_floor = 0.0,
                                     double mad_mult = 3.0);

// Arithmetic mean of |k^(j)|.
double mean_amplitude(const std::vector<double>& changes);

// Full feature extraction for one regularized component.
ComponentFeatures extract_features(const RegularizedComponent& reg, const std::string& meter,
                                   int band_index, const FeatureConfig& cfg = {});

}  // namespace vfloc

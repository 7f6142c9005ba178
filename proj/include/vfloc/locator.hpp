#pragma once

// The iterative identification/localization loop: per-meter decomposition
// into N bands, cross-meter matching by fundamental frequency, propagation
// assessment, the duplicate-point stop rule, and merging of split components
// that are harmonics or carrier-image mirrors of one physical source.

#include <map>
#include <string>
#include <vector>

#include "vfloc/eewt.hpp"
#include "vfloc/features.hpp"
#include "vfloc/grid.hpp"
#include "vfloc/signal.hpp"

namespace vfloc {

struct ComponentGroup {
    double frequency_hz = 0.0;                       // consensus across meters
    std::vector<ComponentFeatures> members;          // one per meter at most
    AmplitudeProfile profile;
    std::string indicated_point;
    double shape_score = 1.0;  // min pairwise zero-lag correlation of step signals
};

struct IterationRecord {
    int n_requested = 0;
    std::map<std::string, SpectrumSegmentation> segmentations;
    std::map<std::string, std::vector<LeakageBand>> leakage;
    std::vector<ComponentGroup> groups;
    bool has_duplicate_point = false;
    bool duplicates_explained = true;  // all same-point pairs harmonically related
};

struct MergedSource {
    std::string supply_point;
    double frequency_hz = 0.0;
    double amplitude_v = 0.0;
    std::vector<double> related_frequencies_hz;
    AmplitudeProfile profile;
};

struct IterationTrace {
    std::vector<IterationRecord> iterations;
    int n_stop = 0;                 // first N with a duplicate indicated point
    int n_identification = 0;       // iteration used for the final source set
    std::vector<ComponentGroup> localization_set;   // groups from n_stop - 1
    std::vector<MergedSource> identification_set;
    std::vector<std::string> warnings;
};

struct SourceReport {
    std::vector<MergedSource> sources;
    std::vector<std::string> warnings;
};

struct LocatorConfig {
    double match_tol_abs_hz = 0.05;
    double match_tol_rel = 0.03;
    double related_tol_bins = 2.0;   // tolerance for the harmonic/mirror test
    int n_max = 12;
    double tie_rel = 0.02;           // localization tie tolerance
    double carrier_frequency_hz = 50.0;
    double shape_warn_threshold = 0.95;
    std::vector<double> forced_boundaries_hz;  // bypass automatic segmentation
    SegmentationConfig seg;
    EwtConfig ewt;
    RegularizeConfig reg;
    LeakageConfig leak;
    FeatureConfig feat;
};

// True when one frequency is the carrier-image mirror |2 fc - f| of the other
// or an integer harmonic n f (n = 1..5) within tol, checked in the given
// order; callers test both orders.
bool harmonic_or_mirror_related(double f_i_hz, double f_j_hz, double fc_hz, double tol_hz);

// Cross-meter grouping by comparable fundamental frequency. Greedy over
// ascending frequency; groups covering fewer than two meters are dropped.
std::vector<ComponentGroup> match_components(
    const std::map<std::string, std::vector<ComponentFeatures>>& per_meter,
    double tol_abs_hz = 0.05, double tol_rel = 0.03);

// Indicated supply point for a group: argmax of its amplitude profile.
std::string assess_propagation(ComponentGroup& group, const GridModel& grid,
                               double tie_rel = 0.02);

// Full iterative run over time-aligned envelopes.
IterationTrace run_iterative(const std::map<std::string, SampledSignal>& envelopes,
                             const GridModel& grid, const LocatorConfig& cfg = {});

SourceReport build_report(const IterationTrace& trace);

}  // namespace vfloc

#pragma once

// Radial low-voltage network model: shared-path impedances, the coupling of a
// load current step into a voltage dip at each measurement point, and argmax
// localization over candidate supply points.
//
// Impedances are carried in milliohm (the usual scale for LV feeders);
// coupling_coefficient converts to volts.

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace vfloc {

struct GridEdge {
    std::string from;
    std::string to;
    double r_mohm = 0.0;
    double x_mohm = 0.0;
};

struct GridConfig {
    std::vector<std::string> nodes;          // ids; display names optional
    std::map<std::string, std::string> node_names;
    std::vector<GridEdge> edges;
    std::string slack;
    double source_r_mohm = 0.0;              // lumped system + transformer
    double source_x_mohm = 0.0;
    double u_nominal_v = 230.0;
};

class GridModel {
public:
    // Validates and freezes the topology. Throws CycleDetected,
    // DisconnectedNode or NegativeImpedance on a bad config.
    static GridModel build(const GridConfig& config);

    [[nodiscard]] const std::vector<std::string>& nodes() const { return node_ids_; }
    [[nodiscard]] const std::string& slack() const { return config_.slack; }
    [[nodiscard]] double u_nominal() const { return config_.u_nominal_v; }
    [[nodiscard]] const GridConfig& config() const { return config_; }
    [[nodiscard]] bool has_node(const std::string& id) const;

    // Edge count on the path from slack to `node`.
    [[nodiscard]] int depth(const std::string& node) const;

    // Sum of the source impedance and the edges shared by the slack->source
    // and slack->meter paths, in milliohm.
    [[nodiscard]] std::complex<double> shared_path_impedance(const std::string& source,
                                                             const std::string& meter) const;

    [[nodiscard]] std::complex<double> source_impedance() const {
        return {config_.source_r_mohm, config_.source_x_mohm};
    }

private:
    GridConfig config_;
    std::vector<std::string> node_ids_;
    std::map<std::string, int> index_;
    std::vector<int> parent_;                        // -1 at slack
    std::vector<std::complex<double>> parent_z_;     // impedance of edge to parent, mohm
    std::vector<int> depth_;

    [[nodiscard]] int index_of(const std::string& id) const;
    [[nodiscard]] std::vector<int> path_from_slack(int node) const;
};

struct AmplitudeProfile {
    std::map<std::string, double> entries;  // measurement point -> amplitude (V)
    double frequency = 0.0;                 // Hz
};

GridModel build_grid(const GridConfig& config);

// Voltage dip at `meter` caused by a resistive current step `delta_current`
// drawn at `source`: delta_current * |shared path impedance|.
double coupling_coefficient(const GridModel& grid, const std::string& source,
                            const std::string& meter, double delta_current_a);

// Node whose amplitude is the global maximum. Entries within tie_rel of the
// maximum count as tied; the tied node closest to the slack wins.
std::string localize(const AmplitudeProfile& profile, const GridModel& grid,
                     double tie_rel = 0.02);

}  // namespace vfloc

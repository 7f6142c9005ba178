#include "vfloc/presets.hpp"

#include "vfloc/errors.hpp"

namespace vfloc {

GridConfig grid_table1_config() {
    GridConfig cfg;
    cfg.nodes = {"P1", "P2", "P3", "P4", "P5", "P6", "P7"};
    cfg.node_names = {
        {"P1", "LV busbar"},     {"P2", "branch node"},   {"P3", "supply point 3"},
        {"P4", "supply point 4"}, {"P5", "branch node"},  {"P6", "supply point 6"},
        {"P7", "branch node"},
    };
    // overhead sections feed P3 via P2, cable spurs hang off P5 and P7
    cfg.edges = {
        {"P1", "P2", 150.0, 31.4},  // section I, 300 m overhead
        {"P2", "P3", 150.0, 31.4},  // section II, 250 m overhead
        {"P2", "P5", 100.0, 69.1},  // section III, 100 m overhead
        {"P5", "P4", 50.0, 2.1},    // section IV, 50 m cable
        {"P3", "P7", 100.0, 69.1},  // section V, 100 m overhead
        {"P7", "P6", 50.0, 2.1},    // section VI, 50 m cable
    };
    cfg.slack = "P1";
    cfg.source_r_mohm = 3.8;   // system + transformer
    cfg.source_x_mohm = 11.7;
    cfg.u_nominal_v = 230.0;
    return cfg;
}

GridModel grid_table1() { return GridModel::build(grid_table1_config()); }

bool is_preset_case(const std::string& case_id) {
    return case_id == "case1" || case_id == "case2" || case_id == "case3" ||
           case_id == "case4" || case_id == "case5";
}

Scenario preset_scenario(const std::string& case_id, const GridModel& grid) {
    Scenario sc;
    sc.grid = grid;
    sc.meters = {"P1", "P3", "P4", "P6"};
    sc.duration_s = 60.0;
    sc.carrier_frequency_hz = 50.0;
    sc.noise_rms_v = 0.1;
    sc.sample_rate_hz = 12500.0;
    sc.seed = 12345;

    // loads: VFS1 2 kW, VFS2 3 kW, VFS3 0.4 kW; phases staggered so switching
    // edges do not coincide
    auto src = [](const std::string& node, double power_kw, double f_hz, double duty,
                  double phase) {
        SourceSpec s;
        s.node = node;
        s.power_kw = power_kw;
        s.mod_frequency_hz = f_hz;
        s.duty = duty;
        s.shape = ModShape::Rectangular;
        s.phase_rad = phase;
        return s;
    };

    if (case_id == "case1") {
        sc.sources = {src("P4", 2.0, 1.7, 0.5, 0.0), src("P4", 3.0, 0.25, 0.5, 2.4)};
    } else if (case_id == "case2") {
        sc.sources = {src("P3", 2.0, 1.7, 0.5, 0.0), src("P4", 3.0, 0.25, 0.5, 2.4)};
    } else if (case_id == "case3") {
        sc.sources = {src("P3", 2.0, 0.23, 0.35, 0.0), src("P6", 3.0, 9.11, 0.35, 2.4),
                      src("P4", 0.4, 1.67, 0.35, 4.8)};
    } else if (case_id == "case4") {
        sc.sources = {src("P6", 2.0, 108.8, 0.35, 0.0), src("P3", 3.0, 91.2, 0.35, 2.4),
                      src("P4", 0.4, 8.8, 0.35, 4.8)};
    } else if (case_id == "case5") {
        sc.sources = {src("P6", 2.0, 0.7, 0.35, 0.0), src("P3", 3.0, 0.1, 0.35, 2.4),
                      src("P4", 0.4, 2.5, 0.35, 4.8)};
    } else {
        throw UnknownCase("unknown scenario preset: " + case_id);
    }
    return sc;
}

}  // namespace vfloc

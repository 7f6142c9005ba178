#pragma once

// Built-in grid and scenario presets.

#include <string>

#include "vfloc/grid.hpp"
#include "vfloc/synth.hpp"

namespace vfloc {

// The default 7-node radial feeder: slack busbar P1, two overhead branches
// and two cable spurs, with candidate supply points P1, P3, P4 and P6.
[[nodiscard]] GridConfig grid_table1_config();
[[nodiscard]] GridModel grid_table1();

// Scenario presets "case1".."case5": fixed disturbing loads (node, power,
// switching frequency), 60 s at 12.5 kHz, meters at P1/P3/P4/P6.
[[nodiscard]] Scenario preset_scenario(const std::string& case_id, const GridModel& grid);

[[nodiscard]] bool is_preset_case(const std::string& case_id);

}  // namespace vfloc

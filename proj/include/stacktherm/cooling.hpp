#pragma once

// Microfluidic cooling strategy generator. Channel layers are described cell by
// cell on the simulation grid: every fluid cell carries a flow direction, and
// channels run from inlet cells on the die boundary to outlet cells on it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stacktherm/stack.hpp"

namespace stacktherm {

struct Coolant {
    std::string name = "water";
    double volumetric_heat_capacity = 4.18e6;  // J/(m^3 K)
    double inlet_temperature = 300.0;          // K
    double flow_rate_per_channel = 1e-8;       // m^3/s
    double convection_coefficient = 0.0;       // W/(m^2 K)

    bool operator==(const Coolant&) const = default;
};

inline constexpr double kLaminarNusselt = 4.36;
inline constexpr double kWaterConductivity = 0.6;  // W/(m K)

/// h = Nu k / D_h for fully developed laminar flow in a rectangular channel.
double laminar_convection_coefficient(double channel_width, double channel_depth,
                                      double fluid_conductivity = kWaterConductivity);

enum class CellKind : std::uint8_t { Wall, Fluid };
enum class FlowDir : std::uint8_t { None, East, West, North, South };  // +x, -x, +y, -y

enum class PatternStyle { Vertical, Horizontal, Bent90 };
std::string_view to_string(PatternStyle style);
std::optional<PatternStyle> pattern_style_from_string(std::string_view s);

struct CellRef {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const CellRef&) const = default;
    auto operator<=>(const CellRef&) const = default;
};

struct CoolingPattern {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<CellKind> kind;  // row-major, row 0 = south edge
    std::vector<FlowDir> flow;   // None for walls
    std::vector<CellRef> inlets;
    std::vector<CellRef> outlets;
    int channel_width_cells = 1;
    int channel_pitch_cells = 2;
    Coolant coolant;

    std::size_t index(std::size_t row, std::size_t col) const { return row * cols + col; }
    std::size_t fluid_cells() const;
    /// Heat-capacity rate of one cell-wide lane, W/K. A channel `w` cells wide
    /// splits its flow evenly over `w` lanes.
    double lane_capacity_rate() const;
    bool operator==(const CoolingPattern&) const = default;
};

/// Width and pitch in meters must be whole multiples of the cell size across
/// the channels (>= 1 and >= 2 cells) with width <= pitch, and the pitch must
/// divide the transverse extent (each half-extent for bent90).
CoolingPattern generate_pattern(const Grid& grid, PatternStyle style, double channel_width, double channel_pitch,
                                const Coolant& coolant);
/// Same, with geometry given directly in cells.
CoolingPattern generate_pattern_cells(std::size_t rows, std::size_t cols, PatternStyle style, int width_cells,
                                      int pitch_cells, const Coolant& coolant);

enum class PatternIssue { DeadEnd, Cycle, Unreachable, Merge, InletNotOnBoundary, OutletNotOnBoundary,
                          OutletNotExiting, BadInletOutlet, Shape };
std::string_view to_string(PatternIssue issue);

struct PatternViolation {
    PatternIssue issue;
    CellRef cell;
    std::string message;
};

std::vector<PatternViolation> validate_pattern(const CoolingPattern& pattern);

/// One ordered cell sequence per lane, inlet to outlet, in inlet order.
std::vector<std::vector<CellRef>> channel_paths(const CoolingPattern& pattern);

CoolingPattern parse_pattern(std::string_view text);
std::string emit_pattern(const CoolingPattern& pattern);

}  // namespace stacktherm

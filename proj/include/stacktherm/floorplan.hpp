#pragma once

// Floorplan designer: template and area-driven generation, the manual file
// format, validation, and rasterization onto the simulation grid.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stacktherm/stack.hpp"

namespace stacktherm {

struct Block {
    std::string name;
    double width = 0.0;
    double height = 0.0;
    double left_x = 0.0;
    double bottom_y = 0.0;

    double area() const { return width * height; }
    double right() const { return left_x + width; }
    double top() const { return bottom_y + height; }
    bool operator==(const Block&) const = default;
};

struct Floorplan {
    DieOutline outline;
    std::vector<Block> blocks;

    const Block* find(std::string_view name) const;
    bool operator==(const Floorplan&) const = default;
};

/// Prefix for zero-power whitespace blocks.
inline constexpr std::string_view kFillerPrefix = "_fill_";
bool is_filler(std::string_view block_name);

struct AreaEntry {
    std::string name;
    double area = 0.0;                   // m^2
    std::optional<double> aspect_hint;   // width / height
};
using AreaBudget = std::vector<AreaEntry>;

enum class FloorplanTemplate { CoreGrid, BankGrid };

/// Most-square factorization rows x cols of n with rows <= cols.
std::pair<int, int> grid_factorization(int n);

/// n equal blocks named `<prefix>_<first_index + k>` in row-major order from
/// the south-west corner. An empty prefix selects "C" for cores and "B" for banks.
Floorplan generate_template(const DieOutline& outline, FloorplanTemplate kind, int count,
                            std::string_view prefix = {}, int first_index = 0);

/// Deterministic slicing packing: entries sorted by area (descending, stable),
/// each one cut as a strip off the remaining rectangle. A budget short of the
/// outline gets a `_fill_0` filler; an oversized one is scaled down.
Floorplan generate_from_areas(const DieOutline& outline, const AreaBudget& budget);

/// Throws Error{DuplicateName|Overlap|OutOfOutline|CoverageGap|Domain} on the
/// first invariant violation. `lines` optionally maps block index to source line.
void check_floorplan(const Floorplan& floorplan, const std::vector<int>* lines = nullptr);

/// Without an outline the die is taken as the bounding box of the blocks
/// anchored at the origin.
Floorplan parse_floorplan(std::string_view text, std::optional<DieOutline> outline = std::nullopt);
std::string emit_floorplan(const Floorplan& floorplan);

struct Rasterization {
    Grid grid;
    std::vector<std::string> block_names;  // floorplan order
    std::vector<std::size_t> owner;        // per cell, index into block_names
    std::vector<std::size_t> cell_counts;  // per block
    std::vector<std::size_t> center_cell;  // per block, cell under the block center

    std::size_t block_index(std::string_view name) const;
};

/// Cell-center containment; the probe point is shifted by (-eps, -eps) so a
/// center on a shared edge goes to the block on its south-west side.
Rasterization rasterize(const Floorplan& floorplan, const Grid& grid);

}  // namespace stacktherm

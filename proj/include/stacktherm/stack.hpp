#pragma once

// Geometric and material data model shared by every other module.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stacktherm {

struct Material {
    std::string name;
    double thermal_conductivity = 0.0;      // W/(m K)
    double volumetric_heat_capacity = 0.0;  // J/(m^3 K)

    bool operator==(const Material&) const = default;
};

/// Built-in materials: silicon, tim, copper, water. Custom ones are declared in
/// the stack file and shadow these by name.
const std::vector<Material>& default_materials();

struct DieOutline {
    double width = 0.0;   // m
    double height = 0.0;  // m

    double area() const { return width * height; }
    bool operator==(const DieOutline&) const = default;
};

enum class LayerKind { Die, Tim, Microchannel, Spreader, Sink };

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> layer_kind_from_string(std::string_view s);

struct Layer {
    LayerKind kind = LayerKind::Die;
    double thickness = 0.0;  // m
    std::string material;
    std::optional<std::string> floorplan;  // kind == Die
    std::optional<std::string> pattern;    // kind == Microchannel

    bool operator==(const Layer&) const = default;
};

inline constexpr double kDefaultAmbient = 318.15;          // K
inline constexpr double kDefaultSinkHeatTransfer = 3.0e4;  // W/(m^2 K), sink side to ambient

/// Layer 0 is farthest from the heat sink; the last layer is on the sink side
/// and is the only one that exchanges heat with ambient.
struct Stack {
    DieOutline outline;
    std::vector<Layer> layers;
    double ambient_temperature = kDefaultAmbient;
    double sink_heat_transfer = kDefaultSinkHeatTransfer;
    std::vector<Material> materials;  // custom declarations only

    /// Custom declaration first, then the built-ins. Throws if unknown.
    const Material& material(std::string_view name) const;
    std::vector<std::size_t> die_indices() const;

    bool operator==(const Stack&) const = default;
};

struct Violation {
    std::vector<int> layers;  // offending layer indices, empty for stack-wide issues
    std::string message;
};

using ValidationReport = std::vector<Violation>;

ValidationReport validate_stack(const Stack& stack);

struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double cell_width = 0.0;   // m, along x / columns
    double cell_height = 0.0;  // m, along y / rows

    std::size_t cells() const { return rows * cols; }
    std::size_t index(std::size_t row, std::size_t col) const { return row * cols + col; }
    double cell_area() const { return cell_width * cell_height; }
    bool operator==(const Grid&) const = default;
};

/// Row 0 is the south edge (smallest y), column 0 the west edge (smallest x).
Grid grid_for(const DieOutline& outline, long rows, long cols);

Stack parse_stack(std::string_view text);
std::string emit_stack(const Stack& stack);

}  // namespace stacktherm

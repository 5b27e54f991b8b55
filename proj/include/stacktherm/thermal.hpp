#pragma once

// Finite-volume thermal model of a layer stack. Every (layer, row, col) cell is
// one node; solid cells conduct to their six neighbors, fluid cells exchange
// heat with adjacent solids through the channel convection coefficient and
// carry enthalpy downstream with first-order upwind advection.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stacktherm/cooling.hpp"
#include "stacktherm/floorplan.hpp"
#include "stacktherm/linear_solver.hpp"
#include "stacktherm/power.hpp"
#include "stacktherm/stack.hpp"

namespace stacktherm {

/// Per-layer inputs keyed by layer index: rasterized floorplans for die layers
/// and cooling patterns for microchannel layers.
struct LayerInputs {
    std::map<std::size_t, Rasterization> rasters;
    std::map<std::size_t, CoolingPattern> patterns;
};

struct Conductance {
    std::size_t a = 0;
    std::size_t b = 0;
    double value = 0.0;  // W/K
};

struct AdvectionLink {
    std::size_t node = 0;
    std::optional<std::size_t> upstream;  // empty: fed by the coolant inlet
    double capacity_rate = 0.0;           // W/K
    double inlet_temperature = 0.0;       // K, used when upstream is empty
};

struct ChannelLane {
    std::size_t layer = 0;
    std::vector<std::size_t> nodes;  // inlet to outlet
    double capacity_rate = 0.0;
    double inlet_temperature = 0.0;
};

struct ThermalNetwork {
    Grid grid;
    std::size_t layer_count = 0;
    std::vector<LayerKind> layer_kinds;
    double ambient_temperature = 0.0;

    std::vector<char> fluid;                 // per node
    std::vector<Conductance> conductances;   // solid-solid and solid-fluid, each pair once
    std::vector<double> ambient_conductance; // per node, sink side only
    std::vector<double> capacitance;         // per node, J/K
    std::vector<AdvectionLink> advection;    // one per fluid node
    std::vector<ChannelLane> lanes;

    LayerInputs inputs;

    std::size_t node_count() const { return layer_count * grid.cells(); }
    std::size_t node(std::size_t layer, std::size_t cell) const { return layer * grid.cells() + cell; }

    /// A T = b without sources; b holds the ambient and inlet terms.
    SparseMatrix system_matrix() const;
    Vector boundary_rhs() const;
};

ThermalNetwork assemble(const Stack& stack, const Grid& grid, const LayerInputs& inputs);

/// Spreads each block's power evenly over the cells it owns, on every die layer
/// that carries the block. A block too small to own a cell deposits its power
/// in the cell under its center. Names missing from `block_power` get 0 W.
std::vector<double> cell_power(const ThermalNetwork& network, const std::map<std::string, double>& block_power);

struct ThermalField {
    Grid grid;
    std::vector<std::vector<double>> layers;  // per layer, row-major cells, K
    std::optional<double> timestamp;          // s; empty for steady state

    double at(std::size_t layer, std::size_t row, std::size_t col) const {
        return layers[layer][grid.index(row, col)];
    }
    double max() const;
    double min() const;
};

ThermalField solve_steady(const ThermalNetwork& network, const std::vector<double>& cell_power,
                          const SolveOptions& options = {}, SolveStats* stats = nullptr);

struct TransientOptions {
    double duration = 0.0;
    double dt = 1e-4;
    std::size_t record_every = 1;  // keep every n-th step; the final step is always kept
    std::optional<ThermalField> initial;  // default: ambient everywhere
};

/// Implicit Euler. `cell_power_at(k)` gives the per-cell power of trace interval
/// k; a step uses the interval containing its midpoint, holding the last one.
ThermalField field_from_vector(const ThermalNetwork& network, const Vector& t, std::optional<double> timestamp);
Vector vector_from_field(const ThermalNetwork& network, const ThermalField& field);

std::vector<ThermalField> solve_transient(const ThermalNetwork& network,
                                          const std::vector<std::vector<double>>& interval_cell_power,
                                          double sampling_interval, const TransientOptions& options);

struct EnergyBalance {
    double power_in = 0.0;
    double sink_out = 0.0;
    double coolant_out = 0.0;
    double relative_error() const;
};

EnergyBalance energy_balance(const ThermalNetwork& network, const ThermalField& field,
                             const std::vector<double>& cell_power);

struct ChannelReport {
    double inlet_temperature = 0.0;
    double outlet_temperature = 0.0;
    double absorbed = 0.0;   // W, sum of convective inflow along the lane
    double advected = 0.0;   // W, capacity_rate * (T_out - T_in)
};

/// Outlet temperature of every lane of the microchannel layer `layer`, in the
/// pattern's inlet order. Throws Error{PatternMismatch} when the pattern does
/// not belong to that layer of the network.
std::vector<double> coolant_outlet_temperatures(const ThermalNetwork& network, const ThermalField& field,
                                                const CoolingPattern& pattern, std::size_t layer);
std::vector<ChannelReport> channel_reports(const ThermalNetwork& network, const ThermalField& field, std::size_t layer);

struct BlockStat {
    std::size_t layer = 0;
    std::string block;
    double mean = 0.0;
    double max = 0.0;
};

struct LayerStat {
    std::size_t layer = 0;
    double mean = 0.0;
    double max = 0.0;
};

struct FieldSummary {
    std::vector<BlockStat> blocks;
    std::vector<LayerStat> layers;
    double stack_max = 0.0;

    const BlockStat* hottest_block() const;
};

FieldSummary summarize(const ThermalField& field, const std::map<std::size_t, Rasterization>& rasters);

/// Pearson correlation of two layers' cell temperatures.
double layer_correlation(const ThermalField& field, std::size_t a, std::size_t b);

std::string emit_heatmap(const ThermalField& field, std::size_t layer);
std::string emit_summary(const FieldSummary& summary);

}  // namespace stacktherm

#pragma once

// One design point through power -> assemble -> solve -> summarize.

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "stacktherm/cooling.hpp"
#include "stacktherm/floorplan.hpp"
#include "stacktherm/power.hpp"
#include "stacktherm/stack.hpp"
#include "stacktherm/thermal.hpp"

namespace stacktherm {

struct Workload {
    std::string name;
    std::variant<ActivityTrace, RawStats, PowerTrace> trace;
};

/// A fully concrete stack: floorplans and patterns keyed by layer index.
struct PointModel {
    Stack stack;
    std::map<std::size_t, Floorplan> floorplans;
    std::map<std::size_t, CoolingPattern> patterns;
    std::vector<BlockPowerModel> models;
    MappingRules rules;
};

/// Die-layer block names in layer order, each name once.
std::vector<std::string> block_names(const PointModel& model);

/// Raw statistics go through the mapping rules, activity traces straight to
/// the power model, and power traces are used as given.
PowerTrace workload_power(const PointModel& model, const Workload& workload);

struct SimulationResult {
    ThermalNetwork network;
    ThermalField field;
    FieldSummary summary;
    EnergyBalance balance;
    PowerTrace power;
    std::vector<double> cell_power;
    SolveStats solve;
};

ThermalNetwork build_network(const PointModel& model, const Grid& grid);

/// Steady state under the time-averaged block power of the workload.
SimulationResult simulate_steady(const PointModel& model, const Grid& grid, const Workload& workload,
                                 const SolveOptions& options = {});
SimulationResult simulate_steady(const PointModel& model, ThermalNetwork network, const Workload& workload,
                                 const SolveOptions& options = {});

/// Die layer with the highest average power under `power`.
std::size_t hottest_die(const PointModel& model, const PowerTrace& power);

}  // namespace stacktherm

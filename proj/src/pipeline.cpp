#include "stacktherm/pipeline.hpp"

#include <set>

#include "stacktherm/error.hpp"

namespace stacktherm {

std::vector<std::string> block_names(const PointModel& model) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& [layer, fp] : model.floorplans)
        for (const auto& b : fp.blocks)
            if (seen.insert(b.name).second) out.push_back(b.name);
    return out;
}

PowerTrace workload_power(const PointModel& model, const Workload& workload) {
    const auto blocks = block_names(model);
    return std::visit(
        [&](const auto& trace) -> PowerTrace {
            using T = std::decay_t<decltype(trace)>;
            if constexpr (std::is_same_v<T, ActivityTrace>) {
                return trace_power(model.models, trace, blocks);
            } else if constexpr (std::is_same_v<T, RawStats>) {
                return trace_power(model.models, apply_mapping(trace, model.rules, model.models), blocks);
            } else {
                PowerTrace out;
                out.sampling_interval = trace.sampling_interval;
                for (const auto& name : blocks) {
                    out.names.push_back(name);
                    const auto* col = trace.column(name);
                    out.columns.push_back(col ? *col : std::vector<double>(std::max<std::size_t>(trace.intervals(), 1), 0.0));
                }
                return out;
            }
        },
        workload.trace);
}

ThermalNetwork build_network(const PointModel& model, const Grid& grid) {
    LayerInputs inputs;
    for (const auto& [layer, fp] : model.floorplans) inputs.rasters.emplace(layer, rasterize(fp, grid));
    inputs.patterns = model.patterns;
    return assemble(model.stack, grid, inputs);
}

SimulationResult simulate_steady(const PointModel& model, const Grid& grid, const Workload& workload,
                                 const SolveOptions& options) {
    return simulate_steady(model, build_network(model, grid), workload, options);
}

SimulationResult simulate_steady(const PointModel& model, ThermalNetwork network, const Workload& workload,
                                 const SolveOptions& options) {
    SimulationResult r;
    r.power = workload_power(model, workload);
    const auto mean = mean_power(r.power);
    std::map<std::string, double> per_block;
    for (std::size_t i = 0; i < r.power.names.size(); ++i) per_block[r.power.names[i]] = mean[i];
    r.network = std::move(network);
    r.cell_power = cell_power(r.network, per_block);
    r.field = solve_steady(r.network, r.cell_power, options, &r.solve);
    r.summary = summarize(r.field, r.network.inputs.rasters);
    r.balance = energy_balance(r.network, r.field, r.cell_power);
    return r;
}

std::size_t hottest_die(const PointModel& model, const PowerTrace& power) {
    const auto mean = mean_power(power);
    std::map<std::string, double> per_block;
    for (std::size_t i = 0; i < power.names.size(); ++i) per_block[power.names[i]] = mean[i];
    std::size_t best = model.stack.layers.size();
    double best_power = -1.0;
    for (const auto& [layer, fp] : model.floorplans) {
        double total = 0.0;
        for (const auto& b : fp.blocks) {
            auto it = per_block.find(b.name);
            if (it != per_block.end()) total += it->second;
        }
        if (total > best_power) {
            best_power = total;
            best = layer;
        }
    }
    if (best == model.stack.layers.size()) throw Error(ErrorKind::EmptyInput, "stack has no die layer");
    return best;
}

}  // namespace stacktherm

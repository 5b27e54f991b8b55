#pragma once

// Block-level power model driven by activity traces. Stands in for the
// performance/power simulator front end: activity statistics are translated by
// mapping rules into per-block activity factors, then into per-block watts.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace stacktherm {

struct BlockPowerModel {
    std::string block;
    double static_power = 0.0;            // W
    double switching_energy = 0.0;        // J per access/toggle
    double clock_frequency = 1.0;         // Hz
    double activity_factor_default = 0.0; // [0, 1]

    bool operator==(const BlockPowerModel&) const = default;
};

/// static + activity * switching_energy * clock_frequency.
double block_power(const BlockPowerModel& model, double activity);

void check_model(const BlockPowerModel& model);

/// Per-block columns sampled at a fixed interval. The tag keeps activity,
/// power and raw statistic traces from being mixed up.
template <typename Tag>
struct SampledTrace {
    double sampling_interval = 0.0;  // s
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // columns[i] belongs to names[i]

    std::size_t intervals() const { return columns.empty() ? 0 : columns.front().size(); }
    const std::vector<double>* column(std::string_view name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return &columns[i];
        return nullptr;
    }
    bool operator==(const SampledTrace&) const = default;
};

struct ActivityTag {};
struct PowerTag {};
struct StatTag {};
using ActivityTrace = SampledTrace<ActivityTag>;
using PowerTrace = SampledTrace<PowerTag>;
using RawStats = SampledTrace<StatTag>;

struct MappingRule {
    std::string source_stat;
    std::string target_block;
    double scale = 1.0;
    double offset = 0.0;

    bool operator==(const MappingRule&) const = default;
};
using MappingRules = std::vector<MappingRule>;

/// Each target column is clamp(sum over its rules of scale*source + offset, 0, 1);
/// model blocks without a rule get their default activity.
ActivityTrace apply_mapping(const RawStats& raw, const MappingRules& rules,
                            const std::vector<BlockPowerModel>& models);

/// Emits one column per entry of `blocks`. Modeled blocks missing from the
/// activity trace run at their default activity; unmodeled blocks (fillers)
/// emit 0 W.
PowerTrace trace_power(const std::vector<BlockPowerModel>& models, const ActivityTrace& activity,
                       const std::vector<std::string>& blocks);

/// Column-wise mean over the trace, used for steady-state runs.
std::vector<double> mean_power(const PowerTrace& trace);

/// Sum over blocks and intervals of P * interval.
double trace_energy(const PowerTrace& trace);

std::vector<double> memory_bank_power(std::size_t bank_count, double per_bank_static, double per_access_energy,
                                      const std::vector<double>& access_rates);

/// Capacity-style knob: ratio r multiplies static power by r^static_exponent
/// and switching energy by r^energy_exponent on every target block.
struct CapacityKnob {
    std::string name;
    std::vector<std::string> targets;
    double static_exponent = 1.0;
    double energy_exponent = 0.5;

    bool operator==(const CapacityKnob&) const = default;
};

std::vector<BlockPowerModel> apply_capacity_scaling(std::vector<BlockPowerModel> models, const CapacityKnob& knob,
                                                    double ratio);

enum class WorkloadProfile { Uniform, OneHot, Ramp };

struct WorkloadSpec {
    WorkloadProfile profile = WorkloadProfile::Uniform;
    std::vector<std::string> blocks;
    std::string hot_block;         // OneHot
    double base_activity = 0.1;
    double skew = 1.0;             // OneHot: hot block runs at base * skew
    double peak_activity = 1.0;    // Ramp: linear from base to peak
    std::size_t intervals = 1;
    double sampling_interval = 1e-3;
};

ActivityTrace synthesize_workload(const WorkloadSpec& spec);

std::vector<BlockPowerModel> parse_power_models(std::string_view text);
std::string emit_power_models(const std::vector<BlockPowerModel>& models);

MappingRules parse_mapping_rules(std::string_view text);
std::string emit_mapping_rules(const MappingRules& rules);

template <typename Tag>
SampledTrace<Tag> parse_trace(std::string_view text);
template <typename Tag>
std::string emit_trace(const SampledTrace<Tag>& trace);

}  // namespace stacktherm

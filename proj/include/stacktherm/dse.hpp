#pragma once

// Design-space exploration: enumerate stacking orders, cooling insertions and
// capacity knobs, run the steady pipeline per point and workload, and rank by
// worst-case stack maximum temperature.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stacktherm/pipeline.hpp"

namespace stacktherm {

struct StackVariant {
    std::string name;
    std::vector<std::size_t> order;  // order[i] = base layer placed at position i
};

enum class StackingPolicy { AllDiePermutations, NamedList };

/// All-permutations keeps non-die layers in place, permutes the die layers and
/// drops variants whose layer lists are equal. Named lists must be
/// permutations of the base layers that leave non-die layers in place.
std::vector<StackVariant> enumerate_stackings(const PointModel& base, StackingPolicy policy,
                                              const std::vector<StackVariant>& named = {});

enum class CoolingPosition { None, BelowHottestDie, Explicit };

struct CoolingVariant {
    std::string name;
    std::optional<PatternStyle> style;  // empty: no channel layer
    CoolingPosition position = CoolingPosition::None;
    std::size_t index = 0;              // Explicit: insertion index of the channel layer
};

/// Channel layer that every cooling variant inserts.
struct ChannelLayerSpec {
    double thickness = 1e-4;
    std::string material = "silicon";
    int width_cells = 1;
    int pitch_cells = 2;
    Coolant coolant;  // convection_coefficient <= 0 selects the laminar default
};

/// One variant per style (at `position`), preceded by the no-cooling variant
/// when `include_none`. Explicit indices past the layer count are rejected.
std::vector<CoolingVariant> enumerate_cooling(std::size_t layer_count, const std::vector<PatternStyle>& styles,
                                              CoolingPosition position, std::size_t explicit_index = 0,
                                              bool include_none = false);

struct DesignPoint {
    std::string name;
    std::string stacking;
    std::string cooling;  // empty: none
    std::map<std::string, double> knobs;
};

struct SweepDefinition {
    std::string baseline;
    ChannelLayerSpec channel;
    bool coolant_h_auto = true;
    std::vector<StackVariant> stackings;
    bool all_permutations = false;
    std::vector<CoolingVariant> coolings;
    std::vector<CapacityKnob> knobs;
    std::vector<DesignPoint> points;
    std::vector<std::string> workloads;  // empty: all
};

SweepDefinition parse_sweep(std::string_view text, const PointModel& base);

/// Concrete model for one point: permuted layers, inserted channel layer with
/// a generated pattern, knob-scaled power models. `hottest_workload` decides
/// the below_hottest_die position.
PointModel realize_point(const PointModel& base, const Grid& grid, const SweepDefinition& sweep,
                         const DesignPoint& point, const Workload& hottest_workload);

struct SweepEntry {
    std::string point;
    std::string workload;
    double stack_max = 0.0;
    std::vector<double> layer_max;
    double runtime = 0.0;  // s
};

struct SweepError {
    std::string point;
    std::string message;
};

struct SweepResult {
    std::vector<std::string> points;  // declaration order
    std::vector<std::string> workloads;
    std::vector<SweepEntry> entries;  // point-major, workload-minor, successful points only
    std::vector<SweepError> errors;
    std::vector<std::string> ranking;

    const SweepEntry* find(std::string_view point, std::string_view workload) const;
};

struct SweepConfig {
    std::size_t workers = 0;  // 0: hardware concurrency
    SolveOptions solve;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

SweepResult run_sweep(const PointModel& base, const Grid& grid, const SweepDefinition& sweep,
                      const std::vector<Workload>& workloads, const SweepConfig& config = {});

/// Orders points by worst-case stack max over workloads, then by the mean over
/// workloads, then by declaration order.
std::vector<std::string> rank_points(const std::vector<std::string>& points, const std::vector<SweepEntry>& entries);

struct ComparisonRow {
    std::string point;
    std::string workload;
    double max_k = 0.0;
    double delta_k = 0.0;
};

struct ComparisonReport {
    std::string baseline;
    std::vector<ComparisonRow> rows;
    std::vector<std::string> ranking;

    std::string to_tsv() const;
    std::string to_text() const;
};

ComparisonReport compare_report(const SweepResult& result, std::string_view baseline);

}  // namespace stacktherm

#pragma once

// The unified design document: every input of a run as text, keyed the way
// the files reference each other. The CLI builds one from a manifest on disk,
// the HTTP service receives it as JSON; both resolve and run it the same way.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stacktherm/dse.hpp"
#include "stacktherm/pipeline.hpp"

namespace stacktherm {

enum class WorkloadKind { Activity, Stats, Power };

struct WorkloadSource {
    std::string name;
    WorkloadKind kind = WorkloadKind::Activity;
    std::string text;
    bool operator==(const WorkloadSource&) const = default;
};

struct TransientSettings {
    double duration = 0.0;
    double dt = 1e-4;
    bool operator==(const TransientSettings&) const = default;
};

struct DesignDocument {
    std::string name;
    long rows = 64;
    long cols = 64;
    std::string stack;                         // stack file text
    std::map<std::string, std::string> files;  // floorplans and patterns by reference
    std::string power_models;
    std::string mapping_rules;
    std::vector<WorkloadSource> workloads;
    std::string sweep;
    std::optional<TransientSettings> transient;

    bool operator==(const DesignDocument&) const = default;
};

nlohmann::json to_json(const DesignDocument& doc);
DesignDocument design_from_json(const nlohmann::json& j);

/// Reads a manifest (`name`, `resolution`, `stack`, `power_models`, `mapping`,
/// `activity|stats|power <name> <path>`, `sweep`, `transient`) and every file
/// it references; paths resolve relative to the referencing file.
DesignDocument load_manifest(const std::string& path);

struct ResolvedDesign {
    Grid grid;
    PointModel model;
    std::vector<Workload> workloads;
    std::optional<SweepDefinition> sweep;
};

/// Parses every part. Errors name the offending file and line.
ResolvedDesign resolve(const DesignDocument& doc);

/// Every problem found, one message each; empty when the document can run.
std::vector<std::string> validate_design(const DesignDocument& doc);

struct RunArtifacts {
    std::map<std::size_t, std::string> heatmaps;  // layer -> grid text
    std::string summary;
    std::string coolant;    // per-lane outlet table, empty without channels
    std::string transient;  // time series of stack max, empty unless requested
    SimulationResult result;
};

/// Steady simulation of the document under one workload (default: the first),
/// plus a transient run when the document asks for one. Heatmaps cover die and
/// microchannel layers.
RunArtifacts run_design(const DesignDocument& doc, const std::string& workload = {});

struct SweepArtifacts {
    SweepResult result;
    ComparisonReport report;
};

SweepArtifacts sweep_design(const DesignDocument& doc, const SweepConfig& config = {});

nlohmann::json heatmap_json(const ThermalField& field, std::size_t layer);
nlohmann::json summary_json(const FieldSummary& summary);
nlohmann::json ranking_json(const SweepArtifacts& sweep);

}  // namespace stacktherm

#include "stacktherm/design.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "stacktherm/error.hpp"
#include "stacktherm/text.hpp"

namespace stacktherm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view to_string(WorkloadKind k) {
    switch (k) {
        case WorkloadKind::Activity: return "activity";
        case WorkloadKind::Stats: return "stats";
        case WorkloadKind::Power: return "power";
    }
    return "activity";
}

std::optional<WorkloadKind> workload_kind_from_string(std::string_view s) {
    for (auto k : {WorkloadKind::Activity, WorkloadKind::Stats, WorkloadKind::Power})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

// Re-throws parse failures with the source file in front of the message.
template <typename F>
auto in_file(const std::string& file, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), file + ": " + e.what(), e.names());
    }
}

std::string lookup(const DesignDocument& doc, const std::string& ref) {
    auto it = doc.files.find(ref);
    if (it == doc.files.end()) throw Error(ErrorKind::NotFound, "design has no file '" + ref + "'", {ref});
    return it->second;
}

}  // namespace

json to_json(const DesignDocument& doc) {
    json j;
    j["name"] = doc.name;
    j["resolution"] = {doc.rows, doc.cols};
    j["stack"] = doc.stack;
    j["files"] = doc.files;
    j["power_models"] = doc.power_models;
    j["mapping_rules"] = doc.mapping_rules;
    j["workloads"] = json::array();
    for (const auto& w : doc.workloads)
        j["workloads"].push_back({{"name", w.name}, {"kind", std::string(to_string(w.kind))}, {"text", w.text}});
    j["sweep"] = doc.sweep;
    if (doc.transient) j["transient"] = {{"duration", doc.transient->duration}, {"dt", doc.transient->dt}};
    else j["transient"] = nullptr;
    return j;
}

DesignDocument design_from_json(const json& j) {
    try {
        if (!j.is_object()) throw Error(ErrorKind::Parse, "design document must be a JSON object");
        DesignDocument doc;
        doc.name = j.value("name", std::string{});
        if (j.contains("resolution")) {
            const auto& r = j.at("resolution");
            if (!r.is_array() || r.size() != 2) throw Error(ErrorKind::Parse, "resolution must be [rows, cols]");
            doc.rows = r.at(0).get<long>();
            doc.cols = r.at(1).get<long>();
        }
        doc.stack = j.at("stack").get<std::string>();
        if (j.contains("files")) doc.files = j.at("files").get<std::map<std::string, std::string>>();
        doc.power_models = j.value("power_models", std::string{});
        doc.mapping_rules = j.value("mapping_rules", std::string{});
        if (j.contains("workloads")) {
            for (const auto& w : j.at("workloads")) {
                WorkloadSource src;
                src.name = w.at("name").get<std::string>();
                auto kind = workload_kind_from_string(w.value("kind", std::string("activity")));
                if (!kind) throw Error(ErrorKind::Parse, "workload '" + src.name + "' has an unknown kind");
                src.kind = *kind;
                src.text = w.at("text").get<std::string>();
                doc.workloads.push_back(std::move(src));
            }
        }
        if (j.contains("sweep") && !j.at("sweep").is_null()) doc.sweep = j.at("sweep").get<std::string>();
        if (j.contains("transient") && !j.at("transient").is_null()) {
            const auto& t = j.at("transient");
            doc.transient = TransientSettings{t.at("duration").get<double>(), t.value("dt", 1e-4)};
        }
        return doc;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed design document: ") + e.what());
    }
}

DesignDocument load_manifest(const std::string& path) {
    const fs::path manifest(path);
    const fs::path dir = manifest.parent_path();
    const std::string source = text::read_file(path);
    const std::string file = manifest.filename().string();
    DesignDocument doc;
    doc.name = manifest.stem().string();
    auto read_rel = [](const fs::path& base, const std::string& rel) { return text::read_file((base / rel).string()); };

    bool have_stack = false;
    for (const auto& line : text::tokenize(source)) {
        const auto& f = line.fields;
        auto fail = [&](const std::string& msg) { throw Error(ErrorKind::Parse, file + ": line " + std::to_string(line.number) + ": " + msg); };
        const std::string& head = f[0];
        if (head == "name" && f.size() == 2) {
            doc.name = f[1];
        } else if (head == "resolution" && f.size() == 3) {
            doc.rows = text::parse_long(f[1], "rows", line.number);
            doc.cols = text::parse_long(f[2], "cols", line.number);
        } else if (head == "stack" && f.size() == 2) {
            const fs::path stack_path = dir / f[1];
            doc.stack = text::read_file(stack_path.string());
            have_stack = true;
            Stack stack = in_file(f[1], [&] { return parse_stack(doc.stack); });
            for (const auto& layer : stack.layers) {
                for (const auto* ref : {&layer.floorplan, &layer.pattern}) {
                    if (*ref && !doc.files.count(**ref)) doc.files[**ref] = read_rel(stack_path.parent_path(), **ref);
                }
            }
        } else if (head == "power_models" && f.size() == 2) {
            doc.power_models = read_rel(dir, f[1]);
        } else if (head == "mapping" && f.size() == 2) {
            doc.mapping_rules = read_rel(dir, f[1]);
        } else if (auto kind = workload_kind_from_string(head); kind && f.size() == 3) {
            doc.workloads.push_back(WorkloadSource{f[1], *kind, read_rel(dir, f[2])});
        } else if (head == "sweep" && f.size() == 2) {
            doc.sweep = read_rel(dir, f[1]);
        } else if (head == "transient" && f.size() == 3) {
            doc.transient = TransientSettings{text::parse_double(f[1], "duration", line.number),
                                              text::parse_double(f[2], "dt", line.number)};
        } else {
            fail("unrecognized manifest line '" + text::join(f, " ") + "'");
        }
    }
    if (!have_stack) throw Error(ErrorKind::Parse, file + ": missing 'stack' line");
    return doc;
}

ResolvedDesign resolve(const DesignDocument& doc) {
    ResolvedDesign r;
    r.model.stack = in_file("stack", [&] { return parse_stack(doc.stack); });
    if (auto report = validate_stack(r.model.stack); !report.empty())
        throw Error(ErrorKind::Validation, "stack: " + report.front().message);
    r.grid = grid_for(r.model.stack.outline, doc.rows, doc.cols);
    for (std::size_t i = 0; i < r.model.stack.layers.size(); ++i) {
        const Layer& layer = r.model.stack.layers[i];
        if (layer.floorplan) {
            const std::string& ref = *layer.floorplan;
            const std::string body = lookup(doc, ref);
            r.model.floorplans.emplace(i, in_file(ref, [&] { return parse_floorplan(body, r.model.stack.outline); }));
        }
        if (layer.pattern) {
            const std::string& ref = *layer.pattern;
            const std::string body = lookup(doc, ref);
            CoolingPattern p = in_file(ref, [&] { return parse_pattern(body); });
            if (p.rows != r.grid.rows || p.cols != r.grid.cols)
                throw Error(ErrorKind::PatternMismatch, ref + ": pattern grid does not match the design resolution");
            if (auto issues = validate_pattern(p); !issues.empty())
                throw Error(ErrorKind::InvalidPattern, ref + ": " + issues.front().message);
            r.model.patterns.emplace(i, std::move(p));
        }
    }
    r.model.models = in_file("power_models", [&] { return parse_power_models(doc.power_models); });
    r.model.rules = in_file("mapping_rules", [&] { return parse_mapping_rules(doc.mapping_rules); });
    for (const auto& w : doc.workloads) {
        Workload wl;
        wl.name = w.name;
        in_file("workload " + w.name, [&] {
            switch (w.kind) {
                case WorkloadKind::Activity: wl.trace = parse_trace<ActivityTag>(w.text); break;
                case WorkloadKind::Stats: wl.trace = parse_trace<StatTag>(w.text); break;
                case WorkloadKind::Power: wl.trace = parse_trace<PowerTag>(w.text); break;
            }
            return 0;
        });
        r.workloads.push_back(std::move(wl));
    }
    if (!doc.sweep.empty()) r.sweep = in_file("sweep", [&] { return parse_sweep(doc.sweep, r.model); });
    return r;
}

std::vector<std::string> validate_design(const DesignDocument& doc) {
    std::vector<std::string> out;
    try {
        Stack stack = parse_stack(doc.stack);
        for (const auto& v : validate_stack(stack)) {
            std::string where;
            for (int l : v.layers) where += (where.empty() ? "layer " : ", ") + std::to_string(l);
            out.push_back("stack: " + (where.empty() ? "" : where + ": ") + v.message);
        }
    } catch (const std::exception& e) {
        out.push_back(std::string("stack: ") + e.what());
    }
    if (!out.empty()) return out;
    try {
        ResolvedDesign r = resolve(doc);
        if (r.workloads.empty()) out.push_back("design has no workloads");
        // Check that every workload turns into power for this model.
        for (const auto& w : r.workloads) {
            try {
                (void)workload_power(r.model, w);
            } catch (const std::exception& e) {
                out.push_back("workload " + w.name + ": " + e.what());
            }
        }
    } catch (const std::exception& e) {
        out.push_back(e.what());
    }
    return out;
}

RunArtifacts run_design(const DesignDocument& doc, const std::string& workload_name) {
    ResolvedDesign r = resolve(doc);
    if (r.workloads.empty()) throw Error(ErrorKind::EmptyInput, "design has no workloads");
    const Workload* workload = &r.workloads.front();
    if (!workload_name.empty()) {
        auto it = std::find_if(r.workloads.begin(), r.workloads.end(), [&](const auto& w) { return w.name == workload_name; });
        if (it == r.workloads.end()) throw Error(ErrorKind::NotFound, "unknown workload '" + workload_name + "'", {workload_name});
        workload = &*it;
    }

    RunArtifacts a;
    a.result = simulate_steady(r.model, r.grid, *workload);
    for (std::size_t l = 0; l < r.model.stack.layers.size(); ++l) {
        const auto kind = r.model.stack.layers[l].kind;
        if (kind == LayerKind::Die || kind == LayerKind::Microchannel) a.heatmaps[l] = emit_heatmap(a.result.field, l);
    }
    a.summary = emit_summary(a.result.summary);

    if (!r.model.patterns.empty()) {
        a.coolant = "# layer\tlane\tinlet_K\toutlet_K\tabsorbed_W\n";
        for (const auto& [layer, pattern] : r.model.patterns) {
            const auto reports = channel_reports(a.result.network, a.result.field, layer);
            for (std::size_t i = 0; i < reports.size(); ++i) {
                a.coolant += std::to_string(layer) + "\t" + std::to_string(i) + "\t" +
                             text::format_sig(reports[i].inlet_temperature, 6) + "\t" +
                             text::format_sig(reports[i].outlet_temperature, 6) + "\t" +
                             text::format_sig(reports[i].absorbed, 6) + "\n";
            }
        }
    }

    if (doc.transient) {
        const PowerTrace& trace = a.result.power;
        std::vector<std::vector<double>> intervals;
        for (std::size_t t = 0; t < trace.intervals(); ++t) {
            std::map<std::string, double> per_block;
            for (std::size_t b = 0; b < trace.names.size(); ++b) per_block[trace.names[b]] = trace.columns[b][t];
            intervals.push_back(cell_power(a.result.network, per_block));
        }
        TransientOptions opts;
        opts.duration = doc.transient->duration;
        opts.dt = doc.transient->dt;
        const auto steps = static_cast<std::size_t>(std::ceil(opts.duration / opts.dt));
        opts.record_every = std::max<std::size_t>(1, steps / 1000);
        const double interval = trace.sampling_interval > 0.0 ? trace.sampling_interval : opts.duration;
        auto fields = solve_transient(a.result.network, intervals, interval, opts);
        a.transient = "# time_s\tstack_max_K\n";
        for (const auto& f : fields)
            a.transient += text::format_sig(*f.timestamp, 9) + "\t" + text::format_sig(f.max(), 6) + "\n";
    }
    return a;
}

SweepArtifacts sweep_design(const DesignDocument& doc, const SweepConfig& config) {
    ResolvedDesign r = resolve(doc);
    if (!r.sweep) throw Error(ErrorKind::EmptyInput, "design has no sweep definition");
    SweepArtifacts s;
    s.result = run_sweep(r.model, r.grid, *r.sweep, r.workloads, config);
    s.report = compare_report(s.result, r.sweep->baseline);
    return s;
}

json heatmap_json(const ThermalField& field, std::size_t layer) {
    if (layer >= field.layers.size()) throw Error(ErrorKind::NotFound, "no layer " + std::to_string(layer));
    return json{{"layer", layer},
                {"rows", field.grid.rows},
                {"cols", field.grid.cols},
                {"cell_w_m", field.grid.cell_width},
                {"cell_h_m", field.grid.cell_height},
                {"unit", "K"},
                {"temperatures", field.layers[layer]}};
}

json summary_json(const FieldSummary& s) {
    json j;
    j["blocks"] = json::array();
    for (const auto& b : s.blocks) j["blocks"].push_back({{"layer", b.layer}, {"block", b.block}, {"mean_K", b.mean}, {"max_K", b.max}});
    j["layers"] = json::array();
    for (const auto& l : s.layers) j["layers"].push_back({{"layer", l.layer}, {"mean_K", l.mean}, {"max_K", l.max}});
    j["stack_max_K"] = s.stack_max;
    return j;
}

json ranking_json(const SweepArtifacts& sweep) {
    json j;
    j["baseline"] = sweep.report.baseline;
    j["ranking"] = sweep.report.ranking;
    j["rows"] = json::array();
    for (const auto& r : sweep.report.rows)
        j["rows"].push_back({{"point", r.point}, {"workload", r.workload}, {"max_K", r.max_k}, {"delta_K", r.delta_k}});
    j["errors"] = json::array();
    for (const auto& e : sweep.result.errors) j["errors"].push_back({{"point", e.point}, {"message", e.message}});
    return j;
}

}  // namespace stacktherm

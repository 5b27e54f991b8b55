#include "stacktherm/power.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "stacktherm/error.hpp"
#include "stacktherm/floorplan.hpp"
#include "stacktherm/text.hpp"

namespace stacktherm {

void check_model(const BlockPowerModel& m) {
    if (!(m.static_power >= 0.0) || !(m.switching_energy >= 0.0) || !(m.clock_frequency > 0.0) ||
        !(m.activity_factor_default >= 0.0 && m.activity_factor_default <= 1.0)) {
        throw Error(ErrorKind::Domain, "invalid power model for block '" + m.block + "'", {m.block});
    }
}

double block_power(const BlockPowerModel& model, double activity) {
    if (!(activity >= 0.0 && activity <= 1.0)) {
        throw Error(ErrorKind::Domain,
                    "activity " + text::format_sig(activity, 6) + " outside [0, 1] for block '" + model.block + "'",
                    {model.block});
    }
    return model.static_power + activity * model.switching_energy * model.clock_frequency;
}

namespace {
const BlockPowerModel* find_model(const std::vector<BlockPowerModel>& models, std::string_view block) {
    for (const auto& m : models)
        if (m.block == block) return &m;
    return nullptr;
}

template <typename Tag>
void check_rectangular(const SampledTrace<Tag>& trace) {
    const std::size_t n = trace.intervals();
    for (std::size_t i = 0; i < trace.columns.size(); ++i) {
        if (trace.columns[i].size() != n) {
            throw Error(ErrorKind::LengthMismatch,
                        "series '" + trace.names[i] + "' has " + std::to_string(trace.columns[i].size()) +
                            " intervals, expected " + std::to_string(n),
                        {trace.names[i]});
        }
    }
    if (trace.names.size() != trace.columns.size())
        throw Error(ErrorKind::LengthMismatch, "trace names and columns disagree");
}
}  // namespace

ActivityTrace apply_mapping(const RawStats& raw, const MappingRules& rules, const std::vector<BlockPowerModel>& models) {
    check_rectangular(raw);
    for (const auto& rule : rules) {
        if (!raw.column(rule.source_stat)) {
            throw Error(ErrorKind::MissingSource,
                        "mapping rule " + rule.source_stat + " -> " + rule.target_block + ": no statistic named '" +
                            rule.source_stat + "'",
                        {rule.source_stat, rule.target_block});
        }
        if (!find_model(models, rule.target_block)) {
            throw Error(ErrorKind::NotFound,
                        "mapping rule " + rule.source_stat + " -> " + rule.target_block + ": no such block model",
                        {rule.target_block});
        }
    }

    ActivityTrace out;
    out.sampling_interval = raw.sampling_interval;
    const std::size_t n = raw.intervals();
    for (const auto& model : models) {
        std::vector<double> column(n, 0.0);
        bool mapped = false;
        for (const auto& rule : rules) {
            if (rule.target_block != model.block) continue;
            mapped = true;
            const auto& src = *raw.column(rule.source_stat);
            for (std::size_t t = 0; t < n; ++t) column[t] += rule.scale * src[t] + rule.offset;
        }
        if (mapped) {
            for (auto& v : column) v = std::clamp(v, 0.0, 1.0);
        } else {
            std::fill(column.begin(), column.end(), model.activity_factor_default);
        }
        out.names.push_back(model.block);
        out.columns.push_back(std::move(column));
    }
    return out;
}

PowerTrace trace_power(const std::vector<BlockPowerModel>& models, const ActivityTrace& activity,
                       const std::vector<std::string>& blocks) {
    check_rectangular(activity);
    std::set<std::string> names;
    for (const auto& m : models) {
        check_model(m);
        if (!names.insert(m.block).second)
            throw Error(ErrorKind::DuplicateName, "duplicate power model for block '" + m.block + "'", {m.block});
    }
    for (const auto& name : activity.names) {
        if (!find_model(models, name))
            throw Error(ErrorKind::NotFound, "activity for block '" + name + "' has no power model", {name});
    }

    PowerTrace out;
    out.sampling_interval = activity.sampling_interval;
    const std::size_t n = std::max<std::size_t>(activity.intervals(), 1);
    for (const auto& block : blocks) {
        std::vector<double> column(n, 0.0);
        if (const auto* model = find_model(models, block); model && !is_filler(block)) {
            const auto* act = activity.column(block);
            for (std::size_t t = 0; t < n; ++t)
                column[t] = block_power(*model, act ? (*act)[t] : model->activity_factor_default);
        }
        out.names.push_back(block);
        out.columns.push_back(std::move(column));
    }
    return out;
}

std::vector<double> mean_power(const PowerTrace& trace) {
    std::vector<double> out;
    out.reserve(trace.columns.size());
    for (const auto& col : trace.columns) {
        double sum = 0.0;
        for (double v : col) sum += v;
        out.push_back(col.empty() ? 0.0 : sum / static_cast<double>(col.size()));
    }
    return out;
}

double trace_energy(const PowerTrace& trace) {
    double sum = 0.0;
    for (const auto& col : trace.columns)
        for (double v : col) sum += v;
    return sum * trace.sampling_interval;
}

std::vector<double> memory_bank_power(std::size_t bank_count, double per_bank_static, double per_access_energy,
                                      const std::vector<double>& access_rates) {
    if (access_rates.size() != bank_count)
        throw Error(ErrorKind::LengthMismatch, "need one access rate per bank");
    if (!(per_bank_static >= 0.0) || !(per_access_energy >= 0.0))
        throw Error(ErrorKind::Domain, "bank static power and access energy must be non-negative");
    std::vector<double> out;
    out.reserve(bank_count);
    for (double rate : access_rates) {
        if (!(rate >= 0.0)) throw Error(ErrorKind::Domain, "access rates must be non-negative");
        out.push_back(per_bank_static + rate * per_access_energy);
    }
    return out;
}

std::vector<BlockPowerModel> apply_capacity_scaling(std::vector<BlockPowerModel> models, const CapacityKnob& knob,
                                                    double ratio) {
    if (!(ratio > 0.0)) throw Error(ErrorKind::Domain, "knob '" + knob.name + "' ratio must be positive", {knob.name});
    for (const auto& target : knob.targets) {
        auto it = std::find_if(models.begin(), models.end(), [&](const auto& m) { return m.block == target; });
        if (it == models.end())
            throw Error(ErrorKind::NotFound, "knob '" + knob.name + "' targets unknown block '" + target + "'",
                        {knob.name, target});
        it->static_power *= std::pow(ratio, knob.static_exponent);
        it->switching_energy *= std::pow(ratio, knob.energy_exponent);
    }
    return models;
}

ActivityTrace synthesize_workload(const WorkloadSpec& spec) {
    if (spec.blocks.empty()) throw Error(ErrorKind::EmptyInput, "workload needs at least one block");
    if (spec.intervals == 0 || !(spec.sampling_interval > 0.0))
        throw Error(ErrorKind::Domain, "workload needs a positive interval count and sampling interval");
    ActivityTrace out;
    out.sampling_interval = spec.sampling_interval;
    out.names = spec.blocks;
    const std::size_t n = spec.intervals;
    for (const auto& block : spec.blocks) {
        std::vector<double> column(n, spec.base_activity);
        switch (spec.profile) {
            case WorkloadProfile::Uniform: break;
            case WorkloadProfile::OneHot:
                if (block == spec.hot_block) std::fill(column.begin(), column.end(), spec.base_activity * spec.skew);
                break;
            case WorkloadProfile::Ramp:
                for (std::size_t t = 0; t < n; ++t) {
                    const double frac = n == 1 ? 1.0 : static_cast<double>(t) / static_cast<double>(n - 1);
                    column[t] = spec.base_activity + frac * (spec.peak_activity - spec.base_activity);
                }
                break;
        }
        for (auto& v : column) v = std::clamp(v, 0.0, 1.0);
        out.columns.push_back(std::move(column));
    }
    if (spec.profile == WorkloadProfile::OneHot && !out.column(spec.hot_block))
        throw Error(ErrorKind::NotFound, "hot block '" + spec.hot_block + "' not in workload", {spec.hot_block});
    return out;
}

std::vector<BlockPowerModel> parse_power_models(std::string_view source) {
    std::vector<BlockPowerModel> models;
    std::set<std::string> seen;
    for (const auto& line : text::tokenize(source)) {
        const auto& f = line.fields;
        if (f.size() != 5)
            throw Error(ErrorKind::Parse, "expected '<block> <static_W> <switching_energy_J> <clock_Hz> <activity>'",
                        {}, line.number);
        BlockPowerModel m;
        m.block = f[0];
        m.static_power = text::parse_double(f[1], "static power", line.number);
        m.switching_energy = text::parse_double(f[2], "switching energy", line.number);
        m.clock_frequency = text::parse_double(f[3], "clock frequency", line.number);
        m.activity_factor_default = text::parse_double(f[4], "activity", line.number);
        try {
            check_model(m);
        } catch (const Error& e) {
            throw Error(ErrorKind::Domain, e.what(), e.names(), line.number);
        }
        if (!seen.insert(m.block).second)
            throw Error(ErrorKind::DuplicateName, "duplicate power model '" + m.block + "'", {m.block}, line.number);
        models.push_back(std::move(m));
    }
    return models;
}

std::string emit_power_models(const std::vector<BlockPowerModel>& models) {
    using text::format_double;
    std::string out = "# power models: block\tstatic_W\tswitching_energy_J\tclock_Hz\tactivity_default\n";
    for (const auto& m : models) {
        out += m.block + "\t" + format_double(m.static_power) + "\t" + format_double(m.switching_energy) + "\t" +
               format_double(m.clock_frequency) + "\t" + format_double(m.activity_factor_default) + "\n";
    }
    return out;
}

MappingRules parse_mapping_rules(std::string_view source) {
    MappingRules rules;
    for (const auto& line : text::tokenize(source)) {
        const auto& f = line.fields;
        if (f.size() != 4)
            throw Error(ErrorKind::Parse, "expected '<source_stat> <target_block> <scale> <offset>'", {}, line.number);
        rules.push_back(MappingRule{f[0], f[1], text::parse_double(f[2], "scale", line.number),
                                    text::parse_double(f[3], "offset", line.number)});
    }
    return rules;
}

std::string emit_mapping_rules(const MappingRules& rules) {
    std::string out = "# mapping rules: source_stat\ttarget_block\tscale\toffset\n";
    for (const auto& r : rules) {
        out += r.source_stat + "\t" + r.target_block + "\t" + text::format_double(r.scale) + "\t" +
               text::format_double(r.offset) + "\n";
    }
    return out;
}

template <typename Tag>
SampledTrace<Tag> parse_trace(std::string_view source) {
    SampledTrace<Tag> trace;
    bool have_interval = false;
    for (const auto& c : text::comment_lines(source)) {
        if (c.fields.size() == 2 && c.fields[0] == "interval_s") {
            trace.sampling_interval = text::parse_double(c.fields[1], "interval_s", c.number);
            have_interval = true;
        }
    }
    if (!have_interval) throw Error(ErrorKind::Parse, "missing '# interval_s <value>' preamble");
    if (!(trace.sampling_interval > 0.0)) throw Error(ErrorKind::Domain, "sampling interval must be positive");

    auto lines = text::tokenize(source);
    if (lines.empty()) throw Error(ErrorKind::Parse, "trace has no header line");
    trace.names = lines.front().fields;
    std::set<std::string> seen;
    for (const auto& n : trace.names)
        if (!seen.insert(n).second)
            throw Error(ErrorKind::DuplicateName, "duplicate trace column '" + n + "'", {n}, lines.front().number);
    trace.columns.assign(trace.names.size(), {});
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.fields.size() != trace.names.size()) {
            throw Error(ErrorKind::LengthMismatch,
                        "expected " + std::to_string(trace.names.size()) + " values, got " +
                            std::to_string(line.fields.size()),
                        {}, line.number);
        }
        for (std::size_t k = 0; k < line.fields.size(); ++k) {
            double v = text::parse_double(line.fields[k], trace.names[k], line.number);
            if constexpr (std::is_same_v<Tag, ActivityTag>) {
                if (!(v >= 0.0 && v <= 1.0))
                    throw Error(ErrorKind::Domain, "activity for '" + trace.names[k] + "' outside [0, 1]",
                                {trace.names[k]}, line.number);
            } else if constexpr (std::is_same_v<Tag, PowerTag>) {
                if (!(v >= 0.0))
                    throw Error(ErrorKind::Domain, "negative power for '" + trace.names[k] + "'", {trace.names[k]},
                                line.number);
            }
            trace.columns[k].push_back(v);
        }
    }
    return trace;
}

template <typename Tag>
std::string emit_trace(const SampledTrace<Tag>& trace) {
    std::string out = "# interval_s " + text::format_double(trace.sampling_interval) + "\n";
    out += text::join(trace.names, "\t") + "\n";
    for (std::size_t t = 0; t < trace.intervals(); ++t) {
        for (std::size_t k = 0; k < trace.columns.size(); ++k) {
            if (k) out += "\t";
            out += text::format_double(trace.columns[k][t]);
        }
        out += "\n";
    }
    return out;
}

template ActivityTrace parse_trace<ActivityTag>(std::string_view);
template PowerTrace parse_trace<PowerTag>(std::string_view);
template RawStats parse_trace<StatTag>(std::string_view);
template std::string emit_trace<ActivityTag>(const ActivityTrace&);
template std::string emit_trace<PowerTag>(const PowerTrace&);
template std::string emit_trace<StatTag>(const RawStats&);

}  // namespace stacktherm

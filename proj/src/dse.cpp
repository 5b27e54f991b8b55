#include "stacktherm/dse.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "stacktherm/error.hpp"
#include "stacktherm/text.hpp"

namespace stacktherm {

namespace {

void check_permutation(const Stack& stack, const StackVariant& v) {
    const std::size_t n = stack.layers.size();
    std::vector<std::size_t> sorted = v.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> expect(n);
    std::iota(expect.begin(), expect.end(), 0);
    if (sorted != expect)
        throw Error(ErrorKind::Validation, "stacking '" + v.name + "' is not a permutation of the " +
                                               std::to_string(n) + " base layers", {v.name});
    for (std::size_t i = 0; i < n; ++i) {
        const bool moved_die = stack.layers[v.order[i]].kind == LayerKind::Die;
        const bool slot_die = stack.layers[i].kind == LayerKind::Die;
        if (moved_die != slot_die)
            throw Error(ErrorKind::Validation, "stacking '" + v.name + "' moves a non-die layer", {v.name});
    }
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::vector<StackVariant> enumerate_stackings(const PointModel& base, StackingPolicy policy,
                                              const std::vector<StackVariant>& named) {
    if (auto report = validate_stack(base.stack); !report.empty())
        throw Error(ErrorKind::Validation, "invalid base stack: " + report.front().message);
    if (policy == StackingPolicy::NamedList) {
        for (const auto& v : named) check_permutation(base.stack, v);
        return named;
    }

    const auto dies = base.stack.die_indices();
    std::vector<std::size_t> perm = dies;  // sorted ascending already
    std::vector<StackVariant> out;
    // Two orders are the same variant when every position holds an equal layer
    // with an equal floorplan.
    std::vector<std::vector<std::pair<Layer, const Floorplan*>>> seen;
    do {
        StackVariant v;
        v.order.resize(base.stack.layers.size());
        std::iota(v.order.begin(), v.order.end(), 0);
        for (std::size_t k = 0; k < dies.size(); ++k) v.order[dies[k]] = perm[k];
        std::vector<std::pair<Layer, const Floorplan*>> content;
        for (auto idx : v.order) {
            auto it = base.floorplans.find(idx);
            content.emplace_back(base.stack.layers[idx], it == base.floorplans.end() ? nullptr : &it->second);
        }
        bool duplicate = std::any_of(seen.begin(), seen.end(), [&](const auto& other) {
            for (std::size_t i = 0; i < content.size(); ++i) {
                if (!(content[i].first == other[i].first)) return false;
                const Floorplan* a = content[i].second;
                const Floorplan* b = other[i].second;
                if ((a == nullptr) != (b == nullptr) || (a && !(*a == *b))) return false;
            }
            return true;
        });
        if (duplicate) continue;
        seen.push_back(content);
        std::vector<std::string> parts;
        for (auto idx : v.order) parts.push_back(std::to_string(idx));
        v.name = "perm_" + text::join(parts, "-");
        out.push_back(std::move(v));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

std::vector<CoolingVariant> enumerate_cooling(std::size_t layer_count, const std::vector<PatternStyle>& styles,
                                              CoolingPosition position, std::size_t explicit_index,
                                              bool include_none) {
    if (position == CoolingPosition::Explicit && explicit_index > layer_count)
        throw Error(ErrorKind::Domain, "cooling insertion index " + std::to_string(explicit_index) +
                                           " is beyond the " + std::to_string(layer_count) + "-layer stack");
    std::vector<CoolingVariant> out;
    if (include_none || styles.empty()) out.push_back(CoolingVariant{"none", std::nullopt, CoolingPosition::None, 0});
    for (auto style : styles) {
        CoolingVariant v;
        v.style = style;
        v.position = position;
        v.index = explicit_index;
        v.name = std::string(to_string(style)) +
                 (position == CoolingPosition::Explicit ? "@" + std::to_string(explicit_index) : "@hottest");
        out.push_back(std::move(v));
    }
    return out;
}

SweepDefinition parse_sweep(std::string_view source, const PointModel& base) {
    SweepDefinition s;
    bool product = false;
    std::vector<std::string> product_coolings;
    for (const auto& line : text::tokenize(source)) {
        const auto& f = line.fields;
        const int ln = line.number;
        auto fail = [&](const std::string& msg) { throw Error(ErrorKind::Parse, msg, {}, ln); };
        const std::string& head = f[0];
        if (head == "baseline") {
            if (f.size() != 2) fail("expected 'baseline <point>'");
            s.baseline = f[1];
        } else if (head == "channel") {
            if (f.size() != 5) fail("expected 'channel <thickness_m> <material> <width_cells> <pitch_cells>'");
            s.channel.thickness = text::parse_double(f[1], "thickness", ln);
            s.channel.material = f[2];
            s.channel.width_cells = static_cast<int>(text::parse_long(f[3], "width", ln));
            s.channel.pitch_cells = static_cast<int>(text::parse_long(f[4], "pitch", ln));
        } else if (head == "coolant") {
            if (f.size() != 6) fail("expected 'coolant <name> <c_v> <T_in_K> <flow_m3s> <h|auto>'");
            s.channel.coolant.name = f[1];
            s.channel.coolant.volumetric_heat_capacity = text::parse_double(f[2], "c_v", ln);
            s.channel.coolant.inlet_temperature = text::parse_double(f[3], "T_in", ln);
            s.channel.coolant.flow_rate_per_channel = text::parse_double(f[4], "flow", ln);
            s.coolant_h_auto = f[5] == "auto";
            s.channel.coolant.convection_coefficient = s.coolant_h_auto ? 0.0 : text::parse_double(f[5], "h", ln);
        } else if (head == "stacking") {
            if (f.size() < 3) fail("expected 'stacking <name> <layer index>...'");
            StackVariant v;
            v.name = f[1];
            for (std::size_t i = 2; i < f.size(); ++i) {
                long idx = text::parse_long(f[i], "layer index", ln);
                if (idx < 0) fail("layer index must be non-negative");
                v.order.push_back(static_cast<std::size_t>(idx));
            }
            try {
                check_permutation(base.stack, v);
            } catch (const Error& e) {
                throw Error(e.kind(), e.what(), e.names(), ln);
            }
            s.stackings.push_back(std::move(v));
        } else if (head == "stackings") {
            if (f.size() != 2 || f[1] != "all") fail("expected 'stackings all'");
            s.all_permutations = true;
        } else if (head == "cooling") {
            CoolingVariant v;
            if (f.size() == 3 && f[2] == "none") {
                v.name = f[1];
            } else if (f.size() == 4 && f[3] == "below_hottest_die") {
                v.name = f[1];
                v.style = pattern_style_from_string(f[2]);
                v.position = CoolingPosition::BelowHottestDie;
            } else if (f.size() == 5 && f[3] == "index") {
                v.name = f[1];
                v.style = pattern_style_from_string(f[2]);
                v.position = CoolingPosition::Explicit;
                long idx = text::parse_long(f[4], "index", ln);
                if (idx < 0) fail("insertion index must be non-negative");
                v.index = static_cast<std::size_t>(idx);
            } else {
                fail("expected 'cooling <name> none|<style> below_hottest_die|<style> index <n>'");
            }
            if (f.size() > 3 && !v.style) fail("unknown cooling style '" + f[2] + "'");
            s.coolings.push_back(std::move(v));
        } else if (head == "knob") {
            if (f.size() < 5) fail("expected 'knob <name> <static_exp> <energy_exp> <target>...'");
            CapacityKnob k;
            k.name = f[1];
            k.static_exponent = text::parse_double(f[2], "static exponent", ln);
            k.energy_exponent = text::parse_double(f[3], "energy exponent", ln);
            k.targets.assign(f.begin() + 4, f.end());
            s.knobs.push_back(std::move(k));
        } else if (head == "point") {
            if (f.size() < 4) fail("expected 'point <name> <stacking> <cooling> [knob=ratio]...'");
            DesignPoint p;
            p.name = f[1];
            p.stacking = f[2];
            p.cooling = f[3] == "none" ? "" : f[3];
            for (std::size_t i = 4; i < f.size(); ++i) {
                auto eq = f[i].find('=');
                if (eq == std::string::npos) fail("knob setting must be '<knob>=<ratio>'");
                p.knobs[f[i].substr(0, eq)] = text::parse_double(f[i].substr(eq + 1), "knob ratio", ln);
            }
            s.points.push_back(std::move(p));
        } else if (head == "product") {
            product = true;
            product_coolings.assign(f.begin() + 1, f.end());
        } else if (head == "workloads") {
            s.workloads.assign(f.begin() + 1, f.end());
        } else {
            fail("unknown sweep directive '" + head + "'");
        }
    }

    if (s.all_permutations) {
        for (auto& v : enumerate_stackings(base, StackingPolicy::AllDiePermutations)) s.stackings.push_back(std::move(v));
    }
    if (product) {
        std::vector<std::string> coolings = product_coolings;
        if (coolings.empty()) {
            coolings.push_back("none");
            for (const auto& c : s.coolings) coolings.push_back(c.name);
        }
        for (const auto& st : s.stackings)
            for (const auto& c : coolings)
                s.points.push_back(DesignPoint{st.name + "+" + c, st.name, c == "none" ? "" : c, {}});
    }

    std::set<std::string> names;
    for (const auto& p : s.points) {
        if (!names.insert(p.name).second) throw Error(ErrorKind::DuplicateName, "duplicate point '" + p.name + "'", {p.name});
        if (std::none_of(s.stackings.begin(), s.stackings.end(), [&](const auto& v) { return v.name == p.stacking; }))
            throw Error(ErrorKind::NotFound, "point '" + p.name + "' uses unknown stacking '" + p.stacking + "'", {p.name});
        if (!p.cooling.empty() &&
            std::none_of(s.coolings.begin(), s.coolings.end(), [&](const auto& c) { return c.name == p.cooling; }))
            throw Error(ErrorKind::NotFound, "point '" + p.name + "' uses unknown cooling '" + p.cooling + "'", {p.name});
        for (const auto& [knob, ratio] : p.knobs) {
            if (std::none_of(s.knobs.begin(), s.knobs.end(), [&](const auto& k) { return k.name == knob; }))
                throw Error(ErrorKind::NotFound, "point '" + p.name + "' sets unknown knob '" + knob + "'", {p.name});
            if (!(ratio > 0.0))
                throw Error(ErrorKind::Domain, "point '" + p.name + "' knob '" + knob + "' needs a positive ratio", {p.name});
        }
    }
    if (s.points.empty()) throw Error(ErrorKind::EmptyInput, "sweep defines no design points");
    if (s.baseline.empty()) s.baseline = s.points.front().name;
    return s;
}

PointModel realize_point(const PointModel& base, const Grid& grid, const SweepDefinition& sweep,
                         const DesignPoint& point, const Workload& hottest_workload) {
    const auto st = std::find_if(sweep.stackings.begin(), sweep.stackings.end(),
                                 [&](const auto& v) { return v.name == point.stacking; });
    if (st == sweep.stackings.end())
        throw Error(ErrorKind::NotFound, "unknown stacking '" + point.stacking + "'", {point.stacking});
    check_permutation(base.stack, *st);

    PointModel m;
    m.stack = base.stack;
    m.stack.layers.clear();
    m.rules = base.rules;
    m.models = base.models;
    for (std::size_t i = 0; i < st->order.size(); ++i) {
        const std::size_t from = st->order[i];
        m.stack.layers.push_back(base.stack.layers[from]);
        if (auto it = base.floorplans.find(from); it != base.floorplans.end()) m.floorplans.emplace(i, it->second);
        if (auto it = base.patterns.find(from); it != base.patterns.end()) m.patterns.emplace(i, it->second);
    }

    for (const auto& [name, ratio] : point.knobs) {
        auto knob = std::find_if(sweep.knobs.begin(), sweep.knobs.end(), [&](const auto& k) { return k.name == name; });
        if (knob == sweep.knobs.end()) throw Error(ErrorKind::NotFound, "unknown knob '" + name + "'", {name});
        m.models = apply_capacity_scaling(std::move(m.models), *knob, ratio);
    }

    if (!point.cooling.empty()) {
        auto cv = std::find_if(sweep.coolings.begin(), sweep.coolings.end(),
                               [&](const auto& c) { return c.name == point.cooling; });
        if (cv == sweep.coolings.end())
            throw Error(ErrorKind::NotFound, "unknown cooling '" + point.cooling + "'", {point.cooling});
        if (cv->style) {
            std::size_t at = cv->index;
            if (cv->position == CoolingPosition::BelowHottestDie)
                at = hottest_die(m, workload_power(m, hottest_workload));
            if (at > m.stack.layers.size())
                throw Error(ErrorKind::Domain, "cooling insertion index " + std::to_string(at) + " is beyond the " +
                                                   std::to_string(m.stack.layers.size()) + "-layer stack");
            Coolant coolant = sweep.channel.coolant;
            if (sweep.coolant_h_auto || !(coolant.convection_coefficient > 0.0))
                coolant.convection_coefficient = laminar_convection_coefficient(
                    sweep.channel.width_cells * grid.cell_width, sweep.channel.thickness);
            CoolingPattern pattern = generate_pattern_cells(grid.rows, grid.cols, *cv->style, sweep.channel.width_cells,
                                                            sweep.channel.pitch_cells, coolant);
            Layer layer;
            layer.kind = LayerKind::Microchannel;
            layer.thickness = sweep.channel.thickness;
            layer.material = sweep.channel.material;
            layer.pattern = cv->name + ".pat";
            m.stack.layers.insert(m.stack.layers.begin() + static_cast<std::ptrdiff_t>(at), layer);
            auto shift = [at](auto& by_layer) {
                std::remove_reference_t<decltype(by_layer)> moved;
                for (auto& [idx, v] : by_layer) moved.emplace(idx >= at ? idx + 1 : idx, std::move(v));
                by_layer = std::move(moved);
            };
            shift(m.floorplans);
            shift(m.patterns);
            m.patterns.emplace(at, std::move(pattern));
        }
    }
    if (auto report = validate_stack(m.stack); !report.empty())
        throw Error(ErrorKind::Validation, "point '" + point.name + "': " + report.front().message, {point.name});
    return m;
}

const SweepEntry* SweepResult::find(std::string_view point, std::string_view workload) const {
    for (const auto& e : entries)
        if (e.point == point && e.workload == workload) return &e;
    return nullptr;
}

std::vector<std::string> rank_points(const std::vector<std::string>& points, const std::vector<SweepEntry>& entries) {
    struct Key {
        double worst;
        double mean;
        std::size_t order;
        std::string name;
    };
    std::vector<Key> keys;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double worst = -1e300, sum = 0.0;
        std::size_t count = 0;
        for (const auto& e : entries) {
            if (e.point != points[i]) continue;
            worst = std::max(worst, e.stack_max);
            sum += e.stack_max;
            ++count;
        }
        if (count == 0) continue;
        keys.push_back(Key{worst, sum / static_cast<double>(count), i, points[i]});
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        if (a.worst != b.worst) return a.worst < b.worst;
        if (a.mean != b.mean) return a.mean < b.mean;
        return a.order < b.order;
    });
    std::vector<std::string> out;
    for (auto& k : keys) out.push_back(std::move(k.name));
    return out;
}

SweepResult run_sweep(const PointModel& base, const Grid& grid, const SweepDefinition& sweep,
                      const std::vector<Workload>& workloads, const SweepConfig& config) {
    if (sweep.points.empty()) throw Error(ErrorKind::EmptyInput, "sweep has no design points");
    std::vector<const Workload*> selected;
    if (sweep.workloads.empty()) {
        for (const auto& w : workloads) selected.push_back(&w);
    } else {
        for (const auto& name : sweep.workloads) {
            auto it = std::find_if(workloads.begin(), workloads.end(), [&](const auto& w) { return w.name == name; });
            if (it == workloads.end()) throw Error(ErrorKind::NotFound, "unknown workload '" + name + "'", {name});
            selected.push_back(&*it);
        }
    }
    if (selected.empty()) throw Error(ErrorKind::EmptyInput, "sweep has no workloads");

    SweepResult result;
    for (const auto& p : sweep.points) result.points.push_back(p.name);
    for (const auto* w : selected) result.workloads.push_back(w->name);

    const std::size_t points = sweep.points.size();
    std::vector<std::vector<SweepEntry>> per_point(points);
    std::vector<std::optional<std::string>> failures(points);
    std::atomic<std::size_t> next{0}, done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < points; i = next++) {
            const DesignPoint& point = sweep.points[i];
            try {
                PointModel model = realize_point(base, grid, sweep, point, *selected.front());
                ThermalNetwork network = build_network(model, grid);
                for (const auto* w : selected) {
                    const auto start = std::chrono::steady_clock::now();
                    auto sim = simulate_steady(model, network, *w, config.solve);
                    SweepEntry e;
                    e.point = point.name;
                    e.workload = w->name;
                    e.stack_max = sim.summary.stack_max;
                    for (const auto& l : sim.summary.layers) e.layer_max.push_back(l.max);
                    e.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    per_point[i].push_back(std::move(e));
                }
            } catch (const std::exception& ex) {
                per_point[i].clear();
                failures[i] = ex.what();
            }
            const std::size_t finished = ++done;
            if (config.progress) {
                std::lock_guard lock(progress_mutex);
                config.progress(finished, points);
            }
        }
    };

    std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, points);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < points; ++i) {
        if (failures[i]) result.errors.push_back(SweepError{sweep.points[i].name, *failures[i]});
        for (auto& e : per_point[i]) result.entries.push_back(std::move(e));
    }
    result.ranking = rank_points(result.points, result.entries);
    return result;
}

ComparisonReport compare_report(const SweepResult& result, std::string_view baseline) {
    if (std::find(result.points.begin(), result.points.end(), baseline) == result.points.end())
        throw Error(ErrorKind::NotFound, "baseline point '" + std::string(baseline) + "' is not in the sweep",
                    {std::string(baseline)});
    ComparisonReport report;
    report.baseline = baseline;
    report.ranking = result.ranking;
    for (const auto& e : result.entries) {
        const SweepEntry* ref = result.find(baseline, e.workload);
        if (!ref)
            throw Error(ErrorKind::NotFound, "baseline point '" + std::string(baseline) + "' has no result for '" +
                                                 e.workload + "'", {std::string(baseline)});
        report.rows.push_back(ComparisonRow{e.point, e.workload, e.stack_max, e.stack_max - ref->stack_max});
    }
    return report;
}

std::string ComparisonReport::to_tsv() const {
    std::string out = "# baseline " + baseline + "\npoint\tworkload\tmax_K\tdelta_K\n";
    for (const auto& r : rows) out += r.point + "\t" + r.workload + "\t" + fixed(r.max_k) + "\t" + fixed(r.delta_k) + "\n";
    out += "# ranking\n";
    for (std::size_t i = 0; i < ranking.size(); ++i) out += "rank\t" + std::to_string(i + 1) + "\t" + ranking[i] + "\n";
    return out;
}

std::string ComparisonReport::to_text() const {
    std::size_t wp = 5, ww = 8;
    for (const auto& r : rows) {
        wp = std::max(wp, r.point.size());
        ww = std::max(ww, r.workload.size());
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    std::string out = "Comparison against baseline '" + baseline + "'\n";
    out += pad("point", wp) + "  " + pad("workload", ww) + "  " + pad("max K", 12) + "  delta K\n";
    for (const auto& r : rows)
        out += pad(r.point, wp) + "  " + pad(r.workload, ww) + "  " + pad(fixed(r.max_k), 12) + "  " + fixed(r.delta_k) + "\n";
    out += "\nRanking (coolest worst case first)\n";
    for (std::size_t i = 0; i < ranking.size(); ++i) out += "  " + std::to_string(i + 1) + ". " + ranking[i] + "\n";
    return out;
}

}  // namespace stacktherm

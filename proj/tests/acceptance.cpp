// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "stacktherm/error.hpp"
#include "stacktherm/service.hpp"
#include "stacktherm/text.hpp"
#include "support.hpp"

using namespace stacktherm;
using testing::die;
using testing::plain;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int n, const std::string& title, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %s  %s\n", n, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v, int digits = 4) { return text::format_sig(v, digits); }

double max_abs_diff(const ThermalField& a, const ThermalField& b) {
    double d = 0.0;
    for (std::size_t l = 0; l < a.layers.size(); ++l)
        for (std::size_t k = 0; k < a.layers[l].size(); ++k) d = std::max(d, std::abs(a.layers[l][k] - b.layers[l][k]));
    return d;
}

// Balance recomputed from the network: sources in, sink convection and coolant enthalpy out.
double balance_error(const ThermalNetwork& net, const ThermalField& field, const std::vector<double>& cell_power) {
    double in = 0.0, out = 0.0;
    for (double p : cell_power) in += p;
    const std::size_t cells = net.grid.cells();
    for (std::size_t i = 0; i < net.node_count(); ++i)
        out += net.ambient_conductance[i] * (field.layers[i / cells][i % cells] - net.ambient_temperature);
    for (const auto& lane : net.lanes) {
        const std::size_t last = lane.nodes.back();
        out += lane.capacity_rate * (field.layers[last / cells][last % cells] - lane.inlet_temperature);
    }
    return std::abs(in - out) / in;
}

struct Scenario {
    ResolvedDesign design;
    SweepResult sweep;
    double sweep_seconds = 0.0;
};

Scenario& scenario() {
    static Scenario s = [] {
        Scenario x;
        const DesignDocument doc = load_manifest(testing::baseline_manifest());
        x.design = resolve(doc);
        const auto t0 = Clock::now();
        x.sweep = run_sweep(x.design.model, x.design.grid, *x.design.sweep, x.design.workloads);
        x.sweep_seconds = seconds_since(t0);
        return x;
    }();
    return s;
}

double point_max(const std::string& name) {
    const auto* e = scenario().sweep.find(name, scenario().design.workloads.front().name);
    if (!e) throw Error(ErrorKind::NotFound, "sweep has no result for " + name);
    return e->stack_max;
}

SimulationResult simulate_point(const std::string& name) {
    const auto& s = scenario();
    for (const auto& p : s.design.sweep->points)
        if (p.name == name) {
            const auto& w = s.design.workloads.front();
            return simulate_steady(realize_point(s.design.model, s.design.grid, *s.design.sweep, p, w), s.design.grid, w);
        }
    throw Error(ErrorKind::NotFound, "no point " + name);
}

Outcome analytic_1d() {
    const auto t0 = Clock::now();
    const DieOutline o{0.01, 0.01};
    const double q = 25.0, h = 4e4, t = 2e-4;
    std::vector<Layer> layers{die(t), die(t), die(t), die(t), plain(LayerKind::Sink, 1e-3, "copper")};
    auto m = testing::slab_model(o, layers, h);
    auto net = build_network(m, grid_for(o, 32, 32));
    auto field = solve_steady(net, cell_power(net, {{"P0", q}}));
    const double k = m.stack.material("silicon").thermal_conductivity;
    const double expect = q * t / (k * o.area());
    double worst = std::abs((field.at(4, 11, 20) - m.stack.ambient_temperature) / (q / (h * o.area())) - 1.0);
    for (std::size_t l = 0; l + 1 < 4; ++l)
        for (std::size_t r = 0; r < 32; r += 7)
            for (std::size_t c = 0; c < 32; c += 5)
                worst = std::max(worst, std::abs((field.at(l, r, c) - field.at(l + 1, r, c)) / expect - 1.0));
    const double secs = seconds_since(t0);
    return {worst <= 0.01 && secs < 5.0,
            "max relative deviation " + fmt(worst, 3) + " (limit 0.01), " + fmt(secs, 3) + " s (limit 5)"};
}

Outcome energy_conservation() {
    const auto& s = scenario();
    double worst = 0.0;
    std::size_t runs = 0;
    for (const auto& p : s.design.sweep->points) {
        auto r = simulate_point(p.name);
        worst = std::max(worst, balance_error(r.network, r.field, r.cell_power));
        ++runs;
    }
    const DesignDocument doc = load_manifest(testing::baseline_manifest());
    auto base = run_design(doc);
    worst = std::max(worst, balance_error(base.result.network, base.result.field, base.result.cell_power));
    ++runs;
    return {worst <= 1e-3 && s.sweep.errors.empty(),
            std::to_string(runs) + " steady runs, worst relative error " + fmt(worst, 3) + " (limit 1e-3)"};
}

Outcome rc_step() {
    const DieOutline o{0.01, 0.01};
    auto m = testing::slab_model(o, {die(5e-4)}, 1e4);
    auto net = build_network(m, grid_for(o, 4, 4));
    double c = 0.0;
    for (double x : net.capacitance) c += x;
    const double g = 1e4 * o.area(), tau = c / g, q = 2.0, rise = q / g;
    TransientOptions opt;
    opt.dt = tau / 10.0;
    opt.duration = tau;
    auto fields = solve_transient(net, {cell_power(net, {{"P0", q}})}, tau, opt);
    const double analytic = rise * (1.0 - std::exp(-1.0));
    double worst = 0.0;
    for (double v : fields.back().layers[0]) worst = std::max(worst, std::abs(v - m.stack.ambient_temperature - analytic));
    return {worst <= 0.02 * rise, "dt = tau/10, error at t = tau " + fmt(100.0 * worst / rise, 3) + "% of the final rise (limit 2%)"};
}

Outcome transient_to_steady() {
    auto doc = load_manifest(testing::baseline_manifest());
    doc.rows = doc.cols = 32;
    auto r = resolve(doc);
    const auto& w = r.workloads.front();
    auto steady = simulate_steady(r.model, r.grid, w);
    double c = 0.0, g = 0.0;
    for (double x : steady.network.capacitance) c += x;
    for (double x : steady.network.ambient_conductance) g += x;
    const double tau = c / g;
    TransientOptions opt;
    opt.dt = tau / 100.0;
    opt.duration = 20.0 * tau;
    opt.record_every = 1000000;
    auto fields = solve_transient(steady.network, {steady.cell_power}, opt.duration, opt);
    const double d = max_abs_diff(fields.back(), steady.field);
    return {d <= 0.1, "baseline 32x32, tau " + fmt(tau, 3) + " s, max cell difference after 20 tau " + fmt(d, 3) + " K (limit 0.1)"};
}

Outcome monotone_and_symmetric() {
    const auto t0 = Clock::now();
    const DieOutline o{0.004, 0.004};
    Coolant cool;
    cool.inlet_temperature = 300.0;
    cool.convection_coefficient = 2.6e4;
    cool.flow_rate_per_channel = 1e-8;
    std::size_t solves = 0, violations = 0;
    double asym = 0.0;
    // Monotonicity under every channel style and without one; symmetry where the stack is
    // mirror symmetric (no channel, or bent90 lanes).
    const std::optional<PatternStyle> configs[] = {std::nullopt, PatternStyle::Vertical, PatternStyle::Horizontal,
                                                   PatternStyle::Bent90};
    for (const auto& style : configs) {
        const Layer middle = style ? Layer{LayerKind::Microchannel, 1e-4, "silicon", std::nullopt, std::string("ch")}
                                   : die(1.5e-4);
        auto m = testing::slab_model(o, {die(1.5e-4), middle, die(1.5e-4)}, 3e4);
        m.floorplans[0] = generate_template(o, FloorplanTemplate::CoreGrid, 4, "C");
        if (!style) m.floorplans[1] = generate_template(o, FloorplanTemplate::CoreGrid, 4, "M");
        m.floorplans[2] = generate_template(o, FloorplanTemplate::BankGrid, 16, "B");
        if (style) m.patterns.emplace(1, generate_pattern_cells(4, 4, *style, 1, 2, cool));
        auto net = build_network(m, grid_for(o, 4, 4));
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        std::map<std::string, double> base;
        for (const auto& [l, fp] : m.floorplans)
            for (const auto& b : fp.blocks) base[b.name] = u(rng);
        auto ref = solve_steady(net, cell_power(net, base));
        ++solves;
        for (const auto& [name, w] : base) {
            for (double bump : {1e-3, 0.5, 5.0}) {
                auto p = base;
                p[name] = w + bump;
                auto f = solve_steady(net, cell_power(net, p));
                ++solves;
                for (std::size_t l = 0; l < 3; ++l)
                    for (std::size_t k = 0; k < 16; ++k)
                        if (f.layers[l][k] < ref.layers[l][k] - 1e-12) ++violations;
            }
        }
        if (style && *style != PatternStyle::Bent90) continue;
        std::map<std::string, double> sym;
        for (const auto& [l, fp] : m.floorplans)
            for (const auto& b : fp.blocks) sym[b.name] = l == 0 ? 1.0 : 0.1;
        auto f = solve_steady(net, cell_power(net, sym));
        ++solves;
        for (std::size_t l = 0; l < 3; ++l)
            for (std::size_t r = 0; r < 4; ++r)
                for (std::size_t c = 0; c < 4; ++c) {
                    asym = std::max(asym, std::abs(f.at(l, r, c) - f.at(l, r, 3 - c)));
                    asym = std::max(asym, std::abs(f.at(l, r, c) - f.at(l, 3 - r, c)));
                }
    }
    const double secs = seconds_since(t0);
    return {violations == 0 && asym <= 1e-6 && secs < 60.0,
            std::to_string(solves) + " solves, " + std::to_string(violations) + " monotonicity violations, max asymmetry " +
                fmt(asym, 3) + " K (limit 1e-6), " + fmt(secs, 3) + " s (limit 60)"};
}

Outcome case1() {
    const double b = point_max("baseline"), a = point_max("case1a"), c = point_max("case1b");
    return {c < a && a < b, "case1b " + fmt(c, 7) + " < case1a " + fmt(a, 7) + " < baseline " + fmt(b, 7) + " K"};
}

Outcome case2() {
    const double b = point_max("case2b"), a = point_max("case2a"), c = point_max("case1b");
    return {b < a && a < c, "case2b " + fmt(b, 7) + " < case2a " + fmt(a, 7) + " < case1b " + fmt(c, 7) + " K"};
}

Outcome case3() {
    const double b = point_max("case2b"), up = point_max("case3a"), down = point_max("case3b");
    return {up > b && down < b, "case3a " + fmt(up, 7) + " > case2b " + fmt(b, 7) + " > case3b " + fmt(down, 7) + " K"};
}

Outcome hotspot() {
    const auto& s = scenario();
    const auto& w = s.design.workloads.front();
    const auto& stats = std::get<RawStats>(w.trace);
    auto mean = [&](const std::string& name) {
        for (std::size_t i = 0; i < stats.names.size(); ++i)
            if (stats.names[i] == name) {
                double sum = 0.0;
                for (double v : stats.columns[i]) sum += v;
                return sum / stats.columns[i].size();
            }
        throw Error(ErrorKind::NotFound, "stats have no " + name);
    };
    const double ratio = mean("cpu0.busy") / ((mean("cpu1.busy") + mean("cpu2.busy") + mean("cpu3.busy")) / 3.0);
    auto r = simulate_steady(s.design.model, s.design.grid, w);
    const auto* hot = r.summary.hottest_block();
    const double near = layer_correlation(r.field, 0, 1), far = layer_correlation(r.field, 0, 2);
    const bool ok = hot && hot->block == "C_0" && hot->layer == 0 && near > far && std::abs(ratio - 5.87) < 0.05;
    return {ok, "core0/peer activity " + fmt(ratio, 3) + ", hottest block " + (hot ? hot->block : std::string("none")) +
                    ", corr(0,1) " + fmt(near, 4) + " > corr(0,2) " + fmt(far, 4)};
}

Outcome channel_balance() {
    double worst = 0.0;
    std::size_t lanes = 0;
    for (const std::string name : {"case2a", "case2b"}) {
        auto r = simulate_point(name);
        for (std::size_t l = 0; l < r.network.layer_count; ++l) {
            if (r.network.layer_kinds[l] != LayerKind::Microchannel) continue;
            for (const auto& c : channel_reports(r.network, r.field, l)) {
                worst = std::max(worst, std::abs(c.absorbed - c.advected) / std::abs(c.advected));
                ++lanes;
            }
        }
    }
    return {lanes > 0 && worst <= 1e-3,
            std::to_string(lanes) + " lanes, worst |absorbed - advected| / advected " + fmt(worst, 3) + " (limit 1e-3)"};
}

Outcome round_trip() {
    const fs::path dir = fs::temp_directory_path() / "stacktherm_corpus";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::mt19937 rng(2024);
    std::vector<std::pair<fs::path, bool>> files;  // path, is floorplan
    for (int i = 0; i < 25; ++i) {
        const DieOutline o{0.002 + 0.0005 * (i % 7), 0.003 + 0.00025 * (i % 5)};
        Floorplan fp;
        if (i % 5 == 0) fp = generate_template(o, FloorplanTemplate::CoreGrid, 1 + i % 9, "C");
        else if (i % 5 == 1) fp = generate_template(o, FloorplanTemplate::BankGrid, 4 + i % 13, "B", i);
        else fp = testing::random_guillotine(rng, o, 2 + i);
        const fs::path p = dir / ("fp" + std::to_string(i) + ".flp");
        text::write_file(p.string(), emit_floorplan(fp));
        files.emplace_back(p, true);
    }
    const PatternStyle styles[] = {PatternStyle::Vertical, PatternStyle::Horizontal, PatternStyle::Bent90};
    for (int i = 0; i < 25; ++i) {
        Coolant c;
        c.inlet_temperature = 290.0 + i;
        c.convection_coefficient = 1e4 + 1234.5 * i;
        c.flow_rate_per_channel = 1e-9 * (1 + i);
        const std::size_t sizes[] = {8, 16, 24, 32};
        const fs::path p = dir / ("pattern" + std::to_string(i) + ".pat");
        text::write_file(p.string(), emit_pattern(generate_pattern_cells(sizes[i % 4], sizes[(i / 4) % 4], styles[i % 3],
                                                                         1 + i % 2, 2 + 2 * (i % 2), c)));
        files.emplace_back(p, false);
    }
    std::size_t same = 0;
    std::string mismatch;
    for (const auto& [p, is_fp] : files) {
        const std::string bytes = text::read_file(p.string());
        const std::string again = is_fp ? emit_floorplan(parse_floorplan(bytes)) : emit_pattern(parse_pattern(bytes));
        if (again == bytes) ++same;
        else if (mismatch.empty()) mismatch = ", first mismatch " + p.filename().string();
    }
    fs::remove_all(dir);
    return {same == files.size(), std::to_string(same) + "/" + std::to_string(files.size()) + " files byte-identical" + mismatch};
}

Outcome cli_api_equivalence() {
    const fs::path out = fs::temp_directory_path() / "stacktherm_cli_run";
    const fs::path state = fs::temp_directory_path() / "stacktherm_api_state";
    fs::remove_all(out);
    fs::remove_all(state);
    const std::string cmd = std::string("\"") + STACKTHERM_CLI + "\" run \"" + testing::baseline_manifest() + "\" -o \"" +
                            out.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed"};

    Service service({state, 1});
    const auto doc = load_manifest(testing::baseline_manifest());
    auto created = service.handle("POST", "/designs", {}, to_json(doc).dump());
    if (created.status != 201) return {false, "create returned " + std::to_string(created.status)};
    const auto design = nlohmann::json::parse(created.body).at("id").get<std::string>();
    auto submitted = service.handle("POST", "/designs/" + design + "/jobs", {}, "{\"kind\":\"simulate\"}");
    const auto job = nlohmann::json::parse(submitted.body).at("id").get<std::string>();
    service.wait_idle();
    std::size_t compared = 0, equal = 0;
    for (const auto& entry : fs::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("layer_", 0) != 0) continue;
        const std::string layer = name.substr(6, name.find('.') - 6);
        auto r = service.handle("GET", "/jobs/" + job + "/heatmap", {{"layer", layer}, {"format", "grid"}}, "");
        ++compared;
        if (r.status == 200 && r.body == text::read_file(entry.path().string())) ++equal;
    }
    fs::remove_all(out);
    fs::remove_all(state);
    return {compared > 0 && equal == compared,
            std::to_string(equal) + "/" + std::to_string(compared) + " heatmaps byte-identical between CLI and API"};
}

Outcome sweep_time() {
    const auto& s = scenario();
    const bool ok = s.sweep_seconds < 600.0 && s.sweep.errors.empty() && s.sweep.entries.size() == 9;
    return {ok, std::to_string(s.sweep.entries.size()) + " points at " + std::to_string(s.design.grid.rows) + "x" +
                    std::to_string(s.design.grid.cols) + " in " + fmt(s.sweep_seconds, 3) + " s (limit 600)"};
}

}  // namespace

int main() {
    report(1, "analytic 1D conduction", analytic_1d);
    report(2, "energy conservation", energy_conservation);
    report(3, "RC step response", rc_step);
    report(4, "transient to steady", transient_to_steady);
    report(5, "monotonicity and symmetry", monotone_and_symmetric);
    report(6, "case I ordering", case1);
    report(7, "case II ordering", case2);
    report(8, "case III directionality", case3);
    report(9, "hotspot localization and coupling", hotspot);
    report(10, "per-channel coolant balance", channel_balance);
    report(11, "floorplan and pattern round trip", round_trip);
    report(12, "CLI/API heatmap equivalence", cli_api_equivalence);
    report(13, "full sweep runtime", sweep_time);
    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

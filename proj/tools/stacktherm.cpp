// stacktherm command line: batch runs, sweeps, generators and the HTTP service.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stacktherm/design.hpp"
#include "stacktherm/error.hpp"
#include "stacktherm/service.hpp"
#include "stacktherm/text.hpp"

namespace fs = std::filesystem;
using namespace stacktherm;

namespace {

struct Config {
    std::size_t workers = 0;
    std::string bind = "127.0.0.1:8080";
};

fs::path default_config_path() {
    if (const char* env = std::getenv("STACKTHERM_CONFIG")) return env;
    if (const char* home = std::getenv("HOME")) return fs::path(home) / ".config" / "stacktherm" / "config.json";
    return "stacktherm.json";
}

Config load_config(const fs::path& path) {
    Config c;
    if (!fs::exists(path)) return c;
    const auto j = nlohmann::json::parse(text::read_file(path.string()));
    c.workers = j.value("workers", c.workers);
    c.bind = j.value("bind", c.bind);
    return c;
}

void write_output(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") std::cout << content;
    else text::write_file(out, content);
}

int run_command(const std::string& manifest, const std::string& out_dir, const std::string& workload) {
    const DesignDocument doc = load_manifest(manifest);
    const RunArtifacts a = run_design(doc, workload);
    fs::create_directories(out_dir);
    for (const auto& [layer, grid] : a.heatmaps)
        text::write_file((fs::path(out_dir) / ("layer_" + std::to_string(layer) + ".grid")).string(), grid);
    text::write_file((fs::path(out_dir) / "summary.tsv").string(), a.summary);
    if (!a.coolant.empty()) text::write_file((fs::path(out_dir) / "coolant.tsv").string(), a.coolant);
    if (!a.transient.empty()) text::write_file((fs::path(out_dir) / "transient.tsv").string(), a.transient);
    std::cout << "stack max " << text::format_sig(a.result.summary.stack_max, 6) << " K";
    if (const auto* b = a.result.summary.hottest_block())
        std::cout << " (layer " << b->layer << " block " << b->block << ")";
    std::cout << "\nenergy balance error " << text::format_sig(a.result.balance.relative_error(), 3) << "\n";
    return 0;
}

int sweep_command(const std::string& manifest, const std::string& out_dir, std::size_t workers) {
    const DesignDocument doc = load_manifest(manifest);
    SweepConfig cfg;
    cfg.workers = workers;
    const SweepArtifacts s = sweep_design(doc, cfg);
    fs::create_directories(out_dir);
    text::write_file((fs::path(out_dir) / "comparison.tsv").string(), s.report.to_tsv());
    std::cout << s.report.to_text();
    for (const auto& e : s.result.errors) std::cerr << "point " << e.point << " failed: " << e.message << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermal simulation and design space exploration for 3D stacked chips"};
    app.require_subcommand(1);
    std::string config_path = default_config_path().string();
    app.add_option("--config", config_path, "JSON config file (workers, bind)");

    std::string manifest, out_dir = "out", workload;
    auto* run = app.add_subcommand("run", "Steady simulation of a design manifest");
    run->add_option("manifest", manifest, "design manifest")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", out_dir, "output directory");
    run->add_option("-w,--workload", workload, "workload name (default: first)");

    std::size_t workers = 0;
    bool workers_set = false;
    auto* sweep = app.add_subcommand("sweep", "Run the sweep of a design manifest");
    sweep->add_option("manifest", manifest, "design manifest")->required()->check(CLI::ExistingFile);
    sweep->add_option("-o,--out", out_dir, "output directory");
    sweep->add_option("-j,--workers", workers, "parallel workers")->each([&](const std::string&) { workers_set = true; });

    auto* floorplan = app.add_subcommand("floorplan", "Floorplan tools");
    floorplan->require_subcommand(1);
    auto* fp_gen = floorplan->add_subcommand("gen", "Generate a floorplan from a template or an area budget");
    double width = 0.0, height = 0.0;
    std::string template_kind, areas_path, prefix, output;
    int count = 0, first_index = 0;
    fp_gen->add_option("--width", width, "die width, m")->required();
    fp_gen->add_option("--height", height, "die height, m")->required();
    auto* tmpl = fp_gen->add_option("--template", template_kind, "cores or banks")->check(CLI::IsMember({"cores", "banks"}));
    fp_gen->add_option("--count", count, "number of blocks");
    fp_gen->add_option("--prefix", prefix, "block name prefix");
    fp_gen->add_option("--first-index", first_index, "index of the first block");
    auto* areas = fp_gen->add_option("--areas", areas_path, "area budget file: name area_m2 [aspect]");
    tmpl->excludes(areas);
    fp_gen->add_option("-o,--out", output, "output file (default: stdout)");

    auto* cooling = app.add_subcommand("cooling", "Cooling pattern tools");
    cooling->require_subcommand(1);
    auto* cg = cooling->add_subcommand("gen", "Generate a microchannel pattern");
    std::string style_name = "vertical";
    std::size_t rows = 64, cols = 64;
    int width_cells = 1, pitch_cells = 2;
    double h = 0.0, channel_width = 1e-4, depth = 1e-4;
    Coolant coolant;
    cg->add_option("--style", style_name, "vertical, horizontal or bent90")
        ->check(CLI::IsMember({"vertical", "horizontal", "bent90"}));
    cg->add_option("--rows", rows, "grid rows");
    cg->add_option("--cols", cols, "grid columns");
    cg->add_option("--width-cells", width_cells, "channel width in cells");
    cg->add_option("--pitch-cells", pitch_cells, "channel pitch in cells");
    cg->add_option("--htc", h, "convection coefficient, W/(m^2 K) (default: laminar)");
    cg->add_option("--channel-width", channel_width, "channel width for the laminar default, m");
    cg->add_option("--depth", depth, "channel depth for the laminar default, m");
    cg->add_option("--inlet", coolant.inlet_temperature, "inlet temperature, K");
    cg->add_option("--flow", coolant.flow_rate_per_channel, "flow per channel, m^3/s");
    cg->add_option("-o,--out", output, "output file (default: stdout)");

    std::string bind, state_dir = "state";
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
    serve_cmd->add_option("--bind", bind, "host:port");
    serve_cmd->add_option("--state-dir", state_dir, "directory for designs and job results");

    CLI11_PARSE(app, argc, argv);

    try {
        const Config config = load_config(config_path);
        if (*run) return run_command(manifest, out_dir, workload);
        if (*sweep) return sweep_command(manifest, out_dir, workers_set ? workers : config.workers);
        if (*fp_gen) {
            const DieOutline outline{width, height};
            Floorplan fp;
            if (!areas_path.empty()) {
                AreaBudget budget;
                for (const auto& line : text::tokenize(text::read_file(areas_path))) {
                    const auto& f = line.fields;
                    if (f.size() != 2 && f.size() != 3)
                        throw Error(ErrorKind::Parse, "expected '<name> <area_m2> [aspect]'", {}, line.number);
                    AreaEntry e{f[0], text::parse_double(f[1], "area", line.number), std::nullopt};
                    if (f.size() == 3) e.aspect_hint = text::parse_double(f[2], "aspect", line.number);
                    budget.push_back(std::move(e));
                }
                fp = generate_from_areas(outline, budget);
            } else {
                if (template_kind.empty()) throw Error(ErrorKind::EmptyInput, "give --template or --areas");
                const auto kind = template_kind == "cores" ? FloorplanTemplate::CoreGrid : FloorplanTemplate::BankGrid;
                fp = generate_template(outline, kind, count, prefix, first_index);
            }
            write_output(output, emit_floorplan(fp));
            return 0;
        }
        if (*cg) {
            coolant.convection_coefficient = h > 0.0 ? h : laminar_convection_coefficient(channel_width, depth);
            const auto style = *pattern_style_from_string(style_name);
            write_output(output, emit_pattern(generate_pattern_cells(rows, cols, style, width_cells, pitch_cells, coolant)));
            return 0;
        }
        if (*serve_cmd) {
            ServiceConfig sc{state_dir, config.workers};
            const std::string address = bind.empty() ? config.bind : bind;
            std::cerr << "serving on " << address << "\n";
            serve(address, sc);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "stacktherm/design.hpp"
#include "stacktherm/pipeline.hpp"

namespace testing {

using namespace stacktherm;

inline std::filesystem::path scenario_dir() { return std::filesystem::path(STACKTHERM_SOURCE_DIR) / "scenarios"; }
inline std::string baseline_manifest() { return (scenario_dir() / "baseline" / "design.txt").string(); }

inline Floorplan single_block(const DieOutline& outline, const std::string& name) {
    return Floorplan{outline, {Block{name, outline.width, outline.height, 0.0, 0.0}}};
}

inline Layer die(double t, const std::string& material = "silicon", const std::string& fp = "fp") {
    return Layer{LayerKind::Die, t, material, fp, std::nullopt};
}

inline Layer plain(LayerKind kind, double t, const std::string& material) {
    return Layer{kind, t, material, std::nullopt, std::nullopt};
}

/// Dies of one full-outline block each, named P<layer>, over a sink.
inline PointModel slab_model(const DieOutline& outline, const std::vector<Layer>& layers, double h_sink) {
    PointModel m;
    m.stack.outline = outline;
    m.stack.layers = layers;
    m.stack.sink_heat_transfer = h_sink;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].kind == LayerKind::Die) m.floorplans.emplace(i, single_block(outline, "P" + std::to_string(i)));
    return m;
}

inline PowerTrace constant_power(const std::map<std::string, double>& blocks, double interval = 1e-3) {
    PowerTrace t;
    t.sampling_interval = interval;
    for (const auto& [name, w] : blocks) {
        t.names.push_back(name);
        t.columns.push_back({w});
    }
    return t;
}

inline Workload power_workload(const std::map<std::string, double>& blocks) {
    return Workload{"const", constant_power(blocks)};
}

/// Random n-block floorplan by recursive guillotine cuts of the outline.
inline Floorplan random_guillotine(std::mt19937& rng, const DieOutline& outline, int n) {
    struct Rect { double x, y, w, h; };
    std::vector<Rect> rects{{0.0, 0.0, outline.width, outline.height}};
    std::uniform_real_distribution<double> frac(0.25, 0.75);
    while (static_cast<int>(rects.size()) < n) {
        std::size_t pick = 0;
        for (std::size_t i = 1; i < rects.size(); ++i)
            if (rects[i].w * rects[i].h > rects[pick].w * rects[pick].h) pick = i;
        Rect r = rects[pick];
        const double f = frac(rng);
        Rect a = r, b = r;
        if (r.w >= r.h) {
            a.w = r.w * f;
            b.x = r.x + a.w;
            b.w = r.w - a.w;
        } else {
            a.h = r.h * f;
            b.y = r.y + a.h;
            b.h = r.h - a.h;
        }
        rects[pick] = a;
        rects.push_back(b);
    }
    Floorplan fp{outline, {}};
    for (std::size_t i = 0; i < rects.size(); ++i)
        fp.blocks.push_back(Block{"blk" + std::to_string(i), rects[i].w, rects[i].h, rects[i].x, rects[i].y});
    return fp;
}

}  // namespace testing

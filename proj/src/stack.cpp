#include "stacktherm/stack.hpp"

#include <algorithm>
#include <cmath>

#include "stacktherm/error.hpp"
#include "stacktherm/text.hpp"

namespace stacktherm {

const std::vector<Material>& default_materials() {
    static const std::vector<Material> materials{
        {"silicon", 150.0, 1.75e6},
        {"tim", 4.0, 4.0e6},
        {"copper", 400.0, 3.55e6},
        {"water", 0.6, 4.18e6},
    };
    return materials;
}

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::Die: return "die";
        case LayerKind::Tim: return "tim";
        case LayerKind::Microchannel: return "microchannel";
        case LayerKind::Spreader: return "spreader";
        case LayerKind::Sink: return "sink";
    }
    return "die";
}

std::optional<LayerKind> layer_kind_from_string(std::string_view s) {
    for (auto k : {LayerKind::Die, LayerKind::Tim, LayerKind::Microchannel, LayerKind::Spreader, LayerKind::Sink}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

const Material& Stack::material(std::string_view name) const {
    for (const auto& m : materials)
        if (m.name == name) return m;
    for (const auto& m : default_materials())
        if (m.name == name) return m;
    throw Error(ErrorKind::NotFound, "unknown material '" + std::string(name) + "'", {std::string(name)});
}

std::vector<std::size_t> Stack::die_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].kind == LayerKind::Die) out.push_back(i);
    return out;
}

ValidationReport validate_stack(const Stack& stack) {
    ValidationReport report;
    auto add = [&](std::vector<int> layers, std::string message) {
        report.push_back(Violation{std::move(layers), std::move(message)});
    };

    if (!(stack.outline.width > 0.0) || !(stack.outline.height > 0.0))
        add({}, "die outline must have positive width and height");
    if (!(stack.ambient_temperature > 0.0)) add({}, "ambient temperature must be positive");
    if (!(stack.sink_heat_transfer > 0.0)) add({}, "sink heat-transfer coefficient must be positive");
    for (const auto& m : stack.materials) {
        if (!(m.thermal_conductivity > 0.0) || !(m.volumetric_heat_capacity > 0.0))
            add({}, "material '" + m.name + "' needs positive conductivity and heat capacity");
    }

    if (stack.die_indices().empty()) add({}, "no die layer");

    const int n = static_cast<int>(stack.layers.size());
    int sinks = 0;
    for (int i = 0; i < n; ++i) {
        const Layer& layer = stack.layers[static_cast<std::size_t>(i)];
        if (!(layer.thickness > 0.0)) add({i}, "layer thickness must be positive");
        bool known = std::any_of(stack.materials.begin(), stack.materials.end(),
                                 [&](const Material& m) { return m.name == layer.material; }) ||
                     std::any_of(default_materials().begin(), default_materials().end(),
                                 [&](const Material& m) { return m.name == layer.material; });
        if (!known) add({i}, "unknown material '" + layer.material + "'");
        if ((layer.kind == LayerKind::Die) != layer.floorplan.has_value())
            add({i}, layer.kind == LayerKind::Die ? "die layer without floorplan"
                                                  : "floorplan given for a non-die layer");
        if ((layer.kind == LayerKind::Microchannel) != layer.pattern.has_value())
            add({i}, layer.kind == LayerKind::Microchannel ? "microchannel layer without pattern"
                                                           : "pattern given for a non-microchannel layer");
        if (layer.kind == LayerKind::Sink) {
            ++sinks;
            if (sinks > 1) add({i}, "more than one sink layer");
            if (i != n - 1) add({i}, "sink layer must be the last layer");
        }
        if (i > 0 && layer.kind == LayerKind::Microchannel &&
            stack.layers[static_cast<std::size_t>(i - 1)].kind == LayerKind::Microchannel)
            add({i - 1, i}, "adjacent microchannel layers " + std::to_string(i - 1) + " and " + std::to_string(i));
    }
    return report;
}

Grid grid_for(const DieOutline& outline, long rows, long cols) {
    if (rows < 2 || cols < 2) {
        throw Error(ErrorKind::InvalidResolution,
                    "grid resolution must be at least 2x2, got " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!(outline.width > 0.0) || !(outline.height > 0.0))
        throw Error(ErrorKind::InvalidResolution, "die outline must be positive");
    Grid g;
    g.rows = static_cast<std::size_t>(rows);
    g.cols = static_cast<std::size_t>(cols);
    g.cell_width = outline.width / static_cast<double>(cols);
    g.cell_height = outline.height / static_cast<double>(rows);
    return g;
}

Stack parse_stack(std::string_view source) {
    Stack stack;
    bool have_outline = false;
    for (const auto& line : text::tokenize(source)) {
        const auto& f = line.fields;
        const std::string& head = f[0];
        auto need = [&](std::size_t count, std::string_view usage) {
            if (f.size() != count)
                throw Error(ErrorKind::Parse, "expected '" + std::string(usage) + "'", {}, line.number);
        };
        if (head == "outline") {
            need(3, "outline <width_m> <height_m>");
            stack.outline.width = text::parse_double(f[1], "outline width", line.number);
            stack.outline.height = text::parse_double(f[2], "outline height", line.number);
            have_outline = true;
        } else if (head == "ambient") {
            need(2, "ambient <K>");
            stack.ambient_temperature = text::parse_double(f[1], "ambient", line.number);
        } else if (head == "convection") {
            need(2, "convection <W/(m^2 K)>");
            stack.sink_heat_transfer = text::parse_double(f[1], "convection", line.number);
        } else if (head == "material") {
            need(4, "material <name> <k> <c_v>");
            stack.materials.push_back(Material{f[1], text::parse_double(f[2], "conductivity", line.number),
                                               text::parse_double(f[3], "heat capacity", line.number)});
        } else if (auto kind = layer_kind_from_string(head)) {
            if (f.size() != 3 && f.size() != 4)
                throw Error(ErrorKind::Parse, "expected '<kind> <thickness_m> <material> [file]'", {}, line.number);
            Layer layer;
            layer.kind = *kind;
            layer.thickness = text::parse_double(f[1], "thickness", line.number);
            layer.material = f[2];
            if (f.size() == 4) {
                if (*kind == LayerKind::Die) layer.floorplan = f[3];
                else if (*kind == LayerKind::Microchannel) layer.pattern = f[3];
                else throw Error(ErrorKind::Parse, "only die and microchannel layers take a file", {}, line.number);
            }
            stack.layers.push_back(std::move(layer));
        } else {
            throw Error(ErrorKind::Parse, "unknown stack directive '" + head + "'", {head}, line.number);
        }
    }
    if (!have_outline) throw Error(ErrorKind::Parse, "missing 'outline' line");
    return stack;
}

std::string emit_stack(const Stack& stack) {
    using text::format_double;
    std::string out = "# stack: kind\tthickness_m\tmaterial\t[floorplan|pattern]; index 0 is farthest from the sink\n";
    out += "outline\t" + format_double(stack.outline.width) + "\t" + format_double(stack.outline.height) + "\n";
    out += "ambient\t" + format_double(stack.ambient_temperature) + "\n";
    out += "convection\t" + format_double(stack.sink_heat_transfer) + "\n";
    for (const auto& m : stack.materials) {
        out += "material\t" + m.name + "\t" + format_double(m.thermal_conductivity) + "\t" +
               format_double(m.volumetric_heat_capacity) + "\n";
    }
    for (const auto& layer : stack.layers) {
        out += std::string(to_string(layer.kind)) + "\t" + format_double(layer.thickness) + "\t" + layer.material;
        if (layer.floorplan) out += "\t" + *layer.floorplan;
        if (layer.pattern) out += "\t" + *layer.pattern;
        out += "\n";
    }
    return out;
}

}  // namespace stacktherm

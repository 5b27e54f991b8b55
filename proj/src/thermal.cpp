#include "stacktherm/thermal.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stacktherm/error.hpp"
#include "stacktherm/text.hpp"

namespace stacktherm {

namespace {

double series(double a, double b) { return 1.0 / (1.0 / a + 1.0 / b); }

std::string layer_name(std::size_t layer) { return "layer " + std::to_string(layer); }

}  // namespace

ThermalNetwork assemble(const Stack& stack, const Grid& grid, const LayerInputs& inputs) {
    if (auto report = validate_stack(stack); !report.empty())
        throw Error(ErrorKind::Validation, "invalid stack: " + report.front().message);
    const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    if (rel(grid.cell_width * static_cast<double>(grid.cols), stack.outline.width) > 1e-9 ||
        rel(grid.cell_height * static_cast<double>(grid.rows), stack.outline.height) > 1e-9)
        throw Error(ErrorKind::Assembly, "grid does not cover the die outline");

    ThermalNetwork net;
    net.grid = grid;
    net.layer_count = stack.layers.size();
    net.ambient_temperature = stack.ambient_temperature;
    const std::size_t cells = grid.cells();
    const std::size_t n = net.layer_count * cells;
    net.fluid.assign(n, 0);
    net.ambient_conductance.assign(n, 0.0);
    net.capacitance.assign(n, 0.0);

    // Per-layer conductivity of solid cells and, for channel layers, the pattern.
    std::vector<double> conductivity(net.layer_count), heat_capacity(net.layer_count);
    std::vector<const CoolingPattern*> patterns(net.layer_count, nullptr);
    for (std::size_t l = 0; l < net.layer_count; ++l) {
        const Layer& layer = stack.layers[l];
        net.layer_kinds.push_back(layer.kind);
        const Material& m = stack.material(layer.material);
        conductivity[l] = m.thermal_conductivity;
        heat_capacity[l] = m.volumetric_heat_capacity;
        if (layer.kind == LayerKind::Die) {
            auto it = inputs.rasters.find(l);
            if (it == inputs.rasters.end())
                throw Error(ErrorKind::Assembly, "missing floorplan rasterization for " + layer_name(l),
                            {std::to_string(l)});
            if (!(it->second.grid == grid))
                throw Error(ErrorKind::Assembly, "rasterization grid mismatch on " + layer_name(l), {std::to_string(l)});
            net.inputs.rasters.emplace(l, it->second);
        } else if (layer.kind == LayerKind::Microchannel) {
            auto it = inputs.patterns.find(l);
            if (it == inputs.patterns.end())
                throw Error(ErrorKind::Assembly, "missing cooling pattern for " + layer_name(l), {std::to_string(l)});
            if (it->second.rows != grid.rows || it->second.cols != grid.cols)
                throw Error(ErrorKind::Assembly, "cooling pattern grid mismatch on " + layer_name(l),
                            {std::to_string(l)});
            if (auto issues = validate_pattern(it->second); !issues.empty())
                throw Error(ErrorKind::Assembly, "invalid cooling pattern on " + layer_name(l) + ": " +
                                                     issues.front().message, {std::to_string(l)});
            auto [pos, inserted] = net.inputs.patterns.emplace(l, it->second);
            patterns[l] = &pos->second;
        }
    }

    auto is_fluid = [&](std::size_t l, std::size_t cell) {
        return patterns[l] && patterns[l]->kind[cell] == CellKind::Fluid;
    };
    const double area = grid.cell_area();
    for (std::size_t l = 0; l < net.layer_count; ++l) {
        const double t = stack.layers[l].thickness;
        for (std::size_t cell = 0; cell < cells; ++cell) {
            const std::size_t id = net.node(l, cell);
            if (is_fluid(l, cell)) {
                net.fluid[id] = 1;
                net.capacitance[id] = patterns[l]->coolant.volumetric_heat_capacity * area * t;
            } else {
                net.capacitance[id] = heat_capacity[l] * area * t;
            }
        }
    }

    // Lateral links inside each layer.
    for (std::size_t l = 0; l < net.layer_count; ++l) {
        const double t = stack.layers[l].thickness;
        const double k = conductivity[l];
        const double h = patterns[l] ? patterns[l]->coolant.convection_coefficient : 0.0;
        auto link = [&](std::size_t ca, std::size_t cb, double face, double distance) {
            const bool fa = is_fluid(l, ca), fb = is_fluid(l, cb);
            if (fa && fb) return;  // coolant lanes only couple through advection
            double g;
            if (!fa && !fb) g = k * face / distance;
            else g = series(h * face, k * face / (0.5 * distance));
            net.conductances.push_back({net.node(l, ca), net.node(l, cb), g});
        };
        for (std::size_t r = 0; r < grid.rows; ++r) {
            for (std::size_t c = 0; c < grid.cols; ++c) {
                if (c + 1 < grid.cols) link(grid.index(r, c), grid.index(r, c + 1), grid.cell_height * t, grid.cell_width);
                if (r + 1 < grid.rows) link(grid.index(r, c), grid.index(r + 1, c), grid.cell_width * t, grid.cell_height);
            }
        }
    }

    // Vertical links between adjacent layers: two half-cell resistances in
    // series, or a half-cell resistance and the channel convection.
    for (std::size_t l = 0; l + 1 < net.layer_count; ++l) {
        const std::size_t u = l + 1;
        const double half_l = conductivity[l] * area / (0.5 * stack.layers[l].thickness);
        const double half_u = conductivity[u] * area / (0.5 * stack.layers[u].thickness);
        for (std::size_t cell = 0; cell < cells; ++cell) {
            const bool fl = is_fluid(l, cell), fu = is_fluid(u, cell);
            double g;
            if (!fl && !fu) g = series(half_l, half_u);
            else if (fl) g = series(patterns[l]->coolant.convection_coefficient * area, half_u);
            else g = series(half_l, patterns[u]->coolant.convection_coefficient * area);
            net.conductances.push_back({net.node(l, cell), net.node(u, cell), g});
        }
    }

    // Sink side to ambient.
    const std::size_t top = net.layer_count - 1;
    for (std::size_t cell = 0; cell < cells; ++cell)
        net.ambient_conductance[net.node(top, cell)] = stack.sink_heat_transfer * area;

    // Upwind advection along every lane.
    for (std::size_t l = 0; l < net.layer_count; ++l) {
        if (!patterns[l]) continue;
        const CoolingPattern& p = *patterns[l];
        const double rate = p.lane_capacity_rate();
        for (const auto& path : channel_paths(p)) {
            ChannelLane lane;
            lane.layer = l;
            lane.capacity_rate = rate;
            lane.inlet_temperature = p.coolant.inlet_temperature;
            std::optional<std::size_t> upstream;
            for (const auto& c : path) {
                const std::size_t id = net.node(l, grid.index(c.row, c.col));
                net.advection.push_back({id, upstream, rate, p.coolant.inlet_temperature});
                lane.nodes.push_back(id);
                upstream = id;
            }
            net.lanes.push_back(std::move(lane));
        }
    }
    return net;
}

SparseMatrix ThermalNetwork::system_matrix() const {
    const auto n = static_cast<int>(node_count());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(conductances.size() * 4 + advection.size() * 2 + static_cast<std::size_t>(n));
    for (const auto& g : conductances) {
        const int a = static_cast<int>(g.a), b = static_cast<int>(g.b);
        triplets.emplace_back(a, a, g.value);
        triplets.emplace_back(b, b, g.value);
        triplets.emplace_back(a, b, -g.value);
        triplets.emplace_back(b, a, -g.value);
    }
    for (int i = 0; i < n; ++i) {
        if (ambient_conductance[static_cast<std::size_t>(i)] > 0.0)
            triplets.emplace_back(i, i, ambient_conductance[static_cast<std::size_t>(i)]);
    }
    for (const auto& adv : advection) {
        const int i = static_cast<int>(adv.node);
        triplets.emplace_back(i, i, adv.capacity_rate);
        if (adv.upstream) triplets.emplace_back(i, static_cast<int>(*adv.upstream), -adv.capacity_rate);
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
}

Vector ThermalNetwork::boundary_rhs() const {
    Vector b = Vector::Zero(static_cast<Eigen::Index>(node_count()));
    for (std::size_t i = 0; i < node_count(); ++i) b[static_cast<Eigen::Index>(i)] = ambient_conductance[i] * ambient_temperature;
    for (const auto& adv : advection)
        if (!adv.upstream) b[static_cast<Eigen::Index>(adv.node)] += adv.capacity_rate * adv.inlet_temperature;
    return b;
}

namespace {

// Boundary terms of A u = b for u = T - ambient: the ambient terms cancel and
// only the inlet offsets remain.
Vector relative_rhs(const ThermalNetwork& net) {
    Vector b = Vector::Zero(static_cast<Eigen::Index>(net.node_count()));
    for (const auto& adv : net.advection)
        if (!adv.upstream)
            b[static_cast<Eigen::Index>(adv.node)] += adv.capacity_rate * (adv.inlet_temperature - net.ambient_temperature);
    return b;
}

void check_anchored(const ThermalNetwork& net) {
    const std::size_t n = net.node_count();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& g : net.conductances) {
        if (g.value <= 0.0) continue;
        adj[g.a].push_back(g.b);
        adj[g.b].push_back(g.a);
    }
    for (const auto& adv : net.advection) {
        if (adv.upstream) {
            adj[adv.node].push_back(*adv.upstream);
            adj[*adv.upstream].push_back(adv.node);
        }
    }
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        if (net.ambient_conductance[i] > 0.0) {
            seen[i] = 1;
            stack.push_back(i);
        }
    }
    for (const auto& adv : net.advection) {
        if (!adv.upstream && adv.capacity_rate > 0.0 && !seen[adv.node]) {
            seen[adv.node] = 1;
            stack.push_back(adv.node);
        }
    }
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        for (auto j : adj[i]) {
            if (!seen[j]) {
                seen[j] = 1;
                stack.push_back(j);
            }
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw Error(ErrorKind::FloatingNetwork, "floating network: some cells have no path to ambient or coolant");
}

}  // namespace

std::vector<double> cell_power(const ThermalNetwork& net, const std::map<std::string, double>& block_power) {
    std::vector<double> out(net.node_count(), 0.0);
    for (const auto& [layer, raster] : net.inputs.rasters) {
        std::vector<double> per_cell(raster.block_names.size(), 0.0);
        for (std::size_t b = 0; b < raster.block_names.size(); ++b) {
            auto it = block_power.find(raster.block_names[b]);
            if (it == block_power.end()) continue;
            if (raster.cell_counts[b] > 0) {
                per_cell[b] = it->second / static_cast<double>(raster.cell_counts[b]);
            } else {
                out[net.node(layer, raster.center_cell[b])] += it->second;
            }
        }
        for (std::size_t cell = 0; cell < raster.owner.size(); ++cell)
            out[net.node(layer, cell)] += per_cell[raster.owner[cell]];
    }
    return out;
}

double ThermalField::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& l : layers)
        for (double v : l) m = std::max(m, v);
    return m;
}

double ThermalField::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& l : layers)
        for (double v : l) m = std::min(m, v);
    return m;
}

ThermalField field_from_vector(const ThermalNetwork& net, const Vector& t, std::optional<double> timestamp) {
    ThermalField f;
    f.grid = net.grid;
    f.timestamp = timestamp;
    const std::size_t cells = net.grid.cells();
    f.layers.resize(net.layer_count);
    for (std::size_t l = 0; l < net.layer_count; ++l) {
        f.layers[l].resize(cells);
        for (std::size_t c = 0; c < cells; ++c) f.layers[l][c] = t[static_cast<Eigen::Index>(net.node(l, c))];
    }
    return f;
}

Vector vector_from_field(const ThermalNetwork& net, const ThermalField& field) {
    if (field.layers.size() != net.layer_count || !(field.grid == net.grid))
        throw Error(ErrorKind::PatternMismatch, "field does not match the network");
    Vector t(static_cast<Eigen::Index>(net.node_count()));
    for (std::size_t l = 0; l < net.layer_count; ++l)
        for (std::size_t c = 0; c < net.grid.cells(); ++c) t[static_cast<Eigen::Index>(net.node(l, c))] = field.layers[l][c];
    return t;
}

ThermalField solve_steady(const ThermalNetwork& net, const std::vector<double>& power, const SolveOptions& options,
                          SolveStats* stats) {
    if (power.size() != net.node_count())
        throw Error(ErrorKind::LengthMismatch, "cell power vector does not match the network");
    check_anchored(net);
    Vector b = relative_rhs(net);
    double source_max = 0.0;
    for (std::size_t i = 0; i < power.size(); ++i) {
        b[static_cast<Eigen::Index>(i)] += power[i];
        source_max = std::max(source_max, std::abs(power[i]));
    }
    SolveOptions opts = options;
    opts.residual_tolerance = options.residual_tolerance * std::max(1.0, source_max);
    Vector u = solve_linear(net.system_matrix(), b, opts, stats);
    return field_from_vector(net, u.array() + net.ambient_temperature, std::nullopt);
}

std::vector<ThermalField> solve_transient(const ThermalNetwork& net,
                                          const std::vector<std::vector<double>>& interval_cell_power,
                                          double sampling_interval, const TransientOptions& options) {
    if (!(options.dt > 0.0)) throw Error(ErrorKind::Domain, "time step must be positive");
    if (!(options.duration >= options.dt)) throw Error(ErrorKind::Domain, "duration must be at least one time step");
    if (interval_cell_power.empty()) throw Error(ErrorKind::EmptyInput, "transient run needs at least one power interval");
    if (!(sampling_interval > 0.0)) throw Error(ErrorKind::Domain, "sampling interval must be positive");
    for (const auto& p : interval_cell_power)
        if (p.size() != net.node_count())
            throw Error(ErrorKind::LengthMismatch, "cell power vector does not match the network");
    check_anchored(net);

    const auto n = static_cast<Eigen::Index>(net.node_count());
    Vector c_over_dt(n);
    for (Eigen::Index i = 0; i < n; ++i) c_over_dt[i] = net.capacitance[static_cast<std::size_t>(i)] / options.dt;
    SparseMatrix m = net.system_matrix();
    for (Eigen::Index i = 0; i < n; ++i) m.coeffRef(i, i) += c_over_dt[i];
    m.makeCompressed();
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(m);
    lu.factorize(m);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::FloatingNetwork, "floating network: transient system is singular");

    Vector u = options.initial ? Vector(vector_from_field(net, *options.initial).array() - net.ambient_temperature)
                               : Vector::Zero(n);
    const Vector boundary = relative_rhs(net);
    const auto steps = static_cast<std::size_t>(std::ceil(options.duration / options.dt - 1e-9));
    const std::size_t every = std::max<std::size_t>(options.record_every, 1);
    std::vector<ThermalField> out;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double mid = (static_cast<double>(k) - 0.5) * options.dt;
        const auto interval = std::min(static_cast<std::size_t>(mid / sampling_interval), interval_cell_power.size() - 1);
        const auto& p = interval_cell_power[interval];
        Vector rhs = boundary + c_over_dt.cwiseProduct(u);
        for (Eigen::Index i = 0; i < n; ++i) rhs[i] += p[static_cast<std::size_t>(i)];
        u = lu.solve(rhs);
        if (k % every == 0 || k == steps)
            out.push_back(field_from_vector(net, u.array() + net.ambient_temperature, static_cast<double>(k) * options.dt));
    }
    return out;
}

double EnergyBalance::relative_error() const {
    const double out = sink_out + coolant_out;
    return std::abs(power_in - out) / std::max(std::abs(power_in), 1e-300);
}

EnergyBalance energy_balance(const ThermalNetwork& net, const ThermalField& field, const std::vector<double>& power) {
    const Vector t = vector_from_field(net, field);
    EnergyBalance e;
    for (double p : power) e.power_in += p;
    for (std::size_t i = 0; i < net.node_count(); ++i)
        e.sink_out += net.ambient_conductance[i] * (t[static_cast<Eigen::Index>(i)] - net.ambient_temperature);
    for (const auto& lane : net.lanes)
        e.coolant_out += lane.capacity_rate * (t[static_cast<Eigen::Index>(lane.nodes.back())] - lane.inlet_temperature);
    return e;
}

std::vector<double> coolant_outlet_temperatures(const ThermalNetwork& net, const ThermalField& field,
                                                const CoolingPattern& pattern, std::size_t layer) {
    auto it = net.inputs.patterns.find(layer);
    if (it == net.inputs.patterns.end() || it->second.rows != pattern.rows || it->second.cols != pattern.cols ||
        it->second.kind != pattern.kind || it->second.flow != pattern.flow || it->second.inlets != pattern.inlets)
        throw Error(ErrorKind::PatternMismatch, "pattern does not match " + layer_name(layer) + " of the network");
    if (field.layers.size() != net.layer_count || !(field.grid == net.grid))
        throw Error(ErrorKind::PatternMismatch, "field does not match the network");
    std::vector<double> out;
    for (const auto& lane : net.lanes) {
        if (lane.layer != layer) continue;
        const std::size_t last = lane.nodes.back();
        out.push_back(field.layers[layer][last - net.node(layer, 0)]);
    }
    return out;
}

std::vector<ChannelReport> channel_reports(const ThermalNetwork& net, const ThermalField& field, std::size_t layer) {
    const Vector t = vector_from_field(net, field);
    std::vector<double> inflow(net.node_count(), 0.0);
    for (const auto& g : net.conductances) {
        const double q = g.value * (t[static_cast<Eigen::Index>(g.a)] - t[static_cast<Eigen::Index>(g.b)]);
        if (net.fluid[g.b]) inflow[g.b] += q;
        if (net.fluid[g.a]) inflow[g.a] -= q;
    }
    std::vector<ChannelReport> out;
    for (const auto& lane : net.lanes) {
        if (lane.layer != layer) continue;
        ChannelReport r;
        r.inlet_temperature = lane.inlet_temperature;
        r.outlet_temperature = t[static_cast<Eigen::Index>(lane.nodes.back())];
        for (auto id : lane.nodes) r.absorbed += inflow[id];
        r.advected = lane.capacity_rate * (r.outlet_temperature - r.inlet_temperature);
        out.push_back(r);
    }
    return out;
}

const BlockStat* FieldSummary::hottest_block() const {
    const BlockStat* best = nullptr;
    for (const auto& b : blocks)
        if (!best || b.max > best->max) best = &b;
    return best;
}

FieldSummary summarize(const ThermalField& field, const std::map<std::size_t, Rasterization>& rasters) {
    FieldSummary s;
    s.stack_max = field.max();
    for (std::size_t l = 0; l < field.layers.size(); ++l) {
        const auto& cells = field.layers[l];
        LayerStat ls;
        ls.layer = l;
        ls.max = *std::max_element(cells.begin(), cells.end());
        ls.mean = std::accumulate(cells.begin(), cells.end(), 0.0) / static_cast<double>(cells.size());
        s.layers.push_back(ls);
    }
    for (const auto& [layer, raster] : rasters) {
        if (layer >= field.layers.size()) continue;
        const auto& cells = field.layers[layer];
        std::vector<double> sum(raster.block_names.size(), 0.0);
        std::vector<double> mx(raster.block_names.size(), -std::numeric_limits<double>::infinity());
        for (std::size_t c = 0; c < raster.owner.size(); ++c) {
            sum[raster.owner[c]] += cells[c];
            mx[raster.owner[c]] = std::max(mx[raster.owner[c]], cells[c]);
        }
        for (std::size_t b = 0; b < raster.block_names.size(); ++b) {
            BlockStat bs;
            bs.layer = layer;
            bs.block = raster.block_names[b];
            if (raster.cell_counts[b] > 0) {
                bs.mean = sum[b] / static_cast<double>(raster.cell_counts[b]);
                bs.max = mx[b];
            } else {
                bs.mean = bs.max = cells[raster.center_cell[b]];
            }
            s.blocks.push_back(std::move(bs));
        }
    }
    return s;
}

double layer_correlation(const ThermalField& field, std::size_t a, std::size_t b) {
    const auto& x = field.layers.at(a);
    const auto& y = field.layers.at(b);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

std::string emit_heatmap(const ThermalField& field, std::size_t layer) {
    const Grid& g = field.grid;
    std::string out = "# layer " + std::to_string(layer) + " rows " + std::to_string(g.rows) + " cols " +
                      std::to_string(g.cols) + " cell_w_m " + text::format_double(g.cell_width) + " cell_h_m " +
                      text::format_double(g.cell_height) + " unit K\n";
    const auto& cells = field.layers.at(layer);
    for (std::size_t r = 0; r < g.rows; ++r) {
        for (std::size_t c = 0; c < g.cols; ++c) {
            if (c) out += '\t';
            out += text::format_sig(cells[g.index(r, c)], 6);
        }
        out += '\n';
    }
    return out;
}

std::string emit_summary(const FieldSummary& s) {
    using text::format_sig;
    std::string out = "# scope\tname\tmean_K\tmax_K\n";
    for (const auto& b : s.blocks)
        out += "block\t" + std::to_string(b.layer) + "/" + b.block + "\t" + format_sig(b.mean, 6) + "\t" +
               format_sig(b.max, 6) + "\n";
    for (const auto& l : s.layers)
        out += "layer\t" + std::to_string(l.layer) + "\t" + format_sig(l.mean, 6) + "\t" + format_sig(l.max, 6) + "\n";
    out += "stack\t-\t-\t" + format_sig(s.stack_max, 6) + "\n";
    return out;
}

}  // namespace stacktherm

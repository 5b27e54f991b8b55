#include "stacktherm/cooling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "stacktherm/error.hpp"
#include "stacktherm/text.hpp"

namespace stacktherm {

double laminar_convection_coefficient(double channel_width, double channel_depth, double fluid_conductivity) {
    if (!(channel_width > 0.0) || !(channel_depth > 0.0))
        throw Error(ErrorKind::Domain, "channel width and depth must be positive");
    const double hydraulic_diameter = 2.0 * channel_width * channel_depth / (channel_width + channel_depth);
    return kLaminarNusselt * fluid_conductivity / hydraulic_diameter;
}

std::string_view to_string(PatternStyle style) {
    switch (style) {
        case PatternStyle::Vertical: return "vertical";
        case PatternStyle::Horizontal: return "horizontal";
        case PatternStyle::Bent90: return "bent90";
    }
    return "vertical";
}

std::optional<PatternStyle> pattern_style_from_string(std::string_view s) {
    for (auto st : {PatternStyle::Vertical, PatternStyle::Horizontal, PatternStyle::Bent90})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

std::string_view to_string(PatternIssue issue) {
    switch (issue) {
        case PatternIssue::DeadEnd: return "dead-end";
        case PatternIssue::Cycle: return "cycle";
        case PatternIssue::Unreachable: return "unreachable";
        case PatternIssue::Merge: return "merge";
        case PatternIssue::InletNotOnBoundary: return "inlet-not-on-boundary";
        case PatternIssue::OutletNotOnBoundary: return "outlet-not-on-boundary";
        case PatternIssue::OutletNotExiting: return "outlet-not-exiting";
        case PatternIssue::BadInletOutlet: return "bad-inlet-outlet";
        case PatternIssue::Shape: return "shape";
    }
    return "shape";
}

std::size_t CoolingPattern::fluid_cells() const {
    return static_cast<std::size_t>(std::count(kind.begin(), kind.end(), CellKind::Fluid));
}

double CoolingPattern::lane_capacity_rate() const {
    return coolant.volumetric_heat_capacity * coolant.flow_rate_per_channel / channel_width_cells;
}

namespace {

void check_coolant(const Coolant& c) {
    if (!(c.volumetric_heat_capacity > 0.0) || !(c.inlet_temperature > 0.0) || !(c.flow_rate_per_channel > 0.0) ||
        !(c.convection_coefficient > 0.0)) {
        throw Error(ErrorKind::Domain, "coolant '" + c.name + "' needs positive heat capacity, inlet temperature, "
                                       "flow rate and convection coefficient");
    }
}

int quantize(double length, double cell, std::string_view what) {
    const double cells = length / cell;
    const double rounded = std::round(cells);
    if (rounded < 1.0 || std::abs(cells - rounded) > 1e-6 * std::max(1.0, rounded)) {
        throw Error(ErrorKind::Geometry, std::string(what) + " of " + text::format_sig(length, 6) +
                                             " m is not a whole multiple of the " + text::format_sig(cell, 6) +
                                             " m cell size");
    }
    return static_cast<int>(rounded);
}

bool is_lane(std::size_t position, int width, int pitch) {
    return static_cast<int>(position % static_cast<std::size_t>(pitch)) >= pitch - width;
}

// Neighbor in the flow direction; nullopt when it leaves the grid.
std::optional<CellRef> downstream(const CoolingPattern& p, CellRef c) {
    switch (p.flow[p.index(c.row, c.col)]) {
        case FlowDir::East:
            if (c.col + 1 >= p.cols) return std::nullopt;
            return CellRef{c.row, c.col + 1};
        case FlowDir::West:
            if (c.col == 0) return std::nullopt;
            return CellRef{c.row, c.col - 1};
        case FlowDir::North:
            if (c.row + 1 >= p.rows) return std::nullopt;
            return CellRef{c.row + 1, c.col};
        case FlowDir::South:
            if (c.row == 0) return std::nullopt;
            return CellRef{c.row - 1, c.col};
        case FlowDir::None: break;
    }
    return std::nullopt;
}

bool on_boundary(const CoolingPattern& p, CellRef c) {
    return c.row == 0 || c.col == 0 || c.row + 1 == p.rows || c.col + 1 == p.cols;
}

char flow_code(CellKind k, FlowDir d) {
    if (k == CellKind::Wall) return '#';
    switch (d) {
        case FlowDir::North: return '^';
        case FlowDir::South: return 'v';
        case FlowDir::East: return '>';
        case FlowDir::West: return '<';
        case FlowDir::None: break;
    }
    return '?';
}

}  // namespace

CoolingPattern generate_pattern_cells(std::size_t rows, std::size_t cols, PatternStyle style, int width, int pitch,
                                      const Coolant& coolant) {
    check_coolant(coolant);
    if (rows < 1 || cols < 1) throw Error(ErrorKind::Geometry, "pattern grid must be non-empty");
    if (width < 1 || pitch < 2 || width > pitch) {
        throw Error(ErrorKind::Geometry, "channel width must be >= 1 cell and <= pitch, pitch >= 2 cells; got width " +
                                             std::to_string(width) + ", pitch " + std::to_string(pitch));
    }
    const auto upitch = static_cast<std::size_t>(pitch);
    auto require_divisible = [&](std::size_t extent, std::string_view axis) {
        if (extent % upitch != 0) {
            throw Error(ErrorKind::Geometry, std::string(axis) + " extent of " + std::to_string(extent) +
                                                 " cells must be a multiple of the " + std::to_string(pitch) +
                                                 "-cell pitch");
        }
    };

    CoolingPattern p;
    p.rows = rows;
    p.cols = cols;
    p.kind.assign(rows * cols, CellKind::Wall);
    p.flow.assign(rows * cols, FlowDir::None);
    p.channel_width_cells = width;
    p.channel_pitch_cells = pitch;
    p.coolant = coolant;
    auto set = [&](std::size_t r, std::size_t c, FlowDir d) {
        p.kind[p.index(r, c)] = CellKind::Fluid;
        p.flow[p.index(r, c)] = d;
    };

    switch (style) {
        case PatternStyle::Vertical:
            require_divisible(cols, "column");
            for (std::size_t c = 0; c < cols; ++c) {
                if (!is_lane(c, width, pitch)) continue;
                for (std::size_t r = 0; r < rows; ++r) set(r, c, FlowDir::North);
                p.inlets.push_back({0, c});
                p.outlets.push_back({rows - 1, c});
            }
            break;
        case PatternStyle::Horizontal:
            require_divisible(rows, "row");
            for (std::size_t r = 0; r < rows; ++r) {
                if (!is_lane(r, width, pitch)) continue;
                for (std::size_t c = 0; c < cols; ++c) set(r, c, FlowDir::East);
                p.inlets.push_back({r, 0});
                p.outlets.push_back({r, cols - 1});
            }
            break;
        case PatternStyle::Bent90: {
            if (rows % 2 != 0 || cols % 2 != 0)
                throw Error(ErrorKind::Geometry, "bent90 needs an even number of rows and columns");
            const std::size_t qr = rows / 2, qc = cols / 2;
            require_divisible(qr, "half-row");
            require_divisible(qc, "half-column");
            const std::size_t lanes = std::min(qr, qc);
            const std::size_t shift_r = qr - lanes, shift_c = qc - lanes;
            // Quadrant-local (i, j): i counts inward from the inlet edge (north or
            // south), j inward from the outlet edge (west or east). Lane q runs
            // inward along column q + shift_c, then turns at row q + shift_r
            // toward the lateral outlet. Outer lanes turn first, so lanes nest.
            for (int quadrant = 0; quadrant < 4; ++quadrant) {
                const bool north = quadrant < 2;
                const bool west = quadrant % 2 == 0;
                auto to_global = [&](std::size_t i, std::size_t j) {
                    return CellRef{north ? rows - 1 - i : i, west ? j : cols - 1 - j};
                };
                const FlowDir inward = north ? FlowDir::South : FlowDir::North;
                const FlowDir outward = west ? FlowDir::West : FlowDir::East;
                for (std::size_t q = 0; q < lanes; ++q) {
                    if (!is_lane(q, width, pitch)) continue;
                    const std::size_t turn = q + shift_r, column = q + shift_c;
                    for (std::size_t i = 0; i < turn; ++i) {
                        auto g = to_global(i, column);
                        set(g.row, g.col, inward);
                    }
                    for (std::size_t j = 0; j <= column; ++j) {
                        auto g = to_global(turn, j);
                        set(g.row, g.col, outward);
                    }
                    p.inlets.push_back(to_global(0, column));
                    p.outlets.push_back(to_global(turn, 0));
                }
            }
            break;
        }
    }
    return p;
}

CoolingPattern generate_pattern(const Grid& grid, PatternStyle style, double channel_width, double channel_pitch,
                                const Coolant& coolant) {
    // Channels cross columns for vertical flow and rows for horizontal flow;
    // bent90 does both, so the two cell sizes must agree on the quantization.
    const double across = style == PatternStyle::Horizontal ? grid.cell_height : grid.cell_width;
    const int width = quantize(channel_width, across, "channel width");
    const int pitch = quantize(channel_pitch, across, "channel pitch");
    if (style == PatternStyle::Bent90) {
        if (quantize(channel_width, grid.cell_height, "channel width") != width ||
            quantize(channel_pitch, grid.cell_height, "channel pitch") != pitch)
            throw Error(ErrorKind::Geometry, "bent90 needs the same channel geometry in cells along both axes");
    }
    return generate_pattern_cells(grid.rows, grid.cols, style, width, pitch, coolant);
}

std::vector<PatternViolation> validate_pattern(const CoolingPattern& p) {
    std::vector<PatternViolation> out;
    auto add = [&](PatternIssue issue, CellRef c, std::string msg) {
        out.push_back(PatternViolation{issue, c, "cell (" + std::to_string(c.row) + ", " + std::to_string(c.col) +
                                                     "): " + std::move(msg)});
    };
    const std::size_t n = p.rows * p.cols;
    if (p.rows == 0 || p.cols == 0 || p.kind.size() != n || p.flow.size() != n) {
        out.push_back(PatternViolation{PatternIssue::Shape, {}, "cell arrays do not match the grid size"});
        return out;
    }
    if (p.channel_width_cells < 1 || p.channel_pitch_cells < 2 || p.channel_width_cells > p.channel_pitch_cells)
        out.push_back(PatternViolation{PatternIssue::Shape, {}, "channel width/pitch out of range"});

    const std::set<CellRef> inlets(p.inlets.begin(), p.inlets.end());
    const std::set<CellRef> outlets(p.outlets.begin(), p.outlets.end());
    std::vector<int> indegree(n, 0);

    for (std::size_t r = 0; r < p.rows; ++r) {
        for (std::size_t c = 0; c < p.cols; ++c) {
            const std::size_t k = p.index(r, c);
            const CellRef cell{r, c};
            if (p.kind[k] == CellKind::Wall) {
                if (p.flow[k] != FlowDir::None) add(PatternIssue::Shape, cell, "wall cell carries a flow direction");
                continue;
            }
            if (p.flow[k] == FlowDir::None) {
                add(PatternIssue::DeadEnd, cell, "fluid cell without flow direction");
                continue;
            }
            auto next = downstream(p, cell);
            if (!next) {
                if (!outlets.count(cell)) add(PatternIssue::DeadEnd, cell, "flow leaves the die at a non-outlet cell");
            } else if (p.kind[p.index(next->row, next->col)] == CellKind::Wall) {
                add(PatternIssue::DeadEnd, cell, "flow runs into a wall");
            } else {
                ++indegree[p.index(next->row, next->col)];
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k)
        if (indegree[k] > 1) add(PatternIssue::Merge, {k / p.cols, k % p.cols}, "several channels flow into this cell");

    for (const auto& c : p.inlets) {
        if (c.row >= p.rows || c.col >= p.cols || p.kind[p.index(c.row, c.col)] != CellKind::Fluid) {
            add(PatternIssue::BadInletOutlet, c, "inlet is not a fluid cell");
            continue;
        }
        if (!on_boundary(p, c)) add(PatternIssue::InletNotOnBoundary, c, "inlet is not on the die boundary");
        if (indegree[p.index(c.row, c.col)] > 0) add(PatternIssue::BadInletOutlet, c, "inlet has an upstream cell");
    }
    for (const auto& c : p.outlets) {
        if (c.row >= p.rows || c.col >= p.cols || p.kind[p.index(c.row, c.col)] != CellKind::Fluid) {
            add(PatternIssue::BadInletOutlet, c, "outlet is not a fluid cell");
            continue;
        }
        if (!on_boundary(p, c)) add(PatternIssue::OutletNotOnBoundary, c, "outlet is not on the die boundary");
        else if (downstream(p, c)) add(PatternIssue::OutletNotExiting, c, "outlet flow does not leave the die");
    }

    // Reachability from the inlets along the flow.
    std::vector<char> reached(n, 0);
    for (const auto& start : p.inlets) {
        if (start.row >= p.rows || start.col >= p.cols) continue;
        std::optional<CellRef> cur = start;
        std::size_t steps = 0;
        while (cur && steps++ <= n) {
            const std::size_t k = p.index(cur->row, cur->col);
            if (p.kind[k] != CellKind::Fluid || reached[k]) break;
            reached[k] = 1;
            cur = downstream(p, *cur);
        }
    }
    // Cells left over either sit on a cycle or hang off one / start nowhere.
    std::vector<char> state(n, 0);  // 0 unseen, 1 on current walk, 2 done
    std::vector<char> on_cycle(n, 0);
    for (std::size_t k0 = 0; k0 < n; ++k0) {
        if (p.kind[k0] != CellKind::Fluid || reached[k0] || state[k0]) continue;
        std::vector<std::size_t> walk;
        std::optional<CellRef> cur = CellRef{k0 / p.cols, k0 % p.cols};
        while (cur) {
            const std::size_t k = p.index(cur->row, cur->col);
            if (p.kind[k] != CellKind::Fluid || p.flow[k] == FlowDir::None) break;
            if (state[k] == 1) {
                auto it = std::find(walk.begin(), walk.end(), k);
                for (; it != walk.end(); ++it) on_cycle[*it] = 1;
                break;
            }
            if (state[k] == 2) break;
            state[k] = 1;
            walk.push_back(k);
            cur = downstream(p, *cur);
        }
        for (auto k : walk) state[k] = 2;
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (p.kind[k] != CellKind::Fluid || reached[k]) continue;
        const CellRef c{k / p.cols, k % p.cols};
        if (on_cycle[k]) add(PatternIssue::Cycle, c, "flow cycle");
        else add(PatternIssue::Unreachable, c, "not reachable from any inlet");
    }
    return out;
}

std::vector<std::vector<CellRef>> channel_paths(const CoolingPattern& p) {
    auto report = validate_pattern(p);
    if (!report.empty()) throw Error(ErrorKind::InvalidPattern, "invalid cooling pattern: " + report.front().message);
    std::vector<std::vector<CellRef>> paths;
    paths.reserve(p.inlets.size());
    for (const auto& start : p.inlets) {
        std::vector<CellRef> path;
        std::optional<CellRef> cur = start;
        while (cur) {
            path.push_back(*cur);
            cur = downstream(p, *cur);
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

CoolingPattern parse_pattern(std::string_view source) {
    CoolingPattern p;
    bool have_grid = false, have_coolant = false;
    std::vector<std::string> rows;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        std::size_t end = source.find('\n', pos);
        if (end == std::string_view::npos) end = source.size();
        std::string_view raw = source.substr(pos, end - pos);
        ++number;
        pos = end + 1;
        while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ' || raw.back() == '\t')) raw.remove_suffix(1);
        while (!raw.empty() && (raw.front() == ' ' || raw.front() == '\t')) raw.remove_prefix(1);

        // Cell rows use '#' for walls, so they are recognized before comments.
        if (have_grid && rows.size() < p.rows && raw.size() == p.cols &&
            raw.find_first_not_of("#^v<>") == std::string_view::npos) {
            rows.emplace_back(raw);
            if (end == source.size()) break;
            continue;
        }
        auto lines = text::tokenize(raw);
        if (lines.empty()) {
            if (end == source.size()) break;
            continue;
        }
        const auto& f = lines.front().fields;
        auto need = [&](std::size_t count, std::string_view usage) {
            if (f.size() != count) throw Error(ErrorKind::Parse, "expected '" + std::string(usage) + "'", {}, number);
        };
        if (f[0] == "grid") {
            need(3, "grid <rows> <cols>");
            long r = text::parse_long(f[1], "rows", number), c = text::parse_long(f[2], "cols", number);
            if (r < 1 || c < 1) throw Error(ErrorKind::Parse, "grid must be non-empty", {}, number);
            p.rows = static_cast<std::size_t>(r);
            p.cols = static_cast<std::size_t>(c);
            have_grid = true;
        } else if (f[0] == "channel") {
            need(3, "channel <width_cells> <pitch_cells>");
            p.channel_width_cells = static_cast<int>(text::parse_long(f[1], "channel width", number));
            p.channel_pitch_cells = static_cast<int>(text::parse_long(f[2], "channel pitch", number));
        } else if (f[0] == "coolant") {
            need(6, "coolant <name> <c_v> <T_in_K> <flow_m3s> <h>");
            p.coolant.name = f[1];
            p.coolant.volumetric_heat_capacity = text::parse_double(f[2], "c_v", number);
            p.coolant.inlet_temperature = text::parse_double(f[3], "T_in", number);
            p.coolant.flow_rate_per_channel = text::parse_double(f[4], "flow", number);
            p.coolant.convection_coefficient = text::parse_double(f[5], "h", number);
            have_coolant = true;
        } else if (f[0] == "inlet" || f[0] == "outlet") {
            need(3, f[0] + " <row> <col>");
            long r = text::parse_long(f[1], "row", number), c = text::parse_long(f[2], "col", number);
            if (!have_grid || r < 0 || c < 0 || static_cast<std::size_t>(r) >= p.rows ||
                static_cast<std::size_t>(c) >= p.cols)
                throw Error(ErrorKind::Parse, f[0] + " outside the grid", {}, number);
            CellRef cell{static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
            (f[0] == "inlet" ? p.inlets : p.outlets).push_back(cell);
        } else {
            throw Error(ErrorKind::Parse, "unexpected pattern line '" + std::string(raw) + "'", {}, number);
        }
        if (end == source.size()) break;
    }
    if (!have_grid) throw Error(ErrorKind::Parse, "missing 'grid' line");
    if (!have_coolant) throw Error(ErrorKind::Parse, "missing 'coolant' line");
    if (rows.size() != p.rows) {
        throw Error(ErrorKind::Parse, "expected " + std::to_string(p.rows) + " cell rows of " + std::to_string(p.cols) +
                                          " characters, got " + std::to_string(rows.size()));
    }
    p.kind.assign(p.rows * p.cols, CellKind::Wall);
    p.flow.assign(p.rows * p.cols, FlowDir::None);
    for (std::size_t r = 0; r < p.rows; ++r) {
        for (std::size_t c = 0; c < p.cols; ++c) {
            const std::size_t k = p.index(r, c);
            switch (rows[r][c]) {
                case '^': p.kind[k] = CellKind::Fluid; p.flow[k] = FlowDir::North; break;
                case 'v': p.kind[k] = CellKind::Fluid; p.flow[k] = FlowDir::South; break;
                case '>': p.kind[k] = CellKind::Fluid; p.flow[k] = FlowDir::East; break;
                case '<': p.kind[k] = CellKind::Fluid; p.flow[k] = FlowDir::West; break;
                default: break;
            }
        }
    }
    return p;
}

std::string emit_pattern(const CoolingPattern& p) {
    using text::format_double;
    std::string out = "# cooling pattern: first cell row is row 0 (south edge); '#' wall, '^' +y, 'v' -y, '>' +x, '<' -x\n";
    out += "grid\t" + std::to_string(p.rows) + "\t" + std::to_string(p.cols) + "\n";
    out += "channel\t" + std::to_string(p.channel_width_cells) + "\t" + std::to_string(p.channel_pitch_cells) + "\n";
    out += "coolant\t" + p.coolant.name + "\t" + format_double(p.coolant.volumetric_heat_capacity) + "\t" +
           format_double(p.coolant.inlet_temperature) + "\t" + format_double(p.coolant.flow_rate_per_channel) + "\t" +
           format_double(p.coolant.convection_coefficient) + "\n";
    for (std::size_t r = 0; r < p.rows; ++r) {
        for (std::size_t c = 0; c < p.cols; ++c) out += flow_code(p.kind[p.index(r, c)], p.flow[p.index(r, c)]);
        out += "\n";
    }
    for (const auto& c : p.inlets) out += "inlet\t" + std::to_string(c.row) + "\t" + std::to_string(c.col) + "\n";
    for (const auto& c : p.outlets) out += "outlet\t" + std::to_string(c.row) + "\t" + std::to_string(c.col) + "\n";
    return out;
}

}  // namespace stacktherm

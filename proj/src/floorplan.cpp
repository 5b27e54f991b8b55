#include "stacktherm/floorplan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "stacktherm/error.hpp"
#include "stacktherm/text.hpp"

namespace stacktherm {

namespace {
constexpr double kOverlapTolerance = 1e-15;   // m^2, absolute
constexpr double kCoverageTolerance = 1e-9;   // relative to the outline area
constexpr double kEdgeTolerance = 1e-9;       // relative to the larger outline side
constexpr double kRasterEpsilon = 1e-12;      // m
}  // namespace

const Block* Floorplan::find(std::string_view name) const {
    for (const auto& b : blocks)
        if (b.name == name) return &b;
    return nullptr;
}

bool is_filler(std::string_view block_name) { return block_name.starts_with(kFillerPrefix); }

std::pair<int, int> grid_factorization(int n) {
    int rows = 1;
    for (int r = 1; r * r <= n; ++r)
        if (n % r == 0) rows = r;
    return {rows, n / rows};
}

Floorplan generate_template(const DieOutline& outline, FloorplanTemplate kind, int count, std::string_view prefix,
                            int first_index) {
    if (count < 1) throw Error(ErrorKind::Domain, "template block count must be at least 1");
    std::string base = prefix.empty() ? (kind == FloorplanTemplate::CoreGrid ? "C" : "B") : std::string(prefix);
    auto [rows, cols] = grid_factorization(count);
    // Wider dies get the longer side of the factorization.
    if (outline.height > outline.width) std::swap(rows, cols);

    Floorplan fp;
    fp.outline = outline;
    const double w = outline.width / cols;
    const double h = outline.height / rows;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Block b;
            b.name = base + "_" + std::to_string(first_index + r * cols + c);
            b.width = w;
            b.height = h;
            b.left_x = c * w;
            b.bottom_y = r * h;
            fp.blocks.push_back(std::move(b));
        }
    }
    return fp;
}

Floorplan generate_from_areas(const DieOutline& outline, const AreaBudget& budget) {
    if (budget.empty()) throw Error(ErrorKind::EmptyInput, "area budget is empty");
    std::set<std::string> seen;
    for (const auto& e : budget) {
        if (!(e.area > 0.0)) throw Error(ErrorKind::Domain, "area for '" + e.name + "' must be positive", {e.name});
        if (!seen.insert(e.name).second)
            throw Error(ErrorKind::DuplicateName, "duplicate budget entry '" + e.name + "'", {e.name});
    }

    AreaBudget entries = budget;
    const double die_area = outline.area();
    const double total = std::accumulate(entries.begin(), entries.end(), 0.0,
                                         [](double s, const AreaEntry& e) { return s + e.area; });
    if (total < die_area * (1.0 - 1e-6)) {
        entries.push_back(AreaEntry{std::string(kFillerPrefix) + "0", die_area - total, std::nullopt});
    } else {
        for (auto& e : entries) e.area *= die_area / total;
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const AreaEntry& a, const AreaEntry& b) { return a.area > b.area; });

    Floorplan fp;
    fp.outline = outline;
    double x = 0.0, y = 0.0, w = outline.width, h = outline.height;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        Block b;
        b.name = e.name;
        if (i + 1 == entries.size()) {
            b.left_x = x;
            b.bottom_y = y;
            b.width = w;
            b.height = h;
            fp.blocks.push_back(std::move(b));
            break;
        }
        // Strip spanning the full height (cut along x) or the full width (cut along y).
        const double strip_w = e.area / h;
        const double strip_h = e.area / w;
        bool cut_x = w >= h;
        if (e.aspect_hint && *e.aspect_hint > 0.0) {
            const double miss_x = std::abs(std::log((strip_w / h) / *e.aspect_hint));
            const double miss_y = std::abs(std::log((w / strip_h) / *e.aspect_hint));
            if (miss_x != miss_y) cut_x = miss_x < miss_y;
        }
        b.left_x = x;
        b.bottom_y = y;
        if (cut_x) {
            b.width = strip_w;
            b.height = h;
            x += strip_w;
            w = outline.width - x;
        } else {
            b.width = w;
            b.height = strip_h;
            y += strip_h;
            h = outline.height - y;
        }
        fp.blocks.push_back(std::move(b));
    }
    return fp;
}

void check_floorplan(const Floorplan& fp, const std::vector<int>* lines) {
    auto line_of = [&](std::size_t i) { return lines && i < lines->size() ? (*lines)[i] : 0; };
    const auto& blocks = fp.blocks;
    if (blocks.empty()) throw Error(ErrorKind::EmptyInput, "floorplan has no blocks");

    std::set<std::string> seen;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        if (!seen.insert(b.name).second)
            throw Error(ErrorKind::DuplicateName, "duplicate block name '" + b.name + "'", {b.name}, line_of(i));
        if (!(b.width > 0.0) || !(b.height > 0.0))
            throw Error(ErrorKind::Domain, "block '" + b.name + "' must have positive width and height", {b.name},
                        line_of(i));
    }

    const double tol = kEdgeTolerance * std::max(fp.outline.width, fp.outline.height);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        if (b.left_x < -tol || b.bottom_y < -tol || b.right() > fp.outline.width + tol ||
            b.top() > fp.outline.height + tol) {
            throw Error(ErrorKind::OutOfOutline, "block '" + b.name + "' extends outside the die outline", {b.name},
                        line_of(i));
        }
    }

    for (std::size_t i = 0; i < blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < blocks.size(); ++j) {
            const auto& a = blocks[i];
            const auto& b = blocks[j];
            const double ox = std::min(a.right(), b.right()) - std::max(a.left_x, b.left_x);
            const double oy = std::min(a.top(), b.top()) - std::max(a.bottom_y, b.bottom_y);
            if (ox > 0.0 && oy > 0.0 && ox * oy > kOverlapTolerance) {
                throw Error(ErrorKind::Overlap,
                            "blocks '" + a.name + "' and '" + b.name + "' overlap by " +
                                text::format_sig(ox * oy, 6) + " m^2",
                            {a.name, b.name}, line_of(j));
            }
        }
    }

    double covered = 0.0;
    for (const auto& b : blocks) covered += b.area();
    const double die = fp.outline.area();
    if (std::abs(covered - die) > kCoverageTolerance * die) {
        throw Error(ErrorKind::CoverageGap,
                    "blocks cover " + text::format_sig(covered, 9) + " m^2 of " + text::format_sig(die, 9) +
                        " m^2; missing " + text::format_sig(die - covered, 6) + " m^2",
                    {});
    }
}

Floorplan parse_floorplan(std::string_view source, std::optional<DieOutline> outline) {
    Floorplan fp;
    std::vector<int> lines;
    std::set<std::string> seen;
    for (const auto& line : text::tokenize(source)) {
        const auto& f = line.fields;
        if (f.size() != 5)
            throw Error(ErrorKind::Parse, "expected '<name> <width_m> <height_m> <left_x_m> <bottom_y_m>'", {},
                        line.number);
        Block b;
        b.name = f[0];
        b.width = text::parse_double(f[1], "width", line.number);
        b.height = text::parse_double(f[2], "height", line.number);
        b.left_x = text::parse_double(f[3], "left_x", line.number);
        b.bottom_y = text::parse_double(f[4], "bottom_y", line.number);
        if (!seen.insert(b.name).second)
            throw Error(ErrorKind::DuplicateName, "duplicate block name '" + b.name + "'", {b.name}, line.number);
        fp.blocks.push_back(std::move(b));
        lines.push_back(line.number);
    }
    if (fp.blocks.empty()) throw Error(ErrorKind::EmptyInput, "floorplan has no blocks");
    if (outline) {
        fp.outline = *outline;
    } else {
        for (const auto& b : fp.blocks) {
            fp.outline.width = std::max(fp.outline.width, b.right());
            fp.outline.height = std::max(fp.outline.height, b.top());
        }
    }
    check_floorplan(fp, &lines);
    return fp;
}

std::string emit_floorplan(const Floorplan& fp) {
    using text::format_double;
    std::string out = "# floorplan: name\twidth_m\theight_m\tleft_x_m\tbottom_y_m\n";
    for (const auto& b : fp.blocks) {
        out += b.name + "\t" + format_double(b.width) + "\t" + format_double(b.height) + "\t" +
               format_double(b.left_x) + "\t" + format_double(b.bottom_y) + "\n";
    }
    return out;
}

std::size_t Rasterization::block_index(std::string_view name) const {
    for (std::size_t i = 0; i < block_names.size(); ++i)
        if (block_names[i] == name) return i;
    throw Error(ErrorKind::NotFound, "no block '" + std::string(name) + "' in rasterization", {std::string(name)});
}

Rasterization rasterize(const Floorplan& fp, const Grid& grid) {
    Rasterization r;
    r.grid = grid;
    r.owner.assign(grid.cells(), 0);
    r.cell_counts.assign(fp.blocks.size(), 0);
    for (const auto& b : fp.blocks) {
        r.block_names.push_back(b.name);
        auto clamp_index = [](double v, double cell, std::size_t count) {
            const auto i = static_cast<long>(std::floor(v / cell));
            return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(count) - 1));
        };
        r.center_cell.push_back(grid.index(clamp_index(b.bottom_y + 0.5 * b.height, grid.cell_height, grid.rows),
                                           clamp_index(b.left_x + 0.5 * b.width, grid.cell_width, grid.cols)));
    }

    for (std::size_t row = 0; row < grid.rows; ++row) {
        const double py = (static_cast<double>(row) + 0.5) * grid.cell_height - kRasterEpsilon;
        for (std::size_t col = 0; col < grid.cols; ++col) {
            const double px = (static_cast<double>(col) + 0.5) * grid.cell_width - kRasterEpsilon;
            std::size_t found = fp.blocks.size();
            for (std::size_t k = 0; k < fp.blocks.size(); ++k) {
                const auto& b = fp.blocks[k];
                if (px >= b.left_x && px <= b.right() && py >= b.bottom_y && py <= b.top()) {
                    found = k;
                    break;
                }
            }
            if (found == fp.blocks.size()) {
                throw Error(ErrorKind::CoverageGap,
                            "cell (" + std::to_string(row) + ", " + std::to_string(col) + ") is not covered by any block");
            }
            r.owner[grid.index(row, col)] = found;
            ++r.cell_counts[found];
        }
    }
    return r;
}

}  // namespace stacktherm

#include "terraseg/navigate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <tuple>

#include <json.hpp>

#include "terraseg/raster_io.hpp"
#include "terraseg/spatial_index.hpp"

namespace terraseg {

std::array<int, 2> NavGrid::cell_of(double x, double y) const {
    return {int(std::floor((x - origin_x) / cell)), int(std::floor((y - origin_y) / cell))};
}

NavGrid build_navgrid(double min_x, double min_y, double max_x, double max_y,
                      const MaterialVectorMap& map, const NavWeights& weights, double cell,
                      double lookup_radius) {
    if (!(max_x > min_x) || !(max_y > min_y)) throw Error("build_navgrid: empty extent");
    if (!(cell > 0.0)) throw Error("build_navgrid: cell size must be positive");
    if (!(weights.bare_soil > 0.0) || !(weights.road > 0.0) || !(weights.vegetation > 0.0))
        throw Error("build_navgrid: weights must be positive");
    NavGrid grid;
    grid.origin_x = min_x;
    grid.origin_y = min_y;
    grid.cell = cell;
    grid.nx = std::max(1, int(std::ceil((max_x - min_x) / cell)));
    grid.ny = std::max(1, int(std::ceil((max_y - min_y) / cell)));
    grid.weight.assign(std::size_t(grid.nx) * grid.ny, 1.0);
    grid.passable.assign(grid.weight.size(), 1);
    if (map.entries.empty()) return grid;

    std::vector<Point3> samples;
    samples.reserve(map.entries.size());
    for (const auto& e : map.entries) samples.push_back({e.x, e.y, 0.0});
    const SpatialIndex index(samples);
    const double r2 = lookup_radius * lookup_radius;
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const Vec2 c = grid.cell_center(ix, iy);
            const std::size_t n = index.nearest({c.x, c.y, 0.0});
            const double dx = c.x - samples[n].x, dy = c.y - samples[n].y;
            if (dx * dx + dy * dy <= r2)
                grid.weight[grid.idx(ix, iy)] = weights.for_class(map.entries[n].material);
        }
    return grid;
}

PathResult astar(const NavGrid& grid, std::array<int, 2> start, std::array<int, 2> goal) {
    auto check_endpoint = [&](std::array<int, 2> p, const char* which) {
        if (!grid.in_bounds(p[0], p[1]))
            throw Error(std::string("astar: ") + which + " cell outside grid");
        if (!grid.passable[grid.idx(p[0], p[1])])
            throw Error(std::string("astar: ") + which + " cell impassable");
    };
    check_endpoint(start, "start");
    check_endpoint(goal, "goal");

    PathResult result;
    if (start == goal) {
        result.found = true;
        result.cells = {start};
        return result;
    }

    double w_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.weight.size(); ++i)
        if (grid.passable[i]) w_min = std::min(w_min, grid.weight[i]);
    auto heuristic = [&](int ix, int iy) {
        const double dx = double(ix - goal[0]) * grid.cell;
        const double dy = double(iy - goal[1]) * grid.cell;
        return w_min * std::sqrt(dx * dx + dy * dy);
    };

    const std::size_t n_cells = grid.weight.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best_g(n_cells, inf);
    std::vector<std::int64_t> parent(n_cells, -1);
    using Node = std::tuple<double, double, std::size_t>;  // (f, g, cell)
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    const std::size_t s = grid.idx(start[0], start[1]);
    const std::size_t t = grid.idx(goal[0], goal[1]);
    best_g[s] = 0.0;
    open.emplace(heuristic(start[0], start[1]), 0.0, s);

    static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    bool reached = false;
    while (!open.empty()) {
        const auto [f, g, u] = open.top();
        open.pop();
        if (g > best_g[u]) continue;  // stale entry
        if (u == t) {
            reached = true;
            break;
        }
        const int ux = int(u % std::size_t(grid.nx));
        const int uy = int(u / std::size_t(grid.nx));
        const double wu = grid.weight[u];
        for (int k = 0; k < 8; ++k) {
            const int vx = ux + kDx[k], vy = uy + kDy[k];
            if (!grid.in_bounds(vx, vy)) continue;
            const std::size_t v = grid.idx(vx, vy);
            if (!grid.passable[v]) continue;
            const double step = (k < 4 ? 1.0 : std::sqrt(2.0)) * grid.cell;
            const double ng = g + step * 0.5 * (wu + grid.weight[v]);
            if (ng < best_g[v]) {
                best_g[v] = ng;
                parent[v] = std::int64_t(u);
                open.emplace(ng + heuristic(vx, vy), ng, v);
            }
        }
    }
    if (!reached) return result;

    std::vector<std::array<int, 2>> rev;
    for (std::int64_t u = std::int64_t(t); u >= 0; u = parent[std::size_t(u)])
        rev.push_back({int(std::size_t(u) % std::size_t(grid.nx)),
                       int(std::size_t(u) / std::size_t(grid.nx))});
    std::reverse(rev.begin(), rev.end());
    result.found = true;
    result.cells = std::move(rev);
    result.cost = best_g[t];
    for (std::size_t i = 1; i < result.cells.size(); ++i) {
        const double dx = double(result.cells[i][0] - result.cells[i - 1][0]);
        const double dy = double(result.cells[i][1] - result.cells[i - 1][1]);
        result.length += std::sqrt(dx * dx + dy * dy) * grid.cell;
    }
    return result;
}

void write_path(const std::string& path, const PathResult& result) {
    if (!result.found) throw Error("write_path: no path to write");
    nlohmann::json j;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : result.cells) j["cells"].push_back({c[0], c[1]});
    j["cost_m_weighted"] = result.cost;
    j["length_m"] = result.length;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write path: " + path);
    out << j.dump(2) << "\n";
}

PathResult read_path(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read path: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("bad path file " + path + ": " + e.what());
    }
    PathResult result;
    result.found = true;
    for (const auto& c : j.at("cells")) result.cells.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
    result.cost = j.at("cost_m_weighted").get<double>();
    result.length = j.at("length_m").get<double>();
    return result;
}

void render_navgrid(const NavGrid& grid, const PathResult& result, const std::string& pgm_path) {
    double w_lo = std::numeric_limits<double>::infinity(), w_hi = 0.0;
    for (double w : grid.weight) {
        w_lo = std::min(w_lo, w);
        w_hi = std::max(w_hi, w);
    }
    const double span = (w_hi > w_lo) ? (w_hi - w_lo) : 1.0;
    std::vector<std::uint8_t> gray(grid.weight.size());
    for (std::size_t i = 0; i < grid.weight.size(); ++i) {
        const double t = (grid.weight[i] - w_lo) / span;
        gray[i] = std::uint8_t(200.0 - 160.0 * t);  // light = cheap, dark = costly
    }
    if (result.found)
        for (const auto& c : result.cells) gray[grid.idx(c[0], c[1])] = 255;
    // PGM rows run top-down; grid rows run bottom-up (+y), so flip.
    std::vector<std::uint8_t> flipped(gray.size());
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix)
            flipped[std::size_t(grid.ny - 1 - iy) * grid.nx + ix] = gray[grid.idx(ix, iy)];
    write_pgm(pgm_path, grid.nx, grid.ny, flipped);
}

}  // namespace terraseg

// Shared helpers for the test suites: deterministic random data builders and
// independent reference implementations used as oracles.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <tuple>
#include <vector>

#include "terraseg/navigate.hpp"
#include "terraseg/types.hpp"

namespace testutil {

inline double unit(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

inline double range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit(rng);
}

inline int upto(std::mt19937_64& rng, int n) {  // [0, n)
    return int(unit(rng) * n) % n;
}

inline terraseg::PointCloud random_cloud(std::size_t n, double extent, std::uint64_t seed,
                                         double z_extent = 10.0) {
    std::mt19937_64 rng(seed);
    terraseg::PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        cloud.points.push_back({range(rng, 0.0, extent), range(rng, 0.0, extent),
                                range(rng, 0.0, z_extent), std::uint8_t(rng() & 0xff),
                                std::uint8_t(rng() & 0xff), std::uint8_t(rng() & 0xff)});
    return cloud;
}

// Reference point-in-polygon: even-odd crossing count plus an explicit
// point-on-segment test so the boundary counts as inside.
inline bool on_segment(double px, double py, const terraseg::Vec2& a, const terraseg::Vec2& b) {
    const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    if (std::abs(cross) > 1e-12 * (std::abs(b.x - a.x) + std::abs(b.y - a.y) + 1.0)) return false;
    return px >= std::min(a.x, b.x) - 1e-12 && px <= std::max(a.x, b.x) + 1e-12 &&
           py >= std::min(a.y, b.y) - 1e-12 && py <= std::max(a.y, b.y) + 1e-12;
}

inline bool polygon_contains_oracle(const terraseg::Polygon2& poly, double x, double y) {
    bool inside = false;
    for (const auto& ring : poly.rings) {
        const std::size_t n = ring.size();
        for (std::size_t i = 0; i < n; ++i) {
            const terraseg::Vec2& a = ring[i];
            const terraseg::Vec2& b = ring[(i + 1) % n];
            if (on_segment(x, y, a, b)) return true;
            if ((a.y > y) != (b.y > y)) {
                const double xc = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
                if (x < xc) inside = !inside;
            }
        }
    }
    return inside;
}

// Reference shortest path on a NavGrid: plain Dijkstra over the same
// 8-connected moves and averaged-endpoint edge costs.
inline double dijkstra_cost(const terraseg::NavGrid& grid, std::size_t start, std::size_t goal) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const std::size_t n = grid.weight.size();
    std::vector<double> dist(n, kInf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[start] = 0.0;
    open.push({0.0, start});
    static const int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    while (!open.empty()) {
        const auto [d, u] = open.top();
        open.pop();
        if (d > dist[u]) continue;
        if (u == goal) return d;
        const int ux = int(u % std::size_t(grid.nx));
        const int uy = int(u / std::size_t(grid.nx));
        for (int k = 0; k < 8; ++k) {
            const int vx = ux + dx[k], vy = uy + dy[k];
            if (!grid.in_bounds(vx, vy)) continue;
            const std::size_t v = grid.idx(vx, vy);
            if (!grid.passable[v]) continue;
            const double step = (k < 4 ? 1.0 : std::sqrt(2.0)) * grid.cell;
            const double nd = d + step * 0.5 * (grid.weight[u] + grid.weight[v]);
            if (nd < dist[v]) {
                dist[v] = nd;
                open.push({nd, v});
            }
        }
    }
    return dist[goal];
}

inline terraseg::NavGrid make_navgrid(int nx, int ny, double cell = 1.0) {
    terraseg::NavGrid grid;
    grid.origin_x = 0.0;
    grid.origin_y = 0.0;
    grid.cell = cell;
    grid.nx = nx;
    grid.ny = ny;
    grid.weight.assign(std::size_t(nx) * ny, 1.0);
    grid.passable.assign(std::size_t(nx) * ny, 1);
    return grid;
}

}  // namespace testutil

#pragma once

#include <array>
#include <string>
#include <vector>

#include "terraseg/materials.hpp"
#include "terraseg/types.hpp"

namespace terraseg {

struct NavWeights {
    double bare_soil = 1.0;
    double road = 0.2;
    double vegetation = 1.0;

    double for_class(MaterialClass c) const {
        switch (c) {
            case MaterialClass::BareSoil: return bare_soil;
            case MaterialClass::Road: return road;
            case MaterialClass::Vegetation: return vegetation;
        }
        return 1.0;
    }
};

struct NavGrid {
    double origin_x = 0.0, origin_y = 0.0;
    double cell = 1.0;
    int nx = 0, ny = 0;
    std::vector<double> weight;          // row-major iy * nx + ix, all > 0
    std::vector<std::uint8_t> passable;  // parallel to weight

    std::size_t idx(int ix, int iy) const { return std::size_t(iy) * nx + ix; }
    bool in_bounds(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < nx && iy < ny; }
    Vec2 cell_center(int ix, int iy) const {
        return {origin_x + (ix + 0.5) * cell, origin_y + (iy + 0.5) * cell};
    }
    // Cell containing (x,y); may be out of bounds.
    std::array<int, 2> cell_of(double x, double y) const;
};

// Weighted grid over [min_x,max_x] x [min_y,max_y]: each cell takes the class
// weight of the nearest map sample within lookup_radius, else 1.0.
NavGrid build_navgrid(double min_x, double min_y, double max_x, double max_y,
                      const MaterialVectorMap& map, const NavWeights& weights = {},
                      double cell = 1.0, double lookup_radius = 3.0);

struct PathResult {
    bool found = false;
    std::vector<std::array<int, 2>> cells;  // (ix, iy) start -> goal
    double cost = 0.0;                      // weighted meters
    double length = 0.0;                    // Euclidean meters
};

// 8-connected A*. Edge cost = step length (cell or sqrt(2) * cell) times the
// mean of the endpoint weights; heuristic = grid-min weight * Euclidean
// distance. Throws when an endpoint is outside the grid or impassable;
// unreachable goals return found = false.
PathResult astar(const NavGrid& grid, std::array<int, 2> start, std::array<int, 2> goal);

// JSON {cells, cost_m_weighted, length_m}. Throws on an unfound path.
void write_path(const std::string& path, const PathResult& result);
PathResult read_path(const std::string& path);

// Debug render: weights as gray levels with the path drawn in white.
void render_navgrid(const NavGrid& grid, const PathResult& result, const std::string& pgm_path);

}  // namespace terraseg

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "terraseg/types.hpp"

namespace terraseg {

// Desk-scale synthetic terrain: a (possibly sloped) ground plane, flat-roofed
// boxes, solid blob-canopy trees, recolored road strips, and injected
// underground noise with exact per-point truth.
struct SceneSpec {
    double extent_x = 60.0, extent_y = 60.0;  // scene spans [0, extent]
    double base_z = 0.0;
    double slope_x = 0.0, slope_y = 0.0;  // ground z = base + sx*x + sy*y
    double ground_spacing = 0.25;
    double jitter = 0.02;  // vertical surface noise, meters
    int boxes = 2;
    int trees = 6;
    int roads = 1;
    int underground = 100;
    std::uint64_t seed = 42;
};

struct SynthScene {
    PointCloud cloud;                       // surface points + noise; labels = truth
    std::vector<std::uint8_t> underground;  // 1 where the point is injected noise
    PointCloud dsm;                         // per 1 m cell max-z surface samples
    Raster ortho;                           // top-down render, 0.25 m/px
    MaskRaster material_mask;               // ground-material truth codes
    TriMesh mesh;
    CameraPoseSet cameras;
    std::array<std::size_t, kTerrainClassCount> class_counts{};  // surface truth

    double ground_z(double x, double y) const {
        return base_z_ + slope_x_ * x + slope_y_ * y;
    }

    double base_z_ = 0.0, slope_x_ = 0.0, slope_y_ = 0.0;
};

// Deterministic for a given spec. Every injected noise point lies strictly
// below the lowest DSM sample within 5 m of its XY, so the default cleaning
// rule removes all of them.
SynthScene synth_scene(const SceneSpec& spec = {});

// A small species table (CSV) matching the generator's canopy colors, for
// pipeline runs.
void write_default_tree_table(const std::string& path);

}  // namespace terraseg

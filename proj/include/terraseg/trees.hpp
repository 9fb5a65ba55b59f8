#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "terraseg/ground_model.hpp"
#include "terraseg/types.hpp"

namespace terraseg {

// Occupied 0.5 m XY cells of a cluster; the sampling domain for placement.
struct FootprintMask {
    double origin_x = 0.0, origin_y = 0.0;  // min corner of cell (0,0)
    double cell = 0.5;
    int nx = 0, ny = 0;
    std::vector<std::uint8_t> cells;  // row-major iy * nx + ix

    bool cell_at(int ix, int iy) const {
        return ix >= 0 && iy >= 0 && ix < nx && iy < ny && cells[std::size_t(iy) * nx + ix] != 0;
    }
    bool contains(double x, double y) const;
    std::size_t occupied_count() const;
    double area() const { return double(occupied_count()) * cell * cell; }
    Vec2 cell_center(int ix, int iy) const {
        return {origin_x + (ix + 0.5) * cell, origin_y + (iy + 0.5) * cell};
    }
};

struct VegCluster {
    std::vector<std::size_t> members;  // indices into the vegetation point list
    FootprintMask footprint;
    double avg_height = 0.0;  // mean height above ground, filled by extract_trees
};

struct TreeInstance {
    double x = 0.0, y = 0.0;
    double height = 0.0;    // meters
    double width = 0.0;     // meters, max of the XY extents
    double color[3] = {0.0, 0.0, 0.0};  // mean member RGB
    std::optional<int> species_id;
    std::string species_name;
};

struct TreeModelAttribute {
    int species_id = 0;
    std::string name;
    double h_min = 0.0, h_max = 0.0;
    std::array<double, 3> leaf_color{};
    int zone_min = 0, zone_max = 0;
    std::string asset;
};

// Maximal components under "3D distance <= link_radius", sorted by
// descending size (ties by smallest first member index). Throws on empty
// input or non-positive radius.
std::vector<VegCluster> connected_components(const std::vector<Point3>& veg_points,
                                             double link_radius = 1.0);

// Delaunay area of the member XY projections, keeping only triangles whose
// edges are all <= max_edge. Degenerate clusters (fewer than 3 distinct
// points, collinear) have area 0.
double coverage_area(const std::vector<Point3>& veg_points, const VegCluster& cluster,
                     double max_edge = 2.0);

// Crown diameter clamp(0.5 * avg_height, 2, 15) gives a per-tree footprint;
// count = max(1, round(area / footprint)).
int estimate_tree_count(double area, double avg_height);

struct PoissonPlacement {
    std::vector<Vec2> locations;
    double radius = 0.0;  // the min-distance actually enforced
};

// Bridson dart sampling restricted to the mask, with the radius bisected
// (up to 12 steps) until the sample count lands in [0.8 n, 1.2 n]; the last
// evaluation is accepted as-is. Deterministic for a given seed.
PoissonPlacement poisson_disc_place(const FootprintMask& mask, int n_target, std::uint64_t seed);

// k-means++ seeding then Lloyd iterations until the max center shift is
// below 1e-4 m or 100 iterations. Throws when k exceeds the point count.
std::vector<Vec2> kmeans_place(const std::vector<Vec2>& points, int k, std::uint64_t seed);

// Assigns members to their nearest location, then measures each tree:
// height = max z - ground elevation at the location, width = max XY extent,
// color = mean member RGB. Locations with no member are dropped.
std::vector<TreeInstance> extract_tree_features(const std::vector<Point3>& veg_points,
                                                const VegCluster& cluster,
                                                const std::vector<Vec2>& locations,
                                                const GroundElevationModel& ground);

// Lowest-scoring species among the zone-compatible table entries (all
// entries when none match the zone). Score is an even blend of height fit
// and leaf-color distance. Ties go to the lowest species id.
int match_species(const TreeInstance& tree, const std::vector<TreeModelAttribute>& table,
                  int zone);

// Coarse 10-degree-band latitude to hardiness zone stub.
int zone_from_latitude(double latitude_deg);

// CSV: species_id,name,h_min,h_max,leaf_r,leaf_g,leaf_b,zone_min,zone_max,asset
// (header row optional). Throws with a line number on malformed rows.
std::vector<TreeModelAttribute> read_tree_table(const std::string& path);

enum class PlacementMethod { Poisson, KMeans };

struct TreeParams {
    double link_radius = 1.0;
    double max_edge = 2.0;
    PlacementMethod method = PlacementMethod::Poisson;
    std::uint64_t seed = 42;
    int zone = 7;
};

// Full tree stage: vegetation points of a labeled cloud -> clusters ->
// placement -> per-tree features -> species match (when a table is given).
std::vector<TreeInstance> extract_trees(const PointCloud& labeled_cloud,
                                        const GroundElevationModel& ground,
                                        const std::vector<TreeModelAttribute>& table,
                                        const TreeParams& params = {});

void write_tree_instances(const std::string& path, const std::vector<TreeInstance>& trees);
std::vector<TreeInstance> read_tree_instances(const std::string& path);

}  // namespace terraseg

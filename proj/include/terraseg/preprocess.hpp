#pragma once

#include "terraseg/spatial_index.hpp"
#include "terraseg/types.hpp"

namespace terraseg {

struct CleaningParams {
    double cylinder_radius = 5.0;  // meters
};

struct AoiParams {
    double alpha = 30.0;  // meters; alpha-shape concavity scale
    bool fallback_to_convex = true;
};

struct CleanResult {
    PointCloud kept;
    std::size_t removed_count = 0;
};

// Drops point p when z(p) is below the lowest DSM point within a vertical
// cylinder of the given radius around p. Points with an empty cylinder are
// kept. Order of kept points (and labels) is preserved.
CleanResult remove_underground(const PointCloud& cloud, const PointCloud& dsm,
                               const CleaningParams& params = {});

// Same operation against a prebuilt DSM index, for callers that clean several
// clouds against one DSM.
CleanResult remove_underground(const PointCloud& cloud, const SpatialIndex& dsm_index,
                               const CleaningParams& params = {});

// Concave outline of the XY-projected camera positions, realized as the
// alpha-shape outer boundary. Falls back to the convex hull when the shape is
// disconnected, pinched, or fails to enclose every camera. Needs >= 3
// non-collinear positions.
Polygon2 compute_aoi(const CameraPoseSet& cameras, const AoiParams& params = {});

// Keeps points whose XY lies inside or on the polygon (even-odd rule);
// labels stay in sync.
PointCloud crop_to_aoi(const PointCloud& cloud, const Polygon2& aoi);

// Camera positions as a JSON array of [x, y, z] triples.
void write_cameras(const std::string& path, const CameraPoseSet& cameras);
CameraPoseSet read_cameras(const std::string& path);

}  // namespace terraseg

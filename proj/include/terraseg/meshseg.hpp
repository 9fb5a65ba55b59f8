#pragma once

#include <array>
#include <vector>

#include "terraseg/ground_model.hpp"
#include "terraseg/types.hpp"

namespace terraseg {

struct MeshSegParams {
    double match_radius = 0.5;  // meters; vertex-to-cloud-point match limit
};

inline constexpr std::uint8_t kUnassignedVertex = 255;

struct SegmentedMesh {
    std::array<TriMesh, kTerrainClassCount> submeshes;  // indexed by class code
    std::vector<std::uint8_t> vertex_class;  // per input vertex; 255 = unassigned
};

// Vertex class = class of the nearest labeled cloud point when it lies
// within match_radius (ties by lowest point index). A face survives into a
// class submesh only when all three vertices carry that class; submesh
// vertices are re-indexed compactly.
SegmentedMesh segment_mesh(const TriMesh& mesh, const PointCloud& labeled_cloud,
                           const MeshSegParams& params = {});

// Replaces each listed vertex's z with the ground elevation at its XY.
// Everything else (XY, connectivity, counts) is untouched.
TriMesh flatten_trees(const TriMesh& mesh, const std::vector<std::size_t>& vegetation_vertices,
                      const GroundElevationModel& ground);

}  // namespace terraseg

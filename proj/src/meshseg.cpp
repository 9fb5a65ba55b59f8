#include "terraseg/meshseg.hpp"

#include <cmath>

#include "terraseg/spatial_index.hpp"

namespace terraseg {

SegmentedMesh segment_mesh(const TriMesh& mesh, const PointCloud& labeled_cloud,
                           const MeshSegParams& params) {
    mesh.check_valid();
    if (labeled_cloud.empty()) throw Error("segment_mesh: empty cloud");
    if (!labeled_cloud.labels) throw Error("segment_mesh: cloud has no labels");
    labeled_cloud.check_consistent();
    if (!(params.match_radius > 0.0)) throw Error("segment_mesh: match radius must be positive");

    const SpatialIndex index(labeled_cloud.points);
    const double r2 = params.match_radius * params.match_radius;
    SegmentedMesh out;
    out.vertex_class.assign(mesh.vertices.size(), kUnassignedVertex);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const Point3& p = mesh.vertices[v];
        const std::size_t n = index.nearest(p);
        const Point3& q = labeled_cloud.points[n];
        const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
        if (dx * dx + dy * dy + dz * dz <= r2)
            out.vertex_class[v] = std::uint8_t((*labeled_cloud.labels)[n]);
    }

    // Faces with a uniformly classed vertex triple survive; others are
    // eliminated outright. Surviving vertices keep their original relative
    // order, so a class-pure mesh passes through unchanged.
    std::array<std::vector<int>, kTerrainClassCount> remap;
    std::array<std::vector<std::array<int, 3>>, kTerrainClassCount> faces;
    for (auto& m : remap) m.assign(mesh.vertices.size(), -1);
    for (const auto& f : mesh.faces) {
        const std::uint8_t c = out.vertex_class[std::size_t(f[0])];
        if (c == kUnassignedVertex) continue;
        if (out.vertex_class[std::size_t(f[1])] != c || out.vertex_class[std::size_t(f[2])] != c)
            continue;
        for (int v : f) remap[c][std::size_t(v)] = 0;
        faces[c].push_back(f);
    }
    for (int c = 0; c < kTerrainClassCount; ++c) {
        TriMesh& sub = out.submeshes[std::size_t(c)];
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            if (remap[std::size_t(c)][v] < 0) continue;
            remap[std::size_t(c)][v] = int(sub.vertices.size());
            sub.vertices.push_back(mesh.vertices[v]);
        }
        for (const auto& f : faces[std::size_t(c)])
            sub.faces.push_back({remap[std::size_t(c)][std::size_t(f[0])],
                                 remap[std::size_t(c)][std::size_t(f[1])],
                                 remap[std::size_t(c)][std::size_t(f[2])]});
    }
    return out;
}

TriMesh flatten_trees(const TriMesh& mesh, const std::vector<std::size_t>& vegetation_vertices,
                      const GroundElevationModel& ground) {
    TriMesh out = mesh;
    for (std::size_t v : vegetation_vertices) {
        if (v >= out.vertices.size()) throw Error("flatten_trees: vertex index out of range");
        Point3& p = out.vertices[v];
        p.z = ground.elevation_at(p.x, p.y);
    }
    return out;
}

}  // namespace terraseg

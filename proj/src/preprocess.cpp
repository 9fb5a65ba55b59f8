#include "terraseg/preprocess.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "terraseg/delaunay.hpp"

namespace terraseg {

CleanResult remove_underground(const PointCloud& cloud, const PointCloud& dsm,
                               const CleaningParams& params) {
    if (dsm.empty()) throw Error("remove_underground: DSM is empty");
    return remove_underground(cloud, SpatialIndex(dsm.points), params);
}

CleanResult remove_underground(const PointCloud& cloud, const SpatialIndex& dsm_index,
                               const CleaningParams& params) {
    if (dsm_index.size() == 0) throw Error("remove_underground: DSM is empty");
    if (!(params.cylinder_radius > 0.0)) throw Error("remove_underground: radius must be > 0");
    cloud.check_consistent();

    CleanResult res;
    res.kept.points.reserve(cloud.points.size());
    if (cloud.has_labels()) res.kept.labels.emplace();
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Point3& p = cloud.points[i];
        const double floor_z = dsm_index.min_z_in_cylinder(p.x, p.y, params.cylinder_radius);
        // An empty cylinder gives +inf: such points cannot be proven noise
        // and stay.
        if (std::isfinite(floor_z) && p.z < floor_z) {
            ++res.removed_count;
            continue;
        }
        res.kept.points.push_back(p);
        if (cloud.has_labels()) res.kept.labels->push_back((*cloud.labels)[i]);
    }
    return res;
}

Polygon2 compute_aoi(const CameraPoseSet& cameras, const AoiParams& params) {
    if (!(params.alpha > 0.0)) throw Error("compute_aoi: alpha must be > 0");
    std::vector<Vec2> projected;
    projected.reserve(cameras.positions.size());
    for (const auto& p : cameras.positions) projected.push_back({p[0], p[1]});
    const std::vector<Vec2> pts = dedupe_points(projected);
    if (pts.size() < 3) throw Error("compute_aoi: need at least 3 distinct camera positions");

    auto hull_polygon = [&]() {
        const std::vector<int> hull = convex_hull(pts);  // throws when collinear
        Polygon2 poly;
        poly.rings.emplace_back();
        for (int i : hull) poly.rings.back().push_back(pts[i]);
        return poly;
    };

    const std::vector<Triangle> tris = delaunay_triangulate(pts);
    if (tris.empty()) {
        // Collinear input; let convex_hull raise the canonical error.
        return hull_polygon();
    }
    const AlphaShapeResult shape = alpha_shape(pts, tris, params.alpha);

    bool usable = shape.simple && !shape.loops.empty();
    Polygon2 poly;
    if (usable) {
        for (const auto& loop : shape.loops) {
            poly.rings.emplace_back();
            for (int i : loop) poly.rings.back().push_back(pts[i]);
        }
        for (const Vec2& p : pts)
            if (!poly.contains(p.x, p.y)) {
                usable = false;  // isolated camera outside the alpha complex
                break;
            }
    }
    if (!usable) {
        if (!params.fallback_to_convex)
            throw Error("compute_aoi: alpha shape degenerate and convex fallback disabled");
        return hull_polygon();
    }
    return poly;
}

PointCloud crop_to_aoi(const PointCloud& cloud, const Polygon2& aoi) {
    if (aoi.rings.empty() || aoi.rings.front().size() < 3)
        throw Error("crop_to_aoi: invalid polygon");
    cloud.check_consistent();
    PointCloud out;
    if (cloud.has_labels()) out.labels.emplace();
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Point3& p = cloud.points[i];
        if (!aoi.contains(p.x, p.y)) continue;
        out.points.push_back(p);
        if (cloud.has_labels()) out.labels->push_back((*cloud.labels)[i]);
    }
    return out;
}

void write_cameras(const std::string& path, const CameraPoseSet& cameras) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : cameras.positions) arr.push_back({p[0], p[1], p[2]});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write cameras: " + path);
    out << arr.dump(2) << "\n";
}

CameraPoseSet read_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read cameras: " + path);
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const std::exception& e) {
        throw Error("bad camera file " + path + ": " + e.what());
    }
    if (!arr.is_array()) throw Error("bad camera file " + path + ": expected an array");
    CameraPoseSet cams;
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 3)
            throw Error("bad camera file " + path + ": entries must be [x, y, z]");
        cams.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    }
    return cams;
}

}  // namespace terraseg

#include "terraseg/types.hpp"

#include <cmath>

namespace terraseg {

const char* terrain_class_name(TerrainClass c) {
    switch (c) {
        case TerrainClass::Ground: return "Ground";
        case TerrainClass::ManMade: return "ManMade";
        case TerrainClass::Vegetation: return "Vegetation";
    }
    return "?";
}

const char* material_class_name(MaterialClass c) {
    switch (c) {
        case MaterialClass::BareSoil: return "BareSoil";
        case MaterialClass::Road: return "Road";
        case MaterialClass::Vegetation: return "Vegetation";
    }
    return "?";
}

void PointCloud::check_consistent() const {
    if (labels && labels->size() != points.size())
        throw Error("point cloud labels length " + std::to_string(labels->size()) +
                    " does not match point count " + std::to_string(points.size()));
}

void Raster::check_valid() const {
    if (width < 1 || height < 1) throw Error("raster dimensions must be >= 1");
    if (!(resolution > 0.0)) throw Error("raster resolution must be > 0");
    if (pixels.size() != std::size_t(width) * height * 3)
        throw Error("raster pixel buffer size mismatch");
}

void TriMesh::check_valid() const {
    const int n = int(vertices.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& face = faces[f];
        for (int k = 0; k < 3; ++k)
            if (face[k] < 0 || face[k] >= n)
                throw Error("face " + std::to_string(f) + " references vertex " +
                            std::to_string(face[k]) + " outside 0.." + std::to_string(n - 1));
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
            throw Error("face " + std::to_string(f) + " is degenerate (repeated vertex index)");
    }
}

namespace {

// Is (x,y) on the closed segment ab (within a tight tolerance)?
bool on_segment(double x, double y, const Vec2& a, const Vec2& b) {
    const double eps = 1e-12;
    const double cross = (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    if (cross * cross > eps * std::max(len2, 1.0)) return false;
    const double dot = (x - a.x) * (b.x - a.x) + (y - a.y) * (b.y - a.y);
    return dot >= -eps && dot <= len2 + eps;
}

}  // namespace

bool Polygon2::contains(double x, double y) const {
    bool inside = false;
    for (const auto& ring : rings) {
        const std::size_t n = ring.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = ring[i];
            const Vec2& b = ring[(i + 1) % n];
            if (on_segment(x, y, a, b)) return true;  // boundary counts inside
            // Even-odd ray cast toward +x, half-open in y to handle vertices.
            if ((a.y > y) != (b.y > y)) {
                const double xi = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
                if (x < xi) inside = !inside;
            }
        }
    }
    return inside;
}

double Polygon2::area() const {
    if (rings.empty()) return 0.0;
    const auto& ring = rings.front();
    double twice = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % ring.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) * 0.5;
}

}  // namespace terraseg

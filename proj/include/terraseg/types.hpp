#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace terraseg {

// All coordinates are meters in a projected local frame (x east, y north, z up).

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;
    std::uint8_t r = 128, g = 128, b = 128;
};

enum class TerrainClass : std::uint8_t {
    Ground = 0,
    ManMade = 1,
    Vegetation = 2,
};
inline constexpr int kTerrainClassCount = 3;
const char* terrain_class_name(TerrainClass c);

enum class MaterialClass : std::uint8_t {
    BareSoil = 0,
    Road = 1,
    Vegetation = 2,
};
inline constexpr int kMaterialClassCount = 3;
const char* material_class_name(MaterialClass c);

struct PointCloud {
    std::vector<Point3> points;
    // When present, must have the same length as points.
    std::optional<std::vector<TerrainClass>> labels;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_labels() const { return labels.has_value(); }
    void check_consistent() const;
};

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct CameraPoseSet {
    std::vector<std::array<double, 3>> positions;
};

// Row-major RGB image georeferenced in world meters. origin is the world
// min corner of pixel (0,0); row r, col c covers
// [origin_x + c*res, origin_x + (c+1)*res) x [origin_y + r*res, ...),
// so rows advance with +y and pixel centers sit at the half-pixel offset.
struct Raster {
    int width = 0;
    int height = 0;
    double resolution = 0.0;  // meters per pixel
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<std::uint8_t> pixels;  // 3 bytes per pixel, row-major

    std::uint8_t* at(int row, int col) { return pixels.data() + 3 * (std::size_t(row) * width + col); }
    const std::uint8_t* at(int row, int col) const {
        return pixels.data() + 3 * (std::size_t(row) * width + col);
    }
    void check_valid() const;
};

// Single-channel class-code image with the same georeferencing rules as Raster.
struct MaskRaster {
    int width = 0;
    int height = 0;
    double resolution = 0.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<std::uint8_t> codes;  // row-major

    std::uint8_t at(int row, int col) const { return codes[std::size_t(row) * width + col]; }
};

struct TriMesh {
    std::vector<Point3> vertices;
    std::vector<std::array<int, 3>> faces;

    void check_valid() const;  // indices in range, no degenerate face
};

// Closed 2D rings; ring[0] is the outer boundary. Vertices are stored without
// repeating the first vertex at the end.
struct Polygon2 {
    std::vector<std::vector<Vec2>> rings;

    const std::vector<Vec2>& outer() const { return rings.front(); }
    bool contains(double x, double y) const;  // even-odd, boundary counts inside
    double area() const;                      // outer ring area, positive
};

}  // namespace terraseg

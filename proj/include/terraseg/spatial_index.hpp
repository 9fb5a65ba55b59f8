#pragma once

#include <vector>

#include "terraseg/types.hpp"

namespace terraseg {

// Uniform XY-grid index over a fixed point set. Immutable after construction;
// concurrent read-only queries are safe. Results are index lists into the
// original point sequence, ascending.
class SpatialIndex {
public:
    explicit SpatialIndex(const std::vector<Point3>& points);

    std::size_t size() const { return points_.size(); }

    // All points with 3D distance <= radius from center.
    std::vector<std::size_t> query_radius(const Point3& center, double radius) const;

    // All points with 2D (XY) distance <= radius, any z.
    std::vector<std::size_t> query_cylinder(const Point3& center, double radius) const;

    // Minimum DSM-style z over the cylinder; +inf when the cylinder is empty.
    double min_z_in_cylinder(double x, double y, double radius) const;

    // Index of a closest point by 3D distance, ties by lowest index.
    // Throws on an empty index.
    std::size_t nearest(const Point3& query) const;

private:
    struct CellRange {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
    };

    int cell_of_x(double x) const;
    int cell_of_y(double y) const;
    const std::vector<std::size_t>& cell_points(int cx, int cy) const;

    std::vector<Point3> points_;
    double cell_ = 1.0;
    double min_x_ = 0.0, min_y_ = 0.0;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<std::size_t>> cells_;  // row-major (cy * nx + cx)
};

}  // namespace terraseg
